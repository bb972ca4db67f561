#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "maxops/detail/rng.hpp"
#include "maxops/io.hpp"

using namespace maxops;

namespace {

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("csv round-trip reproduces the field exactly") {
    detail::Rng rng(404);
    for (int dim : {1, 2}) {
        const Grid g = make_grid(dim, 9, 0.1, -0.45);
        const GridFunction f = detail::uniform_field(rng, g, -5.0, 5.0);
        const auto path = temp_file(dim == 1 ? "maxops_io_1d.csv" : "maxops_io_2d.csv");
        write_grid_function_csv(path.string(), f);
        const GridFunction back = read_grid_function_csv(path.string());
        REQUIRE(back.grid == f.grid);
        REQUIRE(back.values == f.values);
        std::filesystem::remove(path);
    }
}

TEST_CASE("csv writer is atomic against rewrite") {
    const Grid g = make_grid(1, 4, 1.0, 0.0);
    const auto path = temp_file("maxops_io_atomic.csv");
    write_grid_function_csv(path.string(), make_grid_function(g, {1, 2, 3, 4}));
    write_grid_function_csv(path.string(), make_grid_function(g, {5, 6, 7, 8}));
    const GridFunction back = read_grid_function_csv(path.string());
    REQUIRE(back.values == std::vector<double>{5, 6, 7, 8});
    REQUIRE(!std::filesystem::exists(path.string() + ".tmp"));
    std::filesystem::remove(path);
}

TEST_CASE("csv loader rejects malformed input") {
    auto load = [](const std::string& text) {
        std::istringstream in(text);
        return grid_function_from_csv(in, "test");
    };
    REQUIRE_THROWS_AS(load("1,4,1,0\n1\n2\n3\n4\n"), std::runtime_error);       // no header marker
    REQUIRE_THROWS_AS(load("# 1,4,1\n1\n2\n3\n4\n"), std::runtime_error);        // short header
    REQUIRE_THROWS_AS(load("# 1,4,1,0\n1\n2\n3\n"), std::runtime_error);         // missing value
    REQUIRE_THROWS_AS(load("# 1,4,1,0\n1\n2\n3\n4\n5\n"), std::runtime_error);   // extra value
    REQUIRE_THROWS_AS(load("# 1,4,1,0\n1\nx\n3\n4\n"), std::runtime_error);      // non-numeric
    REQUIRE_THROWS_AS(load("# 2,2,1,0\n1,2\n3\n"), std::runtime_error);          // ragged 2D row
    REQUIRE_THROWS_AS(load("# 3,4,1,0\n"), std::invalid_argument);               // bad dim
    REQUIRE(load("# 2,2,0.5,-0.5\n1,2\n3,4\n").at(1, 0) == 3.0);
}
