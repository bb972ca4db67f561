#include <catch2/catch_amalgamated.hpp>

#include "maxops/detail/rng.hpp"
#include "maxops/grid.hpp"

using namespace maxops;

namespace {

// Independent oracle: count cells of q1 that also lie in q2 by direct loop.
std::int64_t overlap_cells_oracle(const Grid& g, const Cube& q1, const Cube& q2) {
    std::int64_t n = 0;
    for (int i0 = q1.low[0]; i0 < q1.low[0] + q1.side; ++i0) {
        if (g.dim == 1) {
            n += q2.contains(i0) ? 1 : 0;
        } else {
            for (int i1 = q1.low[1]; i1 < q1.low[1] + q1.side; ++i1)
                n += q2.contains(i0, i1) ? 1 : 0;
        }
    }
    return n;
}

} // namespace

TEST_CASE("grid validation") {
    REQUIRE_THROWS_AS(make_grid(3, 4, 1.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_grid(1, 1, 1.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_grid(1, 4, 0.0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_grid(1, 4, -0.5, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_grid(2, 4, 1.0, std::nan("")), std::invalid_argument);

    const Grid g = make_grid(2, 8, 0.25, -1.0);
    REQUIRE(g.cell_count() == 64);
    REQUIRE_THROWS_AS(make_cube(g, 7, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(make_cube(g, -1, 0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(make_cube(g, 0, 0, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_grid_function(g, std::vector<double>(63, 0.0)), std::invalid_argument);
    auto bad = std::vector<double>(64, 0.0);
    bad[5] = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(make_grid_function(g, bad), std::invalid_argument);
}

TEST_CASE("cell centers avoid the origin of a symmetric domain") {
    const Grid g = make_grid(1, 8, 0.25, -1.0);
    for (int i = 0; i < g.extent; ++i) REQUIRE(g.center(i) != 0.0);
    REQUIRE(g.center(0) == -0.875);
    REQUIRE(g.center(7) == 0.875);
}

TEST_CASE("cube enumeration counts") {
    // Hand counts: frozen expected values.
    REQUIRE(enumerate_cubes(make_grid(1, 3, 1.0, 0.0), CubePolicy::all).cubes.size() == 6);
    REQUIRE(enumerate_cubes(make_grid(1, 4, 1.0, 0.0), CubePolicy::dyadic).cubes.size() == 7);
    REQUIRE(enumerate_cubes(make_grid(2, 2, 1.0, 0.0), CubePolicy::all).cubes.size() == 5);

    for (int e : {2, 5, 16, 33, 64}) {
        const auto fam = enumerate_cubes(make_grid(1, e, 1.0, 0.0), CubePolicy::all);
        REQUIRE(std::int64_t(fam.cubes.size()) == std::int64_t(e) * (e + 1) / 2);
    }
}

TEST_CASE("cube enumeration order and ordinal") {
    for (int dim : {1, 2}) {
        const Grid g = make_grid(dim, 9, 0.5, 0.0);
        for (auto policy : {CubePolicy::all, CubePolicy::dyadic}) {
            const auto fam = enumerate_cubes(g, policy);
            for (std::size_t i = 0; i + 1 < fam.cubes.size(); ++i) {
                const Cube &a = fam.cubes[i], &b = fam.cubes[i + 1];
                const bool ordered =
                    a.side < b.side ||
                    (a.side == b.side &&
                     (a.low[0] < b.low[0] || (a.low[0] == b.low[0] && a.low[1] < b.low[1])));
                REQUIRE(ordered);
            }
            for (std::size_t i = 0; i < fam.cubes.size(); ++i)
                REQUIRE(cube_ordinal(g, policy, fam.cubes[i]) == std::int64_t(i));
        }
    }
}

TEST_CASE("dyadic family is a subset of the all family") {
    for (int dim : {1, 2}) {
        const Grid g = make_grid(dim, 12, 1.0, 0.0);
        const auto all = enumerate_cubes(g, CubePolicy::all);
        const auto dy = enumerate_cubes(g, CubePolicy::dyadic);
        for (const Cube& q : dy.cubes)
            REQUIRE(std::find(all.cubes.begin(), all.cubes.end(), q) != all.cubes.end());
        REQUIRE(dy.cubes.size() < all.cubes.size());
    }
}

TEST_CASE("prefix-table integral equals naive loop bit for bit on lattice data") {
    detail::Rng rng(2026);
    for (int dim : {1, 2}) {
        for (int e : {2, 5, 8, 16, 33, 64}) {
            const Grid g = make_grid(dim, e, 1.0, 0.0);
            const GridFunction f = detail::lattice_field(rng, g, -2.0, 2.0);
            const PrefixTable pre(f);
            const auto fam = enumerate_cubes(g, CubePolicy::all);
            for (const Cube& q : fam.cubes) {
                REQUIRE(pre.cell_sum(q) == cell_sum(f, q));
                REQUIRE(pre.integral(q) == integral(f, q));
                REQUIRE(pre.average(q) == average(f, q));
            }
        }
    }
}

TEST_CASE("integral additivity over a split cube") {
    detail::Rng rng(77);

    // 1D: an interval splits into two intervals.
    {
        const Grid g = make_grid(1, 64, 0.125, -4.0);
        const GridFunction f = detail::uniform_field(rng, g, -3.0, 3.0);
        for (int trial = 0; trial < 50; ++trial) {
            const int s = rng.range(2, g.extent);
            const int lo = rng.range(0, g.extent - s);
            const int k = rng.range(1, s - 1);
            const double whole = integral(f, make_cube(g, lo, s));
            const double parts = integral(f, make_cube(g, lo, k)) + integral(f, make_cube(g, lo + k, s - k));
            REQUIRE_THAT(parts, Catch::Matchers::WithinRel(whole, 1e-12));
        }
    }

    // 2D: a cube of even side splits into four disjoint quadrant cubes.
    {
        const Grid g = make_grid(2, 32, 0.25, 0.0);
        const GridFunction f = detail::uniform_field(rng, g, -3.0, 3.0);
        for (int trial = 0; trial < 50; ++trial) {
            const int h = rng.range(1, g.extent / 2);
            const int s = 2 * h;
            const int l0 = rng.range(0, g.extent - s);
            const int l1 = rng.range(0, g.extent - s);
            const double whole = integral(f, make_cube(g, l0, l1, s));
            const double parts = integral(f, make_cube(g, l0, l1, h)) +
                                 integral(f, make_cube(g, l0 + h, l1, h)) +
                                 integral(f, make_cube(g, l0, l1 + h, h)) +
                                 integral(f, make_cube(g, l0 + h, l1 + h, h));
            REQUIRE_THAT(parts, Catch::Matchers::WithinRel(whole, 1e-12));
        }
    }
}

TEST_CASE("indicator averages equal the overlapping volume fraction") {
    detail::Rng rng(31);
    for (int dim : {1, 2}) {
        const Grid g = make_grid(dim, 16, 0.5, -4.0);
        for (int trial = 0; trial < 100; ++trial) {
            const Cube q = detail::random_cube(rng, g);
            const Cube probe = detail::random_cube(rng, g);
            const GridFunction chi = indicator(g, q);
            const std::int64_t overlap = overlap_cells_oracle(g, probe, q);
            const double expected =
                (double(overlap) * cell_volume(g)) / cube_volume(g, probe);
            REQUIRE(average(chi, probe) == expected);

            const auto isect = intersect(g, probe, q);
            REQUIRE((isect ? isect->cell_count(g.dim) : 0) == overlap);
        }
    }
}

TEST_CASE("cube volume matches the closed form") {
    const Grid g1 = make_grid(1, 10, 0.25, 0.0);
    REQUIRE(cube_volume(g1, make_cube(g1, 2, 3)) == 0.75);
    const Grid g2 = make_grid(2, 10, 0.25, 0.0);
    REQUIRE(cube_volume(g2, make_cube(g2, 2, 4, 3)) == 0.5625);
}
