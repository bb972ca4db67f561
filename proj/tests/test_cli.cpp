#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "maxops/detail/rng.hpp"
#include "maxops/io.hpp"
#include "maxops/operators.hpp"
#include "maxops/verify.hpp"

using namespace maxops;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

const fs::path& scratch() {
    static const fs::path dir = [] {
        std::string tmpl = (fs::temp_directory_path() / "maxops_cli_XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        return fs::path(tmpl);
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args) {
    const fs::path out = scratch() / "stdout.txt";
    const fs::path err = scratch() / "stderr.txt";
    const std::string cmd = std::string(MAXOPS_CLI_PATH) + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string stage(const char* name, const GridFunction& f) {
    const fs::path p = scratch() / name;
    write_grid_function_csv(p.string(), f);
    return p.string();
}

std::string stage_text(const char* name, const std::string& text) {
    const fs::path p = scratch() / name;
    atomic_write_text(p.string(), text);
    return p.string();
}

GridFunction indicator_16() {
    const Grid g = make_grid(1, 16, 0.125, -1.0);
    std::vector<double> v(16, 0.0);
    for (int i = 4; i < 8; ++i) v[static_cast<std::size_t>(i)] = 1.0;
    return make_grid_function(g, std::move(v));
}

struct SweepRow {
    int extent = 0;
    std::string check;
    double value = 0.0;
    std::string drift;
};

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "extent,check,value,drift");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto parts = split_csv_line(line);
        REQUIRE(parts.size() == 4);
        rows.push_back({int(parse_double(parts[0], "extent")), parts[1],
                        parse_double(parts[2], "value"), parts[3]});
    }
    return rows;
}

} // namespace

TEST_CASE("cli field output round-trips and matches the library") {
    const GridFunction f = indicator_16();
    const std::string f_path = stage("cli_f16.csv", f);
    const fs::path out = scratch() / "cli_Mf.csv";

    const auto r = run_cli("field --op M --f " + f_path + " --out " + out.string());
    REQUIRE(r.code == 0);

    const std::string text = slurp(out);
    const GridFunction back = read_grid_function_csv(out.string());
    REQUIRE(grid_function_to_csv(back) == text);

    const OperatorOutput direct = hl_maximal(f, enumerate_cubes(f.grid, CubePolicy::all));
    REQUIRE(back.grid == direct.field.grid);
    REQUIRE(back.values == direct.field.values);
}

TEST_CASE("cli field witness names the attaining cube") {
    const std::string f_path = stage("cli_f16.csv", indicator_16());
    const fs::path wit = scratch() / "cli_witness.json";
    const auto r = run_cli("field --op M --f " + f_path + " --witness " + wit.string() +
                           " --out /dev/null");
    REQUIRE(r.code == 0);
    const json j = json::parse(slurp(wit));
    REQUIRE(j["value"].get<double>() == 1.0);
    const int low = j["cube_low"][0].get<int>();
    const int side = j["cube_side"].get<int>();
    const int point = j["point"][0].get<int>();
    REQUIRE(low <= point);
    REQUIRE(point < low + side);
}

TEST_CASE("cli field validates flags before touching any file") {
    const std::string ghost = (scratch() / "does_not_exist.csv").string();

    auto r = run_cli("field --op bogus --f " + ghost);
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("unknown operator") != std::string::npos);

    r = run_cli("field --op fractional --r 0.5 --f " + ghost + " --mu " + ghost);
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("requires r >= 1") != std::string::npos);

    r = run_cli("field --op M_b --f " + ghost);
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("requires --b") != std::string::npos);
}

TEST_CASE("cli field rejects mismatched grids") {
    const std::string f_path = stage("cli_f16.csv", indicator_16());
    const std::string b_path =
        stage("cli_b32.csv", constant_function(make_grid(1, 32, 0.0625, -1.0), 1.0));
    const auto r = run_cli("field --op commutator_M --b " + b_path + " --f " + f_path);
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("grids do not match") != std::string::npos);
}

TEST_CASE("cli norm reports value and witness as json") {
    const std::string f_path = stage("cli_f16.csv", indicator_16());
    const std::string mu_path =
        stage("cli_mu16.csv", constant_function(make_grid(1, 16, 0.125, -1.0), 1.0));

    auto r = run_cli("norm --functional morrey --f " + f_path + " --mu " + mu_path);
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    REQUIRE(j["functional"] == "morrey");
    REQUIRE(j["params"]["p"].get<double>() == 1.5);
    REQUIRE(j["value"].get<double>() > 0.0);
    REQUIRE(j["witness"].contains("cube_low"));

    r = run_cli("norm --functional bogus --f " + f_path + " --mu " + mu_path);
    REQUIRE(r.code == 2);

    // The envelope constant divides by the symbol's seminorm, so a constant
    // symbol fails the check rather than the usage contract.
    const std::string const_path =
        stage("cli_const16.csv", constant_function(make_grid(1, 16, 0.125, -1.0), 0.5));
    r = run_cli("norm --functional envelope --b " + const_path + " --mu " + mu_path);
    REQUIRE(r.code == 1);
}

TEST_CASE("cli apcheck reports the unit constant for a flat weight") {
    const std::string mu_path =
        stage("cli_mu16.csv", constant_function(make_grid(1, 16, 0.125, -1.0), 2.0));
    auto r = run_cli("apcheck --mu " + mu_path);
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    REQUIRE(j["p"].get<double>() == 1.0);
    REQUIRE(j["constant"].get<double>() == 1.0);

    r = run_cli("apcheck --mu " + mu_path + " --p 2");
    REQUIRE(json::parse(r.out)["constant"].get<double>() == 1.0);

    r = run_cli("apcheck --mu " + mu_path + " --p 0.5");
    REQUIRE(r.code == 2);
}

TEST_CASE("cli verify repeats byte for byte and honors the seed flag") {
    const std::string config = stage_text("cli_suite.json", json{{"dim", 1},
                                                                 {"extents", {8, 16}},
                                                                 {"seed", 3}}
                                                                .dump());
    const fs::path a = scratch() / "cli_rep_a.json";
    const fs::path b = scratch() / "cli_rep_b.json";

    REQUIRE(run_cli("verify --config " + config + " --out " + a.string()).code == 0);
    REQUIRE(run_cli("verify --config " + config + " --out " + b.string()).code == 0);
    REQUIRE(slurp(a) == slurp(b));

    // The seed flag overrides the file value, so seed 5 via flag matches a
    // config that says seed 5 outright.
    const std::string config5 = stage_text("cli_suite5.json", json{{"dim", 1},
                                                                   {"extents", {8, 16}},
                                                                   {"seed", 5}}
                                                                  .dump());
    const fs::path c = scratch() / "cli_rep_c.json";
    const fs::path d = scratch() / "cli_rep_d.json";
    REQUIRE(run_cli("verify --config " + config + " --seed 5 --out " + c.string()).code == 0);
    REQUIRE(run_cli("verify --config " + config5 + " --out " + d.string()).code == 0);
    REQUIRE(slurp(c) == slurp(d));
    REQUIRE(slurp(a) != slurp(c));
}

TEST_CASE("cli verify rejects bad configs with the violated constraint") {
    const std::string bad =
        stage_text("cli_bad_suite.json", json{{"dim", 1}, {"kappa", 0.9}}.dump());
    auto r = run_cli("verify --config " + bad);
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("kappa") != std::string::npos);

    r = run_cli("verify --config " + (scratch() / "missing.json").string());
    REQUIRE(r.code == 2);

    r = run_cli("verify");
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("--default or --config") != std::string::npos);
}

TEST_CASE("cli verify exits 1 when a required check fails") {
    // A step symbol marked stable fails its refinement checks.
    const json cfg{{"dim", 1},
                   {"extents", {8, 16}},
                   {"symbols", json::array({json{{"kind", "step"}, {"expect", "stable"}}})}};
    const std::string path = stage_text("cli_fail_suite.json", cfg.dump());
    const fs::path out = scratch() / "cli_fail_report.json";
    const auto r = run_cli("verify --config " + path + " --out " + out.string());
    REQUIRE(r.code == 1);
    const json reports = json::parse(slurp(out));
    bool saw_fail = false;
    for (const auto& rep : reports) saw_fail |= rep["status"] == "fail";
    REQUIRE(saw_fail);
}

TEST_CASE("cli sweep tracks blow-up and stability across refinement") {
    auto r = run_cli("sweep --extents 16,32,64 --functional char_M,char_sharp "
                     "--symbol constant:-1");
    REQUIRE(r.code == 0);
    const auto rows = parse_sweep_csv(r.out);
    REQUIRE(rows.size() == 6);
    double prev_m = 0.0, prev_s = 0.0;
    for (const auto& row : rows) {
        if (row.check == "char_M") {
            REQUIRE(row.value > prev_m);
            prev_m = row.value;
        } else {
            REQUIRE(row.check == "char_sharp");
            REQUIRE(row.value > prev_s);
            prev_s = row.value;
        }
    }
    REQUIRE(rows[0].drift.empty());
    REQUIRE(!rows[2].drift.empty());

    r = run_cli("sweep --extents 16,32,64 --functional lipschitz --symbol adapted "
                "--weight power:-0.5");
    REQUIRE(r.code == 0);
    for (const auto& row : parse_sweep_csv(r.out))
        if (!row.drift.empty()) REQUIRE(parse_double(row.drift, "drift") <= 0.25);
}

TEST_CASE("cli sweep rejects unusable extent lists") {
    REQUIRE(run_cli("sweep --functional char_M").code == 2);
    REQUIRE(run_cli("sweep --extents 16 --functional char_M").code == 2);
    REQUIRE(run_cli("sweep --extents 16,16 --functional char_M").code == 2);
    REQUIRE(run_cli("sweep --extents 16,32 --functional bogus").code == 2);
    REQUIRE(run_cli("sweep --extents 16,32 --functional char_M --symbol bogus").code == 2);
    REQUIRE(run_cli("sweep --extents 16,32 --functional char_M --weight bogus").code == 2);
}

TEST_CASE("cli config files supply defaults that explicit flags override") {
    const std::string f_path = stage("cli_f16.csv", indicator_16());
    const std::string cfg =
        stage_text("cli_field_cfg.json", json{{"op", "M"}, {"f", f_path}}.dump());
    const fs::path from_cfg = scratch() / "cli_cfg_out.csv";
    const fs::path direct = scratch() / "cli_direct_out.csv";

    REQUIRE(run_cli("field --config " + cfg + " --out " + from_cfg.string()).code == 0);
    REQUIRE(run_cli("field --op M --f " + f_path + " --out " + direct.string()).code == 0);
    REQUIRE(slurp(from_cfg) == slurp(direct));

    const fs::path overridden = scratch() / "cli_override_out.csv";
    const fs::path sharp_direct = scratch() / "cli_sharp_out.csv";
    REQUIRE(run_cli("field --config " + cfg + " --op sharp --out " + overridden.string()).code ==
            0);
    REQUIRE(run_cli("field --op sharp --f " + f_path + " --out " + sharp_direct.string()).code ==
            0);
    REQUIRE(slurp(overridden) == slurp(sharp_direct));

    const std::string bad_key = stage_text("cli_bad_key.json", json{{"oops", 1}}.dump());
    const auto r = run_cli("field --config " + bad_key);
    REQUIRE(r.code == 2);
    REQUIRE(r.err.find("unknown key") != std::string::npos);

    REQUIRE(run_cli("field --config " + (scratch() / "missing_cfg.json").string()).code == 2);
}

TEST_CASE("cli usage errors exit 2") {
    REQUIRE(run_cli("").code == 2);
    REQUIRE(run_cli("frobnicate").code == 2);
    REQUIRE(run_cli("field --op M --op sharp --f x.csv").code == 2);
    REQUIRE(run_cli("--help").code == 0);
}
