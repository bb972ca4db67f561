// maxops: batch front-end for the grid maximal-operator toolkit.
// Subcommands: field, norm, apcheck, verify, sweep.
// Exit codes: 0 success, 1 check failure, 2 usage or validation error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maxops/functionals.hpp"
#include "maxops/grid.hpp"
#include "maxops/io.hpp"
#include "maxops/operators.hpp"
#include "maxops/verify.hpp"
#include "maxops/weights.hpp"

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        maxops::atomic_write_text(out_path, content);
}

maxops::CubePolicy parse_policy(const std::string& s) {
    if (s == "all") return maxops::CubePolicy::all;
    if (s == "dyadic") return maxops::CubePolicy::dyadic;
    throw UsageError("family must be 'all' or 'dyadic'");
}

maxops::GridFunction load_field(const std::string& path, const char* what) {
    if (path.empty()) throw UsageError(std::string(what) + ": file path required");
    return maxops::read_grid_function_csv(path);
}

maxops::Weight load_weight(const std::string& path, const char* what) {
    return maxops::make_weight(load_field(path, what));
}

json cube_json(const maxops::Cube& q) {
    return json{{"cube_low", {q.low[0], q.low[1]}}, {"cube_side", q.side}};
}

json witness_json(const maxops::Grid& g, const maxops::Cube& q, int cell, double value) {
    json j = cube_json(q);
    const auto c = g.cell_coords(cell);
    j["point"] = {c[0], c[1]};
    j["value"] = value;
    return j;
}

/// Peak |field| cell, first in cell order.
int peak_cell(const maxops::GridFunction& f) {
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < f.grid.cell_count(); ++i) {
        const double v = std::fabs(f.values[static_cast<std::size_t>(i)]);
        if (v > best) {
            best = v;
            arg = i;
        }
    }
    return arg;
}

maxops::Cube parse_cube_spec(const std::string& spec, int dim) {
    const auto parts = maxops::split_csv_line(spec);
    const std::size_t expect = dim == 1 ? 2 : 3;
    if (parts.size() != expect)
        throw UsageError("cube must be 'low0,side' (1D) or 'low0,low1,side' (2D)");
    maxops::Cube q{{0, 0}, 0};
    q.low[0] = int(maxops::parse_double(parts[0], "cube"));
    if (dim == 2) q.low[1] = int(maxops::parse_double(parts[1], "cube"));
    q.side = int(maxops::parse_double(parts.back(), "cube"));
    return q;
}

maxops::WeightSpec parse_weight_arg(const std::string& s) {
    const auto colon = s.find(':');
    maxops::WeightSpec spec;
    spec.kind = s.substr(0, colon);
    if (spec.kind == "constant") {
        if (colon != std::string::npos)
            spec.value = maxops::parse_double(s.substr(colon + 1), "weight");
    } else if (spec.kind == "power") {
        if (colon != std::string::npos)
            spec.alpha = maxops::parse_double(s.substr(colon + 1), "weight");
    } else if (spec.kind != "lattice") {
        throw UsageError("weight must be constant[:v], power[:alpha], or lattice");
    }
    return spec;
}

maxops::SymbolSpec parse_symbol_arg(const std::string& s) {
    const auto colon = s.find(':');
    maxops::SymbolSpec spec;
    spec.kind = s.substr(0, colon);
    if (spec.kind == "constant") {
        if (colon != std::string::npos)
            spec.value = maxops::parse_double(s.substr(colon + 1), "symbol");
    } else if (spec.kind != "ramp" && spec.kind != "power" && spec.kind != "adapted" &&
               spec.kind != "step") {
        throw UsageError("symbol must be constant[:v], ramp, power, adapted, or step");
    }
    return spec;
}

// ---------------------------------------------------------------------------
// field
// ---------------------------------------------------------------------------

struct FieldArgs {
    std::string op, f_path, b_path, mu_path, cube_spec, out, witness_out;
    std::string family = "all";
    double beta = 0.5;
    double r = 1.25;
};

int cmd_field(const FieldArgs& a) {
    using namespace maxops;
    const bool needs_b =
        a.op == "M_b" || a.op == "commutator_M" || a.op == "commutator_sharp";
    const bool known = a.op == "M" || a.op == "local" || a.op == "sharp" || needs_b ||
                       a.op == "fractional";
    // Flag validation happens before any file is touched.
    if (!known) throw UsageError("unknown operator '" + a.op + "'");
    if (a.op == "fractional" && !(a.r >= 1.0 && std::isfinite(a.r)))
        throw UsageError("fractional operator requires r >= 1");
    if (needs_b && a.b_path.empty()) throw UsageError(a.op + " requires --b");
    if (a.op == "fractional" && a.mu_path.empty()) throw UsageError("fractional requires --mu");
    if (a.op == "local" && a.cube_spec.empty()) throw UsageError("local requires --cube");
    const CubePolicy policy = parse_policy(a.family);

    const GridFunction f = load_field(a.f_path, "field --f");
    const CubeFamily fam = enumerate_cubes(f.grid, policy);
    OperatorOutput out;
    if (a.op == "M") {
        out = hl_maximal(f, fam);
    } else if (a.op == "local") {
        out = local_maximal(f, parse_cube_spec(a.cube_spec, f.grid.dim), fam);
    } else if (a.op == "sharp") {
        out = sharp_maximal(f, fam);
    } else if (a.op == "fractional") {
        out = fractional_maximal(f, load_weight(a.mu_path, "field --mu"), a.beta, a.r, fam);
    } else {
        const GridFunction b = load_field(a.b_path, "field --b");
        if (a.op == "M_b")
            out = maximal_commutator(b, f, fam);
        else if (a.op == "commutator_M")
            out = commutator_M(b, f, fam);
        else
            out = commutator_sharp(b, f, fam);
    }
    emit(a.out, grid_function_to_csv(out.field));
    if (!a.witness_out.empty()) {
        const int cell = peak_cell(out.field);
        // Sup-form operators report the cube attaining the peak cell. The
        // composed commutators have no attaining cube, so the peak cell
        // stands in as a side-1 cube.
        Cube q{{0, 0}, 1};
        const std::size_t ci = static_cast<std::size_t>(cell);
        if (!out.argmax_cube.empty() && out.argmax_cube[ci] >= 0) {
            q = fam.cubes[static_cast<std::size_t>(out.argmax_cube[ci])];
        } else {
            const auto c = out.field.grid.cell_coords(cell);
            q.low = {c[0], c[1]};
        }
        maxops::atomic_write_text(
            a.witness_out,
            witness_json(out.field.grid, q, cell, out.field.values[ci]).dump(2) + "\n");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// norm
// ---------------------------------------------------------------------------

struct NormArgs {
    std::string functional, f_path, b_path, mu_path, u_path, out;
    std::string family = "all";
    double p = 1.5;
    double kappa = 0.125;
    double beta = 0.5;
    double r = 1.25;
    double s = 1.0;
};

int cmd_norm(const NormArgs& a) {
    using namespace maxops;
    const bool field_based = a.functional == "lebesgue" || a.functional == "morrey";
    const bool symbol_based = a.functional == "lipschitz" || a.functional == "lip1" ||
                              a.functional == "char_M" || a.functional == "char_sharp" ||
                              a.functional == "envelope";
    if (!field_based && !symbol_based)
        throw UsageError("unknown functional '" + a.functional + "'");
    const CubePolicy policy = parse_policy(a.family);
    if (a.mu_path.empty()) throw UsageError("norm requires --mu");

    const Weight mu = load_weight(a.mu_path, "norm --mu");
    const GridFunction input = field_based ? load_field(a.f_path, "norm --f")
                                           : load_field(a.b_path, "norm --b");
    const CubeFamily fam = enumerate_cubes(input.grid, policy);

    json params;
    double value = 0.0;
    json witness;
    if (a.functional == "lebesgue") {
        params = {{"p", a.p}};
        const NormValue nv = lebesgue_norm(input, mu, a.p);
        value = nv.value;
        witness = cube_json(nv.witness);
    } else if (a.functional == "morrey") {
        params = {{"p", a.p}, {"kappa", a.kappa}};
        const NormValue nv =
            a.u_path.empty()
                ? morrey_norm(input, mu, a.p, a.kappa, fam)
                : morrey_norm(input, load_weight(a.u_path, "norm --u"), mu, a.p, a.kappa, fam);
        value = nv.value;
        witness = cube_json(nv.witness);
    } else if (a.functional == "lipschitz") {
        params = {{"beta", a.beta}, {"p", a.p}};
        const NormValue nv = lipschitz_norm(input, mu, a.beta, a.p, fam);
        value = nv.value;
        witness = cube_json(nv.witness);
    } else if (a.functional == "lip1") {
        params = {{"beta", a.beta}};
        const NormValue nv = lip1_proof_functional(input, mu, a.beta, fam);
        value = nv.value;
        witness = cube_json(nv.witness);
    } else if (a.functional == "char_M" || a.functional == "char_sharp") {
        const ExponentConfig cfg =
            ExponentConfig::make(input.grid.dim, a.beta, a.p, a.kappa, a.r);
        params = {{"beta", a.beta}, {"p", a.p}, {"kappa", a.kappa}, {"r", a.r}, {"s", a.s}};
        const NormValue nv = a.functional == "char_M"
                                 ? char_functional_M(input, mu, cfg, a.s, fam)
                                 : char_functional_sharp(input, mu, cfg, a.s, fam);
        value = nv.value;
        witness = cube_json(nv.witness);
    } else {
        params = {{"beta", a.beta}};
        const auto env = oscillation_envelope_constant(input, mu, a.beta, fam);
        if (!env) {
            std::cerr << "norm: envelope constant is undefined for a constant symbol\n";
            return 1;
        }
        value = env->constant;
        witness = cube_json(env->cube);
        const auto c = input.grid.cell_coords(env->cell);
        witness["point"] = {c[0], c[1]};
    }
    const json doc{{"functional", a.functional}, {"params", params}, {"value", value},
                   {"witness", witness}};
    emit(a.out, doc.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// apcheck
// ---------------------------------------------------------------------------

struct ApArgs {
    std::string mu_path, out;
    std::string family = "all";
    double p = 1.0;
};

int cmd_apcheck(const ApArgs& a) {
    using namespace maxops;
    if (!(a.p >= 1.0) || !std::isfinite(a.p)) throw UsageError("apcheck requires finite p >= 1");
    const CubePolicy policy = parse_policy(a.family);
    const Weight w = load_weight(a.mu_path, "apcheck --mu");
    const CubeFamily fam = enumerate_cubes(w.grid(), policy);
    const ApReport rep = a.p == 1.0 ? a1_constant(w, fam) : ap_constant(w, a.p, fam);
    const json doc{{"p", rep.p}, {"constant", rep.constant}, {"witness", cube_json(rep.witness)}};
    emit(a.out, doc.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyArgs {
    bool use_default = false;
    std::string config_path, out;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

int cmd_verify(const VerifyArgs& a) {
    using namespace maxops;
    if (a.use_default == !a.config_path.empty())
        throw UsageError("verify needs exactly one of --default or --config");
    std::vector<TestSuiteConfig> configs;
    if (a.use_default) {
        configs = {default_suite_config(1), default_suite_config(2)};
    } else {
        std::ifstream in(a.config_path, std::ios::binary);
        if (!in) throw UsageError("cannot open config: " + a.config_path);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw UsageError("config is not valid JSON: " + std::string(e.what()));
        }
        configs.push_back(suite_config_from_json(j));
    }
    if (a.seed_given)
        for (TestSuiteConfig& c : configs) c.seed = a.seed;
    std::vector<VerifyReport> reports;
    for (const TestSuiteConfig& c : configs) {
        const auto part = run_suite(c);
        reports.insert(reports.end(), part.begin(), part.end());
    }
    emit(a.out, reports_to_json_text(reports));
    return all_required_pass(reports) ? 0 : 1;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
    int dim = 1;
    std::vector<int> extents;
    std::vector<std::string> functionals;
    std::string symbol = "adapted";
    std::string weight = "power:0";
    std::string out;
    std::string family = "all";
    double beta = 0.5;
    double p = 1.5;
    double kappa = 0.125;
    double r = 1.25;
    double s = 1.0;
    std::uint64_t seed = 0;
};

int cmd_sweep(const SweepArgs& a) {
    using namespace maxops;
    if (a.extents.size() < 2) throw UsageError("sweep requires at least 2 extents");
    for (std::size_t i = 1; i < a.extents.size(); ++i)
        if (a.extents[i] <= a.extents[i - 1])
            throw UsageError("sweep extents must be strictly increasing");
    if (a.functionals.empty()) throw UsageError("sweep requires --functional");
    bool needs_exponents = false;
    for (const std::string& fn : a.functionals) {
        if (fn == "char_M" || fn == "char_sharp")
            needs_exponents = true;
        else if (fn != "lipschitz" && fn != "lip1" && fn != "envelope" && fn != "a1")
            throw UsageError("unknown functional '" + fn + "'");
    }
    const CubePolicy policy = parse_policy(a.family);
    const WeightSpec wspec = parse_weight_arg(a.weight);
    const SymbolSpec sspec = parse_symbol_arg(a.symbol);
    // The char functionals carry the full exponent contract; the other
    // functionals validate their own parameters, so the config is built only
    // when a char functional is requested.
    std::optional<ExponentConfig> cfg;
    if (needs_exponents) cfg = ExponentConfig::make(a.dim, a.beta, a.p, a.kappa, a.r);

    const auto grid_of = [&](int extent) {
        return make_grid(a.dim, extent, 2.0 / extent, -1.0);
    };
    const Grid base = grid_of(a.extents.front());

    std::ostringstream csv;
    csv << "extent,check,value,drift\n";
    std::vector<double> prev(a.functionals.size());
    for (std::size_t e = 0; e < a.extents.size(); ++e) {
        const Grid g = grid_of(a.extents[e]);
        const CubeFamily fam = enumerate_cubes(g, policy);
        const Weight mu = build_weight(wspec, g, base, a.seed, 0);
        const GridFunction b = build_symbol(sspec, g, mu, a.beta);
        for (std::size_t k = 0; k < a.functionals.size(); ++k) {
            const std::string& fn = a.functionals[k];
            double value = 0.0;
            if (fn == "char_M") {
                value = char_functional_M(b, mu, *cfg, a.s, fam).value;
            } else if (fn == "char_sharp") {
                value = char_functional_sharp(b, mu, *cfg, a.s, fam).value;
            } else if (fn == "lipschitz") {
                value = lipschitz_norm(b, mu, a.beta, a.p, fam).value;
            } else if (fn == "lip1") {
                value = lip1_proof_functional(b, mu, a.beta, fam).value;
            } else if (fn == "envelope") {
                const auto env = oscillation_envelope_constant(b, mu, a.beta, fam);
                if (!env) {
                    std::cerr << "sweep: envelope constant is undefined for a constant symbol\n";
                    return 1;
                }
                value = env->constant;
            } else {
                value = a1_constant(mu, fam).constant;
            }
            csv << a.extents[e] << ',' << fn << ',' << format_double(value) << ',';
            if (e > 0) csv << format_double(maxops::detail::drift_between(prev[k], value));
            csv << '\n';
            prev[k] = value;
        }
    }
    emit(a.out, csv.str());
    return 0;
}

// ---------------------------------------------------------------------------
// flag-defaults config
// ---------------------------------------------------------------------------

/// Map from config key to a setter on the argument struct. For every
/// subcommand except verify, --config names a flat JSON object of default
/// flag values; explicit command-line flags override it.
using Applier = std::map<std::string, std::function<void(const json&)>>;

std::string jstr(const json& v, const char* key) {
    if (!v.is_string()) throw UsageError(std::string("config key '") + key + "' must be a string");
    return v.get<std::string>();
}

double jnum(const json& v, const char* key) {
    if (!v.is_number()) throw UsageError(std::string("config key '") + key + "' must be a number");
    return v.get<double>();
}

std::uint64_t jseed(const json& v, const char* key) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw UsageError(std::string("config key '") + key + "' must be an integer");
    if (v.is_number_integer() && v.get<std::int64_t>() < 0)
        throw UsageError(std::string("config key '") + key + "' must be nonnegative");
    return v.get<std::uint64_t>();
}

Applier applier_for(FieldArgs& a) {
    return {{"op", [&](const json& v) { a.op = jstr(v, "op"); }},
            {"f", [&](const json& v) { a.f_path = jstr(v, "f"); }},
            {"b", [&](const json& v) { a.b_path = jstr(v, "b"); }},
            {"mu", [&](const json& v) { a.mu_path = jstr(v, "mu"); }},
            {"cube", [&](const json& v) { a.cube_spec = jstr(v, "cube"); }},
            {"beta", [&](const json& v) { a.beta = jnum(v, "beta"); }},
            {"r", [&](const json& v) { a.r = jnum(v, "r"); }},
            {"family", [&](const json& v) { a.family = jstr(v, "family"); }},
            {"out", [&](const json& v) { a.out = jstr(v, "out"); }},
            {"witness", [&](const json& v) { a.witness_out = jstr(v, "witness"); }}};
}

Applier applier_for(NormArgs& a) {
    return {{"functional", [&](const json& v) { a.functional = jstr(v, "functional"); }},
            {"f", [&](const json& v) { a.f_path = jstr(v, "f"); }},
            {"b", [&](const json& v) { a.b_path = jstr(v, "b"); }},
            {"mu", [&](const json& v) { a.mu_path = jstr(v, "mu"); }},
            {"u", [&](const json& v) { a.u_path = jstr(v, "u"); }},
            {"p", [&](const json& v) { a.p = jnum(v, "p"); }},
            {"kappa", [&](const json& v) { a.kappa = jnum(v, "kappa"); }},
            {"beta", [&](const json& v) { a.beta = jnum(v, "beta"); }},
            {"r", [&](const json& v) { a.r = jnum(v, "r"); }},
            {"s", [&](const json& v) { a.s = jnum(v, "s"); }},
            {"family", [&](const json& v) { a.family = jstr(v, "family"); }},
            {"out", [&](const json& v) { a.out = jstr(v, "out"); }}};
}

Applier applier_for(ApArgs& a) {
    return {{"mu", [&](const json& v) { a.mu_path = jstr(v, "mu"); }},
            {"p", [&](const json& v) { a.p = jnum(v, "p"); }},
            {"family", [&](const json& v) { a.family = jstr(v, "family"); }},
            {"out", [&](const json& v) { a.out = jstr(v, "out"); }}};
}

Applier applier_for(SweepArgs& a) {
    return {{"dim", [&](const json& v) { a.dim = int(jnum(v, "dim")); }},
            {"extents",
             [&](const json& v) {
                 if (!v.is_array()) throw UsageError("config key 'extents' must be an array");
                 a.extents.clear();
                 for (const auto& el : v) a.extents.push_back(int(jnum(el, "extents")));
             }},
            {"functional",
             [&](const json& v) {
                 if (!v.is_array()) throw UsageError("config key 'functional' must be an array");
                 a.functionals.clear();
                 for (const auto& el : v) a.functionals.push_back(jstr(el, "functional"));
             }},
            {"symbol", [&](const json& v) { a.symbol = jstr(v, "symbol"); }},
            {"weight", [&](const json& v) { a.weight = jstr(v, "weight"); }},
            {"beta", [&](const json& v) { a.beta = jnum(v, "beta"); }},
            {"p", [&](const json& v) { a.p = jnum(v, "p"); }},
            {"kappa", [&](const json& v) { a.kappa = jnum(v, "kappa"); }},
            {"r", [&](const json& v) { a.r = jnum(v, "r"); }},
            {"s", [&](const json& v) { a.s = jnum(v, "s"); }},
            {"seed", [&](const json& v) { a.seed = jseed(v, "seed"); }},
            {"family", [&](const json& v) { a.family = jstr(v, "family"); }},
            {"out", [&](const json& v) { a.out = jstr(v, "out"); }}};
}

struct ConfigRef {
    std::string subcommand;
    std::string path;
};

/// Pull `--config <path>` or `--config=<path>` out of the raw arguments of a
/// flag-defaults subcommand. The verify subcommand keeps its --config flag: a
/// suite description is a complete document, not a set of flag defaults.
std::optional<ConfigRef> extract_config_path(std::vector<std::string>& args) {
    static const std::vector<std::string> subs{"field", "norm", "apcheck", "sweep"};
    std::size_t sub_at = args.size();
    for (std::size_t i = 0; i < args.size() && sub_at == args.size(); ++i)
        for (const std::string& s : subs)
            if (args[i] == s) sub_at = i;
    if (sub_at == args.size()) return std::nullopt;
    std::optional<ConfigRef> ref;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i > sub_at && args[i] == "--config" && i + 1 < args.size()) {
            ref = ConfigRef{args[sub_at], args[i + 1]};
            ++i;
        } else if (i > sub_at && args[i].rfind("--config=", 0) == 0) {
            ref = ConfigRef{args[sub_at], args[i].substr(9)};
        } else {
            kept.push_back(args[i]);
        }
    }
    args = std::move(kept);
    return ref;
}

void apply_config(const std::string& path, const Applier& apply) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open config: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw UsageError("config must be a JSON object of flag defaults");
    for (const auto& item : j.items()) {
        const auto it = apply.find(item.key());
        if (it == apply.end()) throw UsageError("config: unknown key '" + item.key() + "'");
        it->second(item.value());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid toolkit for maximal operators, commutators, and their norms"};
    app.require_subcommand(1);
    std::string config_doc;

    FieldArgs fa;
    CLI::App* field = app.add_subcommand("field", "Apply an operator to a grid function");
    field->add_option("--op", fa.op,
                      "M, local, sharp, M_b, commutator_M, commutator_sharp, fractional");
    field->add_option("--f", fa.f_path, "input field CSV");
    field->add_option("--b", fa.b_path, "symbol CSV (commutator operators)");
    field->add_option("--mu", fa.mu_path, "weight CSV (fractional)");
    field->add_option("--cube", fa.cube_spec, "cube 'low0,side' or 'low0,low1,side' (local)");
    field->add_option("--beta", fa.beta, "fractional order");
    field->add_option("--r", fa.r, "fractional mean exponent");
    field->add_option("--family", fa.family, "cube family: all or dyadic");
    field->add_option("--out", fa.out, "output CSV path (stdout when omitted)");
    field->add_option("--witness", fa.witness_out, "peak witness JSON path");

    NormArgs na;
    CLI::App* norm = app.add_subcommand("norm", "Evaluate a norm or characterization functional");
    norm->add_option("--functional", na.functional,
                     "lebesgue, morrey, lipschitz, lip1, char_M, char_sharp, envelope");
    norm->add_option("--f", na.f_path, "field CSV (lebesgue, morrey)");
    norm->add_option("--b", na.b_path, "symbol CSV (lipschitz, lip1, char_*, envelope)");
    norm->add_option("--mu", na.mu_path, "weight CSV");
    norm->add_option("--u", na.u_path, "integrating weight CSV (two-weight morrey)");
    norm->add_option("--p", na.p, "integral exponent (inf gives the sup form)");
    norm->add_option("--kappa", na.kappa, "Morrey exponent");
    norm->add_option("--beta", na.beta, "Lipschitz order");
    norm->add_option("--r", na.r, "fractional mean exponent (char_*)");
    norm->add_option("--s", na.s, "characterization integrand exponent");
    norm->add_option("--family", na.family, "cube family: all or dyadic");
    norm->add_option("--out", na.out, "output JSON path (stdout when omitted)");

    ApArgs aa;
    CLI::App* ap = app.add_subcommand("apcheck", "Muckenhoupt characteristic of a weight");
    ap->add_option("--mu", aa.mu_path, "weight CSV");
    ap->add_option("--p", aa.p, "class exponent, 1 gives the A_1 constant");
    ap->add_option("--family", aa.family, "cube family: all or dyadic");
    ap->add_option("--out", aa.out, "output JSON path (stdout when omitted)");

    VerifyArgs va;
    CLI::App* verify = app.add_subcommand("verify", "Run a verification suite");
    verify->add_flag("--default", va.use_default, "run the shipped 1D and 2D suites");
    verify->add_option("--config", va.config_path, "suite config JSON path");
    CLI::Option* seed_opt = verify->add_option("--seed", va.seed, "override the suite seed");
    verify->add_option("--out", va.out, "report JSON path (stdout when omitted)");

    SweepArgs sa;
    CLI::App* sweep = app.add_subcommand("sweep", "Track functionals across grid refinement");
    sweep->add_option("--dim", sa.dim, "grid dimension");
    sweep->add_option("--extents", sa.extents, "comma-separated extents, at least 2")
        ->delimiter(',');
    sweep->add_option("--functional", sa.functionals,
                      "char_M, char_sharp, lipschitz, lip1, envelope, a1 (repeat or comma-join)")
        ->delimiter(',');
    sweep->add_option("--symbol", sa.symbol, "constant[:v], ramp, power, adapted, step");
    sweep->add_option("--weight", sa.weight, "constant[:v], power[:alpha], lattice");
    sweep->add_option("--beta", sa.beta, "Lipschitz order");
    sweep->add_option("--p", sa.p, "integral exponent");
    sweep->add_option("--kappa", sa.kappa, "Morrey exponent");
    sweep->add_option("--r", sa.r, "fractional mean exponent");
    sweep->add_option("--s", sa.s, "characterization integrand exponent");
    sweep->add_option("--seed", sa.seed, "seed for lattice weights");
    sweep->add_option("--family", sa.family, "cube family: all or dyadic");
    sweep->add_option("--out", sa.out, "output CSV path (stdout when omitted)");

    for (CLI::App* sub : {field, norm, ap, sweep})
        sub->add_option("--config", config_doc,
                        "flag defaults JSON object; explicit flags override it");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        // Config defaults are written into the argument structs before the
        // parse, so flags given on the command line win.
        const auto config_ref = extract_config_path(args);
        if (config_ref) {
            if (config_ref->subcommand == "field")
                apply_config(config_ref->path, applier_for(fa));
            else if (config_ref->subcommand == "norm")
                apply_config(config_ref->path, applier_for(na));
            else if (config_ref->subcommand == "apcheck")
                apply_config(config_ref->path, applier_for(aa));
            else
                apply_config(config_ref->path, applier_for(sa));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    va.seed_given = seed_opt->count() > 0;

    try {
        if (field->parsed()) return cmd_field(fa);
        if (norm->parsed()) return cmd_norm(na);
        if (ap->parsed()) return cmd_apcheck(aa);
        if (verify->parsed()) return cmd_verify(va);
        return cmd_sweep(sa);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
