// Command-line front end: runs one analysis described by a JSON config and
// writes JSON/CSV/SVG reports.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "torogrow/config.hpp"
#include "torogrow/lattice.hpp"
#include "torogrow/nilpotent.hpp"
#include "torogrow/report.hpp"

namespace {

using namespace torogrow;
namespace fs = std::filesystem;

struct CliOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    bool quiet = false;
};

void say(const CliOptions& opt, const std::string& msg) {
    if (!opt.quiet) std::cout << msg << "\n";
}

std::string out_path(const CliOptions& opt, const std::string& name) {
    return (fs::path(opt.out_dir) / name).string();
}

OrderedJson report_header(const RunConfig& rc) {
    OrderedJson j;
    j["schema"] = kSchemaVersion;
    j["command"] = rc.command;
    j["seed"] = rc.seed;
    return j;
}

int run_growth(const CliOptions& opt, const RunConfig& rc, const GrowthCommand& cmd) {
    const Grid grid = make_grid(std::span<const std::size_t>(cmd.grid_dims));
    const GrowthReport rep = estimate_growth(cmd.system, grid, cmd.n_schedule, cmd.tau_hint);
    OrderedJson j = report_header(rc);
    j["growth"] = growth_report_json(rep, grid, cmd.emit_limit);
    if (cmd.identities_n_probe) {
        const auto idr = check_limit_identities(cmd.system, grid, rep.limit_estimate,
                                                *cmd.identities_n_probe, cmd.identities_pair_samples);
        j["identities"] = {{"n_probe", *cmd.identities_n_probe},
                           {"square_residual", idr.square_residual},
                           {"cocycle_residual", idr.cocycle_residual},
                           {"pair_product_residual", idr.pair_product_residual},
                           {"commute_residual", idr.commute_residual}};
    }
    if (rc.output.json_path) {
        write_json_file(out_path(opt, *rc.output.json_path), j);
        say(opt, "wrote " + out_path(opt, *rc.output.json_path));
    }
    if (rc.output.csv_path) {
        write_growth_csv(out_path(opt, *rc.output.csv_path), rep);
        say(opt, "wrote " + out_path(opt, *rc.output.csv_path));
    }
    if (rc.output.svg_path) {
        write_text_file(out_path(opt, *rc.output.svg_path), growth_svg(rep));
        say(opt, "wrote " + out_path(opt, *rc.output.svg_path));
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "tau_fit=%.4f classification=%s n_max=%lld", rep.tau_fit,
                  to_string(rep.classification), static_cast<long long>(rep.n_schedule.back()));
    say(opt, buf);
    return 0;
}

int run_lattice(const CliOptions& opt, const RunConfig& rc, const LatticeCommand& cmd) {
    const IVec3 prim = primitive_part(cmd.c);
    const LatticeBasis basis = orthogonal_generators(prim);
    const auto full = is_full_image(basis.a, basis.b);
    OrderedJson j = report_header(rc);
    j["lattice"] = {{"c", cmd.c},
                    {"primitive", prim},
                    {"a", basis.a},
                    {"b", basis.b},
                    {"minors", basis.minors},
                    {"minor_gcd", full.minor_gcd},
                    {"full_image", full.full}};
    if (!cmd.membership_queries.empty()) {
        OrderedJson arr = OrderedJson::array();
        for (const auto& m : cmd.membership_queries) {
            OrderedJson e;
            e["m"] = m;
            const auto uv = membership(basis, m);
            if (uv)
                e["coords"] = *uv;
            else
                e["coords"] = nullptr;
            arr.push_back(e);
        }
        j["lattice"]["membership"] = arr;
    }
    if (rc.output.json_path) {
        write_json_file(out_path(opt, *rc.output.json_path), j);
        say(opt, "wrote " + out_path(opt, *rc.output.json_path));
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "a=(%lld,%lld,%lld) b=(%lld,%lld,%lld) minor_gcd=%lld",
                  basis.a[0], basis.a[1], basis.a[2], basis.b[0], basis.b[1], basis.b[2],
                  full.minor_gcd);
    say(opt, buf);
    return 0;
}

int run_nilpotent(const CliOptions& opt, const RunConfig& rc, const NilpotentCommand& cmd) {
    OrderedJson j = report_header(rc);
    try {
        if (cmd.pair_with) {
            const auto cls = classify_pair(cmd.matrix3, *cmd.pair_with);
            j["nilpotent"] = {
                {"kind", cls.kind == PairKind::CommonColumn ? "common_column" : "common_row"},
                {"shared", cls.shared},
                {"vec_a", cls.vec_a},
                {"vec_b", cls.vec_b},
                {"residual", cls.residual}};
        } else if (cmd.dim == 3) {
            const auto f = square_zero_factor(cmd.matrix3);
            j["nilpotent"] = {{"column", f.column}, {"row", f.row}, {"residual", f.residual}};
        } else {
            const auto f = square_zero_factor(cmd.matrix2);
            j["nilpotent"] = {{"column", f.column}, {"row", f.row}, {"residual", f.residual}};
        }
    } catch (const StructuralError& e) {
        // matrices come straight from the config, so structure failures are input errors
        throw InputError(std::string("input is not square-zero: ") + e.what());
    }
    if (rc.output.json_path) {
        write_json_file(out_path(opt, *rc.output.json_path), j);
        say(opt, "wrote " + out_path(opt, *rc.output.json_path));
    }
    say(opt, "nilpotent factorization ok");
    return 0;
}

int run_conjugate(const CliOptions& opt, const RunConfig& rc, const ConjugateCommand& cmd) {
    const FirstIntegral xi = make_first_integral(cmd.p, cmd.xi_periodic);
    const ConjugacyResult res = build_conjugacy(*cmd.map, xi, cmd.alpha, cmd.cfg);
    const ConjugacyVerification ver = verify_conjugacy(*cmd.map, xi, res, cmd.verify_refine);
    OrderedJson j = report_header(rc);
    j["conjugate"] = conjugacy_report_json(res, ver, cmd.emit_psi);
    const bool accepted = res.residual_sup <= cmd.residual_accept;
    j["conjugate"]["accepted"] = accepted;
    if (rc.output.json_path) {
        write_json_file(out_path(opt, *rc.output.json_path), j);
        say(opt, "wrote " + out_path(opt, *rc.output.json_path));
    }
    char buf[200];
    std::snprintf(buf, sizeof(buf), "residual=%.3e tau=%.9f epsilon=%+d q=(%lld,%lld)",
                  res.residual_sup, res.tau_period, res.epsilon, res.q[0], res.q[1]);
    say(opt, buf);
    if (!accepted)
        throw HypothesisError("conjugacy residual " + std::to_string(res.residual_sup) +
                              " exceeds acceptance tolerance");
    return 0;
}

int run_random_growth(const CliOptions& opt, const RunConfig& rc, const RandomGrowthCommand& cmd) {
    const auto rep = random_growth_mc(cmd.spec, cmd.samples, cmd.n, rc.seed);
    OrderedJson j = report_header(rc);
    j["random_growth"] = {{"samples", rep.samples},
                          {"n", rep.n},
                          {"mean_scaled", matrix_to_json(rep.mean_scaled)},
                          {"theoretical", matrix_to_json(rep.theoretical)},
                          {"l1_error", rep.l1_error}};
    if (rc.output.json_path) {
        write_json_file(out_path(opt, *rc.output.json_path), j);
        say(opt, "wrote " + out_path(opt, *rc.output.json_path));
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "mean (2,1)=%.6f l1_error=%.6f", rep.mean_scaled(1, 0),
                  rep.l1_error);
    say(opt, buf);
    return 0;
}

int run_drift(const CliOptions& opt, const RunConfig& rc, const DriftCommand& cmd) {
    const SpecialFlowSpec spec = make_special_flow(cmd.a, cmd.roof_periodic, cmd.alpha, cmd.beta);
    OrderedJson values = OrderedJson::array();
    std::string summary = "drift:";
    for (const long long n : cmd.n_values) {
        const double d = sublinear_drift(spec, cmd.grid_x1, cmd.grid_x2, n);
        values.push_back({{"n", n}, {"sup", d}});
        char buf[64];
        std::snprintf(buf, sizeof(buf), " n=%lld sup=%.3e", n, d);
        summary += buf;
    }
    OrderedJson j = report_header(rc);
    j["drift"] = {{"grid", {cmd.grid_x1, cmd.grid_x2}}, {"values", values}};
    if (rc.output.json_path) {
        write_json_file(out_path(opt, *rc.output.json_path), j);
        say(opt, "wrote " + out_path(opt, *rc.output.json_path));
    }
    say(opt, summary);
    return 0;
}

int run(const CliOptions& opt) {
    std::ifstream in(opt.config_path);
    if (!in) throw InputError("cannot open config file: " + opt.config_path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig rc = parse_config(root);
    if (opt.seed_override) rc.seed = *opt.seed_override;

    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec) throw InputError("cannot create output directory: " + opt.out_dir);

    if (const auto* c = std::get_if<GrowthCommand>(&rc.payload)) return run_growth(opt, rc, *c);
    if (const auto* c = std::get_if<LatticeCommand>(&rc.payload)) return run_lattice(opt, rc, *c);
    if (const auto* c = std::get_if<NilpotentCommand>(&rc.payload)) return run_nilpotent(opt, rc, *c);
    if (const auto* c = std::get_if<ConjugateCommand>(&rc.payload)) return run_conjugate(opt, rc, *c);
    if (const auto* c = std::get_if<RandomGrowthCommand>(&rc.payload))
        return run_random_growth(opt, rc, *c);
    if (const auto* c = std::get_if<DriftCommand>(&rc.payload)) return run_drift(opt, rc, *c);
    throw InputError("unhandled command");
}

}  // namespace

int main(int argc, char** argv) {
    CliOptions opt;
    CLI::App app{"torogrow: polynomial derivative growth laboratory for torus maps"};
    app.add_option("--config", opt.config_path, "JSON run configuration")->required();
    app.add_option("--out", opt.out_dir, "output directory (created if missing)");
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
    app.add_flag("--quiet", opt.quiet, "suppress progress output");
    CLI11_PARSE(app, argc, argv);
    if (seed_opt->count() > 0) opt.seed_override = seed;

    try {
        return run(opt);
    } catch (const torogrow::HypothesisError& e) {
        std::cerr << "hypothesis failure: " << e.what() << "\n";
        return 2;
    } catch (const torogrow::StructuralError& e) {
        std::cerr << "structural failure: " << e.what() << "\n";
        return 2;
    } catch (const torogrow::SchemaError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const torogrow::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
