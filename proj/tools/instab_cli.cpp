// instab: command-line front end for the volatility-control game toolkit.
//
// Every flag has a config-file twin: `--config run.cfg` reads flat key=value
// lines (# starts a comment) whose keys are the long flag names. Values from
// the file are applied first, so flags given on the command line win.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "instab/artifacts.hpp"
#include "instab/benchmark.hpp"
#include "instab/equilibrium.hpp"
#include "instab/error.hpp"
#include "instab/sde_sim.hpp"
#include "instab/suites.hpp"
#include "instab/viscosity_br.hpp"

namespace fs = std::filesystem;
using namespace instab;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfig = 2, kSolver = 3, kEquilibriumFailed = 4 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot read " + path.string());
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    for (int lineno = 1; std::getline(is, line); ++lineno) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value: " + line);
        }
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

// Splices config entries in front of the command-line flags of the subcommand.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::optional<std::string> path;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ConfigError("config: --config needs a file name");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    if (!path) return kept;
    std::vector<std::string> out;
    std::size_t k = 0;
    if (!kept.empty() && kept[0].rfind("-", 0) != 0) out.push_back(kept[k++]);  // subcommand
    for (const auto& [key, value] : read_config(*path)) {
        out.push_back("--" + key);
        if (value != "true") out.push_back(value);  // bare flags are written key=true
    }
    out.insert(out.end(), kept.begin() + static_cast<std::ptrdiff_t>(k), kept.end());
    return out;
}

struct PlayerFlags {
    double r = 0.0, c = 0.0;
};

void add_player(CLI::App* cmd, PlayerFlags& f, const std::string& rk, const std::string& ck, bool required) {
    auto* r = cmd->add_option("--" + rk, f.r, "discount rate r (> 0)")->check(CLI::PositiveNumber);
    auto* c = cmd->add_option("--" + ck, f.c, "cost scale c (> 0)")->check(CLI::PositiveNumber);
    if (required) {
        r->required();
        c->required();
    }
}

void prepare_out(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("out: cannot create " + dir.string() + ": " + ec.message());
}

double sup_residual(const BenchmarkSolution& sol) {
    const ScalarField res = hjb_residual(sol.v, ScalarField::constant(sol.v.grid(), 0.0), sol.params);
    double sup = 0.0;
    for (std::size_t i = 1; i + 1 < res.size(); ++i) sup = std::max(sup, std::abs(res[i]));
    return sup;
}

struct EquilibriumFlags {
    PlayerFlags a{}, b{};
    std::string xbar;
    std::size_t n = 2001;
};

void add_equilibrium(CLI::App* cmd, EquilibriumFlags& f) {
    add_player(cmd, f.a, "ra", "ca", true);
    add_player(cmd, f.b, "rb", "cb", true);
    cmd->add_option("--xbar", f.xbar, "deterrence stable point, or 'mid' for the range midpoint");
    cmd->add_option("--n", f.n, "grid nodes on [0, 1]")->check(CLI::Range(std::size_t{11}, std::size_t{200001}));
}

Equilibrium construct(const EquilibriumFlags& f) {
    const PlayerParams pa{f.a.r, f.a.c, Side::A};
    const PlayerParams pb{f.b.r, f.b.c, Side::B};
    const RegimeInfo info = classify_regime(pa, pb);
    const EquilibriumOptions opts{.n = f.n};
    if (info.regime == Regime::Accommodating) {
        if (!f.xbar.empty()) throw ConfigError("xbar: xbar not allowed: accommodating regime");
        return build_accommodating(pa, pb, opts);
    }
    if (f.xbar.empty()) throw ConfigError("xbar: required in the deterrence regime (a number or 'mid')");
    double xbar;
    if (f.xbar == "mid") {
        xbar = 0.5 * (info.range_lo + info.range_hi);
    } else {
        std::size_t used = 0;
        try {
            xbar = std::stod(f.xbar, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != f.xbar.size()) throw ConfigError("xbar: not a number: " + f.xbar);
    }
    try {
        return build_deterrence(pa, pb, xbar, opts);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument) throw ConfigError(std::string("xbar: ") + e.what());
        throw;
    }
}

void print_verification(const VerificationReport& r) {
    std::printf("verification: %s (control %.3g/%.3g, thresholds %.3g/%.3g, decoupling %zu, convex kink %s)\n",
                r.pass ? "pass" : "FAIL", r.control_discrepancy_a, r.control_discrepancy_b, r.threshold_discrepancy_a,
                r.threshold_discrepancy_b, r.decoupling_violations, r.convex_kink ? "yes" : "no");
    if (!r.kink_message.empty()) std::printf("  %s\n", r.kink_message.c_str());
}

std::vector<double> parse_axis(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw ConfigError("axis: not a number: " + item);
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("axis: empty list");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volatility-control game: benchmarks, equilibria, sweeps, simulation", "instab"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_help_all_flag("--help-all");
    app.add_flag("--config", "flat key=value file; keys are the long flag names (handled before parsing)");
    std::string out = ".";

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "inactive benchmark for one player");
    PlayerFlags bp{};
    std::string side = "A";
    double domain_hi = 1.0;
    std::size_t bench_n = 2001;
    add_player(bench, bp, "r", "c", true);
    bench->add_option("--side", side, "player side")->check(CLI::IsMember({"A", "B"}));
    bench->add_option("--domain-hi", domain_hi, "right end of the solve domain")->check(CLI::Range(0.0, 1.0));
    bench->add_option("--n", bench_n, "grid nodes")->check(CLI::Range(std::size_t{11}, std::size_t{200001}));
    bench->add_option("--out", out, "output directory");

    // equilibrium
    auto* equi = app.add_subcommand("equilibrium", "construct and verify an equilibrium");
    EquilibriumFlags ef;
    add_equilibrium(equi, ef);
    equi->add_option("--out", out, "output directory");

    // simulate
    auto* simc = app.add_subcommand("simulate", "reflected-SDE ensemble under an equilibrium");
    EquilibriumFlags sf;
    SimConfig sim;
    add_equilibrium(simc, sf);
    simc->add_option("--x0", sim.x0, "initial state")->check(CLI::Range(0.0, 1.0));
    simc->add_option("--dt", sim.dt, "time step")->check(CLI::PositiveNumber);
    simc->add_option("--t-max", sim.t_max, "horizon")->check(CLI::PositiveNumber);
    simc->add_option("--paths", sim.n_paths, "number of paths")->check(CLI::PositiveNumber);
    simc->add_option("--seed", sim.seed, "RNG seed");
    simc->add_option("--freeze-eps", sim.freeze_eps, "diffusion level that freezes a path")
        ->check(CLI::NonNegativeNumber);
    simc->add_option("--converge-delta", sim.converge_delta, "distance counted as converged")
        ->check(CLI::PositiveNumber);
    simc->add_option("--checkpoints", sim.checkpoints, "geometric checkpoint count")->check(CLI::PositiveNumber);
    simc->add_option("--out", out, "output directory");

    // sweep
    auto* sw = app.add_subcommand("sweep", "comparative statics along r_a^2 c_a");
    SweepSpec spec;
    PlayerFlags swb{7.0, 15.0};
    double k_from = 200.0, k_to = 20.0;
    std::size_t points = 21;
    std::string axis;
    add_player(sw, swb, "rb", "cb", false);
    sw->add_option("--ra", spec.r_a, "A's discount rate (c_a = k / r_a^2)")->check(CLI::PositiveNumber);
    sw->add_option("--k-from", k_from, "first axis value of r_a^2 c_a")->check(CLI::PositiveNumber);
    sw->add_option("--k-to", k_to, "last axis value")->check(CLI::PositiveNumber);
    sw->add_option("--points", points, "log-spaced axis points")->check(CLI::PositiveNumber);
    sw->add_option("--axis", axis, "explicit comma-separated axis (overrides k-from/k-to/points)");
    sw->add_flag("--welfare", spec.welfare, "compare A's equilibrium values between consecutive points");
    sw->add_option("--n", spec.n, "grid nodes for welfare equilibria")
        ->check(CLI::Range(std::size_t{11}, std::size_t{200001}));
    sw->add_option("--out", out, "output directory");

    // verify
    auto* ver = app.add_subcommand("verify", "run the acceptance suites");
    std::vector<std::string> suites;
    SuiteOptions sopts;
    std::vector<std::string> names = suite_names();
    names.push_back("all");
    ver->add_option("--suite", suites, "suite to run (repeatable; default all)")
        ->check(CLI::IsMember(names))
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    ver->add_option("--oracle-tol", sopts.oracle_tolerance, "sup-norm tolerance of the MDP comparison")
        ->check(CLI::PositiveNumber);

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    }

    try {
        if (*bench) {
            prepare_out(out);
            const PlayerParams p{bp.r, bp.c, side == "A" ? Side::A : Side::B};
            const BenchmarkSolution sol = solve_benchmark(p, domain_hi, {.n = bench_n});
            benchmark_csv(sol).write(fs::path(out) / "benchmark.csv");
            write_json(fs::path(out) / "benchmark.json", benchmark_json(sol, sup_residual(sol)));
            std::printf("threshold %.12g (%s)\n", p.side == Side::B ? 1.0 - sol.threshold : sol.threshold,
                        sol.boundary_mode == BoundaryMode::SmoothPasting ? "smooth_pasting" : "absorbed");
            return kOk;
        }
        if (*equi) {
            prepare_out(out);
            Equilibrium eq = construct(ef);
            eq.verification = verify_equilibrium(eq);
            equilibrium_csv(eq).write(fs::path(out) / "equilibrium.csv");
            write_json(fs::path(out) / "equilibrium.json", equilibrium_json(eq));
            std::printf("regime %s, stable [%.6f, %.6f]\n", regime_name(eq.regime), eq.stable_lo, eq.stable_hi);
            print_verification(*eq.verification);
            return eq.verification->pass ? kOk : kEquilibriumFailed;
        }
        if (*simc) {
            try {
                validate(sim);
            } catch (const Error& e) {
                throw ConfigError(e.what());
            }
            prepare_out(out);
            Equilibrium eq = construct(sf);
            eq.verification = verify_equilibrium(eq);
            if (!eq.verification->pass) {
                print_verification(*eq.verification);
                std::fprintf(stderr, "equilibrium failed verification; not simulating\n");
                return kEquilibriumFailed;
            }
            const SimResult res = simulate(eq, sim);
            const InstabilityRegion region =
                sim.x0 > eq.stable_hi ? InstabilityRegion::BSide : InstabilityRegion::ASide;
            const SubmartingaleReport sub = submartingale_check(res, region);
            simulation_csv(res).write(fs::path(out) / "sim_checkpoints.csv");
            write_json(fs::path(out) / "sim.json", simulation_json(res, sub));
            std::printf("containment %s, submartingale %s, converged %.4f\n", res.containment ? "true" : "false",
                        sub.pass ? "pass" : "FAIL", res.frac_converged);
            return kOk;
        }
        if (*sw) {
            spec.pb = {swb.r, swb.c, Side::B};
            spec.impatience = axis.empty() ? log_axis(k_from, k_to, points) : parse_axis(axis);
            prepare_out(out);
            SweepResult res;
            try {
                res = sweep(spec);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::InvalidArgument) throw ConfigError(e.what());
                throw;
            }
            sweep_csv(res).write(fs::path(out) / "sweep.csv");
            write_json(fs::path(out) / "sweep.json", sweep_json(res, spec));
            if (res.theta) std::printf("theta %.6g\n", *res.theta);
            else std::printf("theta undefined: %s\n", res.theta_reason.c_str());
            std::printf("regime flips %zu, sso %s, containment %s\n", res.regime_flips, res.all_sso ? "ok" : "FAIL",
                        res.all_containment ? "ok" : "FAIL");
            return kOk;
        }
        if (*ver) {
            std::vector<Check> checks;
            const bool all = suites.empty() || std::find(suites.begin(), suites.end(), "all") != suites.end();
            if (all) {
                checks = run_all(sopts);
            } else {
                for (const std::string& s : suites) {
                    for (Check& c : run_suite(s, sopts)) checks.push_back(std::move(c));
                }
            }
            bool ok = true;
            for (const Check& c : checks) {
                std::printf("%-4s %2d  %-32s %7.2fs  %s\n", c.pass ? "ok" : "FAIL", c.id, c.name.c_str(), c.seconds,
                            c.detail.c_str());
                ok = ok && c.pass;
            }
            return ok ? kOk : kVerifyFailed;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfig;
    } catch (const Error& e) {
        std::fprintf(stderr, "%s: %s\n", e.kind() == ErrorKind::Solver ? "solver error" : "error", e.what());
        return e.kind() == ErrorKind::Solver ? kSolver : kConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSolver;
    }
    return kOk;
}
