#include "instab/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <sstream>

#include "instab/benchmark.hpp"
#include "instab/equilibrium.hpp"
#include "instab/error.hpp"
#include "instab/mdp_oracle.hpp"
#include "instab/sde_sim.hpp"
#include "instab/viscosity_br.hpp"

namespace instab {
namespace {

constexpr std::size_t kGrid = 2001;

const PlayerParams kClosedFormSet[] = {{7, 15, Side::A}, {5, 6, Side::A}, {6, 15, Side::A}, {10, 1, Side::A}};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Check timed(int id, const char* name, const std::function<void(Check&)>& body) {
    Check c{id, name, false, {}, 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail += std::string(c.detail.empty() ? "" : "; ") + "error: " + e.what();
    }
    c.seconds = seconds_since(t0);
    return c;
}

struct Labeled {
    std::string label;
    Equilibrium eq;
};

// The four equilibria shared by the fixed-point, residual and dominance checks.
const std::vector<Labeled>& reference_equilibria() {
    static std::once_flag once;
    static std::vector<Labeled> eqs;
    std::call_once(once, [] {
        const PlayerParams a7{7, 15, Side::A}, b7{7, 15, Side::B};
        const PlayerParams a1{1, 2, Side::A}, b1{1, 2, Side::B};
        eqs.push_back({"accommodating (7,15)/(7,15)", build_accommodating(a7, b7, {.n = kGrid})});
        for (double xbar : {0.25, 0.5, 0.75}) {
            std::ostringstream label;
            label << "deterrence (1,2)/(1,2) xbar=" << xbar;
            eqs.push_back({label.str(), build_deterrence(a1, b1, xbar, {.n = kGrid})});
        }
    });
    return eqs;
}

// Sup of |F| over interior nodes where the control is active, keeping 3
// nodes away from every switch of the control and from `avoid`.
double active_residual(const ScalarField& v, const ScalarField& control, const ScalarField& opponent,
                       const PlayerParams& p, std::optional<double> avoid = std::nullopt) {
    const ScalarField res = hjb_residual(v, opponent, p);
    const Grid& g = v.grid();
    const std::size_t n = g.size();
    const std::ptrdiff_t margin = 3;
    double sup = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        bool ok = true;
        for (std::ptrdiff_t d = -margin; d <= margin && ok; ++d) {
            const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i) + d;
            if (k < 0 || k >= static_cast<std::ptrdiff_t>(n)) continue;
            ok = control[static_cast<std::size_t>(k)] > 0.0;
        }
        if (avoid && std::abs(g.node(i) - *avoid) <= margin * g.spacing()) ok = false;
        if (ok) sup = std::max(sup, std::abs(res[i]));
    }
    return sup;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

Check check_closed_form() {
    return timed(1, "closed-form benchmark", [](Check& c) {
        constexpr double tol = 1e-8;
        constexpr double time_limit = 1.0;
        bool ok = true;
        std::ostringstream d;
        for (const PlayerParams& p : kClosedFormSet) {
            const auto t0 = std::chrono::steady_clock::now();
            const BenchmarkSolution sol = solve_benchmark(p, 1.0, {.n = kGrid});
            const double dt = seconds_since(t0);
            const BenchmarkSolution cf = closed_form_solution(p, kGrid);
            double sup = 0.0;
            for (std::size_t i = 0; i < kGrid; ++i) sup = std::max(sup, std::abs(sol.v[i] - cf.v[i]));
            const double terr = std::abs(sol.threshold - cf.threshold);
            const bool good = terr <= tol && sup <= tol && dt < time_limit;
            ok = ok && good;
            d << "(" << p.r << "," << p.c << ") dx*=" << fmt(terr) << " dv=" << fmt(sup) << " " << fmt(dt)
              << "s" << (good ? "" : " FAIL") << "; ";
        }
        c.pass = ok;
        c.detail = d.str();
    });
}

Check check_hjb_residuals() {
    return timed(2, "HJB residual on active regions", [](Check& c) {
        constexpr double tol = 1e-6;
        bool ok = true;
        std::ostringstream d;
        auto note = [&](double r, const std::string& label) {
            const bool good = r <= tol;
            ok = ok && good;
            d << label << " " << fmt(r) << (good ? "" : " FAIL") << "; ";
        };
        const Grid g(0.0, 1.0, kGrid);
        const ScalarField zero = ScalarField::constant(g, 0.0);
        for (const PlayerParams& p : kClosedFormSet) {
            const BenchmarkSolution sol = solve_benchmark(p, 1.0, {.n = kGrid});
            std::ostringstream label;
            label << "benchmark (" << p.r << "," << p.c << ")";
            note(active_residual(sol.v, sol.control, zero, p), label.str());
        }
        for (const Labeled& l : reference_equilibria()) {
            const Equilibrium& eq = l.eq;
            std::optional<double> avoid_b;
            if (eq.xbar) avoid_b = 1.0 - *eq.xbar;
            const double ra = active_residual(eq.v_a, eq.a_star, eq.b_star, eq.params_a, eq.xbar);
            const double rb =
                active_residual(mirror(eq.v_b), mirror(eq.b_star), mirror(eq.a_star), eq.params_b, avoid_b);
            note(std::max(ra, rb), l.label);
        }
        c.pass = ok;
        c.detail = d.str() + "tolerance " + fmt(tol);
    });
}

Check check_mdp_oracle(const SuiteOptions& opts) {
    return timed(3, "MDP oracle vs closed form", [&](Check& c) {
        constexpr double time_limit = 30.0;
        bool ok = true;
        std::ostringstream d;
        for (const PlayerParams& p : kClosedFormSet) {
            MdpSpec spec;
            spec.grid = Grid(0.0, 1.0, 201);
            spec.actions = 101;
            spec.params = p;
            const auto t0 = std::chrono::steady_clock::now();
            const MdpSolution sol = solve_mdp(spec);
            const double dt = seconds_since(t0);
            const FieldDifference diff = compare(sol.value, closed_form_solution(p, 201).v);
            const bool good = diff.sup <= opts.oracle_tolerance && dt < time_limit;
            ok = ok && good;
            d << "(" << p.r << "," << p.c << ") sup=" << fmt(diff.sup) << " " << fmt(dt) << "s"
              << (good ? "" : " FAIL") << "; ";
        }
        c.pass = ok;
        c.detail = d.str() + "tolerance " + fmt(opts.oracle_tolerance);
    });
}

Check check_fixed_points() {
    return timed(4, "fixed-point verification", [](Check& c) {
        bool ok = true;
        std::ostringstream d;
        for (const Labeled& l : reference_equilibria()) {
            const VerificationReport r = verify_equilibrium(l.eq);
            ok = ok && r.pass;
            d << l.label << ": " << (r.pass ? "pass" : "FAIL");
            if (!r.pass) {
                d << " (control " << fmt(std::max(r.control_discrepancy_a, r.control_discrepancy_b))
                  << ", threshold " << fmt(std::max(r.threshold_discrepancy_a, r.threshold_discrepancy_b))
                  << ", decoupling " << r.decoupling_violations << ", convex kink " << (r.convex_kink ? "yes" : "no")
                  << ")";
            }
            d << "; ";
        }
        c.pass = ok;
        c.detail = d.str();
    });
}

namespace {

SweepResult reference_sweep() {
    SweepSpec spec;
    spec.pb = {7, 15, Side::B};
    spec.r_a = 7.0;
    spec.impatience = log_axis(200.0, 20.0, 21);
    return sweep(spec);
}

}  // namespace

Check check_regime_boundary() {
    return timed(5, "regime boundary", [](Check& c) {
        constexpr double expected = 50.33;
        constexpr double rel = 0.01;
        const SweepResult s = reference_sweep();
        std::optional<std::size_t> flip;
        for (std::size_t i = 1; i < s.points.size(); ++i) {
            if (s.points[i].regime != s.points[i - 1].regime) flip = i;
        }
        bool ok = s.regime_flips == 1 && s.theta.has_value();
        std::ostringstream d;
        d << "flips " << s.regime_flips;
        if (s.theta) {
            const double theta = *s.theta;
            ok = ok && std::abs(theta - expected) <= rel * expected;
            d << ", theta " << fmt(theta);
            if (flip) {
                const double k0 = s.points[*flip - 1].impatience;
                const double k1 = s.points[*flip].impatience;
                ok = ok && theta >= std::min(k0, k1) && theta <= std::max(k0, k1);
                d << " bracketed by [" << fmt(std::min(k0, k1)) << ", " << fmt(std::max(k0, k1)) << "]";
            }
        }
        c.pass = ok;
        c.detail = d.str();
    });
}

Check check_comparative_statics() {
    return timed(6, "comparative statics", [](Check& c) {
        const SweepResult s = reference_sweep();
        bool decreasing = true;
        for (std::size_t i = 1; i < s.points.size(); ++i) {
            const SweepPoint& a = s.points[i - 1];
            const SweepPoint& b = s.points[i];
            // The axis runs downward in r_a^2 c_a, so x_a0 must rise.
            if (!(b.impatience < a.impatience && b.x_a0 > a.x_a0)) decreasing = false;
        }
        std::size_t verdicts = 0;
        for (const SweepPoint& p : s.points) verdicts += p.containment != Verdict::None;
        c.pass = decreasing && s.all_sso && s.all_containment;
        std::ostringstream d;
        d << "x_a0 strictly decreasing in r_a^2 c_a: " << (decreasing ? "yes" : "no") << ", SSO "
          << (s.all_sso ? "ok" : "FAIL") << ", containment " << (s.all_containment ? "ok" : "FAIL") << " ("
          << verdicts << " verdicts)";
        c.detail = d.str();
    });
}

Check check_vanishing_exponents() {
    return timed(7, "vanishing exponents", [](Check& c) {
        constexpr double tol = 0.1;
        const double h = 1.0 / static_cast<double>(kGrid - 1);
        const PlayerParams p{7, 15, Side::A};
        const BenchmarkSolution pasting = solve_benchmark(p, 1.0, {.n = kGrid});
        const double e_paste = vanishing_exponent(pasting.control, pasting.threshold, 10 * h, 100 * h);
        const BenchmarkSolution absorbed = solve_benchmark(p, 0.2, {.n = kGrid});
        const double ha = absorbed.control.grid().spacing();
        const double e_abs = vanishing_exponent(absorbed.control, absorbed.threshold, 10 * ha, 100 * ha);
        const Equilibrium& det = reference_equilibria()[2].eq;
        const double e_det = vanishing_exponent(det.a_star, *det.xbar, 10 * h, 100 * h);
        c.pass = std::abs(e_paste - 2.0) <= tol && std::abs(e_abs - 0.5) <= tol && std::abs(e_det - 0.5) <= tol;
        c.detail = "pasting " + fmt(e_paste) + ", absorbed " + fmt(e_abs) + ", deterrence " + fmt(e_det);
    });
}

Check check_dynamics() {
    return timed(8, "dynamics", [](Check& c) {
        const Equilibrium& eq = reference_equilibria()[2].eq;
        SimConfig cfg;
        cfg.x0 = 0.1;
        cfg.dt = 1e-4;
        cfg.t_max = 50.0;
        cfg.n_paths = 1000;
        cfg.seed = 42;
        const auto t0 = std::chrono::steady_clock::now();
        const SimResult r = simulate(eq, cfg);
        const double elapsed = seconds_since(t0);

        double top = 0.0;
        for (double v : r.path_max) top = std::max(top, v);
        const bool contained = r.containment && top <= *eq.xbar + 2.0 * r.band;

        bool trend = true;
        for (std::size_t k = 1; k < r.checkpoints.size(); ++k) {
            const Checkpoint& a = r.checkpoints[k - 1];
            const Checkpoint& b = r.checkpoints[k];
            if (b.mean_abs_dist > a.mean_abs_dist + 2.0 * std::max(a.dist_se, b.dist_se)) trend = false;
        }
        const bool sub = submartingale_check(r, InstabilityRegion::ASide).pass;

        cfg.x0 = *eq.xbar;
        const SimResult f = simulate(eq, cfg);
        bool frozen = true;
        for (std::size_t p = 0; p < cfg.n_paths; ++p) {
            frozen = frozen && f.path_max[p] == cfg.x0 && f.path_min[p] == cfg.x0;
        }
        const double total = seconds_since(t0);
        c.pass = contained && trend && sub && frozen && total < 120.0;
        std::ostringstream d;
        d << "containment " << (contained ? "ok" : "FAIL") << " (max " << fmt(top) << "), trend "
          << (trend ? "ok" : "FAIL") << ", submartingale " << (sub ? "ok" : "FAIL") << ", frozen at xbar "
          << (frozen ? "ok" : "FAIL") << ", converged " << fmt(r.frac_converged) << ", " << fmt(elapsed) << "s";
        c.detail = d.str();
    });
}

Check check_monotone_best_response() {
    return timed(9, "monotone best response", [](Check& c) {
        const Grid g(0.0, 1.0, kGrid);
        const PlayerParams p{7, 15, Side::A};
        bool ok = true;
        std::ostringstream d;
        std::uint64_t state = 20240917;
        auto uniform = [&state] {
            state += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = state;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            z ^= z >> 31;
            return static_cast<double>(z >> 11) * 0x1.0p-53;
        };
        for (int trial = 0; trial < 5; ++trial) {
            // Piecewise-linear non-decreasing field through 9 random knots.
            constexpr int knots = 8;
            std::vector<double> kv(knots + 1, 0.0);
            const double scale = 0.02 + 0.2 * uniform();
            for (int k = 1; k <= knots; ++k) kv[k] = kv[k - 1] + uniform();
            for (double& v : kv) v *= scale / kv.back();
            const ScalarField opp = ScalarField::sample(g, [&](double x) {
                const double t = x * knots;
                const int k = std::min(static_cast<int>(t), knots - 1);
                return kv[k] + (t - k) * (kv[k + 1] - kv[k]);
            });
            const BestResponse br = solve_br(p, opp);
            // One-node tolerance: a[i+1] may exceed a[i] only if it stays below a[i-1].
            std::size_t violations = 0;
            for (std::size_t i = 1; i + 1 < g.size() && g.node(i + 1) < br.lower_threshold; ++i) {
                if (br.control[i + 1] > br.control[i] && br.control[i + 1] > br.control[i - 1]) ++violations;
            }
            ok = ok && violations == 0;
            d << "field " << trial << ": threshold " << fmt(br.lower_threshold) << ", violations " << violations << "; ";
        }
        c.pass = ok;
        c.detail = d.str();
    });
}

Check check_dominance() {
    return timed(10, "dominance", [](Check& c) {
        bool ok = true;
        double worst = -1.0;
        for (const Labeled& l : reference_equilibria()) {
            const VerificationReport r = verify_equilibrium(l.eq);
            for (double e : {r.dominance_control_a, r.dominance_value_a, r.dominance_control_b, r.dominance_value_b}) {
                worst = std::max(worst, e);
                ok = ok && e <= kDominanceTolerance;
            }
        }
        c.pass = ok;
        c.detail = "largest excess over the benchmark " + fmt(worst) + ", tolerance " + fmt(kDominanceTolerance);
    });
}

std::vector<Check> run_all(const SuiteOptions& opts) {
    return {check_closed_form(),         check_hjb_residuals(),      check_mdp_oracle(opts),
            check_fixed_points(),        check_regime_boundary(),    check_comparative_statics(),
            check_vanishing_exponents(), check_dynamics(),           check_monotone_best_response(),
            check_dominance()};
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"closed-form", "oracle", "fixed-point", "statics", "simulation"};
    return names;
}

std::vector<Check> run_suite(const std::string& name, const SuiteOptions& opts) {
    if (name == "closed-form") return {check_closed_form(), check_hjb_residuals(), check_vanishing_exponents()};
    if (name == "oracle") return {check_mdp_oracle(opts)};
    if (name == "fixed-point") return {check_fixed_points(), check_monotone_best_response(), check_dominance()};
    if (name == "statics") return {check_regime_boundary(), check_comparative_statics()};
    if (name == "simulation") return {check_dynamics()};
    fail_argument("unknown suite: " + name);
}

}  // namespace instab
