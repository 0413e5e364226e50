#include "instab/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "instab/error.hpp"

namespace instab {

const char* regime_name(Regime r) noexcept {
    return r == Regime::Accommodating ? "accommodating" : "deterrence";
}

const char* verdict_name(Verdict v) noexcept {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::None: return "none";
    }
    return "none";
}

double benchmark_threshold(const PlayerParams& p) { return closed_form_threshold(p).value_or(1.0); }

RegimeInfo classify_regime(const PlayerParams& pa, const PlayerParams& pb) {
    RegimeInfo info;
    info.x_a0 = benchmark_threshold(pa);
    info.x_b0 = 1.0 - benchmark_threshold(pb);
    if (info.x_a0 <= info.x_b0) {
        info.regime = Regime::Accommodating;
        info.range_lo = info.x_a0;
        info.range_hi = info.x_b0;
    } else {
        info.regime = Regime::Deterrence;
        info.range_lo = info.x_b0;
        info.range_hi = info.x_a0;
    }
    return info;
}

namespace {

// Excess w = v - x of the passive problem on nodes [j, n-1] of a uniform grid:
// w = 0 at j, b w'' = r w inside, reflected ghost at n-1 (zero slope of v).
std::vector<double> passive_excess_upper(double r, std::span<const double> b, double h, std::size_t j,
                                         double eps_b) {
    const std::size_t n = b.size();
    const std::size_t m = n - j;
    std::vector<double> lower(m, 0.0), diag(m, 1.0), upper(m, 0.0), rhs(m, 0.0);
    const double inv_h2 = 1.0 / (h * h);
    for (std::size_t k = 1; k < m; ++k) {
        const double bk = b[j + k];
        if (bk < eps_b) continue;
        const double s = bk * inv_h2;
        diag[k] = r + 2.0 * s;
        if (k + 1 == m) {
            lower[k] = -2.0 * s;
            rhs[k] = -2.0 * bk / h;
        } else {
            lower[k] = -s;
            upper[k] = -s;
        }
    }
    return solve_tridiagonal(lower, diag, upper, rhs);
}

std::vector<double> reversed(std::span<const double> v) { return {v.rbegin(), v.rend()}; }

// One player's strategy and value on the full grid, in the player's own
// coordinate: restricted benchmark on [0, node(j)], passive beyond.
struct OwnSide {
    std::vector<double> control;
    std::vector<double> value;
    BoundaryMode mode = BoundaryMode::SmoothPasting;
    double threshold = 0.0;
};

OwnSide restricted_side(const PlayerParams& p, const Grid& g, std::size_t j) {
    const std::size_t n = g.size();
    BenchmarkOptions bo;
    bo.n = j + 1;
    const BenchmarkSolution sol = solve_benchmark(p, g.node(j), bo);
    OwnSide out;
    out.control.assign(n, 0.0);
    out.value = g.nodes();
    for (std::size_t i = 0; i <= j; ++i) {
        out.control[i] = sol.control[i];
        out.value[i] = sol.v[i];
    }
    out.value[j] = g.node(j);
    out.mode = sol.boundary_mode;
    out.threshold = sol.threshold;
    return out;
}

void attach_passive(OwnSide& side, const PlayerParams& p, const Grid& g, std::span<const double> opponent,
                    std::size_t j) {
    if (j + 1 >= g.size()) return;
    const std::vector<double> w = passive_excess_upper(p.r, opponent, g.spacing(), j, 1e-12);
    for (std::size_t k = 0; k < w.size(); ++k) side.value[j + k] = g.node(j + k) + w[k];
}

PlayerParams oriented(PlayerParams p, Side s) {
    p.side = s;
    return p;
}

std::size_t stable_index(const Grid& g, double xbar) {
    const std::size_t j = g.nearest_index(xbar);
    if (j < 2 || j + 3 > g.size()) {
        std::ostringstream msg;
        msg << "xbar=" << xbar << " is within two grid nodes of the boundary";
        fail_argument(msg.str());
    }
    return j;
}

Equilibrium assemble(const PlayerParams& pa, const PlayerParams& pb, const RegimeInfo& info,
                     const Grid& g, std::size_t ja, std::size_t jb_x) {
    const std::size_t n = g.size();
    const std::size_t jb = n - 1 - jb_x;  // B's junction in its own coordinate
    OwnSide a = restricted_side(pa, g, ja);
    OwnSide b = restricted_side(pb, g, jb);

    const std::vector<double> b_star = reversed(b.control);
    attach_passive(a, pa, g, b_star, ja);
    attach_passive(b, pb, g, reversed(a.control), jb);

    Equilibrium eq{
        .regime = info.regime,
        .xbar = std::nullopt,
        .params_a = oriented(pa, Side::A),
        .params_b = oriented(pb, Side::B),
        .x_a0 = info.x_a0,
        .x_b0 = info.x_b0,
        .a_star = ScalarField(g, std::move(a.control)),
        .b_star = ScalarField(g, b_star),
        .v_a = ScalarField(g, std::move(a.value)),
        .v_b = ScalarField(g, reversed(b.value)),
        .stable_lo = 0.0,
        .stable_hi = 1.0,
        .kink_a = std::nullopt,
        .kink_b = std::nullopt,
        .kink_violation = {},
        .verification = std::nullopt,
    };
    try {
        eq.kink_a = detect_kink(eq.v_a);
    } catch (const Error& e) {
        eq.kink_violation = std::string("v_a: ") + e.what();
    }
    try {
        eq.kink_b = detect_kink(eq.v_b);
    } catch (const Error& e) {
        if (!eq.kink_violation.empty()) eq.kink_violation += "; ";
        eq.kink_violation += std::string("v_b: ") + e.what();
    }
    return eq;
}

}  // namespace

Equilibrium build_accommodating(const PlayerParams& pa, const PlayerParams& pb, const EquilibriumOptions& opts) {
    validate(pa);
    validate(pb);
    const RegimeInfo info = classify_regime(pa, pb);
    if (info.regime != Regime::Accommodating) {
        fail_argument("build_accommodating: regime is deterrence (x_a0 > x_b0)");
    }
    const Grid g(0.0, 1.0, opts.n);
    // Each player's passive region starts where the opponent's strategy turns on.
    const std::size_t n = g.size();
    std::size_t ja = 0;
    while (ja + 1 < n && g.node(ja + 1) <= info.x_b0) ++ja;
    std::size_t jb_x = n - 1;
    while (jb_x > 0 && g.node(jb_x - 1) >= info.x_a0) --jb_x;
    Equilibrium eq = assemble(pa, pb, info, g, ja, jb_x);
    eq.stable_lo = info.x_a0;
    eq.stable_hi = info.x_b0;
    return eq;
}

Equilibrium build_restricted_candidate(const PlayerParams& pa, const PlayerParams& pb, double xbar,
                                       const EquilibriumOptions& opts) {
    validate(pa);
    validate(pb);
    const RegimeInfo info = classify_regime(pa, pb);
    const Grid g(0.0, 1.0, opts.n);
    const std::size_t j = stable_index(g, xbar);
    Equilibrium eq = assemble(pa, pb, info, g, j, j);
    eq.regime = Regime::Deterrence;
    eq.xbar = g.node(j);
    eq.stable_lo = eq.stable_hi = g.node(j);
    return eq;
}

Equilibrium build_deterrence(const PlayerParams& pa, const PlayerParams& pb, double xbar,
                             const EquilibriumOptions& opts) {
    validate(pa);
    validate(pb);
    if (!std::isfinite(xbar)) fail_argument("xbar must be a finite number");
    const RegimeInfo info = classify_regime(pa, pb);
    if (info.regime != Regime::Deterrence) fail_argument("xbar not allowed: accommodating regime");
    const double slack = 1e-12;
    if (xbar <= 0.0 || xbar >= 1.0 || xbar < info.range_lo - slack || xbar > info.range_hi + slack) {
        std::ostringstream msg;
        msg << "not an equilibrium stable point: xbar=" << xbar << " outside [" << info.range_lo << ", "
            << info.range_hi << "] \\ {0, 1}";
        fail_argument(msg.str());
    }
    return build_restricted_candidate(pa, pb, xbar, opts);
}

ScalarField passive_value(const PlayerParams& p, const ScalarField& opponent, double inner, PassiveSide side,
                          double eps_b) {
    validate(p);
    const Grid& g = opponent.grid();
    if (!(inner >= g.lo() && inner <= g.hi())) fail_argument("passive_value: inner end outside the grid");
    for (double b : opponent.values()) {
        if (b < 0.0) fail_argument("passive_value: negative opponent value");
    }
    const std::size_t n = g.size();
    const std::size_t j = g.nearest_index(inner);
    if (side == PassiveSide::Upper) {
        if (n - j < 3) fail_argument("passive_value: region needs at least 3 nodes");
        const std::vector<double> w = passive_excess_upper(p.r, opponent.values(), g.spacing(), j, eps_b);
        const Grid rg(g.node(j), g.hi(), n - j);
        std::vector<double> v(w.size());
        for (std::size_t k = 0; k < w.size(); ++k) v[k] = g.node(j + k) + w[k];
        return ScalarField(rg, std::move(v));
    }
    // Lower region: reflect, solve as an upper region in the reflected
    // variable u = -x, and reflect back. The payoff stays x.
    if (j + 1 < 3) fail_argument("passive_value: region needs at least 3 nodes");
    const std::size_t m = j + 1;
    const double h = g.spacing();
    const double inv_h2 = 1.0 / (h * h);
    std::vector<double> lower(m, 0.0), diag(m, 1.0), upper(m, 0.0), rhs(m, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double bi = opponent[i];
        if (bi < eps_b) continue;
        const double s = bi * inv_h2;
        diag[i] = p.r + 2.0 * s;
        if (i == 0) {
            upper[i] = -2.0 * s;
            rhs[i] = 2.0 * bi / h;
        } else {
            lower[i] = -s;
            upper[i] = -s;
        }
    }
    const std::vector<double> w = solve_tridiagonal(lower, diag, upper, rhs);
    const Grid rg(g.lo(), g.node(j), m);
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = g.node(i) + w[i];
    return ScalarField(rg, std::move(v));
}

namespace {

struct Discrepancy {
    double sup = 0.0;
    std::optional<std::pair<double, double>> span;
};

Discrepancy control_discrepancy(const ScalarField& br, const ScalarField& eq, double tol) {
    Discrepancy d;
    const Grid& g = eq.grid();
    for (std::size_t i = 0; i < eq.size(); ++i) {
        const double diff = std::abs(br[i] - eq[i]);
        d.sup = std::max(d.sup, diff);
        if (diff > tol) {
            if (!d.span) d.span = std::make_pair(g.node(i), g.node(i));
            d.span->second = g.node(i);
        }
    }
    return d;
}

double max_excess(const ScalarField& a, const ScalarField& b) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, a[i] - b[i]);
    return m;
}

void note_kink(const std::string& violation, const char* who, VerificationReport& rep) {
    if (violation.empty()) return;
    rep.convex_kink = true;
    if (!rep.kink_message.empty()) rep.kink_message += "; ";
    rep.kink_message += std::string(who) + ": " + violation;
}

}  // namespace

VerificationReport verify_equilibrium(const Equilibrium& eq, const BrOptions& br_opts) {
    const Grid& g = eq.a_star.grid();
    const std::size_t n = g.size();
    VerificationReport rep;
    rep.h = g.spacing();

    const BestResponse br_a = solve_br(eq.params_a, eq.b_star, br_opts);
    const BestResponse br_b = solve_br(eq.params_b, mirror(eq.a_star), br_opts);
    const ScalarField br_b_control = mirror(br_b.control);
    const ScalarField br_b_value = mirror(br_b.v);

    const Discrepancy da = control_discrepancy(br_a.control, eq.a_star, kControlTolerance);
    const Discrepancy db = control_discrepancy(br_b_control, eq.b_star, kControlTolerance);
    rep.control_discrepancy_a = da.sup;
    rep.control_discrepancy_b = db.sup;
    rep.discrepancy_span_a = da.span;
    rep.discrepancy_span_b = db.span;

    rep.br_lower_a = br_a.lower_threshold;
    rep.br_upper_a = br_a.upper_threshold;
    rep.br_lower_b = 1.0 - br_b.upper_threshold;
    rep.br_upper_b = 1.0 - br_b.lower_threshold;
    rep.threshold_discrepancy_a =
        std::max(std::abs(rep.br_lower_a - eq.stable_lo), std::abs(rep.br_upper_a - eq.stable_hi));
    rep.threshold_discrepancy_b =
        std::max(std::abs(rep.br_upper_b - eq.stable_hi), std::abs(rep.br_lower_b - eq.stable_lo));

    for (std::size_t i = 0; i < n; ++i) {
        if (eq.a_star[i] > 0.0 && eq.b_star[i] > 0.0) ++rep.decoupling_violations;
        if (br_a.control[i] > 0.0 && br_b_control[i] > 0.0) ++rep.decoupling_violations;
    }

    note_kink(eq.kink_violation, "equilibrium", rep);
    note_kink(br_a.kink_violation, "best response of A", rep);
    note_kink(br_b.kink_violation, "best response of B", rep);

    rep.residual_a = br_a.residual;
    rep.residual_b = br_b.residual;

    const BenchmarkSolution bench_a = solve_benchmark(eq.params_a, 1.0, {.n = n});
    const MirroredBenchmark bench_b = mirror_for_b(solve_benchmark(eq.params_b, 1.0, {.n = n}));
    rep.dominance_control_a = max_excess(eq.a_star, bench_a.control);
    rep.dominance_value_a = max_excess(eq.v_a, bench_a.v);
    rep.dominance_control_b = max_excess(eq.b_star, bench_b.control);
    rep.dominance_value_b = max_excess(eq.v_b, bench_b.v);

    const double thr_tol = 2.0 * rep.h * (1.0 + 1e-9);
    rep.pass = rep.control_discrepancy_a <= kControlTolerance && rep.control_discrepancy_b <= kControlTolerance &&
               rep.threshold_discrepancy_a <= thr_tol && rep.threshold_discrepancy_b <= thr_tol &&
               rep.decoupling_violations == 0 && !rep.convex_kink;
    return rep;
}

double theta_star(const PlayerParams& pb) {
    validate(pb);
    const double x_b0 = 1.0 - benchmark_threshold(pb);
    if (x_b0 <= 1e-8) fail_argument("no finite threshold: deterrence for all parameters");
    return 18.0 / (x_b0 * x_b0 * x_b0);
}

bool sso_leq(double lo1, double hi1, double lo2, double hi2) noexcept { return lo1 <= lo2 && hi1 <= hi2; }

std::vector<double> log_axis(double from, double to, std::size_t count) {
    if (!(from > 0.0 && to > 0.0)) fail_argument("log_axis: endpoints must be positive");
    if (count == 0) fail_argument("log_axis: need at least one point");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = from;
        return out;
    }
    const double la = std::log(from), lb = std::log(to);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        out[i] = std::exp(la + t * (lb - la));
    }
    out.front() = from;
    out.back() = to;
    return out;
}

namespace {

Equilibrium welfare_equilibrium(const SweepPoint& pt, const PlayerParams& pb, std::size_t n) {
    if (pt.regime == Regime::Accommodating) return build_accommodating(pt.pa, pb, {.n = n});
    return build_deterrence(pt.pa, pb, 0.5 * (pt.stable_lo + pt.stable_hi), {.n = n});
}

}  // namespace

SweepResult sweep(const SweepSpec& spec) {
    validate(spec.pb);
    if (!(std::isfinite(spec.r_a) && spec.r_a > 0.0)) fail_argument("r_a must be a positive finite number");
    const auto& axis = spec.impatience;
    if (axis.empty()) fail_argument("sweep: empty axis");
    for (double k : axis) {
        if (!(std::isfinite(k) && k > 0.0)) fail_argument("sweep: axis values must be positive");
    }
    bool up = true, down = true;
    for (std::size_t i = 1; i < axis.size(); ++i) {
        up = up && axis[i] >= axis[i - 1];
        down = down && axis[i] <= axis[i - 1];
    }
    if (!up && !down) fail_argument("sweep: axis must be monotone");

    SweepResult res;
    try {
        res.theta = theta_star(spec.pb);
    } catch (const Error& e) {
        res.theta_reason = e.what();
    }

    for (double k : axis) {
        SweepPoint pt;
        pt.impatience = k;
        pt.pa = {spec.r_a, k / (spec.r_a * spec.r_a), Side::A};
        const RegimeInfo info = classify_regime(pt.pa, spec.pb);
        pt.x_a0 = info.x_a0;
        pt.x_b0 = info.x_b0;
        pt.regime = info.regime;
        pt.stable_lo = info.range_lo;
        pt.stable_hi = info.range_hi;
        res.points.push_back(pt);
    }

    for (std::size_t i = 1; i < res.points.size(); ++i) {
        SweepPoint& cur = res.points[i];
        const SweepPoint& prev = res.points[i - 1];
        const bool cur_smaller = cur.impatience <= prev.impatience;
        const SweepPoint& small = cur_smaller ? cur : prev;  // smaller r_a^2 c_a
        const SweepPoint& large = cur_smaller ? prev : cur;
        // Stable sets rise in the strong set order as r_a^2 c_a falls.
        cur.sso_ok = sso_leq(large.stable_lo, large.stable_hi, small.stable_lo, small.stable_hi);
        if (prev.regime != cur.regime) {
            cur.containment = Verdict::None;
            ++res.regime_flips;
        } else if (cur.regime == Regime::Accommodating) {
            // A's threshold moves up into a fixed B threshold: the set shrinks.
            const bool ok = small.stable_lo >= large.stable_lo && small.stable_hi <= large.stable_hi;
            cur.containment = ok ? Verdict::Pass : Verdict::Fail;
        } else {
            // The admissible range [x_b0, x_a0] widens as x_a0 rises.
            const bool ok = small.stable_lo <= large.stable_lo && small.stable_hi >= large.stable_hi;
            cur.containment = ok ? Verdict::Pass : Verdict::Fail;
        }
        res.all_sso = res.all_sso && cur.sso_ok;
        res.all_containment = res.all_containment && cur.containment != Verdict::Fail;
    }

    if (spec.welfare) {
        std::vector<Equilibrium> eqs;
        eqs.reserve(res.points.size());
        for (const SweepPoint& pt : res.points) eqs.push_back(welfare_equilibrium(pt, spec.pb, spec.n));
        const Grid& g = eqs.front().v_a.grid();
        for (std::size_t i = 1; i < res.points.size(); ++i) {
            const bool cur_smaller = res.points[i].impatience <= res.points[i - 1].impatience;
            const std::size_t ti = cur_smaller ? i : i - 1;
            const std::size_t bi = cur_smaller ? i - 1 : i;
            const SweepPoint& tp = res.points[ti];
            const SweepPoint& bp = res.points[bi];
            const Equilibrium& te = eqs[ti];
            const Equilibrium& be = eqs[bi];
            WelfareComparison wc;
            wc.index = i;
            const bool hypothesis = tp.pa.r <= bp.pa.r && tp.pa.c <= bp.pa.c && te.stable_lo >= be.stable_lo;
            wc.domain_hi = (tp.pa.r == bp.pa.r || te.stable_lo < tp.x_b0) ? 1.0 : te.stable_lo;
            double gain = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < g.size() && g.node(k) <= wc.domain_hi; ++k) {
                gain = std::min(gain, te.v_a[k] - be.v_a[k]);
            }
            wc.min_gain = gain;
            if (!hypothesis) {
                wc.verdict = Verdict::None;
                wc.note = "outside the comparison hypotheses";
            } else {
                wc.verdict = gain >= -1e-6 ? Verdict::Pass : Verdict::Fail;
            }
            res.welfare.push_back(wc);
        }
    }
    return res;
}

}  // namespace instab
