#include "instab/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "instab/error.hpp"

namespace instab {

double PlayerParams::curvature_gain() const noexcept { return r * std::sqrt(2.0 * c); }

void validate(const PlayerParams& p) {
    if (!(std::isfinite(p.r) && p.r > 0.0)) fail_argument("r must be a positive finite number");
    if (!(std::isfinite(p.c) && p.c > 0.0)) fail_argument("c must be a positive finite number");
}

std::optional<double> closed_form_threshold(const PlayerParams& p) {
    validate(p);
    const double k = p.impatience_cost();
    if (k < 18.0) return std::nullopt;
    return std::cbrt(18.0 / k);
}

BenchmarkSolution closed_form_solution(const PlayerParams& p, std::size_t n) {
    const auto x_star = closed_form_threshold(p);
    if (!x_star) fail_argument("no closed form; use shooting (r^2 c < 18)");
    const double a4 = p.impatience_cost() / 72.0;
    const double a2 = p.r / 6.0;
    const Grid grid(0.0, 1.0, n);
    std::vector<double> v(n), a(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.node(i);
        const double s = std::max(*x_star - x, 0.0);
        v[i] = x + a4 * s * s * s * s;
        a[i] = a2 * s * s;
    }
    BenchmarkSolution sol{
        .params = p,
        .domain_hi = 1.0,
        .threshold = *x_star,
        .boundary_mode = BoundaryMode::SmoothPasting,
        .v = ScalarField(grid, std::move(v)),
        .control = ScalarField(grid, std::move(a)),
        .v0 = a4 * std::pow(*x_star, 4),
        .left_slope_at_threshold = 1.0,
        .shape = {},
    };
    return sol;
}

namespace {

enum class ShotKind { Hit, Turn, None };

struct Shot {
    double w0;
    ShotKind kind;
    Trajectory traj;
};

class Shooter {
public:
    Shooter(const PlayerParams& p, double domain_hi, double step, double event_tol)
        : gain_(p.curvature_gain()), domain_hi_(domain_hi), step_(step), event_tol_(event_tol) {}

    Shot fire(double w0) const {
        const double gain = gain_;
        auto rhs = [gain](double, double w) { return gain * std::sqrt(std::max(w, 0.0)); };
        auto stop = [](const OdeState& s) { return s.w <= 0.0 || s.dw >= 0.0; };
        Trajectory traj = integrate_until(rhs, {0.0, w0, -1.0}, stop, step_, domain_hi_, event_tol_);
        ShotKind kind = ShotKind::None;
        if (traj.event) kind = traj.event->w <= 0.0 ? ShotKind::Hit : ShotKind::Turn;
        return {w0, kind, std::move(traj)};
    }

private:
    double gain_;
    double domain_hi_;
    double step_;
    double event_tol_;
};

const char* kind_name(ShotKind k) {
    switch (k) {
        case ShotKind::Hit: return "hit";
        case ShotKind::Turn: return "turn";
        case ShotKind::None: return "no-event";
    }
    return "?";
}

// Linear interpolation of w on the stored trajectory; x must lie within it.
double trajectory_w(const std::vector<OdeState>& pts, double x) {
    auto it = std::lower_bound(pts.begin(), pts.end(), x,
                               [](const OdeState& s, double xv) { return s.x < xv; });
    if (it == pts.end()) return pts.back().w;
    if (it->x == x || it == pts.begin()) return it->w;
    const OdeState& b = *it;
    const OdeState& a = *(it - 1);
    const double t = (x - a.x) / (b.x - a.x);
    return a.w + t * (b.w - a.w);
}

}  // namespace

BenchmarkSolution solve_benchmark(const PlayerParams& p, double domain_hi, const BenchmarkOptions& opts) {
    validate(p);
    if (!(domain_hi > 0.0 && domain_hi <= 1.0)) fail_argument("domain_hi must lie in (0, 1]");
    if (opts.n < 3) fail_argument("benchmark grid needs at least 3 nodes");
    const Grid grid(0.0, domain_hi, opts.n);
    const double h = grid.spacing();
    if (domain_hi <= h) fail_argument("domain_hi must exceed the grid spacing");

    const Shooter shooter(p, domain_hi, h / 4.0, opts.event_tol);

    Shot lo = shooter.fire(opts.w0_lo);
    Shot hi = shooter.fire(opts.w0_hi);
    if (lo.kind != ShotKind::Hit || hi.kind == ShotKind::Hit) {
        std::ostringstream msg;
        msg << "shooting bracket failed: w0=" << opts.w0_lo << " -> " << kind_name(lo.kind)
            << ", w0=" << opts.w0_hi << " -> " << kind_name(hi.kind);
        fail_solver(msg.str());
    }

    // Hit trajectories must land further right as w0 grows; checked on every trial.
    std::vector<std::pair<double, double>> hits{{lo.w0, lo.traj.event->x}};
    for (;;) {
        const double mid = 0.5 * (lo.w0 + hi.w0);
        if (mid <= lo.w0 || mid >= hi.w0) break;
        Shot trial = shooter.fire(mid);
        if (trial.kind == ShotKind::Hit) {
            hits.emplace_back(trial.w0, trial.traj.event->x);
            lo = std::move(trial);
        } else {
            hi = std::move(trial);
        }
    }
    std::sort(hits.begin(), hits.end());
    for (std::size_t k = 1; k < hits.size(); ++k) {
        if (hits[k].second + opts.event_tol < hits[k - 1].second) {
            std::ostringstream msg;
            msg << "shooting monotonicity violated: w0=" << hits[k - 1].first << " hits at "
                << hits[k - 1].second << " but w0=" << hits[k].first << " hits at " << hits[k].second;
            fail_solver(msg.str());
        }
    }

    const double w0 = lo.w0;
    const std::vector<OdeState>& pts = lo.traj.points;

    // Similarity tail: on the contact solution w = A (x* - x)^4, so the
    // remaining distance is -4 w / w' at any point of the trajectory.
    const double w_cut = opts.tail_fraction * w0;
    std::size_t cut = 0;
    while (cut + 1 < pts.size() && pts[cut + 1].w >= w_cut && pts[cut + 1].dw < 0.0) ++cut;
    const OdeState anchor = pts[cut];
    const double tail_len = anchor.dw < 0.0 ? -4.0 * anchor.w / anchor.dw : 0.0;
    const double x_paste = anchor.x + tail_len;

    const double gain = p.curvature_gain();
    const double control_scale = gain / (p.r * p.c);
    std::vector<double> w(grid.size());
    BoundaryMode mode;
    double threshold;
    double left_slope;
    if (x_paste <= domain_hi) {
        mode = BoundaryMode::SmoothPasting;
        threshold = x_paste;
        left_slope = 1.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.node(i);
            if (x <= anchor.x) {
                w[i] = trajectory_w(pts, x);
            } else if (x < x_paste) {
                const double s = (x_paste - x) / tail_len;
                w[i] = anchor.w * s * s * s * s;
            } else {
                w[i] = 0.0;
            }
        }
    } else {
        mode = BoundaryMode::AbsorbedAtDomainEnd;
        threshold = domain_hi;
        left_slope = 1.0 + lo.traj.event->dw;
        const double x_end = lo.traj.event->x;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.node(i);
            w[i] = (i + 1 == grid.size() || x >= x_end) ? 0.0 : std::max(trajectory_w(pts, x), 0.0);
        }
    }

    std::vector<double> v(grid.size()), a(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        v[i] = grid.node(i) + w[i];
        a[i] = control_scale * std::sqrt(std::max(w[i], 0.0));
    }
    BenchmarkSolution sol{
        .params = p,
        .domain_hi = domain_hi,
        .threshold = threshold,
        .boundary_mode = mode,
        .v = ScalarField(grid, std::move(v)),
        .control = ScalarField(grid, std::move(a)),
        .v0 = w0,
        .left_slope_at_threshold = left_slope,
        .shape = {},
    };
    sol.shape = classify_shape(sol);
    return sol;
}

ControlShape classify_shape(const BenchmarkSolution& sol) {
    if (sol.boundary_mode == BoundaryMode::SmoothPasting) return {ControlShape::Kind::Convex, std::nullopt};
    // Inflection: last node of the convex stretch before the curvature of the
    // control turns negative for good.
    const ScalarField& a = sol.control;
    const Grid& g = a.grid();
    std::size_t last_convex = 0;
    for (std::size_t i = 1; i + 1 < a.size(); ++i) {
        if (a[i] <= 0.0) break;
        if (second_diff(a, i) >= 0.0) last_convex = i;
    }
    return {ControlShape::Kind::ConvexConcave, g.node(last_convex)};
}

MirroredBenchmark mirror_for_b(const BenchmarkSolution& sol) {
    if (sol.params.side != Side::B) fail_argument("mirror_for_b: solution is not for player B");
    return {1.0 - sol.threshold, mirror(sol.v), mirror(sol.control)};
}

double vanishing_exponent(const ScalarField& control, double threshold, double d_lo, double d_hi,
                          bool approach_from_left) {
    const Grid& g = control.grid();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < control.size(); ++i) {
        const double d = approach_from_left ? threshold - g.node(i) : g.node(i) - threshold;
        if (d < d_lo || d > d_hi || !(control[i] > 0.0)) continue;
        const double lx = std::log(d);
        const double ly = std::log(control[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count < 3) fail_argument("vanishing_exponent: fewer than 3 nodes in the fit window");
    const double nc = static_cast<double>(count);
    return (nc * sxy - sx * sy) / (nc * sxx - sx * sx);
}

}  // namespace instab
