#include "instab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "instab/error.hpp"

namespace instab {

Grid::Grid(double lo, double hi, std::size_t n) : lo_(lo), hi_(hi), n_(n), h_(0.0) {
    if (!(lo >= 0.0 && lo <= 1.0)) fail_argument("grid: lo must lie in [0, 1]");
    if (!(hi > lo && hi <= 1.0)) fail_argument("grid: hi must satisfy lo < hi <= 1");
    if (n < 3) fail_argument("grid: need at least 3 nodes");
    h_ = (hi - lo) / static_cast<double>(n - 1);
}

std::vector<double> Grid::nodes() const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = node(i);
    return out;
}

std::size_t Grid::nearest_index(double x) const noexcept {
    const double t = std::round((x - lo_) / h_);
    if (!(t > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(t), n_ - 1);
}

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) fail_argument("field: value count does not match grid");
    for (double v : values_) {
        if (!std::isfinite(v)) fail_argument("field: non-finite value");
    }
}

ScalarField ScalarField::sample(const Grid& grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(i));
    return ScalarField(grid, std::move(v));
}

ScalarField ScalarField::constant(const Grid& grid, double value) {
    return ScalarField(grid, std::vector<double>(grid.size(), value));
}

ScalarField ScalarField::identity(const Grid& grid) { return ScalarField(grid, grid.nodes()); }

double second_diff(const ScalarField& field, std::size_t i) {
    const std::size_t n = field.size();
    if (i < 1 || i + 1 >= n) fail_argument("second_diff: boundary node");
    const double h = field.grid().spacing();
    return (field[i - 1] - 2.0 * field[i] + field[i + 1]) / (h * h);
}

double interp_linear(const ScalarField& field, double x) {
    const Grid& g = field.grid();
    if (!(x >= g.lo() && x <= g.hi())) fail_argument("interp_linear: out of domain");
    const double t = (x - g.lo()) / g.spacing();
    // Snap round-off next to a node so values at nodes come back exactly.
    const double nearest = std::round(t);
    if (std::abs(t - nearest) <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t))
        return field[static_cast<std::size_t>(nearest)];
    std::size_t k = static_cast<std::size_t>(t);
    if (k + 1 >= g.size()) return field.back();
    const double frac = t - static_cast<double>(k);
    if (frac == 0.0) return field[k];
    return field[k] + frac * (field[k + 1] - field[k]);
}

ScalarField resample(const ScalarField& field, const Grid& target) {
    const Grid& src = field.grid();
    // Allow round-off at the shared endpoints.
    const double slack = 4.0 * std::numeric_limits<double>::epsilon();
    std::vector<double> v(target.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = std::clamp(target.node(i), src.lo(), src.hi());
        if (std::abs(x - target.node(i)) > slack) fail_argument("resample: target grid outside source");
        v[i] = interp_linear(field, x);
    }
    return ScalarField(target, std::move(v));
}

ScalarField mirror(const ScalarField& field) {
    const Grid& g = field.grid();
    Grid flipped(1.0 - g.hi(), 1.0 - g.lo(), g.size());
    std::vector<double> v(field.values().rbegin(), field.values().rend());
    return ScalarField(flipped, std::move(v));
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (!(tol > 0.0)) fail_argument("bisect: tol must be positive");
    if (lo > hi) std::swap(lo, hi);
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0)) {
        std::ostringstream msg;
        msg << "bracket invalid: f(" << lo << ")=" << flo << ", f(" << hi << ")=" << fhi;
        fail_argument(msg.str());
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

OdeState rk4_step(const SecondOrderRhs& g, const OdeState& s, double dx) {
    const double k1w = s.dw;
    const double k1p = g(s.x, s.w);
    const double k2w = s.dw + 0.5 * dx * k1p;
    const double k2p = g(s.x + 0.5 * dx, s.w + 0.5 * dx * k1w);
    const double k3w = s.dw + 0.5 * dx * k2p;
    const double k3p = g(s.x + 0.5 * dx, s.w + 0.5 * dx * k2w);
    const double k4w = s.dw + dx * k3p;
    const double k4p = g(s.x + dx, s.w + dx * k3w);
    return {s.x + dx, s.w + dx / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w),
            s.dw + dx / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)};
}

}  // namespace

Trajectory integrate_until(const SecondOrderRhs& g, OdeState init, const EventPredicate& stop,
                           double step, double x_end, double event_tol) {
    if (!(step > 0.0)) fail_argument("integrate_until: step must be positive");
    if (!(event_tol > 0.0)) fail_argument("integrate_until: event tolerance must be positive");
    Trajectory out;
    out.points.push_back(init);
    if (stop(init)) {
        out.event = init;
        return out;
    }
    const double x0 = init.x;
    OdeState cur = init;
    for (std::size_t k = 1;; ++k) {
        // Positions are x0 + k*step so long runs do not accumulate drift.
        double x_next = x0 + static_cast<double>(k) * step;
        const bool last = x_next >= x_end;
        if (last) x_next = x_end;
        const double dx = x_next - cur.x;
        if (!(dx > 0.0)) break;
        OdeState next = rk4_step(g, cur, dx);
        next.x = x_next;
        if (stop(next)) {
            double lo = 0.0;
            double hi = dx;
            OdeState hit = next;
            while (hi - lo > event_tol) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                OdeState trial = rk4_step(g, cur, mid);
                if (stop(trial)) {
                    hi = mid;
                    hit = trial;
                } else {
                    lo = mid;
                }
            }
            out.points.push_back(hit);
            out.event = hit;
            return out;
        }
        out.points.push_back(next);
        cur = next;
        if (last) break;
    }
    return out;
}

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n || n == 0) {
        fail_argument("solve_tridiagonal: size mismatch");
    }
    std::vector<double> c(n), d(n);
    double denom = diag[0];
    if (denom == 0.0) fail_solver("solve_tridiagonal: zero pivot at row 0");
    c[0] = upper[0] / denom;
    d[0] = rhs[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - lower[i] * c[i - 1];
        if (denom == 0.0 || !std::isfinite(denom)) {
            std::ostringstream msg;
            msg << "solve_tridiagonal: singular pivot at row " << i << " (diag=" << diag[i]
                << ", lower=" << lower[i] << ")";
            fail_solver(msg.str());
        }
        c[i] = i + 1 < n ? upper[i] / denom : 0.0;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    return d;
}

}  // namespace instab
