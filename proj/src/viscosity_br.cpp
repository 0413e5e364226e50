#include "instab/viscosity_br.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "instab/error.hpp"
#include "instab/kernels.hpp"

namespace instab {

double default_threshold_band(const Grid& grid) {
    const double h = grid.spacing();
    return h * h * h * h;
}

namespace {

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* what) {
    if (!(a.grid() == b.grid())) fail_argument(std::string(what) + ": grid mismatch");
}

void require_unit_grid(const Grid& g, const char* what) {
    if (g.lo() != 0.0 || g.hi() != 1.0) fail_argument(std::string(what) + ": grid must span [0, 1]");
}

// Discrete v'' with reflected ghost nodes, computed on w = v - x. The identity
// contributes nothing at interior nodes and +-2/h at the two ends.
void curvature_of_excess(std::span<const double> w, double h, std::span<double> out) {
    const std::size_t n = w.size();
    const double inv_h2 = 1.0 / (h * h);
    kernels::active().second_diff(w, inv_h2, out);
    out[0] = 2.0 * (w[1] - w[0]) * inv_h2 + 2.0 / h;
    out[n - 1] = 2.0 * (w[n - 2] - w[n - 1]) * inv_h2 - 2.0 / h;
}

double hamiltonian(double excess, double b, double m, const PlayerParams& p) {
    const double mp = std::max(m, 0.0);
    return p.r * excess - b * m - mp * mp / (2.0 * p.r * p.c);
}

}  // namespace

ScalarField hjb_residual(const ScalarField& v, const ScalarField& opponent, const PlayerParams& p) {
    validate(p);
    require_same_grid(v, opponent, "hjb_residual");
    const Grid& g = v.grid();
    const std::size_t n = g.size();
    const double h = g.spacing();
    std::vector<double> w(n), m(n), out(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = v[i] - g.node(i);
    const double inv_h2 = 1.0 / (h * h);
    kernels::active().second_diff(w, inv_h2, m);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = hamiltonian(w[i], opponent[i], m[i], p);

    // Ends: the reflected difference, relaxed by the one-sided slope.
    const double m0 = 2.0 * (v[1] - v[0]) * inv_h2;
    const double mn = 2.0 * (v[n - 2] - v[n - 1]) * inv_h2;
    out[0] = std::min(std::abs(hamiltonian(w[0], opponent[0], m0, p)), std::abs((v[1] - v[0]) / h));
    out[n - 1] = std::min(std::abs(hamiltonian(w[n - 1], opponent[n - 1], mn, p)),
                          std::abs((v[n - 1] - v[n - 2]) / h));
    return ScalarField(g, std::move(out));
}

ScalarField improve_policy(const ScalarField& v, const PlayerParams& p) {
    validate(p);
    const Grid& g = v.grid();
    const std::size_t n = g.size();
    std::vector<double> w(n), m(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = v[i] - g.node(i);
    curvature_of_excess(w, g.spacing(), m);
    const double inv_rc = 1.0 / (p.r * p.c);
    for (double& a : m) a = std::max(a, 0.0) * inv_rc;
    return ScalarField(g, std::move(m));
}

namespace {

// Howard iteration on one grid, starting by evaluating the policy `a`. On
// return w holds the value excess and `a` its improved policy. Returns false on
// hitting the iteration cap; the report accumulates across levels.
bool policy_iteration(const PlayerParams& p, const Grid& g, std::span<const double> b,
                      std::vector<double>& a, std::vector<double>& w, const BrOptions& opts,
                      BrReport& report) {
    const std::size_t n = g.size();
    const double h = g.spacing();
    const double inv_h2 = 1.0 / (h * h);
    const double inv_rc = 1.0 / (p.r * p.c);
    const double half_rc = 0.5 * p.r * p.c;
    std::vector<double> m(n), lower(n), diag(n), upper(n), rhs(n);
    std::vector<double> history;
    bool damped = false;

    for (std::size_t it = 0; it < opts.max_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = a[i] + b[i];
            lower[i] = upper[i] = 0.0;
            if (!(d > 0.0)) {
                diag[i] = 1.0;
                rhs[i] = 0.0;
                continue;
            }
            const double k = d * inv_h2;
            diag[i] = p.r + 2.0 * k;
            rhs[i] = -half_rc * a[i] * a[i];
            if (i == 0) {
                upper[i] = -2.0 * k;
                rhs[i] += 2.0 * d / h;
            } else if (i + 1 == n) {
                lower[i] = -2.0 * k;
                rhs[i] -= 2.0 * d / h;
            } else {
                lower[i] = -k;
                upper[i] = -k;
            }
        }
        std::vector<double> next = solve_tridiagonal(lower, diag, upper, rhs);

        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - w[i]));
        w = std::move(next);
        history.push_back(change);
        report.change_history.push_back(change);
        ++report.iterations;

        const std::size_t k = history.size();
        if (!damped && k >= 3 && history[k - 1] > history[k - 2] && history[k - 2] > history[k - 3]) {
            damped = true;
            report.damped = true;
        }

        curvature_of_excess(w, h, m);
        for (std::size_t i = 0; i < n; ++i) {
            const double improved = std::max(m[i], 0.0) * inv_rc;
            a[i] = damped ? 0.5 * (a[i] + improved) : improved;
        }
        if (change < opts.tol) return true;
    }
    return false;
}

// Grid sizes of the nested solve, coarsest first; each level roughly halves
// the spacing of the previous one.
std::vector<std::size_t> level_sizes(std::size_t n) {
    std::vector<std::size_t> sizes{n};
    while (sizes.back() > 65) sizes.push_back((sizes.back() - 1) / 2 + 1);
    std::reverse(sizes.begin(), sizes.end());
    return sizes;
}

}  // namespace

BestResponse solve_br(const PlayerParams& p, const ScalarField& opponent, const BrOptions& opts) {
    validate(p);
    const Grid& g = opponent.grid();
    require_unit_grid(g, "solve_br");
    for (std::size_t i = 0; i < opponent.size(); ++i) {
        if (opponent[i] < 0.0) {
            std::ostringstream msg;
            msg << "solve_br: negative opponent value " << opponent[i] << " at x=" << g.node(i);
            fail_argument(msg.str());
        }
    }
    if (!(opts.tol > 0.0)) fail_argument("solve_br: tol must be positive");

    const std::size_t n = g.size();
    BrReport report;

    // Starting from the identity, Howard iteration extends the active region by
    // one node per step. Solving coarse-to-fine limits that creep to a few
    // nodes per level.
    std::vector<double> w, a;
    std::optional<Grid> prev;
    for (std::size_t level_n : level_sizes(n)) {
        const Grid lg(0.0, 1.0, level_n);
        std::vector<double> b(level_n);
        for (std::size_t i = 0; i < level_n; ++i) b[i] = interp_linear(opponent, lg.node(i));
        if (!prev) {
            w.assign(level_n, 0.0);
            if (opts.init == Initialization::Zero) {
                for (std::size_t i = 0; i < level_n; ++i) w[i] = -lg.node(i);
            }
            a.resize(level_n);
            curvature_of_excess(w, lg.spacing(), a);
            for (double& ai : a) ai = std::max(ai, 0.0) / (p.r * p.c);
        } else {
            // The coarse policy carries over; interpolated values would put
            // spurious zero-curvature nodes inside the active region.
            w = resample(ScalarField(*prev, std::move(w)), lg).mutable_values();
            a = resample(ScalarField(*prev, std::move(a)), lg).mutable_values();
        }
        prev = lg;
        if (!policy_iteration(p, lg, b, a, w, opts, report)) {
            std::ostringstream msg;
            msg << "solve_br: no convergence after " << opts.max_iterations << " iterations on a "
                << level_n << "-node grid; last changes:";
            const auto& hist = report.change_history;
            for (std::size_t k = hist.size() > 5 ? hist.size() - 5 : 0; k < hist.size(); ++k) {
                msg << ' ' << hist[k];
            }
            fail_solver(msg.str());
        }
    }

    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = g.node(i) + w[i];
    ScalarField value(g, std::move(v));
    ScalarField control = improve_policy(value, p);

    const ScalarField res = hjb_residual(value, opponent, p);
    double sup = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) sup = std::max(sup, std::abs(res[i]));

    const Thresholds t = extract_thresholds(value, opts.band);
    BestResponse out{
        .params = p,
        .opponent = opponent,
        .v = std::move(value),
        .control = std::move(control),
        .lower_threshold = t.lower,
        .upper_threshold = t.upper,
        .residual = sup,
        .kink = std::nullopt,
        .kink_violation = {},
        .report = std::move(report),
    };
    try {
        out.kink = detect_kink(out.v);
    } catch (const Error& e) {
        out.kink_violation = e.what();
    }
    return out;
}

Thresholds extract_thresholds(const ScalarField& v, std::optional<double> band) {
    const Grid& g = v.grid();
    const double eps = band.value_or(default_threshold_band(g));
    if (!(eps >= 0.0)) fail_argument("extract_thresholds: band must be non-negative");
    const std::size_t n = g.size();

    Thresholds t;
    t.band = eps;
    std::size_t first_neutral = 0;
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (v[i] - g.node(i) > eps) {
            first_neutral = i + 1;
            found = true;
        }
    }
    if (!found) {
        t.lower = g.lo();
        t.degenerate = true;
    } else {
        t.lower = first_neutral < n ? g.node(first_neutral) : g.hi();
    }
    t.upper = g.hi();
    for (std::size_t i = first_neutral; i < n; ++i) {
        if (g.node(i) - v[i] > eps) {
            t.upper = g.node(i > first_neutral ? i - 1 : first_neutral);
            break;
        }
    }
    return t;
}

std::optional<KinkReport> detect_kink(const ScalarField& v) {
    const Grid& g = v.grid();
    const std::size_t n = g.size();
    if (n < 6) return std::nullopt;
    const double h = g.spacing();
    const double tol = 10.0 * h;

    // For the cell [x_k, x_k+1], extrapolate quadratics through three nodes on
    // each side to the cell midpoint. If the kink lies in the cell neither
    // stencil crosses it and the gap is the full slope jump; smooth v gives
    // a gap of O(h^2).
    const std::size_t first = 2, last = n - 4;
    std::vector<double> left(n, 0.0), right(n, 0.0), gap(n, 0.0), rough(n, 0.0);
    for (std::size_t k = first; k <= last; ++k) {
        left[k] = (2.0 * v[k] - 3.0 * v[k - 1] + v[k - 2]) / h;
        right[k] = (-2.0 * v[k + 1] + 3.0 * v[k + 2] - v[k + 3]) / h;
        gap[k] = left[k] - right[k];
        rough[k] = std::abs(v[k] - 2.0 * v[k - 1] + v[k - 2]) + std::abs(v[k + 1] - 2.0 * v[k + 2] + v[k + 3]);
    }

    // Neighbouring cells have a stencil straddling the kink and can show a gap
    // of either sign. Within each cluster of large gaps the cell whose stencils
    // are smoothest is the one containing the kink.
    std::optional<KinkReport> best;
    double best_gap = 0.0;
    std::size_t k = first;
    while (k <= last) {
        if (std::abs(gap[k]) <= tol) {
            ++k;
            continue;
        }
        std::size_t cell = k, seen = k, j = k;
        while (j + 1 <= last && j + 1 - seen <= 3) {
            ++j;
            if (std::abs(gap[j]) > tol) {
                seen = j;
                if (rough[j] < rough[cell]) cell = j;
            }
        }
        k = seen + 1;
        const double jump = gap[cell];
        double offset = (v[cell + 1] - v[cell] - right[cell] * h) / jump;
        offset = std::clamp(offset, 0.0, h);
        const double at = g.node(offset < 0.5 * h ? cell : cell + 1);
        if (jump < 0.0) {
            std::ostringstream msg;
            msg << "convex kink: solution invalid (x=" << at << ", left slope " << left[cell]
                << ", right slope " << right[cell] << ")";
            fail_solver(msg.str());
        }
        if (jump > best_gap) {
            best_gap = jump;
            best = KinkReport{at, left[cell], right[cell]};
        }
    }
    return best;
}

}  // namespace instab
