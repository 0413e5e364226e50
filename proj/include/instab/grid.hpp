#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace instab {

/// Uniform grid on a subinterval [lo, hi] of the state space [0, 1].
class Grid {
public:
    Grid(double lo, double hi, std::size_t n);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return h_; }

    /// Node i is lo + i*h; the last node is returned as hi exactly.
    double node(std::size_t i) const noexcept {
        return i + 1 == n_ ? hi_ : lo_ + static_cast<double>(i) * h_;
    }

    std::vector<double> nodes() const;

    /// Index of the node closest to x (clamped to the grid).
    std::size_t nearest_index(double x) const noexcept;

    bool operator==(const Grid& other) const noexcept {
        return lo_ == other.lo_ && hi_ == other.hi_ && n_ == other.n_;
    }

private:
    double lo_;
    double hi_;
    std::size_t n_;
    double h_;
};

/// A function sampled on the nodes of a Grid. All values are finite.
class ScalarField {
public:
    ScalarField(Grid grid, std::vector<double> values);

    /// Samples f at every node.
    static ScalarField sample(const Grid& grid, const std::function<double(double)>& f);
    static ScalarField constant(const Grid& grid, double value);
    static ScalarField identity(const Grid& grid);

    const Grid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double front() const noexcept { return values_.front(); }
    double back() const noexcept { return values_.back(); }

    /// Mutable access for in-place construction; callers keep values finite.
    std::vector<double>& mutable_values() noexcept { return values_; }

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Central second difference (v[i-1] - 2 v[i] + v[i+1]) / h^2 at an interior node.
double second_diff(const ScalarField& field, std::size_t i);

/// Piecewise-linear interpolant; exact at nodes.
double interp_linear(const ScalarField& field, double x);

/// Resamples a field onto another grid by linear interpolation. The target grid
/// must lie inside the source grid.
ScalarField resample(const ScalarField& field, const Grid& target);

/// Maps a field into the mirrored coordinate y = 1 - x: the grid [lo, hi]
/// becomes [1 - hi, 1 - lo] and the value order is reversed.
ScalarField mirror(const ScalarField& field);

inline constexpr double kDefaultRootTol = 1e-12;
inline constexpr double kDefaultEventTol = 1e-12;

/// Bisection on a sign change of f over [lo, hi]. Stops once the bracket is
/// narrower than tol (or cannot shrink further in floating point) and returns
/// its midpoint.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol = kDefaultRootTol);

/// State of a scalar second-order ODE w'' = g(x, w).
struct OdeState {
    double x;
    double w;
    double dw;
};

using SecondOrderRhs = std::function<double(double x, double w)>;
using EventPredicate = std::function<bool(const OdeState&)>;

struct Trajectory {
    /// Every accepted step, starting with the initial state. When an event
    /// fires the refined event state is the last entry.
    std::vector<OdeState> points;
    std::optional<OdeState> event;
};

/// Fixed-step classical RK4 for w'' = g(x, w) from `init` until `stop` fires or
/// x reaches x_end. A step that triggers the event is shortened by bisection on
/// its length until the bracket is below event_tol; the first state on the
/// triggering side is reported as the event.
Trajectory integrate_until(const SecondOrderRhs& g, OdeState init, const EventPredicate& stop,
                           double step, double x_end, double event_tol = kDefaultEventTol);

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[0]` and
/// `upper[n-1]` are ignored. Throws if a pivot vanishes.
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

}  // namespace instab
