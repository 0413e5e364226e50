#pragma once

#include <cstddef>
#include <optional>

#include "instab/grid.hpp"

namespace instab {

/// Which end of [0, 1] the player prefers: A gains x per unit time, B gains 1 - x.
enum class Side { A, B };

/// One player's discount rate r and quadratic instability-cost coefficient c.
struct PlayerParams {
    double r = 1.0;
    double c = 1.0;
    Side side = Side::A;

    /// r^2 c, the only combination the inactive benchmark depends on.
    double impatience_cost() const noexcept { return r * r * c; }
    /// K = r sqrt(2c) in w'' = K sqrt(w), w = v - x.
    double curvature_gain() const noexcept;
};

/// Throws InvalidArgument unless r > 0 and c > 0 (both finite).
void validate(const PlayerParams& p);

enum class BoundaryMode { SmoothPasting, AbsorbedAtDomainEnd };

/// Shape of the benchmark control: convex when it vanishes smoothly, otherwise
/// convex then concave with the inflection point recorded.
struct ControlShape {
    enum class Kind { Convex, ConvexConcave };
    Kind kind = Kind::Convex;
    std::optional<double> inflection;
};

/// Inactive-benchmark solution on [0, domain_hi] in the player's own coordinate.
struct BenchmarkSolution {
    PlayerParams params;
    double domain_hi = 1.0;
    double threshold = 1.0;  ///< satisficing threshold x*
    BoundaryMode boundary_mode = BoundaryMode::SmoothPasting;
    ScalarField v;
    ScalarField control;
    double v0 = 0.0;
    double left_slope_at_threshold = 1.0;
    ControlShape shape;
};

struct BenchmarkOptions {
    std::size_t n = 2001;          ///< nodes on [0, domain_hi]
    double w0_lo = 1e-14;          ///< shooting bracket for v(0) - 0
    double w0_hi = 1.0;
    double event_tol = kDefaultEventTol;
    /// Trajectory samples with w below tail_fraction * w0 are replaced by the
    /// similarity tail w ~ (x* - x)^4 of the contact solution.
    double tail_fraction = 1e-4;
};

/// x* = (18 / (r^2 c))^(1/3) when r^2 c >= 18; nullopt when the upper bound of
/// the state space binds (x* would exceed 1).
std::optional<double> closed_form_threshold(const PlayerParams& p);

/// Quartic value x + (r^2 c / 72)(x* - x)^4 and control (r/6)(x* - x)^2 on
/// [0, x*], identity and zero beyond. Requires r^2 c >= 18.
BenchmarkSolution closed_form_solution(const PlayerParams& p, std::size_t n = 2001);

/// Shooting solve of w'' = K sqrt(w+), w(0) = w0, w'(0) = -1 on [0, domain_hi].
BenchmarkSolution solve_benchmark(const PlayerParams& p, double domain_hi,
                                  const BenchmarkOptions& opts = {});

ControlShape classify_shape(const BenchmarkSolution& sol);

/// Fields of a side-B solution mapped back to x = 1 - y.
struct MirroredBenchmark {
    double threshold = 0.0;  ///< x_b^0 = 1 - y*
    ScalarField v;
    ScalarField control;
};

MirroredBenchmark mirror_for_b(const BenchmarkSolution& sol);

/// Least-squares slope of log(control) against log(distance to `threshold`)
/// over nodes whose distance lies in [d_lo, d_hi]. `approach_from_left` selects
/// approach from the left (threshold above the nodes) or from the right.
double vanishing_exponent(const ScalarField& control, double threshold, double d_lo, double d_hi,
                          bool approach_from_left = true);

}  // namespace instab
