#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "instab/benchmark.hpp"
#include "instab/grid.hpp"

namespace instab {

/// Slope discontinuity of a value function. Admissible kinks are concave
/// (slope_left >= slope_right).
struct KinkReport {
    double location;
    double slope_left;
    double slope_right;
};

/// Region boundaries of a solved value function: v > x below `lower`,
/// v = x on [lower, upper], v < x above `upper` (each up to `band`).
struct Thresholds {
    double lower = 0.0;
    double upper = 1.0;
    double band = 0.0;
    bool degenerate = false;  ///< no beneficial region was found
};

/// Default band separating v from the identity: h^4, the size of the
/// quartic contact term one node away from a smooth-pasting threshold.
double default_threshold_band(const Grid& grid);

enum class Initialization { Identity, Zero };

struct BrOptions {
    double tol = 1e-10;              ///< sup-norm change that ends the iteration
    std::size_t max_iterations = 500;
    std::optional<double> band;      ///< threshold band; default_threshold_band if unset
    Initialization init = Initialization::Identity;
};

struct BrReport {
    std::size_t iterations = 0;
    std::vector<double> change_history;
    bool damped = false;  ///< policy averaging switched on after oscillation
};

struct BestResponse {
    PlayerParams params;
    ScalarField opponent;
    ScalarField v;
    ScalarField control;
    double lower_threshold = 0.0;
    double upper_threshold = 1.0;
    double residual = 0.0;  ///< sup-norm HJB residual at interior nodes
    std::optional<KinkReport> kink;
    std::string kink_violation;  ///< set when detect_kink finds a convex kink
    BrReport report;
};

/// F(x, v, v'') = r v - r x - b v'' - (v''_+)^2 / (2 r c) at interior nodes.
/// Boundary entries hold min(|F| with the reflected difference, |one-sided slope|).
ScalarField hjb_residual(const ScalarField& v, const ScalarField& opponent, const PlayerParams& p);

/// Howard policy iteration on the monotone central-difference scheme over the
/// full state space [0, 1]. Throws Solver if the iteration does not converge.
BestResponse solve_br(const PlayerParams& p, const ScalarField& opponent, const BrOptions& opts = {});

Thresholds extract_thresholds(const ScalarField& v, std::optional<double> band = std::nullopt);

/// Compares quadratic extrapolations of v from either side of every cell and
/// reports the largest concave slope gap above 10 h. Throws Solver ("convex
/// kink") if a cluster of large gaps peaks with a convex sign.
std::optional<KinkReport> detect_kink(const ScalarField& v);

/// Policy-improvement step: max(0, D2 v) / (r c) with reflected ghost nodes.
ScalarField improve_policy(const ScalarField& v, const PlayerParams& p);

}  // namespace instab
