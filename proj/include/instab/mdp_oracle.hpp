#pragma once

#include <cstddef>
#include <optional>

#include "instab/benchmark.hpp"
#include "instab/grid.hpp"

namespace instab {

/// Discrete-time trinomial chain approximating one player's control problem.
struct MdpSpec {
    Grid grid{0.0, 1.0, 201};
    std::size_t actions = 101;      ///< uniform levels on [0, a_max]
    std::optional<double> delta;    ///< time step; CFL equality if unset
    PlayerParams params;
    std::optional<ScalarField> opponent;  ///< b(x) on `grid`; zero if unset
    double tol = 1e-12;
    std::size_t max_iterations = 50'000'000;
};

struct MdpSolution {
    ScalarField value;
    ScalarField policy;  ///< greedy action at each node
    double delta = 0.0;
    double a_max = 0.0;
    std::size_t iterations = 0;
};

/// a_max = sqrt(2 / c).
double mdp_action_bound(const PlayerParams& p);

/// Value iteration from V = x. Throws InvalidArgument on a CFL violation.
MdpSolution solve_mdp(const MdpSpec& spec);

struct FieldDifference {
    double sup = 0.0;
    double at = 0.0;
};

/// Sup-norm difference; `b` is resampled onto the grid of `a` if the grids differ.
FieldDifference compare(const ScalarField& a, const ScalarField& b);

}  // namespace instab
