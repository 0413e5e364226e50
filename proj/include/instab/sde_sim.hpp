#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "instab/equilibrium.hpp"

namespace instab {

struct SimConfig {
    double x0 = 0.1;
    double dt = 1e-4;
    double t_max = 50.0;
    std::size_t n_paths = 1000;
    std::uint64_t seed = 42;
    double freeze_eps = 1e-8;      ///< diffusion below which a path stops
    double converge_delta = 0.02;  ///< "converged" = within this distance of the stable set
    std::size_t checkpoints = 32;  ///< geometric times in (0, t_max], plus t = 0
};

/// Throws InvalidArgument naming the offending field.
void validate(const SimConfig& cfg);

struct Checkpoint {
    double t = 0.0;
    double mean = 0.0;
    double mean_abs_dist = 0.0;   ///< distance to the stable set
    double dist_se = 0.0;         ///< standard error of mean_abs_dist
    double frac_converged = 0.0;
    double mean_increment = 0.0;  ///< since the previous checkpoint
    double se = 0.0;              ///< standard error of mean_increment
};

struct SimResult {
    SimConfig cfg;
    double stable_lo = 0.0;
    double stable_hi = 1.0;
    double band = 0.0;  ///< containment slack: the equilibrium grid spacing
    std::vector<Checkpoint> checkpoints;
    /// states[k][p]: path p at checkpoints[k].t
    std::vector<std::vector<double>> states;
    std::vector<double> path_max;  ///< extremes over every step, not just checkpoints
    std::vector<double> path_min;
    bool containment = true;
    double frac_converged = 0.0;  ///< at t_max
};

/// Standard normal variate keyed by (seed, path, step).
double keyed_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t step) noexcept;

/// Euler-Maruyama for dX = sqrt(2 (a + b)) dB with reflection into [0, 1].
/// A path freezes once the diffusion drops below freeze_eps or a step would
/// cross into the stable set; in the latter case it stops at the set's edge,
/// where the continuous path would have been absorbed.
SimResult simulate(const Equilibrium& eq, const SimConfig& cfg);

enum class InstabilityRegion { ASide, BSide };

struct SubmartingaleReport {
    InstabilityRegion region = InstabilityRegion::ASide;
    std::vector<double> mean_increment;
    std::vector<double> se;
    bool pass = true;
};

/// Checks every checkpoint-interval mean increment is >= -3 SE (A-side) or
/// <= +3 SE (B-side). Throws InvalidArgument if x0 is not in the region.
SubmartingaleReport submartingale_check(const SimResult& result, InstabilityRegion region);

}  // namespace instab
