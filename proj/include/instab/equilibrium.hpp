#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "instab/benchmark.hpp"
#include "instab/grid.hpp"
#include "instab/viscosity_br.hpp"

namespace instab {

enum class Regime { Accommodating, Deterrence };

const char* regime_name(Regime r) noexcept;

struct RegimeInfo {
    Regime regime = Regime::Accommodating;
    double x_a0 = 0.0;  ///< A's benchmark threshold
    double x_b0 = 1.0;  ///< B's benchmark threshold in x-coordinates
    /// Admissible deterrence stable points [x_b0, x_a0] minus {0, 1}.
    double range_lo = 0.0;
    double range_hi = 0.0;
};

/// Benchmark threshold on [0, 1] in the player's own coordinate: the closed
/// form when r^2 c >= 18, else 1 (the control stays active up to the far end).
double benchmark_threshold(const PlayerParams& p);

RegimeInfo classify_regime(const PlayerParams& pa, const PlayerParams& pb);

struct VerificationReport {
    double h = 0.0;
    double control_discrepancy_a = 0.0;  ///< sup |a_BR - a_star|
    double control_discrepancy_b = 0.0;
    /// Span of nodes whose control discrepancy exceeds the tolerance.
    std::optional<std::pair<double, double>> discrepancy_span_a;
    std::optional<std::pair<double, double>> discrepancy_span_b;
    double threshold_discrepancy_a = 0.0;
    double threshold_discrepancy_b = 0.0;
    double br_lower_a = 0.0, br_upper_a = 1.0;  ///< A's best-response thresholds (x)
    double br_lower_b = 0.0, br_upper_b = 1.0;  ///< B's best-response thresholds (x)
    std::size_t decoupling_violations = 0;     ///< equilibrium and best-response fields
    bool convex_kink = false;
    std::string kink_message;
    double residual_a = 0.0;
    double residual_b = 0.0;
    /// max(a_star - benchmark control) and max(v_a - benchmark value); B mirrored.
    double dominance_control_a = 0.0;
    double dominance_value_a = 0.0;
    double dominance_control_b = 0.0;
    double dominance_value_b = 0.0;
    bool pass = false;
};

inline constexpr double kControlTolerance = 5e-3;
inline constexpr double kDominanceTolerance = 1e-3;

/// Both strategies and value functions on a common grid over [0, 1]. v_b is
/// B's value (flow payoff 1 - x) expressed in x-coordinates.
struct Equilibrium {
    Regime regime = Regime::Accommodating;
    std::optional<double> xbar;  ///< deterrence stable point (snapped to the grid)
    PlayerParams params_a;
    PlayerParams params_b;
    double x_a0 = 0.0;
    double x_b0 = 1.0;
    ScalarField a_star;
    ScalarField b_star;
    ScalarField v_a;
    ScalarField v_b;
    double stable_lo = 0.0;
    double stable_hi = 1.0;
    std::optional<KinkReport> kink_a;
    std::optional<KinkReport> kink_b;
    /// Non-empty when an assembled value function has a convex kink.
    std::string kink_violation;
    std::optional<VerificationReport> verification;
};

struct EquilibriumOptions {
    std::size_t n = 2001;
};

Equilibrium build_accommodating(const PlayerParams& pa, const PlayerParams& pb,
                                const EquilibriumOptions& opts = {});

/// Deterrence equilibrium with stable point xbar (snapped to the nearest node).
/// Throws InvalidArgument if the regime is accommodating or xbar lies outside
/// [x_b0, x_a0] \ {0, 1}.
Equilibrium build_deterrence(const PlayerParams& pa, const PlayerParams& pb, double xbar,
                             const EquilibriumOptions& opts = {});

/// The deterrence construction at xbar without any admissibility check. Used
/// to show that such candidates fail verification when the regime is
/// accommodating.
Equilibrium build_restricted_candidate(const PlayerParams& pa, const PlayerParams& pb, double xbar,
                                       const EquilibriumOptions& opts = {});

enum class PassiveSide { Upper, Lower };

/// Solves b v'' - r v + r x = 0 on [inner, hi] (Upper) or [lo, inner] (Lower) of
/// the opponent's grid, with v = x at the inner end and zero slope at the outer
/// end. Rows with b < eps_b pin v = x. The inner end is snapped to a node.
ScalarField passive_value(const PlayerParams& p, const ScalarField& opponent, double inner,
                          PassiveSide side, double eps_b = 1e-12);

/// Best-response check of both players against the equilibrium strategies.
VerificationReport verify_equilibrium(const Equilibrium& eq, const BrOptions& br = {});

/// r_a^2 c_a at which A's benchmark threshold equals B's. Throws
/// InvalidArgument when B's threshold is 0 (every r_a^2 c_a gives deterrence).
double theta_star(const PlayerParams& pb);

/// Strong set order on closed intervals: [a1, b1] <= [a2, b2] iff a1 <= a2 and b1 <= b2.
bool sso_leq(double lo1, double hi1, double lo2, double hi2) noexcept;

enum class Verdict { Pass, Fail, None };

const char* verdict_name(Verdict v) noexcept;

struct SweepSpec {
    PlayerParams pb{7.0, 15.0, Side::B};
    double r_a = 7.0;                 ///< fixed; c_a = k / r_a^2
    std::vector<double> impatience;   ///< axis of k = r_a^2 c_a, monotone
    bool welfare = false;
    std::size_t n = 2001;             ///< grid for welfare equilibria
};

struct SweepPoint {
    double impatience = 0.0;
    PlayerParams pa;
    double x_a0 = 0.0;
    double x_b0 = 0.0;
    Regime regime = Regime::Accommodating;
    double stable_lo = 0.0;
    double stable_hi = 0.0;
    bool sso_ok = true;                    ///< against the previous point
    Verdict containment = Verdict::None;   ///< against the previous point
};

/// Payoff comparison between consecutive points; `tilde` is the point with the
/// smaller r_a^2 c_a. Deterrence equilibria use the midpoint of their range.
struct WelfareComparison {
    std::size_t index = 0;  ///< later point of the pair
    double domain_hi = 0.0;  ///< comparison domain [0, domain_hi]
    double min_gain = 0.0;   ///< min of v_tilde - v over the domain
    Verdict verdict = Verdict::None;
    std::string note;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::optional<double> theta;
    std::string theta_reason;
    std::size_t regime_flips = 0;
    std::vector<WelfareComparison> welfare;
    bool all_sso = true;
    bool all_containment = true;  ///< every pair with a verdict passed
};

SweepResult sweep(const SweepSpec& spec);

/// Log-spaced axis from `from` to `to` inclusive (either direction).
std::vector<double> log_axis(double from, double to, std::size_t count);

}  // namespace instab
