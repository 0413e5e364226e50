#pragma once

#include <optional>
#include <string>
#include <vector>

namespace instab {

/// Outcome of one acceptance check.
struct Check {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct SuiteOptions {
    double oracle_tolerance = 1e-2;  ///< sup-norm bound for the MDP comparison
};

Check check_closed_form();
Check check_hjb_residuals();
Check check_mdp_oracle(const SuiteOptions& opts = {});
Check check_fixed_points();
Check check_regime_boundary();
Check check_comparative_statics();
Check check_vanishing_exponents();
Check check_dynamics();
Check check_monotone_best_response();
Check check_dominance();

/// All ten checks in id order.
std::vector<Check> run_all(const SuiteOptions& opts = {});

/// closed-form, oracle, fixed-point, statics, simulation
const std::vector<std::string>& suite_names();

/// Checks grouped under a suite name; throws InvalidArgument for unknown names.
std::vector<Check> run_suite(const std::string& name, const SuiteOptions& opts = {});

}  // namespace instab
