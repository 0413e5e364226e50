#include "instab/mdp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "instab/error.hpp"
#include "instab/kernels.hpp"

namespace instab {

double mdp_action_bound(const PlayerParams& p) {
    validate(p);
    return std::sqrt(2.0 / p.c);
}

MdpSolution solve_mdp(const MdpSpec& spec) {
    const PlayerParams& p = spec.params;
    const Grid& g = spec.grid;
    const std::size_t n = g.size();
    if (n < 3) fail_argument("solve_mdp: grid needs at least 3 nodes");
    if (spec.actions < 1) fail_argument("solve_mdp: action grid is empty");
    const double a_max = mdp_action_bound(p);

    std::vector<double> b(n, 0.0);
    if (spec.opponent) {
        if (!(spec.opponent->grid() == g)) fail_argument("solve_mdp: opponent must live on the oracle grid");
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = (*spec.opponent)[i];
            if (b[i] < 0.0) fail_argument("solve_mdp: opponent volatility must be non-negative");
        }
    }
    const double b_max = *std::max_element(b.begin(), b.end());
    const double h = g.spacing();
    const double h2 = h * h;
    const double delta = spec.delta.value_or(h2 / (2.0 * (a_max + b_max)));
    if (!(delta > 0.0)) fail_argument("solve_mdp: delta must be positive");
    if (2.0 * (a_max + b_max) * delta / h2 > 1.0 + 1e-12) {
        std::ostringstream msg;
        msg << "solve_mdp: CFL violated: 2 (a_max + max b) delta / h^2 = "
            << 2.0 * (a_max + b_max) * delta / h2 << " > 1";
        fail_argument(msg.str());
    }

    const double gamma = std::exp(-p.r * delta);
    const double flow = -std::expm1(-p.r * delta);
    const double ratio = delta / h2;

    std::vector<double> actions(spec.actions), penalty(spec.actions);
    for (std::size_t k = 0; k < spec.actions; ++k) {
        actions[k] = spec.actions == 1 ? 0.0
                                       : a_max * static_cast<double>(k) / static_cast<double>(spec.actions - 1);
        penalty[k] = flow * (0.5 * p.c) * actions[k] * actions[k];
    }

    std::vector<double> x = g.nodes();
    std::vector<double> v = x;
    std::vector<double> next(n), base(n), slope(n);
    std::vector<std::uint32_t> arg(n);
    const auto& kt = kernels::active();
    const kernels::BellmanInputs in{base, slope, actions, penalty};

    auto prepare = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            double lap;
            if (i == 0) lap = 2.0 * (v[1] - v[0]);
            else if (i + 1 == n) lap = 2.0 * (v[n - 2] - v[n - 1]);
            else lap = (v[i - 1] - 2.0 * v[i]) + v[i + 1];
            base[i] = flow * x[i] + gamma * (v[i] + b[i] * ratio * lap);
            slope[i] = gamma * ratio * lap;
        }
    };

    std::size_t it = 0;
    for (;;) {
        if (it >= spec.max_iterations) fail_solver("solve_mdp: value iteration did not converge");
        prepare();
        kt.bellman_max(in, next);
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - v[i]));
        v.swap(next);
        ++it;
        if (change < spec.tol) break;
    }

    prepare();
    kt.bellman_argmax(in, next, arg);
    std::vector<double> policy(n);
    for (std::size_t i = 0; i < n; ++i) policy[i] = actions[arg[i]];
    return {ScalarField(g, std::move(v)), ScalarField(g, std::move(policy)), delta, a_max, it};
}

FieldDifference compare(const ScalarField& a, const ScalarField& b) {
    const ScalarField other = a.grid() == b.grid() ? b : resample(b, a.grid());
    FieldDifference d{0.0, a.grid().node(0)};
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = std::abs(a[i] - other[i]);
        if (e > d.sup) d = {e, a.grid().node(i)};
    }
    return d;
}

}  // namespace instab
