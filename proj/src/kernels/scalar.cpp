#include <cmath>

#include "variants.hpp"

namespace instab::kernels::detail {
namespace {

void second_diff(std::span<const double> v, double inv_h2, std::span<double> out) {
    const std::size_t n = v.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out[i] = ((v[i - 1] - 2.0 * v[i]) + v[i + 1]) * inv_h2;
    }
}

void bellman_max(const BellmanInputs& in, std::span<double> out) {
    const std::size_t n = in.base.size();
    const std::size_t m = in.actions.size();
    for (std::size_t i = 0; i < n; ++i) {
        double best = (in.base[i] + in.actions[0] * in.slope[i]) - in.penalty[0];
        for (std::size_t k = 1; k < m; ++k) {
            const double cand = (in.base[i] + in.actions[k] * in.slope[i]) - in.penalty[k];
            best = cand > best ? cand : best;
        }
        out[i] = best;
    }
}

void bellman_argmax(const BellmanInputs& in, std::span<double> out, std::span<std::uint32_t> arg) {
    const std::size_t n = in.base.size();
    const std::size_t m = in.actions.size();
    for (std::size_t i = 0; i < n; ++i) {
        double best = (in.base[i] + in.actions[0] * in.slope[i]) - in.penalty[0];
        std::uint32_t best_k = 0;
        for (std::size_t k = 1; k < m; ++k) {
            const double cand = (in.base[i] + in.actions[k] * in.slope[i]) - in.penalty[k];
            if (cand > best) {
                best = cand;
                best_k = static_cast<std::uint32_t>(k);
            }
        }
        out[i] = best;
        arg[i] = best_k;
    }
}

void reflected_step(std::span<double> x, std::span<const double> diffusion,
                    std::span<const double> z, double sqrt_dt) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double scale = std::sqrt(2.0 * diffusion[i]) * sqrt_dt;
        x[i] = fold_unit(x[i] + scale * z[i]);
    }
}

}  // namespace

const KernelTable& scalar() {
    static const KernelTable table{Isa::Scalar, &second_diff, &bellman_max, &bellman_argmax,
                                   &reflected_step};
    return table;
}

}  // namespace instab::kernels::detail
