#include <arm_neon.h>

#include <cmath>

#include "variants.hpp"

namespace instab::kernels::detail {
namespace {

void second_diff(std::span<const double> v, double inv_h2, std::span<double> out) {
    const std::size_t n = v.size();
    if (n < 3) return;
    const float64x2_t two = vdupq_n_f64(2.0);
    const float64x2_t scale = vdupq_n_f64(inv_h2);
    std::size_t i = 1;
    for (; i + 2 < n; i += 2) {
        const float64x2_t left = vld1q_f64(&v[i - 1]);
        const float64x2_t mid = vld1q_f64(&v[i]);
        const float64x2_t right = vld1q_f64(&v[i + 1]);
        const float64x2_t d = vaddq_f64(vsubq_f64(left, vmulq_f64(two, mid)), right);
        vst1q_f64(&out[i], vmulq_f64(d, scale));
    }
    for (; i + 1 < n; ++i) out[i] = ((v[i - 1] - 2.0 * v[i]) + v[i + 1]) * inv_h2;
}

inline float64x2_t candidate(float64x2_t base, float64x2_t slope, double action, double penalty) {
    return vsubq_f64(vaddq_f64(base, vmulq_f64(vdupq_n_f64(action), slope)), vdupq_n_f64(penalty));
}

void bellman_max(const BellmanInputs& in, std::span<double> out) {
    const std::size_t n = in.base.size();
    const std::size_t m = in.actions.size();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t base = vld1q_f64(&in.base[i]);
        const float64x2_t slope = vld1q_f64(&in.slope[i]);
        float64x2_t best = candidate(base, slope, in.actions[0], in.penalty[0]);
        for (std::size_t k = 1; k < m; ++k) {
            const float64x2_t cand = candidate(base, slope, in.actions[k], in.penalty[k]);
            best = vbslq_f64(vcgtq_f64(cand, best), cand, best);
        }
        vst1q_f64(&out[i], best);
    }
    for (; i < n; ++i) {
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
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t base = vld1q_f64(&in.base[i]);
        const float64x2_t slope = vld1q_f64(&in.slope[i]);
        float64x2_t best = candidate(base, slope, in.actions[0], in.penalty[0]);
        float64x2_t best_k = vdupq_n_f64(0.0);
        for (std::size_t k = 1; k < m; ++k) {
            const float64x2_t cand = candidate(base, slope, in.actions[k], in.penalty[k]);
            const uint64x2_t gt = vcgtq_f64(cand, best);
            best = vbslq_f64(gt, cand, best);
            best_k = vbslq_f64(gt, vdupq_n_f64(static_cast<double>(k)), best_k);
        }
        vst1q_f64(&out[i], best);
        arg[i] = static_cast<std::uint32_t>(vgetq_lane_f64(best_k, 0));
        arg[i + 1] = static_cast<std::uint32_t>(vgetq_lane_f64(best_k, 1));
    }
    for (; i < n; ++i) {
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
    const std::size_t n = x.size();
    const float64x2_t two = vdupq_n_f64(2.0);
    const float64x2_t zero = vdupq_n_f64(0.0);
    const float64x2_t one = vdupq_n_f64(1.0);
    const float64x2_t sdt = vdupq_n_f64(sqrt_dt);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t scale = vmulq_f64(vsqrtq_f64(vmulq_f64(two, vld1q_f64(&diffusion[i]))), sdt);
        float64x2_t y = vaddq_f64(vld1q_f64(&x[i]), vmulq_f64(scale, vld1q_f64(&z[i])));
        for (;;) {
            y = vbslq_f64(vcltq_f64(y, zero), vsubq_f64(zero, y), y);
            y = vbslq_f64(vcgtq_f64(y, one), vsubq_f64(two, y), y);
            const uint64x2_t outside = vorrq_u64(vcltq_f64(y, zero), vcgtq_f64(y, one));
            if ((vgetq_lane_u64(outside, 0) | vgetq_lane_u64(outside, 1)) == 0) break;
        }
        vst1q_f64(&x[i], y);
    }
    for (; i < n; ++i) {
        const double scale = std::sqrt(2.0 * diffusion[i]) * sqrt_dt;
        x[i] = fold_unit(x[i] + scale * z[i]);
    }
}

}  // namespace

const KernelTable& neon() {
    static const KernelTable table{Isa::Neon, &second_diff, &bellman_max, &bellman_argmax,
                                   &reflected_step};
    return table;
}

}  // namespace instab::kernels::detail
