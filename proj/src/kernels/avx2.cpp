#include <immintrin.h>

#include <cmath>

#include "variants.hpp"

namespace instab::kernels::detail {
namespace {

void second_diff(std::span<const double> v, double inv_h2, std::span<double> out) {
    const std::size_t n = v.size();
    if (n < 3) return;
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d scale = _mm256_set1_pd(inv_h2);
    std::size_t i = 1;
    for (; i + 4 < n; i += 4) {
        const __m256d left = _mm256_loadu_pd(&v[i - 1]);
        const __m256d mid = _mm256_loadu_pd(&v[i]);
        const __m256d right = _mm256_loadu_pd(&v[i + 1]);
        const __m256d d = _mm256_add_pd(_mm256_sub_pd(left, _mm256_mul_pd(two, mid)), right);
        _mm256_storeu_pd(&out[i], _mm256_mul_pd(d, scale));
    }
    for (; i + 1 < n; ++i) out[i] = ((v[i - 1] - 2.0 * v[i]) + v[i + 1]) * inv_h2;
}

// Four nodes per lane group; the action loop is shared across lanes.
void bellman_max(const BellmanInputs& in, std::span<double> out) {
    const std::size_t n = in.base.size();
    const std::size_t m = in.actions.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d base = _mm256_loadu_pd(&in.base[i]);
        const __m256d slope = _mm256_loadu_pd(&in.slope[i]);
        __m256d best = _mm256_sub_pd(
            _mm256_add_pd(base, _mm256_mul_pd(_mm256_set1_pd(in.actions[0]), slope)),
            _mm256_set1_pd(in.penalty[0]));
        for (std::size_t k = 1; k < m; ++k) {
            const __m256d cand = _mm256_sub_pd(
                _mm256_add_pd(base, _mm256_mul_pd(_mm256_set1_pd(in.actions[k]), slope)),
                _mm256_set1_pd(in.penalty[k]));
            best = _mm256_blendv_pd(best, cand, _mm256_cmp_pd(cand, best, _CMP_GT_OQ));
        }
        _mm256_storeu_pd(&out[i], best);
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
    for (; i + 4 <= n; i += 4) {
        const __m256d base = _mm256_loadu_pd(&in.base[i]);
        const __m256d slope = _mm256_loadu_pd(&in.slope[i]);
        __m256d best = _mm256_sub_pd(
            _mm256_add_pd(base, _mm256_mul_pd(_mm256_set1_pd(in.actions[0]), slope)),
            _mm256_set1_pd(in.penalty[0]));
        __m256d best_k = _mm256_setzero_pd();
        for (std::size_t k = 1; k < m; ++k) {
            const __m256d cand = _mm256_sub_pd(
                _mm256_add_pd(base, _mm256_mul_pd(_mm256_set1_pd(in.actions[k]), slope)),
                _mm256_set1_pd(in.penalty[k]));
            const __m256d gt = _mm256_cmp_pd(cand, best, _CMP_GT_OQ);
            best = _mm256_blendv_pd(best, cand, gt);
            best_k = _mm256_blendv_pd(best_k, _mm256_set1_pd(static_cast<double>(k)), gt);
        }
        _mm256_storeu_pd(&out[i], best);
        alignas(32) double idx[4];
        _mm256_store_pd(idx, best_k);
        for (int l = 0; l < 4; ++l) arg[i + l] = static_cast<std::uint32_t>(idx[l]);
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
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d sdt = _mm256_set1_pd(sqrt_dt);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d scale =
            _mm256_mul_pd(_mm256_sqrt_pd(_mm256_mul_pd(two, _mm256_loadu_pd(&diffusion[i]))), sdt);
        __m256d y = _mm256_add_pd(_mm256_loadu_pd(&x[i]), _mm256_mul_pd(scale, _mm256_loadu_pd(&z[i])));
        for (;;) {
            const __m256d below = _mm256_cmp_pd(y, zero, _CMP_LT_OQ);
            y = _mm256_blendv_pd(y, _mm256_sub_pd(zero, y), below);
            const __m256d above = _mm256_cmp_pd(y, one, _CMP_GT_OQ);
            y = _mm256_blendv_pd(y, _mm256_sub_pd(two, y), above);
            const __m256d outside =
                _mm256_or_pd(_mm256_cmp_pd(y, zero, _CMP_LT_OQ), _mm256_cmp_pd(y, one, _CMP_GT_OQ));
            if (_mm256_movemask_pd(outside) == 0) break;
        }
        _mm256_storeu_pd(&x[i], y);
    }
    for (; i < n; ++i) {
        const double scale = std::sqrt(2.0 * diffusion[i]) * sqrt_dt;
        x[i] = fold_unit(x[i] + scale * z[i]);
    }
}

}  // namespace

const KernelTable& avx2() {
    static const KernelTable table{Isa::Avx2, &second_diff, &bellman_max, &bellman_argmax,
                                   &reflected_step};
    return table;
}

}  // namespace instab::kernels::detail
