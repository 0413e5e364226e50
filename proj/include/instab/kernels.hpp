#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

/// Data-parallel inner loops. Every routine has a scalar reference
/// implementation and optional SIMD variants selected at runtime; all variants
/// produce bit-identical results (no FMA contraction, same operation order).
namespace instab::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

/// out[i] = max_k (base[i] + actions[k] * slope[i] - penalty[k]).
struct BellmanInputs {
    std::span<const double> base;
    std::span<const double> slope;
    std::span<const double> actions;
    std::span<const double> penalty;
};

struct KernelTable {
    Isa isa;

    /// out[i] = (v[i-1] - 2 v[i] + v[i+1]) * inv_h2 for 1 <= i <= n-2.
    /// out[0] and out[n-1] are left untouched.
    void (*second_diff)(std::span<const double> v, double inv_h2, std::span<double> out);

    void (*bellman_max)(const BellmanInputs& in, std::span<double> out);

    /// As bellman_max, also recording the lowest maximizing action index.
    void (*bellman_argmax)(const BellmanInputs& in, std::span<double> out,
                           std::span<std::uint32_t> arg);

    /// x[i] <- fold(x[i] + sqrt(2 * diffusion[i]) * sqrt_dt * z[i]) where fold
    /// reflects into [0, 1] (y < 0 -> -y, y > 1 -> 2 - y, repeated).
    void (*reflected_step)(std::span<double> x, std::span<const double> diffusion,
                           std::span<const double> z, double sqrt_dt);
};

const KernelTable& scalar_table() noexcept;

/// Every variant compiled in and supported by the running CPU, scalar first.
std::vector<const KernelTable*> available_tables();

/// Best supported variant. INSTAB_KERNELS=scalar forces the reference path.
const KernelTable& active() noexcept;

}  // namespace instab::kernels
