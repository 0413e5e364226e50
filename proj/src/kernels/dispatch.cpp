#include <cstdlib>
#include <string_view>

#include "variants.hpp"

namespace instab::kernels {

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

const KernelTable& scalar_table() noexcept { return detail::scalar(); }

std::vector<const KernelTable*> available_tables() {
    std::vector<const KernelTable*> out{&detail::scalar()};
#if defined(INSTAB_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2")) out.push_back(&detail::avx2());
#endif
#if defined(INSTAB_HAVE_NEON)
    out.push_back(&detail::neon());
#endif
    return out;
}

const KernelTable& active() noexcept {
    static const KernelTable* chosen = [] {
        const char* env = std::getenv("INSTAB_KERNELS");
        if (env != nullptr && std::string_view(env) == "scalar") return &detail::scalar();
        return available_tables().back();
    }();
    return *chosen;
}

}  // namespace instab::kernels
