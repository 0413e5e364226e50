#pragma once

#include "instab/kernels.hpp"

namespace instab::kernels::detail {

const KernelTable& scalar();
#if defined(INSTAB_HAVE_AVX2)
const KernelTable& avx2();
#endif
#if defined(INSTAB_HAVE_NEON)
const KernelTable& neon();
#endif

/// Folds y into [0, 1] by repeated reflection at the endpoints.
inline double fold_unit(double y) {
    while (y < 0.0 || y > 1.0) {
        if (y < 0.0) y = -y;
        if (y > 1.0) y = 2.0 - y;
    }
    return y;
}

}  // namespace instab::kernels::detail
