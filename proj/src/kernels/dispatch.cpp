#include <cstdlib>
#include <string_view>

#include "sklab/kernels/kernels.hpp"

namespace sklab::kern {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* avx2_kernels() {
#if defined(__x86_64__) || defined(_M_X64)
    if (!avx2_available()) return nullptr;
    static const KernelTable table = {
        "avx2", &philox_fill_avx2, &exp_pd_avx2, &mode_sum_avx2,
        &interp3_avx2, &interp_t2_avx2,
    };
    return &table;
#else
    return nullptr;
#endif
}

const KernelTable& active() {
    static const KernelTable* selected = [] {
        std::string_view want = "auto";
        if (const char* env = std::getenv("SKLAB_KERNEL")) want = env;
        if (want == "scalar") return &scalar_kernels();
        const KernelTable* avx2 = avx2_kernels();
        if (want == "avx2" && avx2) return avx2;
        return avx2 ? avx2 : &scalar_kernels();
    }();
    return *selected;
}

}  // namespace sklab::kern
