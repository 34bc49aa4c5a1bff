#include "minima/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace minima::kernels {

const KernelTable* avx2_table_unchecked() noexcept;

bool cpu_supports_avx2() noexcept {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* avx2_table() noexcept {
    if (!cpu_supports_avx2()) return nullptr;
    return avx2_table_unchecked();
}

namespace {

const KernelTable& select() noexcept {
    if (const char* forced = std::getenv("MINIMA_KERNELS")) {
        if (std::string_view(forced) == "scalar") return scalar_table();
    }
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
    static const KernelTable& table = select();
    return table;
}

}  // namespace minima::kernels
