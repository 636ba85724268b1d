#include "pathattr/kernels.hpp"

#include <cstdlib>
#include <string>

namespace pathattr::kernels {

bool cpu_has_avx2() {
#if defined(PATHATTR_X86_BUILD)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

struct Selected {
    const Ops* ops;
    const char* name;
};

Selected select() {
    const char* env = std::getenv("PATHATTR_KERNELS");
    std::string mode = env ? env : "auto";
    if (mode == "scalar") return {&scalar_ops(), "scalar"};
#if defined(PATHATTR_X86_BUILD)
    if (mode == "avx2" && cpu_has_avx2()) return {&avx2_ops(), "avx2"};
    if (mode == "auto" && cpu_has_avx2()) return {&avx2_ops(), "avx2"};
#endif
    return {&scalar_ops(), "scalar"};
}

const Selected& selected() {
    static const Selected s = select();
    return s;
}

}  // namespace

const Ops& active() { return *selected().ops; }

std::string active_name() { return selected().name; }

}  // namespace pathattr::kernels
