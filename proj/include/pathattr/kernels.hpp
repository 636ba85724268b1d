#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops used by the tensor, model, path, and integrator
// code. Every kernel has a scalar reference implementation and, on x86-64,
// an AVX2+FMA variant; the active table is chosen once at startup from CPU
// features (override with PATHATTR_KERNELS=scalar|avx2|auto).
namespace pathattr::kernels {

struct Ops {
    // dot(a, b) over n elements.
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum of a[0..n).
    double (*sum)(const double* a, std::size_t n);
    // sum |a[i] - b[i]|.
    double (*l1_diff)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i].
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // x[i] *= alpha.
    void (*scale)(double alpha, double* x, std::size_t n);
    // out[i] = a[i] + t * (b[i] - a[i]).
    void (*lerp)(const double* a, const double* b, double t, double* out, std::size_t n);
    // out[i] = a[i] - b[i].
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    // out[i] = a[i] * b[i].
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    // out[i] += a[i] * b[i].
    void (*mul_acc)(const double* a, const double* b, double* out, std::size_t n);
    // out[i] += g[i] * (a[i] - b[i]).
    void (*mul_diff_acc)(const double* g, const double* a, const double* b, double* out,
                         std::size_t n);
    // out[i] += g[i] * g[i] * s.
    void (*sq_scale_acc)(const double* g, double s, double* out, std::size_t n);
};

const Ops& scalar_ops();
#if defined(PATHATTR_X86_BUILD)
const Ops& avx2_ops();
#endif

bool cpu_has_avx2();
const Ops& active();
std::string active_name();

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline double sum(const double* a, std::size_t n) { return active().sum(a, n); }
inline double l1_diff(const double* a, const double* b, std::size_t n) {
    return active().l1_diff(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active().axpy(alpha, x, y, n);
}
inline void scale(double alpha, double* x, std::size_t n) { active().scale(alpha, x, n); }
inline void lerp(const double* a, const double* b, double t, double* out, std::size_t n) {
    active().lerp(a, b, t, out, n);
}
inline void sub(const double* a, const double* b, double* out, std::size_t n) {
    active().sub(a, b, out, n);
}
inline void mul(const double* a, const double* b, double* out, std::size_t n) {
    active().mul(a, b, out, n);
}
inline void mul_acc(const double* a, const double* b, double* out, std::size_t n) {
    active().mul_acc(a, b, out, n);
}
inline void mul_diff_acc(const double* g, const double* a, const double* b, double* out,
                         std::size_t n) {
    active().mul_diff_acc(g, a, b, out, n);
}
inline void sq_scale_acc(const double* g, double s, double* out, std::size_t n) {
    active().sq_scale_acc(g, s, out, n);
}

}  // namespace pathattr::kernels
