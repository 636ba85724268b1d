#include "pathattr/kernels.hpp"

#include <cmath>

namespace pathattr::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double l1_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void lerp_scalar(const double* a, const double* b, double t, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + t * (b[i] - a[i]);
}

void sub_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

void mul_diff_acc_scalar(const double* g, const double* a, const double* b, double* out,
                         std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += g[i] * (a[i] - b[i]);
}

void sq_scale_acc_scalar(const double* g, double s, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] += g[i] * g[i] * s;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        dot_scalar,     sum_scalar, l1_diff_scalar,      axpy_scalar,
        scale_scalar,   lerp_scalar, sub_scalar,         mul_scalar,
        mul_acc_scalar, mul_diff_acc_scalar, sq_scale_acc_scalar,
    };
    return ops;
}

}  // namespace pathattr::kernels
