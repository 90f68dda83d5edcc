#include "snrbeam/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace snrbeam::kernels {

namespace scalar {

void zaxpy(std::size_t n, cd a, const cd* x, cd* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

cd zdotc(std::size_t n, const cd* x, const cd* y) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        const double yr = y[i].real(), yi = y[i].imag();
        re += xr * yr + xi * yi;
        im += xr * yi - xi * yr;
    }
    return {re, im};
}

void zscal(std::size_t n, cd a, cd* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void daxpy(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double ddot(std::size_t n, const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

void dscal(std::size_t n, double a, double* x) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

} // namespace scalar

namespace {

Lane resolve_lane() {
#if defined(__x86_64__)
    if (const char* env = std::getenv("SNRBEAM_KERNEL_LANE")) {
        if (std::strcmp(env, "scalar") == 0) return Lane::Scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2::supported()) return Lane::Avx2;
        return Lane::Scalar;
    }
    if (avx2::supported()) return Lane::Avx2;
#endif
    return Lane::Scalar;
}

const Lane g_lane = resolve_lane();

} // namespace

Lane active_lane() { return g_lane; }

const char* lane_name(Lane lane) {
    switch (lane) {
        case Lane::Avx2: return "avx2";
        default: return "scalar";
    }
}

void zaxpy(std::size_t n, cd a, const cd* x, cd* y) {
#if defined(__x86_64__)
    if (g_lane == Lane::Avx2) return avx2::zaxpy(n, a, x, y);
#endif
    scalar::zaxpy(n, a, x, y);
}

cd zdotc(std::size_t n, const cd* x, const cd* y) {
#if defined(__x86_64__)
    if (g_lane == Lane::Avx2) return avx2::zdotc(n, x, y);
#endif
    return scalar::zdotc(n, x, y);
}

void zscal(std::size_t n, cd a, cd* x) {
#if defined(__x86_64__)
    if (g_lane == Lane::Avx2) return avx2::zscal(n, a, x);
#endif
    scalar::zscal(n, a, x);
}

void daxpy(std::size_t n, double a, const double* x, double* y) {
#if defined(__x86_64__)
    if (g_lane == Lane::Avx2) return avx2::daxpy(n, a, x, y);
#endif
    scalar::daxpy(n, a, x, y);
}

double ddot(std::size_t n, const double* x, const double* y) {
#if defined(__x86_64__)
    if (g_lane == Lane::Avx2) return avx2::ddot(n, x, y);
#endif
    return scalar::ddot(n, x, y);
}

void dscal(std::size_t n, double a, double* x) {
#if defined(__x86_64__)
    if (g_lane == Lane::Avx2) return avx2::dscal(n, a, x);
#endif
    scalar::dscal(n, a, x);
}

} // namespace snrbeam::kernels
