// AVX2/FMA lane. Compiled with -mavx2 -mfma; callers gate on supported().

#if defined(__x86_64__)

#include "snrbeam/kernels.hpp"

#include <immintrin.h>

namespace snrbeam::kernels::avx2 {

bool supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

// Complex multiply on interleaved (re,im,re,im) lanes:
// (ar+i*ai)(xr+i*xi) = (ar*xr - ai*xi) + i*(ar*xi + ai*xr)
void zaxpy(std::size_t n, cd a, const cd* x, cd* y) {
    const std::size_t pairs = n / 2;
    const double* xp = reinterpret_cast<const double*>(x);
    double* yp = reinterpret_cast<double*>(y);
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_setr_pd(-a.imag(), a.imag(), -a.imag(), a.imag());
    for (std::size_t i = 0; i < pairs; ++i) {
        const __m256d xv = _mm256_loadu_pd(xp + 4 * i);
        const __m256d xs = _mm256_permute_pd(xv, 0b0101);
        __m256d acc = _mm256_loadu_pd(yp + 4 * i);
        acc = _mm256_fmadd_pd(ar, xv, acc);
        acc = _mm256_fmadd_pd(ai, xs, acc);
        _mm256_storeu_pd(yp + 4 * i, acc);
    }
    for (std::size_t i = 2 * pairs; i < n; ++i) y[i] += a * x[i];
}

// conj(x).y: re += xr*yr + xi*yi, im += xr*yi - xi*yr
cd zdotc(std::size_t n, const cd* x, const cd* y) {
    const std::size_t pairs = n / 2;
    const double* xp = reinterpret_cast<const double*>(x);
    const double* yp = reinterpret_cast<const double*>(y);
    __m256d re_acc = _mm256_setzero_pd();
    __m256d im_acc = _mm256_setzero_pd();
    const __m256d sign = _mm256_setr_pd(1.0, -1.0, 1.0, -1.0);
    for (std::size_t i = 0; i < pairs; ++i) {
        const __m256d xv = _mm256_loadu_pd(xp + 4 * i);
        const __m256d yv = _mm256_loadu_pd(yp + 4 * i);
        const __m256d ys = _mm256_permute_pd(yv, 0b0101);
        re_acc = _mm256_fmadd_pd(xv, yv, re_acc);
        im_acc = _mm256_fmadd_pd(_mm256_mul_pd(xv, sign), ys, im_acc);
    }
    alignas(32) double rbuf[4], ibuf[4];
    _mm256_store_pd(rbuf, re_acc);
    _mm256_store_pd(ibuf, im_acc);
    double re = (rbuf[0] + rbuf[2]) + (rbuf[1] + rbuf[3]);
    double im = (ibuf[0] + ibuf[2]) + (ibuf[1] + ibuf[3]);
    for (std::size_t i = 2 * pairs; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        const double yr = y[i].real(), yi = y[i].imag();
        re += xr * yr + xi * yi;
        im += xr * yi - xi * yr;
    }
    return {re, im};
}

void zscal(std::size_t n, cd a, cd* x) {
    const std::size_t pairs = n / 2;
    double* xp = reinterpret_cast<double*>(x);
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_setr_pd(-a.imag(), a.imag(), -a.imag(), a.imag());
    for (std::size_t i = 0; i < pairs; ++i) {
        const __m256d xv = _mm256_loadu_pd(xp + 4 * i);
        const __m256d xs = _mm256_permute_pd(xv, 0b0101);
        const __m256d res = _mm256_fmadd_pd(ai, xs, _mm256_mul_pd(ar, xv));
        _mm256_storeu_pd(xp + 4 * i, res);
    }
    for (std::size_t i = 2 * pairs; i < n; ++i) x[i] *= a;
}

void daxpy(std::size_t n, double a, const double* x, double* y) {
    const std::size_t quads = n / 4;
    const __m256d av = _mm256_set1_pd(a);
    for (std::size_t i = 0; i < quads; ++i) {
        __m256d acc = _mm256_loadu_pd(y + 4 * i);
        acc = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + 4 * i), acc);
        _mm256_storeu_pd(y + 4 * i, acc);
    }
    for (std::size_t i = 4 * quads; i < n; ++i) y[i] += a * x[i];
}

double ddot(std::size_t n, const double* x, const double* y) {
    const std::size_t quads = n / 4;
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t i = 0; i < quads; ++i)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + 4 * i), _mm256_loadu_pd(y + 4 * i), acc);
    alignas(32) double buf[4];
    _mm256_store_pd(buf, acc);
    double s = (buf[0] + buf[2]) + (buf[1] + buf[3]);
    for (std::size_t i = 4 * quads; i < n; ++i) s += x[i] * y[i];
    return s;
}

void dscal(std::size_t n, double a, double* x) {
    const std::size_t quads = n / 4;
    const __m256d av = _mm256_set1_pd(a);
    for (std::size_t i = 0; i < quads; ++i)
        _mm256_storeu_pd(x + 4 * i, _mm256_mul_pd(av, _mm256_loadu_pd(x + 4 * i)));
    for (std::size_t i = 4 * quads; i < n; ++i) x[i] *= a;
}

} // namespace snrbeam::kernels::avx2

#endif // __x86_64__
