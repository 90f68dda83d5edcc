#pragma once

// Low-level vector kernels used by the dense matrix layer.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active lane is chosen once at startup from CPUID and can be
// forced with the environment variable SNRBEAM_KERNEL_LANE=scalar|avx2.
// The two lanes are equivalence-tested against each other; they may differ
// in the last bits because of FMA and reassociation.

#include <complex>
#include <cstddef>

namespace snrbeam::kernels {

using cd = std::complex<double>;

enum class Lane { Scalar, Avx2 };

Lane active_lane();
const char* lane_name(Lane lane);

// y += a*x (complex, interleaved re/im storage)
void zaxpy(std::size_t n, cd a, const cd* x, cd* y);
// sum conj(x[i]) * y[i]
cd zdotc(std::size_t n, const cd* x, const cd* y);
// x *= a
void zscal(std::size_t n, cd a, cd* x);

void daxpy(std::size_t n, double a, const double* x, double* y);
double ddot(std::size_t n, const double* x, const double* y);
void dscal(std::size_t n, double a, double* x);

// Direct entry points for lane-equivalence tests.
namespace scalar {
void zaxpy(std::size_t n, cd a, const cd* x, cd* y);
cd zdotc(std::size_t n, const cd* x, const cd* y);
void zscal(std::size_t n, cd a, cd* x);
void daxpy(std::size_t n, double a, const double* x, double* y);
double ddot(std::size_t n, const double* x, const double* y);
void dscal(std::size_t n, double a, double* x);
} // namespace scalar

#if defined(__x86_64__)
namespace avx2 {
bool supported();
void zaxpy(std::size_t n, cd a, const cd* x, cd* y);
cd zdotc(std::size_t n, const cd* x, const cd* y);
void zscal(std::size_t n, cd a, cd* x);
void daxpy(std::size_t n, double a, const double* x, double* y);
double ddot(std::size_t n, const double* x, const double* y);
void dscal(std::size_t n, double a, double* x);
} // namespace avx2
#endif

} // namespace snrbeam::kernels
