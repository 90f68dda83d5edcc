#include "doctest.h"

#include "snrbeam/kernels.hpp"
#include "snrbeam/rng.hpp"

#include <vector>

using namespace snrbeam;
namespace k = snrbeam::kernels;

namespace {

std::vector<cd> random_cvec(Rng& rng, std::size_t n) {
    std::vector<cd> v(n);
    for (auto& x : v) x = rng.cscg(1.0);
    return v;
}

std::vector<double> random_rvec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

} // namespace

TEST_CASE("scalar lane reference values") {
    std::vector<cd> x = {{1, 2}, {3, -1}};
    std::vector<cd> y = {{0, 1}, {2, 2}};
    // conj(x).y = (1-2i)(0+i) + (3+i)(2+2i) = (2+i) + (4+8i) = 6+9i
    cd d = k::scalar::zdotc(2, x.data(), y.data());
    CHECK(d.real() == doctest::Approx(6.0));
    CHECK(d.imag() == doctest::Approx(9.0));

    k::scalar::zaxpy(2, cd(2.0, 0.0), x.data(), y.data());
    CHECK(y[0] == cd(2, 5));
    CHECK(y[1] == cd(8, 0));
}

#if defined(__x86_64__)
TEST_CASE("avx2 lane matches scalar lane") {
    if (!k::avx2::supported()) return;
    Rng rng(77);
    for (std::size_t n : {0u, 1u, 2u, 3u, 5u, 8u, 33u, 100u, 257u}) {
        auto x = random_cvec(rng, n);
        auto y0 = random_cvec(rng, n);
        auto y1 = y0;
        const cd a = rng.cscg(1.0);

        k::scalar::zaxpy(n, a, x.data(), y0.data());
        k::avx2::zaxpy(n, a, x.data(), y1.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(y0[i] - y1[i]) <= 1e-13 * (1.0 + std::abs(y0[i])));

        const cd d0 = k::scalar::zdotc(n, x.data(), y0.data());
        const cd d1 = k::avx2::zdotc(n, x.data(), y0.data());
        CHECK(std::abs(d0 - d1) <= 1e-12 * (1.0 + std::abs(d0)));

        auto xs = x;
        auto xv = x;
        k::scalar::zscal(n, a, xs.data());
        k::avx2::zscal(n, a, xv.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(xs[i] - xv[i]) <= 1e-13 * (1.0 + std::abs(xs[i])));

        auto rx = random_rvec(rng, n);
        auto ry0 = random_rvec(rng, n);
        auto ry1 = ry0;
        k::scalar::daxpy(n, 1.7, rx.data(), ry0.data());
        k::avx2::daxpy(n, 1.7, rx.data(), ry1.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(ry0[i] == doctest::Approx(ry1[i]).epsilon(1e-13));

        const double s0 = k::scalar::ddot(n, rx.data(), ry0.data());
        const double s1 = k::avx2::ddot(n, rx.data(), ry0.data());
        CHECK(s0 == doctest::Approx(s1).epsilon(1e-12));
    }
}
#endif

TEST_CASE("active lane reports a valid name") {
    const char* name = k::lane_name(k::active_lane());
    CHECK((std::string(name) == "scalar" || std::string(name) == "avx2"));
}
