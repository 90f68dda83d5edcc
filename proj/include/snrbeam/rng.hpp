#pragma once

// Deterministic random source. mt19937_64 has a fully specified output
// sequence, and the double / Gaussian transforms below avoid the
// implementation-defined std distributions, so streams are reproducible
// across standard libraries.

#include "snrbeam/matrix.hpp"

#include <cstdint>
#include <random>

namespace snrbeam {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stable stream derivation for independent substreams (trials, samples).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x5851f42d4c957f2dULL));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    // circularly symmetric complex Gaussian with E|z|^2 = variance
    cd cscg(double variance = 1.0) {
        const double s = std::sqrt(variance / 2.0);
        return {s * normal(), s * normal()};
    }

    CMat cscg_matrix(idx rows, idx cols, double variance = 1.0) {
        CMat m(rows, cols);
        for (idx j = 0; j < cols; ++j)
            for (idx i = 0; i < rows; ++i) m(i, j) = cscg(variance);
        return m;
    }

    RMat normal_matrix(idx rows, idx cols) {
        RMat m(rows, cols);
        for (idx j = 0; j < cols; ++j)
            for (idx i = 0; i < rows; ++i) m(i, j) = normal();
        return m;
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace snrbeam
