#pragma once

// Per-run diagnostics shared by the three ascent algorithms.

#include "snrbeam/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace snrbeam {

struct RunTrace {
    std::vector<double> snr;          // value after each outer iteration; [0] is the start
    std::vector<double> wall_ms;      // per outer iteration
    std::vector<int> probe_counts;    // bisection probes per outer iteration (when used)
    std::vector<int> conic_iters;     // interior-point iterations accumulated per outer iteration
    bool converged = false;
    std::string failure;              // nonempty when the run aborted
    std::uint64_t state_digest = 0;   // digest of the final beamformer state

    int outer_iterations() const { return static_cast<int>(snr.size()) - 1; }
    double final_snr() const { return snr.empty() ? 0.0 : snr.back(); }
};

struct AlgoOptions {
    double outer_tol = 1e-4;     // relative SNR increase threshold
    int max_outer = 50;
    double bisect_tol = 1e-4;    // absolute interval width on the SNR level
    double conic_tol = 1e-8;
    int conic_max_iters = 100;
    idx samples = 5000;          // Gaussian randomization sample count
    std::uint64_t seed = 1;      // randomization stream
};

std::uint64_t state_digest(const BeamformerState& state);

} // namespace snrbeam
