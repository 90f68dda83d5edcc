#pragma once

// Closed-form optimal fusion-center postcoder and the SNR it attains.

#include "snrbeam/model.hpp"

namespace snrbeam {

// g = (sigma_0^2 I + sum_i H_i F_i Sigma_i F_i^H H_i^H)^{-1} (sum_i H_i F_i 1),
// the unit-scale choice of the maximizing direction. Throws DegenerateError
// when the combined signal signature is zero.
CMat optimal_postcoder(const NetworkModel& model, const std::vector<CMat>& precoders);

// The maximal SNR over postcoders; 0 on the degenerate all-zero-signal branch.
double receiver_snr(const NetworkModel& model, const std::vector<CMat>& precoders);

// Independent route for cross-checks: the whitened-signature norm computed
// through the explicit inverse square root.
double receiver_snr_whitened(const NetworkModel& model, const std::vector<CMat>& precoders);

} // namespace snrbeam
