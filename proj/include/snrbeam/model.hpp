#pragma once

// The clustered sensor-network instance: per-cluster observation statistics
// and power limits, MIMO channels to the fusion center, and the transceiver
// state (per-cluster precoders plus the fusion-center postcoder).

#include "snrbeam/linalg.hpp"
#include "snrbeam/rng.hpp"

#include <cstdint>
#include <vector>

namespace snrbeam {

struct Cluster {
    idx sensor_count = 0;  // K_i
    Herm obs_noise_cov;    // Sigma_i, positive definite, order K_i
    double power_limit = 0.0;
};

struct NetworkModel {
    std::vector<Cluster> clusters;
    std::vector<CMat> channels; // H_i, M x N_i
    idx fc_antennas = 0;        // M
    double fc_noise_power = 1.0; // sigma_0^2
    double source_power = 1.0;   // sigma_s^2

    idx num_clusters() const { return static_cast<idx>(clusters.size()); }
    idx tx_antennas(idx i) const { return channels[static_cast<std::size_t>(i)].cols(); }
    idx sensors(idx i) const { return clusters[static_cast<std::size_t>(i)].sensor_count; }
    double power_limit(idx i) const { return clusters[static_cast<std::size_t>(i)].power_limit; }
    const Herm& sigma(idx i) const { return clusters[static_cast<std::size_t>(i)].obs_noise_cov; }
    const CMat& channel(idx i) const { return channels[static_cast<std::size_t>(i)]; }
    // total stacked precoder dimension sum_i K_i N_i
    idx stacked_dim() const;

    void validate() const; // throws on inconsistent dimensions or nonpositive powers
};

struct BeamformerState {
    std::vector<CMat> precoders; // F_i, N_i x K_i
    CMat postcoder;              // g, M x 1
};

// Average output SNR of the estimate formed by g, invariant under nonzero
// scaling of g.
double evaluate_snr(const NetworkModel& model, const BeamformerState& state);

// Tr{F_i (1 1^H + Sigma_i) F_i^H}
double transmit_power(const NetworkModel& model, const CMat& f_i, idx i);

bool is_power_feasible(const NetworkModel& model, const BeamformerState& state,
                       double rel_slack = 1e-9);

// Contract any precoder that exceeds its budget back onto the boundary.
// Solver outputs carry residual-level violations; the contraction is a
// relative change of the same order.
void enforce_power(const NetworkModel& model, std::vector<CMat>& precoders);

// sigma^2 * Sigma0 with Sigma0(j,k) = rho^|j-k|
Herm toeplitz_obs_cov(idx sensors, double sigma2, double rho);

// i.i.d. circularly symmetric complex Gaussian entries with the given
// per-entry variance; deterministic for a fixed seed.
std::vector<CMat> random_channels(idx fc_antennas, const std::vector<idx>& tx_antennas,
                                  double entry_variance, std::uint64_t seed);

// Random nonzero feasible start: Gaussian precoders scaled so each cluster
// uses fill_fraction of its power budget, postcoder set by the fusion
// receiver and verified nonzero.
BeamformerState random_feasible_init(const NetworkModel& model, std::uint64_t seed,
                                     double fill_fraction = 0.9);

// sum_i H_i F_i 1
CMat combined_signature(const NetworkModel& model, const std::vector<CMat>& precoders);

} // namespace snrbeam
