#pragma once

// Hand-editable experiment definitions: flat key = value text with
// whitespace-separated lists for per-cluster fields.

#include "snrbeam/model.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace snrbeam {

struct ExperimentConfig {
    idx clusters = 1;                    // L
    std::vector<idx> sensors = {1};      // K_i
    std::vector<idx> antennas = {1};     // N_i
    std::vector<double> power = {1.0};   // P_i
    std::vector<double> obs_noise = {1.0}; // sigma_i^2
    double rho = 0.5;
    idx fc_antennas = 1;                 // M
    double source_power = 1.0;
    double channel_variance = 2.0;
    std::vector<double> channel_snr_db = {0.0};
    int trials = 1;
    std::vector<std::string> algorithms = {"sdr", "socp", "blockwise"};
    std::uint64_t seed = 1;
    double outer_tol = 1e-4;
    int max_outer = 50;
    double bisect_tol = 1e-4;
    double conic_tol = 1e-8;
    idx samples = 5000;
    double fill_fraction = 0.9;
    std::string out_dir = "out";
    double bench_budget_ms = 10000.0;

    void validate() const;
};

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_file(const std::string& path);
void write_config(const ExperimentConfig& cfg, std::ostream& os);

// Instance for one sweep point; channel SNR is 1/sigma_0^2.
NetworkModel build_model(const ExperimentConfig& cfg, double channel_snr_db,
                         std::vector<CMat> channels);

double channel_noise_from_snr_db(double snr_db);

} // namespace snrbeam
