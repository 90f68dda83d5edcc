#pragma once

// Experiment driver: Monte Carlo sweeps over channel SNR, convergence
// itineraries, timing tables, a brute-force verifier for all-scalar
// instances, and gnuplot script emission. Results go to CSV files with a
// fixed schema; numerical columns are deterministic for a fixed config.

#include "snrbeam/config.hpp"
#include "snrbeam/trace.hpp"

#include <string>
#include <vector>

namespace snrbeam {

// Exhaustive grid search over precoder magnitudes and relative phases for
// all-scalar models (every K_i = N_i = 1, M = 1, L <= 3). grid_steps is the
// per-axis resolution.
double grid_oracle(const NetworkModel& model, idx grid_steps);

struct TrialRecord {
    int trial_id = 0;
    double channel_snr_db = 0.0;
    std::string algorithm;
    int outer_iters = 0;
    double final_snr = 0.0;
    double wall_ms = 0.0;
    int probe_count = 0;
    bool failed = false;
    double initial_snr = 0.0;
    double bound = 0.0; // achievability bound at the final postcoder
};

struct ExperimentOutput {
    std::vector<TrialRecord> records;
    std::string trials_csv;
    std::string aggregate_csv;
    std::vector<std::string> trace_csvs;
};

// Shared-initial Monte Carlo sweep; trials fan out over `threads`.
ExperimentOutput run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int threads = 1);

// Single channel realization, several random initial states, per-initial
// SNR itineraries.
ExperimentOutput run_itinerary(const ExperimentConfig& cfg, const std::string& out_dir);

struct BenchCell {
    idx sensors = 0, antennas = 0, fc = 0, clusters = 0;
    std::string algorithm;
    double ms_per_iter = -1.0; // negative means the cell timed out
};

struct BenchOutput {
    std::vector<BenchCell> cells;
    std::string csv;
};

// Wall time per outer iteration over a homogeneous (K, N) x L grid. Cells
// whose first iteration exceeds the budget are reported as "---" and larger
// L in the same row are skipped.
BenchOutput bench(const ExperimentConfig& cfg, const std::vector<idx>& l_values,
                  const std::vector<std::pair<idx, idx>>& kn_values, const std::string& out_dir);

// gnuplot scripts referencing the emitted CSVs; throws when inputs are
// missing or empty.
std::vector<std::string> emit_plots(const std::string& out_dir);

AlgoOptions algo_options(const ExperimentConfig& cfg);

std::pair<BeamformerState, RunTrace> run_algorithm(const std::string& name,
                                                   const NetworkModel& model,
                                                   const BeamformerState& init,
                                                   const AlgoOptions& opts);

} // namespace snrbeam
