// snrbeam: joint transceiver optimization for clustered sensor networks.
//
// Subcommands: optimize (single instance), sweep (Monte Carlo channel-SNR
// sweep), itinerary (per-initial convergence curves), bench (timing table),
// oracle (brute-force verifier for all-scalar instances).

#include "CLI11.hpp"

#include "snrbeam/harness.hpp"
#include "snrbeam/receiver.hpp"

#include <cstdio>
#include <iostream>

using namespace snrbeam;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::vector<std::string> algos;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool need_out) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    auto* out = cmd->add_option("--out", args.out_dir, "output directory");
    if (need_out) out->required();
    cmd->add_option("--seed", args.seed, "override the config seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--algos", args.algos, "subset of algorithms (sdr socp blockwise)");
    cmd->add_option("--threads", args.threads, "worker threads for independent trials");
}

ExperimentConfig load(const CommonArgs& args) {
    ExperimentConfig cfg = parse_config_file(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    if (!args.algos.empty()) cfg.algorithms = args.algos;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    cfg.validate();
    return cfg;
}

int cmd_optimize(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    const double snr_db = cfg.channel_snr_db.front();
    std::vector<idx> tx(cfg.antennas.begin(), cfg.antennas.end());
    NetworkModel model = build_model(
        cfg, snr_db,
        random_channels(cfg.fc_antennas, tx, cfg.channel_variance, derive_seed(cfg.seed, 0)));
    BeamformerState init = random_feasible_init(model, derive_seed(cfg.seed, 1),
                                                cfg.fill_fraction);
    std::printf("instance: L=%td M=%td channel SNR %.3g dB, initial SNR %.8g\n",
                model.num_clusters(), model.fc_antennas, snr_db, evaluate_snr(model, init));
    for (const std::string& alg : cfg.algorithms) {
        auto [state, trace] = run_algorithm(alg, model, init, algo_options(cfg));
        if (!trace.failure.empty()) {
            std::printf("%-10s FAILED after %d iterations: %s\n", alg.c_str(),
                        trace.outer_iterations(), trace.failure.c_str());
            continue;
        }
        std::printf("%-10s final SNR %.10g after %d outer iterations (%s)\n", alg.c_str(),
                    trace.final_snr(), trace.outer_iterations(),
                    trace.converged ? "converged" : "iteration cap");
    }
    return 0;
}

int cmd_sweep(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    ExperimentOutput out = run_experiment(cfg, cfg.out_dir, args.threads);
    emit_plots(cfg.out_dir);
    std::printf("wrote %s and %s (%zu trace files)\n", out.trials_csv.c_str(),
                out.aggregate_csv.c_str(), out.trace_csvs.size());
    return 0;
}

int cmd_itinerary(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    ExperimentOutput out = run_itinerary(cfg, cfg.out_dir);
    emit_plots(cfg.out_dir);
    std::printf("wrote %zu itineraries under %s\n", out.trace_csvs.size(), cfg.out_dir.c_str());
    return 0;
}

int cmd_bench(const CommonArgs& args, const std::vector<idx>& l_values,
              const std::vector<idx>& k_values, const std::vector<idx>& n_values) {
    ExperimentConfig cfg = load(args);
    std::vector<std::pair<idx, idx>> kn;
    for (idx k : k_values)
        for (idx n : n_values) kn.emplace_back(k, n);
    BenchOutput out = bench(cfg, l_values, kn, cfg.out_dir);
    emit_plots(cfg.out_dir);
    std::printf("wrote %s (%zu cells)\n", out.csv.c_str(), out.cells.size());
    return 0;
}

int cmd_oracle(const CommonArgs& args, idx steps) {
    ExperimentConfig cfg = load(args);
    const double snr_db = cfg.channel_snr_db.front();
    std::vector<idx> tx(cfg.antennas.begin(), cfg.antennas.end());
    NetworkModel model = build_model(
        cfg, snr_db,
        random_channels(cfg.fc_antennas, tx, cfg.channel_variance, derive_seed(cfg.seed, 0)));
    const double opt = grid_oracle(model, steps);
    std::printf("grid oracle optimum: %.10g (steps=%td)\n", opt, steps);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SNR-maximizing transceiver design for clustered sensor networks"};
    app.require_subcommand(1);

    CommonArgs optimize_args, sweep_args, itinerary_args, bench_args, oracle_args;
    std::vector<idx> l_values = {2, 4, 8};
    std::vector<idx> k_values = {1, 3};
    std::vector<idx> n_values = {2, 4};
    idx oracle_steps = 2000;

    auto* optimize = app.add_subcommand("optimize", "solve one instance with each algorithm");
    add_common(optimize, optimize_args, false);
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over channel SNR points");
    add_common(sweep, sweep_args, true);
    auto* itinerary =
        app.add_subcommand("itinerary", "one channel realization, several random initials");
    add_common(itinerary, itinerary_args, true);
    auto* bench_cmd = app.add_subcommand("bench", "per-iteration timing table");
    add_common(bench_cmd, bench_args, true);
    bench_cmd->add_option("--clusters", l_values, "cluster counts");
    bench_cmd->add_option("--sensors", k_values, "sensors per cluster");
    bench_cmd->add_option("--antennas", n_values, "antennas per cluster head");
    auto* oracle = app.add_subcommand("oracle", "brute-force verifier for all-scalar instances");
    add_common(oracle, oracle_args, false);
    oracle->add_option("--steps", oracle_steps, "grid steps per axis");

    CLI11_PARSE(app, argc, argv);

    try {
        if (optimize->parsed()) return cmd_optimize(optimize_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args);
        if (itinerary->parsed()) return cmd_itinerary(itinerary_args);
        if (bench_cmd->parsed()) return cmd_bench(bench_args, l_values, k_values, n_values);
        if (oracle->parsed()) return cmd_oracle(oracle_args, oracle_steps);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
