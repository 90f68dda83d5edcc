#include "doctest.h"

#include "snrbeam/blockwise.hpp"
#include "snrbeam/harness.hpp"
#include "snrbeam/receiver.hpp"
#include "snrbeam/sdr.hpp"
#include "snrbeam/socp.hpp"
#include "test_util.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace snrbeam;
using namespace snrbeam::testutil;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

// strip the wall_ms column (index 5), the only nondeterministic field
std::string drop_wall(const std::string& csv) {
    std::istringstream is(csv);
    std::ostringstream os;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string cell;
        int col = 0;
        while (std::getline(ls, cell, ',')) {
            if (col != 5) os << cell << ",";
            ++col;
        }
        os << "\n";
    }
    return os.str();
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.clusters = 3;
    cfg.sensors = {1, 2, 2};
    cfg.antennas = {2, 2, 3};
    cfg.power = {0.8, 1.0, 1.2};
    cfg.obs_noise = {1.0, 0.8, 1.2};
    cfg.fc_antennas = 2;
    cfg.channel_snr_db = {0.0, 6.0};
    cfg.trials = 2;
    cfg.algorithms = {"socp", "blockwise"};
    cfg.seed = 42;
    cfg.max_outer = 25;
    return cfg;
}

} // namespace

TEST_CASE("grid oracle on the scalar instances") {
    NetworkModel m1 = s1();
    CHECK(grid_oracle(m1, 10000) == doctest::Approx(0.5).epsilon(1e-3));

    NetworkModel m2 = s2();
    CHECK(grid_oracle(m2, 150) == doctest::Approx(4.0 / 3.0).epsilon(1e-3));

    NetworkModel mz = s1();
    mz.clusters[0].power_limit = 1e-12;
    CHECK(grid_oracle(mz, 100) == doctest::Approx(0.0).epsilon(1e-6));

    // non-scalar models are rejected
    NetworkModel big = random_model(1, 2, 2, 2, 2);
    bool scalar = big.fc_antennas == 1;
    for (idx i = 0; i < big.num_clusters(); ++i)
        scalar = scalar && big.sensors(i) == 1 && big.tx_antennas(i) == 1;
    if (!scalar) CHECK_THROWS_AS(grid_oracle(big, 10), DimensionError);
}

TEST_CASE("grid oracle dominates every algorithm on scalar instances") {
    NetworkModel m = s2();
    const double oracle = grid_oracle(m, 200);
    BeamformerState init = scalar_state(m, {cd(0.4), cd(0.3, 0.2)});
    init.postcoder = optimal_postcoder(m, init.precoders);
    init.postcoder *= cd(1.0 / norm2(init.postcoder), 0.0);
    AlgoOptions opts;
    for (const char* alg : {"sdr", "socp", "blockwise"}) {
        auto [state, trace] = run_algorithm(alg, m, init, opts);
        REQUIRE(trace.failure.empty());
        CHECK(trace.final_snr() <= oracle + 2e-3);
        CHECK(trace.final_snr() == doctest::Approx(4.0 / 3.0).epsilon(2e-3));
    }
}

TEST_CASE("config round trip") {
    ExperimentConfig cfg = small_config();
    std::ostringstream os;
    write_config(cfg, os);
    std::istringstream is(os.str());
    ExperimentConfig back = parse_config(is);
    CHECK(back.clusters == cfg.clusters);
    CHECK(back.sensors == cfg.sensors);
    CHECK(back.antennas == cfg.antennas);
    CHECK(back.power == cfg.power);
    CHECK(back.channel_snr_db == cfg.channel_snr_db);
    CHECK(back.algorithms == cfg.algorithms);
    CHECK(back.seed == cfg.seed);

    std::istringstream bad("unknown_key = 3\n");
    CHECK_THROWS_AS(parse_config(bad), DimensionError);
    std::istringstream bad2("clusters = 2\nsensors = 1\n");
    CHECK_THROWS_AS(parse_config(bad2), DimensionError);
}

TEST_CASE("experiment sweep writes deterministic CSVs and satisfies bounds") {
    ExperimentConfig cfg = small_config();
    const std::string dir_a = "test_out/sweep_a";
    const std::string dir_b = "test_out/sweep_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    ExperimentOutput a = run_experiment(cfg, dir_a, 1);
    ExperimentOutput b = run_experiment(cfg, dir_b, 2);

    // all numerical columns identical run-to-run, even across thread counts
    CHECK(drop_wall(slurp(a.trials_csv)) == drop_wall(slurp(b.trials_csv)));
    CHECK(slurp(a.aggregate_csv) == slurp(b.aggregate_csv));
    for (std::size_t i = 0; i < a.trace_csvs.size(); ++i)
        CHECK(slurp(a.trace_csvs[i]) == slurp(b.trace_csvs[i]));

    // every trial respects the achievability bound at its final postcoder
    for (const TrialRecord& r : a.records) {
        CHECK_FALSE(r.failed);
        CHECK(r.final_snr <= r.bound * (1.0 + 1e-9) + 1e-9);
        CHECK(r.final_snr >= r.initial_snr * (1.0 - 1e-8) - 1e-4);
    }

    // smoke: one trace per (point, trial, algorithm)
    CHECK(a.trace_csvs.size() ==
          cfg.channel_snr_db.size() * static_cast<std::size_t>(cfg.trials) *
              cfg.algorithms.size());

    // the optimized curves beat the shared random starts at every point
    auto rows = slurp(a.aggregate_csv);
    std::istringstream is(rows);
    std::string line;
    std::getline(is, line);
    double init_mean[2] = {0, 0}, alg_min[2] = {1e30, 1e30};
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string alg, db, ok, failed, mean;
        std::getline(ls, alg, ',');
        std::getline(ls, db, ',');
        std::getline(ls, ok, ',');
        std::getline(ls, failed, ',');
        std::getline(ls, mean, ',');
        const int pt = std::stod(db) == cfg.channel_snr_db[0] ? 0 : 1;
        if (alg == "initial")
            init_mean[pt] = std::stod(mean);
        else
            alg_min[pt] = std::min(alg_min[pt], std::stod(mean));
    }
    CHECK(alg_min[0] > init_mean[0]);
    CHECK(alg_min[1] > init_mean[1]);
}

TEST_CASE("plot emission") {
    ExperimentConfig cfg = small_config();
    cfg.trials = 1;
    cfg.channel_snr_db = {3.0};
    const std::string dir = "test_out/plots";
    fs::remove_all(dir);
    run_experiment(cfg, dir, 1);
    auto scripts = emit_plots(dir);
    CHECK(scripts.size() >= 2);
    CHECK(fs::exists(fs::path(dir) / "sweep.gp"));
    CHECK(fs::exists(fs::path(dir) / "itinerary.gp"));
    const std::string sweep = slurp((fs::path(dir) / "sweep.gp").string());
    CHECK(sweep.find("socp") != std::string::npos);
    CHECK(sweep.find("blockwise") != std::string::npos);

    // empty directory is an error
    fs::create_directories("test_out/empty");
    std::ofstream((fs::path("test_out/empty") / "aggregate.csv").string())
        << "algorithm,channel_snr_db,trials_ok,trials_failed,mean_final_snr\n";
    CHECK_THROWS_AS(emit_plots("test_out/empty"), DimensionError);
}

TEST_CASE("itinerary runner produces one trace per initial") {
    ExperimentConfig cfg = small_config();
    cfg.trials = 3;
    cfg.channel_snr_db = {2.0};
    cfg.algorithms = {"blockwise"};
    const std::string dir = "test_out/itinerary";
    fs::remove_all(dir);
    ExperimentOutput out = run_itinerary(cfg, dir);
    CHECK(out.trace_csvs.size() == 3);
    for (const TrialRecord& r : out.records) CHECK_FALSE(r.failed);
}

TEST_CASE("bench table marks cells and scales sanely") {
    ExperimentConfig cfg = small_config();
    cfg.algorithms = {"blockwise"};
    cfg.channel_snr_db = {3.0};
    const std::string dir = "test_out/bench";
    fs::remove_all(dir);
    BenchOutput out = bench(cfg, {2, 4, 8}, {{1, 2}}, dir);
    REQUIRE(out.cells.size() == 3);
    for (const BenchCell& c : out.cells) CHECK(c.ms_per_iter > 0.0);
    // closed-form path grows no faster than quadratically over L in {2,4,8}
    const double t2 = out.cells[0].ms_per_iter;
    const double t8 = out.cells[2].ms_per_iter;
    CHECK(t8 <= t2 * 16.0 * 2.0 + 5.0);
    CHECK(fs::exists(out.csv));

    // timeout marker
    ExperimentConfig tiny = cfg;
    tiny.bench_budget_ms = 0.0;
    BenchOutput out2 = bench(tiny, {2, 4}, {{1, 2}}, "test_out/bench2");
    CHECK(out2.cells[0].ms_per_iter < 0.0);
    const std::string csv = slurp(out2.csv);
    CHECK(csv.find("---") != std::string::npos);
}
