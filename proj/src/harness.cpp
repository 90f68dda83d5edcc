#include "snrbeam/harness.hpp"

#include "snrbeam/blockwise.hpp"
#include "snrbeam/receiver.hpp"
#include "snrbeam/sdr.hpp"
#include "snrbeam/socp.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace snrbeam {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

} // namespace

double grid_oracle(const NetworkModel& model, idx grid_steps) {
    const idx l = model.num_clusters();
    if (l > 3) throw DimensionError("grid_oracle: at most three clusters");
    if (model.fc_antennas != 1) throw DimensionError("grid_oracle: scalar models only");
    for (idx i = 0; i < l; ++i)
        if (model.sensors(i) != 1 || model.tx_antennas(i) != 1)
            throw DimensionError("grid_oracle: scalar models only");
    if (grid_steps < 1) throw DimensionError("grid_oracle: need at least one step");

    std::vector<cd> h(static_cast<std::size_t>(l));
    std::vector<double> cap(static_cast<std::size_t>(l)), noise(static_cast<std::size_t>(l));
    for (idx i = 0; i < l; ++i) {
        h[static_cast<std::size_t>(i)] = model.channel(i)(0, 0);
        const double s2 = model.sigma(i)(0, 0).real();
        noise[static_cast<std::size_t>(i)] = s2 * std::norm(h[static_cast<std::size_t>(i)]);
        cap[static_cast<std::size_t>(i)] = std::sqrt(model.power_limit(i) / (1.0 + s2));
    }
    const double n0 = model.fc_noise_power;

    // axes: one magnitude per cluster, one relative phase per cluster beyond
    // the first
    const idx axes = 2 * l - 1;
    std::vector<idx> ix(static_cast<std::size_t>(axes), 0);
    double best = 0.0;
    bool done = false;
    while (!done) {
        cd sig = 0.0;
        double den = n0;
        for (idx i = 0; i < l; ++i) {
            const double m =
                cap[static_cast<std::size_t>(i)] *
                static_cast<double>(ix[static_cast<std::size_t>(i)]) /
                static_cast<double>(grid_steps);
            double theta = 0.0;
            if (i > 0)
                theta = kTwoPi * static_cast<double>(ix[static_cast<std::size_t>(l + i - 1)]) /
                        static_cast<double>(grid_steps);
            const cd f = std::polar(m, theta);
            sig += h[static_cast<std::size_t>(i)] * f;
            den += noise[static_cast<std::size_t>(i)] * m * m;
        }
        best = std::max(best, std::norm(sig) / den);

        idx a = 0;
        for (;; ++a) {
            if (a == axes) {
                done = true;
                break;
            }
            const idx limit = (a < l) ? grid_steps : grid_steps - 1; // phases wrap
            if (ix[static_cast<std::size_t>(a)] < limit) {
                ++ix[static_cast<std::size_t>(a)];
                break;
            }
            ix[static_cast<std::size_t>(a)] = 0;
        }
    }
    return best;
}

AlgoOptions algo_options(const ExperimentConfig& cfg) {
    AlgoOptions o;
    o.outer_tol = cfg.outer_tol;
    o.max_outer = cfg.max_outer;
    o.bisect_tol = cfg.bisect_tol;
    o.conic_tol = cfg.conic_tol;
    o.samples = cfg.samples;
    o.seed = cfg.seed;
    return o;
}

std::pair<BeamformerState, RunTrace> run_algorithm(const std::string& name,
                                                   const NetworkModel& model,
                                                   const BeamformerState& init,
                                                   const AlgoOptions& opts) {
    if (name == "sdr") return run_algorithm1(model, init, opts);
    if (name == "socp") return run_algorithm2(model, init, opts);
    if (name == "blockwise") return run_algorithm3(model, init, opts);
    throw DimensionError("unknown algorithm '" + name + "'");
}

namespace {

struct TrialJob {
    idx point = 0;
    int trial = 0;
    double snr_db = 0.0;
};

struct TrialOutcome {
    std::vector<TrialRecord> records;
    std::vector<std::pair<std::string, std::string>> traces; // (filename, contents)
    std::string failure_log;
};

std::string trace_contents(const RunTrace& trace) {
    std::ostringstream os;
    os << "iter,snr\n";
    for (std::size_t k = 0; k < trace.snr.size(); ++k)
        os << k << "," << fmt(trace.snr[k]) << "\n";
    return os.str();
}

TrialOutcome run_trial(const ExperimentConfig& cfg, const TrialJob& job) {
    TrialOutcome out;
    const std::uint64_t base =
        derive_seed(cfg.seed, 1000003ULL * static_cast<std::uint64_t>(job.point) +
                                  2ULL * static_cast<std::uint64_t>(job.trial));
    std::vector<idx> tx(cfg.antennas.begin(), cfg.antennas.end());
    NetworkModel model = build_model(
        cfg, job.snr_db,
        random_channels(cfg.fc_antennas, tx, cfg.channel_variance, derive_seed(base, 0)));
    BeamformerState init = random_feasible_init(model, derive_seed(base, 1), cfg.fill_fraction);
    const double initial_snr = evaluate_snr(model, init);

    for (const std::string& alg : cfg.algorithms) {
        TrialRecord rec;
        rec.trial_id = job.trial;
        rec.channel_snr_db = job.snr_db;
        rec.algorithm = alg;
        rec.initial_snr = initial_snr;
        AlgoOptions opts = algo_options(cfg);
        opts.seed = derive_seed(base, 2);
        const auto t0 = std::chrono::steady_clock::now();
        auto [state, trace] = run_algorithm(alg, model, init, opts);
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        rec.outer_iters = trace.outer_iterations();
        rec.final_snr = trace.final_snr();
        rec.probe_count = std::accumulate(trace.probe_counts.begin(), trace.probe_counts.end(), 0);
        rec.failed = !trace.failure.empty();
        rec.bound = snr_upper_bound(model, state.postcoder);
        if (rec.failed) {
            std::ostringstream os;
            os << job.trial << "," << fmt(job.snr_db) << "," << alg << "," << trace.failure
               << "\n";
            out.failure_log += os.str();
        }
        std::ostringstream name;
        name << "trace_" << alg << "_p" << job.point << "_t" << job.trial << ".csv";
        out.traces.emplace_back(name.str(), trace_contents(trace));
        out.records.push_back(std::move(rec));
    }
    return out;
}

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DimensionError("cannot write " + path.string());
    f << contents;
}

std::string records_csv(const std::vector<TrialRecord>& records) {
    std::ostringstream os;
    os << "trial_id,channel_snr_db,algorithm,outer_iters,final_snr,wall_ms,probe_count\n";
    for (const TrialRecord& r : records)
        os << r.trial_id << "," << fmt(r.channel_snr_db) << "," << r.algorithm << ","
           << r.outer_iters << "," << fmt(r.final_snr) << "," << fmt(r.wall_ms) << ","
           << r.probe_count << "\n";
    return os.str();
}

std::string aggregate_csv(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
    std::ostringstream os;
    os << "algorithm,channel_snr_db,trials_ok,trials_failed,mean_final_snr\n";
    for (const std::string& alg : cfg.algorithms) {
        for (double db : cfg.channel_snr_db) {
            int ok = 0, failed = 0;
            double acc = 0.0;
            for (const TrialRecord& r : records) {
                if (r.algorithm != alg || r.channel_snr_db != db) continue;
                if (r.failed) {
                    ++failed;
                    continue;
                }
                ++ok;
                acc += r.final_snr;
            }
            os << alg << "," << fmt(db) << "," << ok << "," << failed << ","
               << fmt(ok > 0 ? acc / ok : 0.0) << "\n";
        }
    }
    // shared random starts as their own curve
    for (double db : cfg.channel_snr_db) {
        int count = 0;
        double acc = 0.0;
        for (const TrialRecord& r : records) {
            if (r.channel_snr_db != db || r.algorithm != cfg.algorithms.front()) continue;
            acc += r.initial_snr;
            ++count;
        }
        os << "initial," << fmt(db) << "," << count << ",0," << fmt(count > 0 ? acc / count : 0.0)
           << "\n";
    }
    return os.str();
}

} // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int threads) {
    cfg.validate();
    fs::create_directories(out_dir);

    std::vector<TrialJob> jobs;
    for (idx pt = 0; pt < static_cast<idx>(cfg.channel_snr_db.size()); ++pt)
        for (int t = 0; t < cfg.trials; ++t)
            jobs.push_back({pt, t, cfg.channel_snr_db[static_cast<std::size_t>(pt)]});

    std::vector<TrialOutcome> outcomes(jobs.size());
    const int n_threads = std::max(1, threads);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= jobs.size()) return;
            outcomes[k] = run_trial(cfg, jobs[k]);
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    ExperimentOutput out;
    std::string failure_log;
    for (TrialOutcome& o : outcomes) {
        for (TrialRecord& r : o.records) out.records.push_back(std::move(r));
        for (auto& [name, contents] : o.traces) {
            write_file(fs::path(out_dir) / name, contents);
            out.trace_csvs.push_back((fs::path(out_dir) / name).string());
        }
        failure_log += o.failure_log;
    }
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const TrialRecord& a, const TrialRecord& b) {
                         if (a.channel_snr_db != b.channel_snr_db)
                             return a.channel_snr_db < b.channel_snr_db;
                         if (a.trial_id != b.trial_id) return a.trial_id < b.trial_id;
                         return a.algorithm < b.algorithm;
                     });

    out.trials_csv = (fs::path(out_dir) / "trials.csv").string();
    write_file(out.trials_csv, records_csv(out.records));
    out.aggregate_csv = (fs::path(out_dir) / "aggregate.csv").string();
    write_file(out.aggregate_csv, aggregate_csv(cfg, out.records));
    if (!failure_log.empty())
        write_file(fs::path(out_dir) / "failures.log",
                   "trial_id,channel_snr_db,algorithm,message\n" + failure_log);
    return out;
}

ExperimentOutput run_itinerary(const ExperimentConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);

    const double snr_db = cfg.channel_snr_db.front();
    std::vector<idx> tx(cfg.antennas.begin(), cfg.antennas.end());
    NetworkModel model = build_model(
        cfg, snr_db,
        random_channels(cfg.fc_antennas, tx, cfg.channel_variance, derive_seed(cfg.seed, 777)));

    ExperimentOutput out;
    for (int t = 0; t < cfg.trials; ++t) {
        BeamformerState init =
            random_feasible_init(model, derive_seed(cfg.seed, 900 + static_cast<std::uint64_t>(t)),
                                 cfg.fill_fraction);
        const double initial_snr = evaluate_snr(model, init);
        for (const std::string& alg : cfg.algorithms) {
            AlgoOptions opts = algo_options(cfg);
            opts.seed = derive_seed(cfg.seed, 1700 + static_cast<std::uint64_t>(t));
            auto [state, trace] = run_algorithm(alg, model, init, opts);
            TrialRecord rec;
            rec.trial_id = t;
            rec.channel_snr_db = snr_db;
            rec.algorithm = alg;
            rec.outer_iters = trace.outer_iterations();
            rec.final_snr = trace.final_snr();
            rec.initial_snr = initial_snr;
            rec.failed = !trace.failure.empty();
            rec.bound = snr_upper_bound(model, state.postcoder);
            out.records.push_back(rec);
            std::ostringstream name;
            name << "trace_" << alg << "_init" << t << ".csv";
            write_file(fs::path(out_dir) / name.str(), trace_contents(trace));
            out.trace_csvs.push_back((fs::path(out_dir) / name.str()).string());
        }
    }
    out.trials_csv = (fs::path(out_dir) / "trials.csv").string();
    write_file(out.trials_csv, records_csv(out.records));
    return out;
}

BenchOutput bench(const ExperimentConfig& cfg, const std::vector<idx>& l_values,
                  const std::vector<std::pair<idx, idx>>& kn_values, const std::string& out_dir) {
    fs::create_directories(out_dir);
    BenchOutput out;
    std::ostringstream csv;
    csv << "sensors,antennas,fc_antennas,algorithm,clusters,ms_per_iter\n";
    const double snr_db = cfg.channel_snr_db.front();

    for (auto [k, n] : kn_values) {
        for (const std::string& alg : cfg.algorithms) {
            bool timed_out = false;
            for (idx l : l_values) {
                BenchCell cell;
                cell.sensors = k;
                cell.antennas = n;
                cell.fc = cfg.fc_antennas;
                cell.clusters = l;
                cell.algorithm = alg;
                if (timed_out) {
                    out.cells.push_back(cell);
                    csv << k << "," << n << "," << cfg.fc_antennas << "," << alg << "," << l
                        << ",---\n";
                    continue;
                }
                ExperimentConfig local = cfg;
                local.clusters = l;
                local.sensors.assign(static_cast<std::size_t>(l), k);
                local.antennas.assign(static_cast<std::size_t>(l), n);
                local.power.assign(static_cast<std::size_t>(l), 0.25);
                local.obs_noise.assign(static_cast<std::size_t>(l), 1.0);
                std::vector<idx> tx(local.antennas.begin(), local.antennas.end());
                NetworkModel model = build_model(
                    local, snr_db,
                    random_channels(cfg.fc_antennas, tx, cfg.channel_variance,
                                    derive_seed(cfg.seed, 31ULL + static_cast<std::uint64_t>(l))));
                BeamformerState init =
                    random_feasible_init(model, derive_seed(cfg.seed, 77), cfg.fill_fraction);
                AlgoOptions opts = algo_options(cfg);
                opts.max_outer = 1;
                opts.outer_tol = 0.0;
                const auto t0 = std::chrono::steady_clock::now();
                auto [state, trace] = run_algorithm(alg, model, init, opts);
                (void)state;
                const double ms = std::chrono::duration<double, std::milli>(
                                      std::chrono::steady_clock::now() - t0)
                                      .count();
                if (!trace.failure.empty() || ms > cfg.bench_budget_ms) {
                    timed_out = true;
                    out.cells.push_back(cell);
                    csv << k << "," << n << "," << cfg.fc_antennas << "," << alg << "," << l
                        << ",---\n";
                    continue;
                }
                cell.ms_per_iter = ms;
                out.cells.push_back(cell);
                csv << k << "," << n << "," << cfg.fc_antennas << "," << alg << "," << l << ","
                    << fmt(ms) << "\n";
            }
        }
    }
    out.csv = (fs::path(out_dir) / "bench.csv").string();
    write_file(out.csv, csv.str());
    return out;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw DimensionError("emit_plots: missing " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

} // namespace

std::vector<std::string> emit_plots(const std::string& out_dir) {
    std::vector<std::string> written;
    const fs::path dir(out_dir);

    // sweep curves from the aggregate
    if (fs::exists(dir / "aggregate.csv")) {
        auto rows = read_csv(dir / "aggregate.csv");
        if (rows.size() < 2) throw DimensionError("emit_plots: aggregate.csv has no data rows");
        const std::vector<std::string> want = {"algorithm", "channel_snr_db", "trials_ok",
                                               "trials_failed", "mean_final_snr"};
        if (rows[0] != want) throw DimensionError("emit_plots: aggregate.csv missing columns");
        std::vector<std::string> algs;
        for (std::size_t r = 1; r < rows.size(); ++r)
            if (std::find(algs.begin(), algs.end(), rows[r][0]) == algs.end())
                algs.push_back(rows[r][0]);
        for (const std::string& alg : algs) {
            std::ostringstream dat;
            for (std::size_t r = 1; r < rows.size(); ++r)
                if (rows[r][0] == alg) dat << rows[r][1] << " " << rows[r][4] << "\n";
            write_file(dir / ("sweep_" + alg + ".dat"), dat.str());
        }
        std::ostringstream gp;
        gp << "set xlabel 'channel SNR (dB)'\n"
           << "set ylabel 'mean output SNR'\n"
           << "set key left top\n"
           << "set term png size 900,600\n"
           << "set output 'sweep.png'\n"
           << "plot";
        for (std::size_t i = 0; i < algs.size(); ++i)
            gp << (i ? ", " : " ") << "'sweep_" << algs[i] << ".dat' using 1:2 with linespoints"
               << " title '" << algs[i] << "'";
        gp << "\n";
        write_file(dir / "sweep.gp", gp.str());
        written.push_back((dir / "sweep.gp").string());
    }

    // per-run SNR itineraries
    {
        std::vector<std::string> traces;
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("trace_", 0) == 0 && entry.path().extension() == ".csv")
                traces.push_back(name);
        }
        std::sort(traces.begin(), traces.end());
        if (!traces.empty()) {
            std::ostringstream gp;
            gp << "set xlabel 'outer iteration'\n"
               << "set ylabel 'SNR'\n"
               << "set datafile separator ','\n"
               << "set key right bottom\n"
               << "set term png size 900,600\n"
               << "set output 'itinerary.png'\n"
               << "plot";
            for (std::size_t i = 0; i < traces.size(); ++i)
                gp << (i ? ", " : " ") << "'" << traces[i]
                   << "' using 1:2 skip 1 with lines title '" << traces[i] << "'";
            gp << "\n";
            write_file(dir / "itinerary.gp", gp.str());
            written.push_back((dir / "itinerary.gp").string());
        }
    }

    // timing curves when a bench table exists
    if (fs::exists(dir / "bench.csv")) {
        auto rows = read_csv(dir / "bench.csv");
        if (rows.size() < 2) throw DimensionError("emit_plots: bench.csv has no data rows");
        std::vector<std::string> keys;
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (rows[r][5] == "---") continue;
            const std::string key = rows[r][3] + "_k" + rows[r][0] + "_n" + rows[r][1];
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
        }
        for (const std::string& key : keys) {
            std::ostringstream dat;
            for (std::size_t r = 1; r < rows.size(); ++r) {
                if (rows[r][5] == "---") continue;
                const std::string rk = rows[r][3] + "_k" + rows[r][0] + "_n" + rows[r][1];
                if (rk == key) dat << rows[r][4] << " " << rows[r][5] << "\n";
            }
            write_file(dir / ("bench_" + key + ".dat"), dat.str());
        }
        std::ostringstream gp;
        gp << "set xlabel 'clusters'\n"
           << "set ylabel 'ms per outer iteration'\n"
           << "set logscale y\n"
           << "set key left top\n"
           << "set term png size 900,600\n"
           << "set output 'complexity.png'\n"
           << "plot";
        for (std::size_t i = 0; i < keys.size(); ++i)
            gp << (i ? ", " : " ") << "'bench_" << keys[i] << ".dat' using 1:2 with linespoints"
               << " title '" << keys[i] << "'";
        gp << "\n";
        write_file(dir / "complexity.gp", gp.str());
        written.push_back((dir / "complexity.gp").string());
    }
    if (written.empty()) throw DimensionError("emit_plots: no result files under " + out_dir);
    return written;
}

} // namespace snrbeam
