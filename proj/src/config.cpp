#include "snrbeam/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace snrbeam {

void ExperimentConfig::validate() const {
    if (clusters < 1) throw DimensionError("config: clusters must be >= 1");
    const std::size_t l = static_cast<std::size_t>(clusters);
    if (sensors.size() != l || antennas.size() != l || power.size() != l ||
        obs_noise.size() != l)
        throw DimensionError("config: per-cluster lists must have `clusters` entries");
    if (trials < 1) throw DimensionError("config: trials must be >= 1");
    if (channel_snr_db.empty()) throw DimensionError("config: empty channel_snr_db sweep");
    if (algorithms.empty()) throw DimensionError("config: no algorithms selected");
    for (const std::string& a : algorithms)
        if (a != "sdr" && a != "socp" && a != "blockwise")
            throw DimensionError("config: unknown algorithm '" + a + "'");
    if (!(std::abs(rho) < 1.0)) throw DimensionError("config: |rho| must be < 1");
    if (!(fill_fraction > 0.0 && fill_fraction <= 1.0))
        throw DimensionError("config: fill_fraction outside (0,1]");
}

namespace {

std::vector<std::string> tokens(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

double to_double(const std::string& s) { return std::stod(s); }
idx to_idx(const std::string& s) { return static_cast<idx>(std::stoll(s)); }

} // namespace

ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (!tokens(line).empty())
                throw DimensionError("config: malformed line " + std::to_string(lineno));
            continue;
        }
        const std::string key_raw = line.substr(0, eq);
        const std::string val_raw = line.substr(eq + 1);
        auto key_toks = tokens(key_raw);
        auto vals = tokens(val_raw);
        if (key_toks.size() != 1 || vals.empty())
            throw DimensionError("config: malformed line " + std::to_string(lineno));
        const std::string& key = key_toks[0];

        auto idx_list = [&] {
            std::vector<idx> v;
            for (const auto& s : vals) v.push_back(to_idx(s));
            return v;
        };
        auto dbl_list = [&] {
            std::vector<double> v;
            for (const auto& s : vals) v.push_back(to_double(s));
            return v;
        };

        if (key == "clusters") cfg.clusters = to_idx(vals[0]);
        else if (key == "sensors") cfg.sensors = idx_list();
        else if (key == "antennas") cfg.antennas = idx_list();
        else if (key == "power") cfg.power = dbl_list();
        else if (key == "obs_noise") cfg.obs_noise = dbl_list();
        else if (key == "rho") cfg.rho = to_double(vals[0]);
        else if (key == "fc_antennas") cfg.fc_antennas = to_idx(vals[0]);
        else if (key == "source_power") cfg.source_power = to_double(vals[0]);
        else if (key == "channel_variance") cfg.channel_variance = to_double(vals[0]);
        else if (key == "channel_snr_db") cfg.channel_snr_db = dbl_list();
        else if (key == "trials") cfg.trials = static_cast<int>(to_idx(vals[0]));
        else if (key == "algorithms") cfg.algorithms = vals;
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(vals[0]));
        else if (key == "outer_tol") cfg.outer_tol = to_double(vals[0]);
        else if (key == "max_outer") cfg.max_outer = static_cast<int>(to_idx(vals[0]));
        else if (key == "bisect_tol") cfg.bisect_tol = to_double(vals[0]);
        else if (key == "conic_tol") cfg.conic_tol = to_double(vals[0]);
        else if (key == "samples") cfg.samples = to_idx(vals[0]);
        else if (key == "fill_fraction") cfg.fill_fraction = to_double(vals[0]);
        else if (key == "out_dir") cfg.out_dir = vals[0];
        else if (key == "bench_budget_ms") cfg.bench_budget_ms = to_double(vals[0]);
        else throw DimensionError("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DimensionError("config: cannot open " + path);
    return parse_config(f);
}

namespace {

template <class T>
void write_list(std::ostream& os, const char* key, const std::vector<T>& v) {
    os << key << " =";
    for (const T& x : v) os << " " << x;
    os << "\n";
}

} // namespace

void write_config(const ExperimentConfig& cfg, std::ostream& os) {
    os << "clusters = " << cfg.clusters << "\n";
    write_list(os, "sensors", cfg.sensors);
    write_list(os, "antennas", cfg.antennas);
    write_list(os, "power", cfg.power);
    write_list(os, "obs_noise", cfg.obs_noise);
    os << "rho = " << cfg.rho << "\n";
    os << "fc_antennas = " << cfg.fc_antennas << "\n";
    os << "source_power = " << cfg.source_power << "\n";
    os << "channel_variance = " << cfg.channel_variance << "\n";
    write_list(os, "channel_snr_db", cfg.channel_snr_db);
    os << "trials = " << cfg.trials << "\n";
    write_list(os, "algorithms", cfg.algorithms);
    os << "seed = " << cfg.seed << "\n";
    os << "outer_tol = " << cfg.outer_tol << "\n";
    os << "max_outer = " << cfg.max_outer << "\n";
    os << "bisect_tol = " << cfg.bisect_tol << "\n";
    os << "conic_tol = " << cfg.conic_tol << "\n";
    os << "samples = " << cfg.samples << "\n";
    os << "fill_fraction = " << cfg.fill_fraction << "\n";
    os << "out_dir = " << cfg.out_dir << "\n";
    os << "bench_budget_ms = " << cfg.bench_budget_ms << "\n";
}

double channel_noise_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

NetworkModel build_model(const ExperimentConfig& cfg, double channel_snr_db,
                         std::vector<CMat> channels) {
    NetworkModel m;
    m.fc_antennas = cfg.fc_antennas;
    m.fc_noise_power = channel_noise_from_snr_db(channel_snr_db);
    m.source_power = cfg.source_power;
    for (idx i = 0; i < cfg.clusters; ++i) {
        Cluster c;
        c.sensor_count = cfg.sensors[static_cast<std::size_t>(i)];
        c.obs_noise_cov =
            toeplitz_obs_cov(c.sensor_count, cfg.obs_noise[static_cast<std::size_t>(i)], cfg.rho);
        c.power_limit = cfg.power[static_cast<std::size_t>(i)];
        m.clusters.push_back(c);
    }
    m.channels = std::move(channels);
    m.validate();
    return m;
}

} // namespace snrbeam
