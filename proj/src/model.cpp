#include "snrbeam/model.hpp"

#include "snrbeam/receiver.hpp"

#include <cmath>

namespace snrbeam {

idx NetworkModel::stacked_dim() const {
    idx n = 0;
    for (idx i = 0; i < num_clusters(); ++i) n += sensors(i) * tx_antennas(i);
    return n;
}

void NetworkModel::validate() const {
    if (clusters.size() != channels.size())
        throw DimensionError("model: clusters/channels length mismatch");
    if (fc_antennas <= 0 || fc_noise_power <= 0.0 || source_power <= 0.0)
        throw DimensionError("model: nonpositive fusion-center parameters");
    for (idx i = 0; i < num_clusters(); ++i) {
        const Cluster& c = clusters[static_cast<std::size_t>(i)];
        if (c.sensor_count <= 0 || c.power_limit <= 0.0)
            throw DimensionError("model: nonpositive cluster parameters");
        if (c.obs_noise_cov.order() != c.sensor_count)
            throw DimensionError("model: obs covariance order mismatch");
        if (channel(i).rows() != fc_antennas)
            throw DimensionError("model: channel row count mismatch");
    }
}

namespace {

CMat ones_col(idx n) {
    CMat v(n, 1);
    for (idx i = 0; i < n; ++i) v[i] = cd(1.0, 0.0);
    return v;
}

void check_state_dims(const NetworkModel& model, const BeamformerState& state) {
    if (static_cast<idx>(state.precoders.size()) != model.num_clusters())
        throw DimensionError("state: precoder count mismatch");
    for (idx i = 0; i < model.num_clusters(); ++i) {
        const CMat& f = state.precoders[static_cast<std::size_t>(i)];
        if (f.rows() != model.tx_antennas(i) || f.cols() != model.sensors(i))
            throw DimensionError("state: precoder shape mismatch");
    }
    if (state.postcoder.rows() != model.fc_antennas || state.postcoder.cols() != 1)
        throw DimensionError("state: postcoder shape mismatch");
}

} // namespace

CMat combined_signature(const NetworkModel& model, const std::vector<CMat>& precoders) {
    CMat h(model.fc_antennas, 1);
    for (idx i = 0; i < model.num_clusters(); ++i) {
        const CMat& f = precoders[static_cast<std::size_t>(i)];
        h += matmul(model.channel(i), matmul(f, ones_col(model.sensors(i))));
    }
    return h;
}

double evaluate_snr(const NetworkModel& model, const BeamformerState& state) {
    check_state_dims(model, state);
    const CMat& g = state.postcoder;
    const double g2 = norm2(g);
    if (g2 == 0.0) throw DegenerateError("evaluate_snr: zero postcoder");

    const CMat h = combined_signature(model, state.precoders);
    const cd gh = dotc(static_cast<std::size_t>(g.rows()), g.data(), h.data());
    const double signal = std::norm(gh);

    double noise = model.fc_noise_power * g2 * g2;
    for (idx i = 0; i < model.num_clusters(); ++i) {
        const CMat& f = state.precoders[static_cast<std::size_t>(i)];
        // g^H H_i F_i Sigma_i F_i^H H_i^H g
        CMat w = adjoint_mul(matmul(model.channel(i), f), g); // (H F)^H g
        noise += std::real(quad_form(w, model.sigma(i).mat(), w));
    }
    return signal / noise;
}

double transmit_power(const NetworkModel& model, const CMat& f_i, idx i) {
    if (f_i.rows() != model.tx_antennas(i) || f_i.cols() != model.sensors(i))
        throw DimensionError("transmit_power: precoder shape mismatch");
    const idx k = model.sensors(i);
    CMat cov = model.sigma(i).mat();
    CMat one = ones_col(k);
    cov += matmul(one, adjoint(one));
    // Tr{F (11^H + Sigma) F^H}
    CMat fc = matmul(f_i, cov);
    double p = 0.0;
    for (idx r = 0; r < f_i.rows(); ++r)
        for (idx c = 0; c < k; ++c) p += std::real(fc(r, c) * std::conj(f_i(r, c)));
    return p;
}

void enforce_power(const NetworkModel& model, std::vector<CMat>& precoders) {
    for (idx i = 0; i < model.num_clusters(); ++i) {
        CMat& f = precoders[static_cast<std::size_t>(i)];
        const double p = transmit_power(model, f, i);
        const double cap = model.power_limit(i);
        if (p > cap && p > 0.0) f *= cd(std::sqrt(cap / p), 0.0);
    }
}

bool is_power_feasible(const NetworkModel& model, const BeamformerState& state, double rel_slack) {
    for (idx i = 0; i < model.num_clusters(); ++i) {
        const double p = transmit_power(model, state.precoders[static_cast<std::size_t>(i)], i);
        if (p > model.power_limit(i) * (1.0 + rel_slack)) return false;
    }
    return true;
}

Herm toeplitz_obs_cov(idx sensors, double sigma2, double rho) {
    if (sensors < 1) throw DimensionError("toeplitz_obs_cov: need at least one sensor");
    if (!(std::abs(rho) < 1.0)) throw DimensionError("toeplitz_obs_cov: |rho| must be < 1");
    CMat m(sensors, sensors);
    for (idx j = 0; j < sensors; ++j)
        for (idx i = 0; i < sensors; ++i)
            m(i, j) = sigma2 * std::pow(rho, static_cast<double>(std::abs(i - j)));
    return Herm::enforce(m);
}

std::vector<CMat> random_channels(idx fc_antennas, const std::vector<idx>& tx_antennas,
                                  double entry_variance, std::uint64_t seed) {
    if (entry_variance <= 0.0) throw DimensionError("random_channels: variance must be positive");
    Rng rng(seed);
    std::vector<CMat> out;
    out.reserve(tx_antennas.size());
    for (idx n : tx_antennas) out.push_back(rng.cscg_matrix(fc_antennas, n, entry_variance));
    return out;
}

BeamformerState random_feasible_init(const NetworkModel& model, std::uint64_t seed,
                                     double fill_fraction) {
    if (!(fill_fraction > 0.0 && fill_fraction <= 1.0))
        throw DimensionError("random_feasible_init: fill_fraction outside (0,1]");
    const int max_attempts = 8;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        BeamformerState state;
        state.precoders.reserve(static_cast<std::size_t>(model.num_clusters()));
        for (idx i = 0; i < model.num_clusters(); ++i) {
            CMat f = rng.cscg_matrix(model.tx_antennas(i), model.sensors(i));
            const double p = transmit_power(model, f, i);
            if (p <= 0.0) {
                state.precoders.clear();
                break;
            }
            f *= cd(std::sqrt(fill_fraction * model.power_limit(i) / p), 0.0);
            state.precoders.push_back(std::move(f));
        }
        if (static_cast<idx>(state.precoders.size()) != model.num_clusters()) continue;
        const CMat h = combined_signature(model, state.precoders);
        if (norm2(h) == 0.0) continue;
        state.postcoder = optimal_postcoder(model, state.precoders);
        const double gn = norm2(state.postcoder);
        if (gn == 0.0) continue;
        state.postcoder *= cd(1.0 / gn, 0.0);
        return state;
    }
    throw DegenerateError("random_feasible_init: could not draw a nonzero start");
}

} // namespace snrbeam
