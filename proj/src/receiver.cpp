#include "snrbeam/receiver.hpp"

namespace snrbeam {

namespace {

// sigma_0^2 I + sum_i H_i F_i Sigma_i F_i^H H_i^H
Herm noise_matrix(const NetworkModel& model, const std::vector<CMat>& precoders) {
    const idx m = model.fc_antennas;
    CMat acc(m, m);
    for (idx i = 0; i < m; ++i) acc(i, i) = model.fc_noise_power;
    for (idx i = 0; i < model.num_clusters(); ++i) {
        const CMat hf = matmul(model.channel(i), precoders[static_cast<std::size_t>(i)]);
        acc += matmul(matmul(hf, model.sigma(i).mat()), adjoint(hf));
    }
    return Herm::enforce(acc);
}

} // namespace

CMat optimal_postcoder(const NetworkModel& model, const std::vector<CMat>& precoders) {
    const CMat h = combined_signature(model, precoders);
    if (norm2(h) == 0.0)
        throw DegenerateError("optimal_postcoder: combined signal signature is zero");
    CholC f = chol(noise_matrix(model, precoders));
    if (!f.ok) throw SingularError("optimal_postcoder: noise matrix not positive definite");
    return chol_solve(f.l, h);
}

double receiver_snr(const NetworkModel& model, const std::vector<CMat>& precoders) {
    const CMat h = combined_signature(model, precoders);
    if (norm2(h) == 0.0) return 0.0;
    CholC f = chol(noise_matrix(model, precoders));
    if (!f.ok) throw SingularError("receiver_snr: noise matrix not positive definite");
    // h^H M^-1 h = ||L^-1 h||^2
    const CMat z = solve_lower(f.l, h);
    const double n = norm2(z);
    return n * n;
}

double receiver_snr_whitened(const NetworkModel& model, const std::vector<CMat>& precoders) {
    const CMat h = combined_signature(model, precoders);
    if (norm2(h) == 0.0) return 0.0;
    Herm w = inv_sqrt_psd(noise_matrix(model, precoders));
    const CMat z = matmul(w.mat(), h);
    const double n = norm2(z);
    return n * n;
}

} // namespace snrbeam
