#include "doctest.h"

#include "snrbeam/receiver.hpp"
#include "test_util.hpp"

using namespace snrbeam;
using namespace snrbeam::testutil;

TEST_CASE("optimal postcoder closed form on a hand case") {
    // L=1, K=1, N=M=2, H=I, F=(1,0)^T, Sigma=1, sigma0^2=1:
    // M = diag(2,1), h=(1,0)^T, g = (1/2, 0)^T
    NetworkModel m;
    m.fc_antennas = 2;
    m.fc_noise_power = 1.0;
    Cluster c;
    c.sensor_count = 1;
    c.obs_noise_cov = Herm::identity(1);
    c.power_limit = 10.0;
    m.clusters.push_back(c);
    m.channels.push_back(CMat::identity(2));

    std::vector<CMat> f = {CMat(2, 1, {cd(1), cd(0)})};
    CMat g = optimal_postcoder(m, f);
    CHECK(std::abs(g[0] - cd(0.5)) < 1e-12);
    CHECK(std::abs(g[1]) < 1e-12);
    // h^H M^-1 h = 1/2
    CHECK(receiver_snr(m, f) == doctest::Approx(0.5));
}

TEST_CASE("noiseless forwarding reduces to a matched filter") {
    NetworkModel m;
    m.fc_antennas = 2;
    m.fc_noise_power = 2.0;
    Cluster c;
    c.sensor_count = 1;
    c.obs_noise_cov = Herm::zero(1); // test-only override of the PD assumption
    c.power_limit = 10.0;
    m.clusters.push_back(c);
    Rng rng(3);
    m.channels.push_back(rng.cscg_matrix(2, 1));

    std::vector<CMat> f = {CMat(1, 1, {cd(1)})};
    CMat g = optimal_postcoder(m, f);
    CMat h = combined_signature(m, f);
    // g should be h / sigma0^2
    CHECK(frob_norm(g - cd(1.0 / m.fc_noise_power, 0.0) * h) < 1e-12);
}

TEST_CASE("scalar instance values") {
    NetworkModel m = s1();
    std::vector<CMat> f = {CMat(1, 1, {cd(1)})};
    CMat g = optimal_postcoder(m, f);
    CHECK(std::abs(g[0] - cd(0.5)) < 1e-12);
    CHECK(receiver_snr(m, f) == doctest::Approx(0.5));
    BeamformerState s;
    s.precoders = f;
    s.postcoder = g;
    CHECK(evaluate_snr(m, s) == doctest::Approx(0.5));
}

TEST_CASE("all-zero precoders return zero through the degenerate branch") {
    NetworkModel m = s1();
    std::vector<CMat> f = {CMat(1, 1)};
    CHECK(receiver_snr(m, f) == 0.0);
    CHECK_THROWS_AS(optimal_postcoder(m, f), DegenerateError);
}

TEST_CASE("postcoder optimality against random competitors") {
    Rng rng(404);
    for (int inst = 0; inst < 100; ++inst) {
        NetworkModel m = random_model(9000 + static_cast<std::uint64_t>(inst));
        BeamformerState s = random_feasible_init(m, 31 + static_cast<std::uint64_t>(inst));
        const double best = receiver_snr(m, s.precoders);
        BeamformerState probe = s;
        for (int t = 0; t < 100; ++t) {
            probe.postcoder = rng.cscg_matrix(m.fc_antennas, 1);
            if (norm2(probe.postcoder) == 0.0) continue;
            CHECK(evaluate_snr(m, probe) <= best + 1e-9 * (1.0 + best));
        }
        // consistency with the evaluated optimum
        BeamformerState opt = s;
        opt.postcoder = optimal_postcoder(m, s.precoders);
        CHECK(evaluate_snr(m, opt) == doctest::Approx(best).epsilon(1e-10));
    }
}

TEST_CASE("whitened route and rank-one eigenvalue fixed point") {
    for (int inst = 0; inst < 10; ++inst) {
        NetworkModel m = random_model(777 + static_cast<std::uint64_t>(inst));
        BeamformerState s = random_feasible_init(m, 5 + static_cast<std::uint64_t>(inst));
        const double a = receiver_snr(m, s.precoders);
        const double b = receiver_snr_whitened(m, s.precoders);
        CHECK(a == doctest::Approx(b).epsilon(1e-9));

        // top eigenvalue of W h h^H W equals the receiver SNR
        CMat h = combined_signature(m, s.precoders);
        CMat m0(m.fc_antennas, m.fc_antennas);
        for (idx i = 0; i < m.fc_antennas; ++i) m0(i, i) = m.fc_noise_power;
        for (idx i = 0; i < m.num_clusters(); ++i) {
            const CMat hf = matmul(m.channel(i), s.precoders[static_cast<std::size_t>(i)]);
            m0 += matmul(matmul(hf, m.sigma(i).mat()), adjoint(hf));
        }
        Herm w = inv_sqrt_psd(Herm::enforce(m0));
        CMat wh = matmul(w.mat(), h);
        EigDecomposition e = herm_eig(Herm::enforce(matmul(wh, adjoint(wh))));
        CHECK(e.values[0] == doctest::Approx(a).epsilon(1e-9));
    }
}
