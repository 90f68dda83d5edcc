#include "doctest.h"

#include "snrbeam/forms.hpp"
#include "test_util.hpp"

using namespace snrbeam;
using namespace snrbeam::testutil;

TEST_CASE("assemble_forms on the scalar instance") {
    NetworkModel m = s1();
    CMat g(1, 1, {cd(1)});
    QuadraticForms forms = assemble_forms(m, g);
    CHECK(std::abs(forms.a(0, 0) - cd(1)) < 1e-14);
    CHECK(std::abs(forms.b(0, 0) - cd(1)) < 1e-14);
    CHECK(std::abs(forms.c[0](0, 0) - cd(2)) < 1e-14);
    CHECK(forms.c0 == doctest::Approx(1.0));
    CHECK_THROWS_AS(assemble_forms(m, CMat(1, 1)), DegenerateError);
}

TEST_CASE("assemble_forms on two scalar clusters") {
    NetworkModel m = s2();
    CMat g(1, 1, {cd(1)});
    QuadraticForms forms = assemble_forms(m, g);
    for (idx i = 0; i < 2; ++i)
        for (idx j = 0; j < 2; ++j) CHECK(std::abs(forms.a(i, j) - cd(1)) < 1e-14);
    CHECK(std::abs(forms.b(0, 0) - cd(1)) < 1e-14);
    CHECK(std::abs(forms.b(1, 1) - cd(1)) < 1e-14);
    CHECK(std::abs(forms.b(0, 1)) < 1e-14);
    CHECK(std::abs(forms.d[0](0, 0) - cd(2)) < 1e-14);
    CHECK(std::abs(forms.d[0](1, 1)) < 1e-14);
    CHECK(std::abs(forms.d[1](0, 0)) < 1e-14);
    CHECK(std::abs(forms.d[1](1, 1) - cd(2)) < 1e-14);
}

TEST_CASE("quadratic forms match direct evaluation of the SNR pieces") {
    for (int t = 0; t < 50; ++t) {
        NetworkModel m = random_model(3000 + static_cast<std::uint64_t>(t));
        BeamformerState s = random_feasible_init(m, 70 + static_cast<std::uint64_t>(t));
        const CMat& g = s.postcoder;
        QuadraticForms forms = assemble_forms(m, g);
        CMat f = stack_precoders(m, s.precoders);

        // numerator |g^H h|^2
        CMat h = combined_signature(m, s.precoders);
        const double signal = std::norm(dotc(static_cast<std::size_t>(g.rows()), g.data(), h.data()));
        const double faf = std::real(quad_form(f, forms.a.mat(), f));
        CHECK(faf == doctest::Approx(signal).epsilon(1e-10));

        // denominator noise part
        double noise = 0.0;
        for (idx i = 0; i < m.num_clusters(); ++i) {
            CMat w = adjoint_mul(matmul(m.channel(i), s.precoders[static_cast<std::size_t>(i)]), g);
            noise += std::real(quad_form(w, m.sigma(i).mat(), w));
        }
        const double fbf = std::real(quad_form(f, forms.b.mat(), f));
        CHECK(fbf == doctest::Approx(noise).epsilon(1e-10));

        // powers
        for (idx i = 0; i < m.num_clusters(); ++i) {
            const double p = transmit_power(m, s.precoders[static_cast<std::size_t>(i)], i);
            const double fdf = std::real(quad_form(f, forms.d[static_cast<std::size_t>(i)].mat(), f));
            CHECK(fdf == doctest::Approx(p).epsilon(1e-10));
        }

        // objective identity with the evaluated SNR
        CHECK(fractional_objective(forms, f) == doctest::Approx(evaluate_snr(m, s)).epsilon(1e-10));

        // round trip of stacking
        auto back = unstack_precoders(m, f);
        for (idx i = 0; i < m.num_clusters(); ++i)
            CHECK(frob_norm(back[static_cast<std::size_t>(i)] -
                            s.precoders[static_cast<std::size_t>(i)]) == 0.0);
    }
}

TEST_CASE("build_a produces the rank-one factor of the numerator form") {
    // two scalar clusters with K = (1, 2): a = (1,1,1)
    NetworkModel m;
    m.fc_antennas = 1;
    m.fc_noise_power = 1.0;
    Cluster c1;
    c1.sensor_count = 1;
    c1.obs_noise_cov = Herm::identity(1);
    c1.power_limit = 1.0;
    Cluster c2;
    c2.sensor_count = 2;
    c2.obs_noise_cov = Herm::identity(2);
    c2.power_limit = 1.0;
    m.clusters = {c1, c2};
    m.channels = {CMat(1, 1, {cd(1)}), CMat(1, 1, {cd(1)})};
    CMat g(1, 1, {cd(1)});
    CMat a = build_a(m, g);
    REQUIRE(a.rows() == 3);
    for (idx i = 0; i < 3; ++i) CHECK(std::abs(a[i] - cd(1)) < 1e-14);

    QuadraticForms forms = assemble_forms(m, g);
    CMat outer = matmul(a, adjoint(a));
    CHECK(frob_norm(outer - forms.a.mat()) < 1e-12);
}

TEST_CASE("rank-one factorization property on random instances") {
    for (int t = 0; t < 20; ++t) {
        NetworkModel m = random_model(4100 + static_cast<std::uint64_t>(t));
        BeamformerState s = random_feasible_init(m, 4 + static_cast<std::uint64_t>(t));
        QuadraticForms forms = assemble_forms(m, s.postcoder);
        CMat a = build_a(m, s.postcoder);
        CMat outer = matmul(a, adjoint(a));
        CHECK(frob_norm(outer - forms.a.mat()) <= 1e-10 * (1.0 + frob_norm(forms.a.mat())));
    }
}

TEST_CASE("always-feasible dual point on the scalar instance") {
    NetworkModel m = s1();
    CMat g(1, 1, {cd(1)});
    QuadraticForms forms = assemble_forms(m, g);
    DualPoint pt = dual_feasible_point(forms);
    CHECK(pt.mu[0] == doctest::Approx(0.5));
    CHECK(pt.lambda == doctest::Approx(1.0));
    DualFeasibility fe = check_dual_point(forms, pt);
    CHECK(fe.psd_margin >= -1e-12);
    CHECK(fe.scalar_margin == doctest::Approx(0.0));
}

TEST_CASE("dual point scales linearly with the numerator form") {
    NetworkModel m = s2();
    CMat g(1, 1, {cd(1)});
    QuadraticForms forms = assemble_forms(m, g);
    DualPoint base = dual_feasible_point(forms);
    QuadraticForms scaled = forms;
    CMat a2 = forms.a.mat();
    a2 *= cd(3.0, 0.0);
    scaled.a = Herm::enforce(a2);
    DualPoint sc = dual_feasible_point(scaled);
    CHECK(sc.lambda == doctest::Approx(3.0 * base.lambda));
    for (std::size_t i = 0; i < base.mu.size(); ++i)
        CHECK(sc.mu[i] == doctest::Approx(3.0 * base.mu[i]));
}

TEST_CASE("dual point is feasible on random instances") {
    for (int t = 0; t < 20; ++t) {
        NetworkModel m = random_model(5200 + static_cast<std::uint64_t>(t), 2, 2, 2, 2);
        BeamformerState s = random_feasible_init(m, 40 + static_cast<std::uint64_t>(t));
        QuadraticForms forms = assemble_forms(m, s.postcoder);
        DualPoint pt = dual_feasible_point(forms);
        DualFeasibility fe = check_dual_point(forms, pt);
        CHECK(fe.psd_margin >= -1e-9 * (1.0 + frob_norm(forms.a.mat())));
        CHECK(fe.scalar_margin >= -1e-9 * (1.0 + std::abs(pt.lambda)));
    }
}
