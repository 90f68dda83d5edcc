#include "doctest.h"

#include "snrbeam/blockwise.hpp"
#include "snrbeam/receiver.hpp"
#include "snrbeam/sdr.hpp"
#include "test_util.hpp"

using namespace snrbeam;
using namespace snrbeam::testutil;

namespace {

SubproblemData s2_block1_data() {
    NetworkModel m = s2();
    std::vector<CMat> f = {CMat(1, 1, {cd(0.0)}), CMat(1, 1, {cd(1.0)})};
    CMat g(1, 1, {cd(1)});
    return subproblem_data(m, g, f, 0);
}

// random single-sensor subproblem with nontrivial coupling
SubproblemData random_k1_subproblem(std::uint64_t seed, idx* n_out = nullptr) {
    Rng rng(seed);
    NetworkModel m;
    m.fc_antennas = 2;
    m.fc_noise_power = rng.uniform(0.4, 1.2);
    m.source_power = 1.0;
    const idx n1 = 1 + static_cast<idx>(rng.next_u64() % 3);
    for (idx n : {n1, idx(1)}) {
        Cluster c;
        c.sensor_count = 1;
        c.obs_noise_cov = toeplitz_obs_cov(1, rng.uniform(0.3, 2.0), 0.5);
        c.power_limit = rng.uniform(0.5, 2.0);
        m.clusters.push_back(c);
        m.channels.push_back(rng.cscg_matrix(2, n));
    }
    BeamformerState s = random_feasible_init(m, seed + 101);
    if (n_out) *n_out = n1;
    return subproblem_data(m, s.postcoder, s.precoders, 0);
}

} // namespace

TEST_CASE("subproblem data on the two-cluster scalar instance") {
    SubproblemData d = s2_block1_data();
    CHECK(std::abs(d.q_i[0] - cd(1)) < 1e-14);
    CHECK(d.c_const == doctest::Approx(1.0));
    CHECK(d.d_const == doctest::Approx(2.0));
    CHECK(std::abs(d.beta - cd(1)) < 1e-14);

    // all other precoders zero
    NetworkModel m = s2();
    std::vector<CMat> fz = {CMat(1, 1), CMat(1, 1)};
    CMat g(1, 1, {cd(1)});
    SubproblemData dz = subproblem_data(m, g, fz, 0);
    CHECK(norm2(dz.q_i) == doctest::Approx(0.0));
    CHECK(dz.c_const == doctest::Approx(0.0));
    CHECK(dz.d_const == doctest::Approx(1.0));
}

TEST_CASE("blocked and stacked objectives agree on random states") {
    for (std::uint64_t t = 0; t < 50; ++t) {
        NetworkModel m = random_model(14000 + t);
        BeamformerState s = random_feasible_init(m, t + 5);
        QuadraticForms forms = assemble_forms(m, s.postcoder);
        CMat f = stack_precoders(m, s.precoders);
        const double stacked = fractional_objective(forms, f);
        for (idx i = 0; i < m.num_clusters(); ++i) {
            SubproblemData d = subproblem_data(m, s.postcoder, s.precoders, i);
            const double blocked =
                subproblem_objective(d, vec(s.precoders[static_cast<std::size_t>(i)]));
            CHECK(blocked == doctest::Approx(stacked).epsilon(1e-10));
        }
    }
}

TEST_CASE("one-shot SDR solves the coupled scalar block") {
    SubproblemData d = s2_block1_data();
    OneShotResult res = oneshot_sdr(d);
    REQUIRE(res.status == SolveStatus::Optimal);
    // optimal f1 = 1 giving the joint value 4/3
    CHECK(std::abs(res.f[0] - cd(1)) < 1e-4);
    CHECK(res.objective == doctest::Approx(4.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("one-shot SDR returns zero for a dead cluster") {
    NetworkModel m = s2();
    m.channels[0] = CMat(1, 1); // H_1 = 0
    std::vector<CMat> f = {CMat(1, 1, {cd(0.3)}), CMat(1, 1, {cd(1.0)})};
    CMat g(1, 1, {cd(1)});
    SubproblemData d = subproblem_data(m, g, f, 0);
    OneShotResult res = oneshot_sdr(d);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(norm2(res.f) == doctest::Approx(0.0));
}

TEST_CASE("closed form reproduces the hand-computed case arithmetic") {
    SubproblemData d = s2_block1_data();
    // alpha = 4/3: interior candidate norm 3 exceeds sqrt(pbar) = 1, so full
    // power with f1 = 1 and the level test lands exactly on zero
    {
        LevelProbe probe = solve_p8_closed(make_closed_form_inputs(d, 4.0 / 3.0), d);
        CHECK(std::abs(probe.f[0] - cd(1)) < 1e-12);
        CHECK(probe.opt_value == doctest::Approx(0.0).epsilon(1e-12));
    }
    // alpha = 0.5 < 1/sigma^2: full power and the value -2.5
    {
        LevelProbe probe = solve_p8_closed(make_closed_form_inputs(d, 0.5), d);
        CHECK(std::abs(probe.f[0] - cd(1)) < 1e-12);
        CHECK(probe.opt_value == doctest::Approx(-2.5));
    }
    // beta = 0 and alpha sigma^2 >= 1: tau = 0 by convention
    {
        NetworkModel m = s2();
        std::vector<CMat> fz = {CMat(1, 1), CMat(1, 1)};
        CMat g(1, 1, {cd(1)});
        SubproblemData dz = subproblem_data(m, g, fz, 0);
        LevelProbe probe = solve_p8_closed(make_closed_form_inputs(dz, 1.0), dz);
        CHECK(norm2(probe.f) == doctest::Approx(0.0));
    }
}

TEST_CASE("closed-form minimizer is globally optimal against random probes") {
    for (std::uint64_t t = 0; t < 20; ++t) {
        SubproblemData d = random_k1_subproblem(15000 + t);
        Rng rng(31 + t);
        const double alpha = rng.uniform(0.0, 3.0);
        ClosedFormInputs in = make_closed_form_inputs(d, alpha);
        LevelProbe best = solve_p8_closed(in, d);
        // level-test objective at any f
        auto level_value = [&](const CMat& f) {
            const double num = std::real(quad_form(f, d.a_ii.mat(), f)) +
                               2.0 * std::real(dotc(static_cast<std::size_t>(f.rows()),
                                                    d.q_i.data(), f.data())) +
                               d.c_const;
            const double den = std::real(quad_form(f, d.b_i.mat(), f)) + d.d_const;
            return alpha * den - num;
        };
        CHECK(level_value(best.f) == doctest::Approx(best.opt_value).epsilon(1e-9));
        const double cap = std::sqrt(in.p_bar);
        for (int probe = 0; probe < 500; ++probe) {
            // random feasible direction along h_g plus a random orthogonal part
            CMat f = rng.cscg_matrix(d.h_g.rows(), 1);
            const double nf = norm2(f);
            if (nf == 0.0) continue;
            f *= cd(cap * rng.uniform() / nf, 0.0);
            CHECK(best.opt_value <= level_value(f) + 1e-9 * (1.0 + std::abs(best.opt_value)));
        }
    }
}

TEST_CASE("closed form and SDR level tests agree on single-sensor clusters") {
    int compared = 0;
    for (std::uint64_t t = 0; t < 50; ++t) {
        idx n1 = 0;
        SubproblemData d = random_k1_subproblem(16000 + t, &n1);
        if (d.a_ii.order() < 2) continue; // SDR route needs K N >= 2
        Rng rng(7 + t);
        const double alpha = rng.uniform(0.1, 2.5);
        LevelProbe closed = solve_p8_closed(make_closed_form_inputs(d, alpha), d);
        LevelProbe sdr = solve_p8_sdr(d, alpha);
        CHECK(closed.opt_value ==
              doctest::Approx(sdr.opt_value).epsilon(1e-6).scale(1.0 + std::abs(closed.opt_value)));
        ++compared;
    }
    CHECK(compared >= 20);
}

TEST_CASE("level test at alpha = 0 reduces to maximizing the numerator") {
    SubproblemData d = random_k1_subproblem(17000);
    if (d.a_ii.order() >= 2) {
        LevelProbe probe = solve_p8_sdr(d, 0.0);
        // minimum of -(numerator) is at most -c (f = 0 is feasible)
        CHECK(probe.opt_value <= -d.c_const + 1e-8 * (1.0 + d.c_const));
    }
    // huge alpha: no feasible f reaches the level
    LevelProbe hi = solve_p8_closed(make_closed_form_inputs(d, 1e6), d);
    CHECK(hi.opt_value > 0.0);
}

TEST_CASE("sign bridge: nonpositive level test iff the level is reachable") {
    // all-scalar two-cluster instances; the reachable set is a grid scan
    for (std::uint64_t t = 0; t < 10; ++t) {
        Rng rng(26000 + t);
        NetworkModel m = scalar_model({rng.cscg(2.0), rng.cscg(2.0)},
                                      {rng.uniform(0.4, 1.6), rng.uniform(0.4, 1.6)},
                                      {rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)},
                                      rng.uniform(0.4, 1.2));
        BeamformerState s = random_feasible_init(m, t + 40);
        SubproblemData d = subproblem_data(m, s.postcoder, s.precoders, 0);
        // best reachable block objective by scanning |f| at the aligned phase
        const double cap = std::sqrt(make_closed_form_inputs(d, 0.0).p_bar);
        double best = 0.0;
        for (idx k = 0; k <= 4000; ++k) {
            const double mag = cap * static_cast<double>(k) / 4000.0;
            CMat f = d.h_g;
            f *= (std::conj(d.beta) / (std::abs(d.beta) * norm2(d.h_g)) * mag);
            best = std::max(best, subproblem_objective(d, f));
        }
        for (double rel : {0.8, 0.95, 1.05, 1.3}) {
            const double alpha = best * rel;
            LevelProbe probe = solve_p8_closed(make_closed_form_inputs(d, alpha), d);
            if (rel < 1.0) CHECK(probe.opt_value <= 1e-6 * (1.0 + std::abs(probe.opt_value)));
            if (rel > 1.0) CHECK(probe.opt_value > -1e-6 * (1.0 + std::abs(probe.opt_value)));
        }
    }
}

TEST_CASE("subproblem upper bound dominates") {
    SubproblemData d = s2_block1_data();
    // (1*2/2 + 2*1*sqrt(2)/sqrt(2) + 1)/2 = 2 at the hand instance
    CHECK(subproblem_upper_bound(d) == doctest::Approx(2.0));

    // q = 0, c = 0 reduces to ||H^H g||^2 P / (lambda_min(C) d)
    NetworkModel m = s2();
    std::vector<CMat> fz = {CMat(1, 1), CMat(1, 1)};
    CMat g(1, 1, {cd(1)});
    SubproblemData dz = subproblem_data(m, g, fz, 0);
    CHECK(subproblem_upper_bound(dz) == doctest::Approx(2.0 / (2.0 * 1.0)));

    for (std::uint64_t t = 0; t < 100; ++t) {
        SubproblemData dr = random_k1_subproblem(18000 + t);
        OneShotResult res = oneshot_sdr(dr);
        REQUIRE(res.status == SolveStatus::Optimal);
        CHECK(res.objective <= subproblem_upper_bound(dr) * (1.0 + 1e-9) + 1e-9);
    }
}

TEST_CASE("cluster bisection matches the one-shot route") {
    SubproblemData d = s2_block1_data();
    ClusterBisection bis = bisect_cluster(d, 0.5, 1e-4);
    CHECK(bis.achieved == doctest::Approx(4.0 / 3.0).epsilon(2e-4));
    CHECK(std::abs(bis.f[0] - cd(1)) < 1e-3);

    for (std::uint64_t t = 0; t < 20; ++t) {
        SubproblemData dr = random_k1_subproblem(19000 + t);
        const double start = subproblem_objective(dr, CMat(dr.h_g.rows(), 1)) * 0.5;
        ClusterBisection b = bisect_cluster(dr, start, 1e-5);
        OneShotResult o = oneshot_sdr(dr);
        REQUIRE(o.status == SolveStatus::Optimal);
        CHECK(subproblem_objective(dr, b.f) ==
              doctest::Approx(o.objective).epsilon(1e-4));
        // the K = 1 minimizer always aligns with H^H g
        const double par = std::abs(dotc(static_cast<std::size_t>(dr.h_g.rows()), dr.h_g.data(),
                                         b.f.data()));
        CHECK(norm2(b.f) * norm2(dr.h_g) == doctest::Approx(par).epsilon(1e-9));
    }
}

TEST_CASE("collapsed interval keeps the current level") {
    SubproblemData d = s2_block1_data();
    ClusterBisection bis = bisect_cluster(d, 4.0 / 3.0, 1e-4);
    CHECK(bis.achieved >= 4.0 / 3.0 - 1e-4);
    CHECK(subproblem_objective(d, bis.f) == doctest::Approx(4.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("algorithm 3 on the scalar instances") {
    AlgoOptions opts;
    opts.outer_tol = 1e-6;

    NetworkModel m2 = s2();
    BeamformerState init2 = scalar_state(m2, {cd(0.5), cd(0.5)});
    init2.postcoder = optimal_postcoder(m2, init2.precoders);
    init2.postcoder *= cd(1.0 / norm2(init2.postcoder), 0.0);
    auto [state2, trace2] = run_algorithm3(m2, init2, opts);
    REQUIRE(trace2.failure.empty());
    CHECK(trace2.final_snr() == doctest::Approx(4.0 / 3.0).epsilon(1e-3));

    NetworkModel m1 = s1();
    BeamformerState init1 = scalar_state(m1, {cd(0.5)});
    init1.postcoder = optimal_postcoder(m1, init1.precoders);
    init1.postcoder *= cd(1.0 / norm2(init1.postcoder), 0.0);
    auto [state1, trace1] = run_algorithm3(m1, init1, opts);
    REQUIRE(trace1.failure.empty());
    CHECK(trace1.final_snr() == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("algorithm 3 agrees with algorithm 1 and ascends monotonically") {
    for (std::uint64_t t = 0; t < 10; ++t) {
        NetworkModel m = random_model(20000 + t, 3, 2, 2, 2);
        BeamformerState init = random_feasible_init(m, t + 2);
        AlgoOptions opts;
        opts.outer_tol = 1e-5;
        opts.max_outer = 60;
        auto [sa, ta] = run_algorithm1(m, init, opts);
        auto [sb, tb] = run_algorithm3(m, init, opts);
        REQUIRE(ta.failure.empty());
        REQUIRE(tb.failure.empty());
        CHECK(ta.final_snr() == doctest::Approx(tb.final_snr()).epsilon(1e-2));
        for (std::size_t k = 1; k < tb.snr.size(); ++k)
            CHECK(tb.snr[k] >= tb.snr[k - 1] * (1.0 - 1e-8) - opts.bisect_tol - 1e-8);
        CHECK(is_power_feasible(m, sb));
    }
}
