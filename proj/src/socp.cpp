#include "snrbeam/socp.hpp"

#include "snrbeam/receiver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace snrbeam {

double snr_upper_bound(const NetworkModel& model, const CMat& g) {
    if (norm2(g) == 0.0) throw DegenerateError("snr_upper_bound: zero postcoder");
    const double c0 = model.fc_noise_power * norm2(g) * norm2(g);
    double acc = 0.0;
    for (idx i = 0; i < model.num_clusters(); ++i) {
        CMat pow_core(model.sensors(i), model.sensors(i));
        for (idx r = 0; r < model.sensors(i); ++r)
            for (idx c = 0; c < model.sensors(i); ++c)
                pow_core(r, c) = cd(1.0, 0.0) + std::conj(model.sigma(i)(c, r));
        // C_i = ((1 1^T) + Sigma_i^*) kron I: lambda_min is that of the core
        EigDecomposition e = herm_eig(Herm::enforce(pow_core));
        const double lam_min = e.values.back();
        CMat hg = adjoint_mul(model.channel(i), g);
        acc += static_cast<double>(model.sensors(i)) *
               std::sqrt(model.power_limit(i) / lam_min) * norm2(hg);
    }
    return acc * acc / c0;
}

SocpProbe solve_p7gamma(const QuadraticForms& forms, const CMat& a, double gamma,
                        const SolveOptions& opts) {
    if (gamma < 0.0) throw DimensionError("solve_p7gamma: gamma must be nonnegative");
    const idx n = forms.total_dim();
    const idx l = static_cast<idx>(forms.block_dims.size());
    const double sq_gamma = std::sqrt(gamma);

    ConicProblem p;
    const idx ub = p.add_block(ConeType::Nonneg, 1);
    const idx z0 = p.add_block(ConeType::Soc, 2 * n + 2);
    std::vector<idx> zi(static_cast<std::size_t>(l));
    for (idx i = 0; i < l; ++i)
        zi[static_cast<std::size_t>(i)] =
            p.add_block(ConeType::Soc, 2 * forms.block_dims[static_cast<std::size_t>(i)] + 1);
    const idx fb = p.add_block(ConeType::Free, 2 * n);

    LinearTerm obj = p.new_term();
    obj.coeffs[ub] = RMat(1, 1, {1.0});
    p.set_objective(obj, false);

    // z0 head ties to Re{a^H f}; Im{a^H f} = 0
    {
        LinearTerm row = p.new_term();
        RMat head(2 * n + 2, 1);
        head[0] = 1.0;
        row.coeffs[z0] = head;
        RMat fr(2 * n, 1);
        for (idx i = 0; i < n; ++i) {
            fr[i] = -a[i].real();
            fr[n + i] = -a[i].imag();
        }
        row.coeffs[fb] = fr;
        p.add_equality(row, 0.0);
    }
    {
        LinearTerm row = p.new_term();
        RMat fr(2 * n, 1);
        for (idx i = 0; i < n; ++i) {
            fr[i] = -a[i].imag();
            fr[n + i] = a[i].real();
        }
        row.coeffs[fb] = fr;
        p.add_equality(row, 0.0);
    }
    // z0 tail rows: sqrt(gamma) B^{1/2} f and the constant sqrt(gamma c0)
    RMat broot = complex_op_real(psd_sqrt(forms.b).mat());
    for (idx r = 0; r < 2 * n; ++r) {
        LinearTerm row = p.new_term();
        RMat ze(2 * n + 2, 1);
        ze[1 + r] = 1.0;
        row.coeffs[z0] = ze;
        RMat fr(2 * n, 1);
        for (idx c = 0; c < 2 * n; ++c) fr[c] = -sq_gamma * broot(r, c);
        row.coeffs[fb] = fr;
        p.add_equality(row, 0.0);
    }
    {
        LinearTerm row = p.new_term();
        RMat ze(2 * n + 2, 1);
        ze[2 * n + 1] = 1.0;
        row.coeffs[z0] = ze;
        p.add_equality(row, std::sqrt(gamma * forms.c0));
    }
    // power cones: z_i = (u ; C_i^{1/2} f_i / sqrt(P_i))
    for (idx i = 0; i < l; ++i) {
        const idx di = forms.block_dims[static_cast<std::size_t>(i)];
        const idx off = forms.block_offset(i);
        {
            LinearTerm row = p.new_term();
            RMat ze(2 * di + 1, 1);
            ze[0] = 1.0;
            row.coeffs[zi[static_cast<std::size_t>(i)]] = ze;
            row.coeffs[ub] = RMat(1, 1, {-1.0});
            p.add_equality(row, 0.0);
        }
        RMat croot = complex_op_real(psd_sqrt(forms.c[static_cast<std::size_t>(i)]).mat());
        const double inv_sqp = 1.0 / std::sqrt(forms.power_limits[static_cast<std::size_t>(i)]);
        for (idx r = 0; r < 2 * di; ++r) {
            LinearTerm row = p.new_term();
            RMat ze(2 * di + 1, 1);
            ze[1 + r] = 1.0;
            row.coeffs[zi[static_cast<std::size_t>(i)]] = ze;
            RMat fr(2 * n, 1);
            for (idx c = 0; c < di; ++c) {
                // embedded coordinates of cluster i inside the global stack
                fr[off + c] = -inv_sqp * croot(r, c);
                fr[n + off + c] = -inv_sqp * croot(r, di + c);
            }
            row.coeffs[fb] = fr;
            p.add_equality(row, 0.0);
        }
    }

    ConicSolution sol = solve(p, opts);
    SocpProbe probe;
    probe.status = sol.status;
    probe.conic_iterations = sol.iterations;
    if (sol.status == SolveStatus::Infeasible) {
        probe.status = SolveStatus::Optimal;
        probe.u_opt = std::numeric_limits<double>::infinity();
        return probe;
    }
    if (sol.status != SolveStatus::Optimal) return probe;

    probe.f = complex_from_embedded_vec(sol.primal[static_cast<std::size_t>(fb)]);
    double u = 0.0;
    for (idx i = 0; i < l; ++i) {
        const double pw = std::real(quad_form(probe.f, forms.d[static_cast<std::size_t>(i)].mat(),
                                              probe.f));
        u = std::max(u, pw / forms.power_limits[static_cast<std::size_t>(i)]);
    }
    probe.u_opt = u;
    return probe;
}

BisectionResult bisect_precoders(const QuadraticForms& forms, const CMat& a, double bd_l,
                                 double bd_u, double eps_bis, const SolveOptions& opts) {
    constexpr double kFeasSlack = 1e-7;
    BisectionResult out;
    double lo = bd_l, hi = std::max(bd_u, bd_l);
    CMat cached_f;
    double cached_level = 0.0;
    while (hi - lo >= eps_bis) {
        const double gamma = 0.5 * (lo + hi);
        SocpProbe probe = solve_p7gamma(forms, a, gamma, opts);
        out.probes += 1;
        out.conic_iterations += probe.conic_iterations;
        if (probe.status != SolveStatus::Optimal) {
            // levels at the weakly-infeasible boundary cannot be certified
            // either way; they sit strictly above the constrained optimum,
            // so discard the upper half
            hi = gamma;
            continue;
        }
        if (probe.u_opt <= 1.0 + kFeasSlack) {
            lo = gamma;
            cached_f = probe.f;
            cached_level = gamma;
        } else {
            hi = gamma;
        }
    }
    SocpProbe last = solve_p7gamma(forms, a, lo, opts);
    out.conic_iterations += last.conic_iterations;
    if (last.status == SolveStatus::Optimal && last.u_opt <= 1.0 + kFeasSlack) {
        out.f = last.f;
        out.achieved = lo;
        return out;
    }
    if (!cached_f.empty()) {
        out.f = cached_f;
        out.achieved = cached_level;
        return out;
    }
    throw NumericalError("bisect_precoders: entry lower bound is infeasible");
}

std::pair<BeamformerState, RunTrace> run_algorithm2(const NetworkModel& model,
                                                    const BeamformerState& init,
                                                    const AlgoOptions& opts) {
    using clock = std::chrono::steady_clock;
    BeamformerState state = init;
    RunTrace trace;
    trace.snr.push_back(evaluate_snr(model, state));

    SolveOptions conic_opts{opts.conic_tol, opts.conic_max_iters};

    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        const auto t0 = clock::now();
        QuadraticForms forms = assemble_forms(model, state.postcoder);
        CMat a = build_a(model, state.postcoder);
        const double bd_l = trace.snr.back();
        const double bd_u = snr_upper_bound(model, state.postcoder);

        BisectionResult bis;
        try {
            bis = bisect_precoders(forms, a, bd_l, bd_u, opts.bisect_tol, conic_opts);
        } catch (const NumericalError& e) {
            trace.failure = e.what();
            break;
        }
        state.precoders = unstack_precoders(model, bis.f);
        enforce_power(model, state.precoders);
        CMat g = optimal_postcoder(model, state.precoders);
        g *= cd(1.0 / norm2(g), 0.0);
        state.postcoder = g;

        const double snr = evaluate_snr(model, state);
        trace.probe_counts.push_back(bis.probes);
        trace.conic_iters.push_back(bis.conic_iterations);
        trace.wall_ms.push_back(
            std::chrono::duration<double, std::milli>(clock::now() - t0).count());
        const double prev = trace.snr.back();
        trace.snr.push_back(snr);
        if (snr - prev <= opts.outer_tol * std::max(prev, 1e-12)) {
            trace.converged = true;
            break;
        }
    }
    trace.state_digest = state_digest(state);
    return {std::move(state), std::move(trace)};
}

} // namespace snrbeam
