#include "snrbeam/sdr.hpp"

#include "snrbeam/receiver.hpp"

#include <chrono>

namespace snrbeam {

namespace {

RMat half_embed(const Herm& h) {
    RMat e = hermitian_to_real_embedding(h);
    e *= 0.5;
    return e;
}

} // namespace

SdrResult solve_p4(const QuadraticForms& forms, const SolveOptions& opts) {
    const idx n = forms.total_dim();
    const idx l = static_cast<idx>(forms.block_dims.size());

    ConicProblem p;
    const idx yb = p.add_block(ConeType::Psd, 2 * n);
    const idx nub = p.add_block(ConeType::Nonneg, 1);

    LinearTerm obj = p.new_term();
    obj.coeffs[yb] = half_embed(forms.a);
    p.set_objective(obj, true);

    LinearTerm norm_row = p.new_term();
    norm_row.coeffs[yb] = half_embed(forms.b);
    norm_row.coeffs[nub] = RMat(1, 1, {forms.c0});
    p.add_inequality(norm_row, 1.0);

    for (idx i = 0; i < l; ++i) {
        LinearTerm row = p.new_term();
        row.coeffs[yb] = half_embed(forms.d[static_cast<std::size_t>(i)]);
        row.coeffs[nub] = RMat(1, 1, {-forms.power_limits[static_cast<std::size_t>(i)]});
        p.add_inequality(row, 0.0);
    }

    ConicSolution sol = solve(p, opts);
    SdrResult res;
    res.status = sol.status;
    res.conic_iterations = sol.iterations;
    if (sol.status != SolveStatus::Optimal) return res;

    res.y_opt = herm_from_embedded(sol.primal[static_cast<std::size_t>(yb)]);
    res.nu_opt = sol.primal[static_cast<std::size_t>(nub)][0];
    res.objective = sol.objective_value;

    const double scale = 1.0 + frob_norm(forms.a.mat());
    res.degenerate = res.objective <= 1e-7 * scale || !(res.nu_opt > 0.0);

    double active = std::real(trace(matmul(forms.b.mat(), res.y_opt.mat()))) +
                    forms.c0 * res.nu_opt;
    res.active_gap = std::abs(active - 1.0);
    return res;
}

idx numerical_rank(const std::vector<double>& eigenvalues) {
    if (eigenvalues.empty()) return 0;
    const double lmax = eigenvalues.front();
    if (!(lmax > 0.0)) return 0;
    idx r = 0;
    for (double v : eigenvalues)
        if (v > 1e-6 * lmax) ++r;
    return r;
}

void rank_reduce(Herm& y, double& nu, const QuadraticForms& forms) {
    const idx l = static_cast<idx>(forms.block_dims.size());
    const idx n = forms.total_dim();

    for (idx guard = 0; guard <= n + 2; ++guard) {
        EigDecomposition eig = herm_eig(y);
        const idx r = numerical_rank(eig.values);
        if (r * r + 1 <= l + 1 || r <= 1) return;

        // full-rank factor v with y = v v^H
        CMat v(n, r);
        for (idx j = 0; j < r; ++j) {
            const double s = std::sqrt(eig.values[static_cast<std::size_t>(j)]);
            for (idx i = 0; i < n; ++i) v(i, j) = eig.vectors(i, j) * s;
        }

        // homogeneous system in the Hermitian perturbation and the nu step
        const idx unknowns = r * r + 1;
        RMat rows(l + 1, unknowns);
        auto fill_row = [&](idx row, const CMat& m, double nu_coeff) {
            // m is r x r Hermitian (v^H Q v)
            idx col = 0;
            for (idx k = 0; k < r; ++k) rows(row, col++) = m(k, k).real();
            for (idx k = 0; k < r; ++k)
                for (idx j = 0; j < k; ++j) {
                    rows(row, col++) = 2.0 * m(j, k).real();
                    rows(row, col++) = 2.0 * m(j, k).imag();
                }
            rows(row, col) = nu_coeff;
        };
        fill_row(0, adjoint_mul(v, matmul(forms.b.mat(), v)), forms.c0 * nu);
        for (idx i = 0; i < l; ++i)
            fill_row(1 + i, adjoint_mul(v, matmul(forms.d[static_cast<std::size_t>(i)].mat(), v)),
                     -forms.power_limits[static_cast<std::size_t>(i)] * nu);

        RMat sample = real_nullspace_sample(rows);
        CMat delta(r, r);
        idx col = 0;
        for (idx k = 0; k < r; ++k) delta(k, k) = sample[col++];
        for (idx k = 0; k < r; ++k)
            for (idx j = 0; j < k; ++j) {
                const double pr = sample[col++];
                const double qi = sample[col++];
                delta(j, k) = cd(pr, qi);
                delta(k, j) = cd(pr, -qi);
            }
        double dnu = sample[col];

        EigDecomposition de = herm_eig(Herm::enforce(delta));
        // flip the sign of the whole solution so the dominant element is
        // positive: I - delta/kappa then loses rank (or nu hits its floor)
        const double mat_ext = std::abs(de.values.back()) > std::abs(de.values.front())
                                   ? de.values.back()
                                   : de.values.front();
        const double dominant = std::abs(mat_ext) >= std::abs(dnu) ? mat_ext : dnu;
        if (dominant < 0.0) {
            delta *= cd(-1.0, 0.0);
            dnu = -dnu;
        }
        const double kappa = std::max(std::abs(mat_ext), std::abs(dnu));
        if (!(kappa > 0.0)) throw NumericalError("rank_reduce: zero perturbation");

        CMat core = CMat::identity(r);
        CMat scaled_delta = delta;
        scaled_delta *= cd(-1.0 / kappa, 0.0);
        core += scaled_delta;
        y = Herm::enforce(matmul(matmul(v, core), adjoint(v)));
        nu *= (1.0 - dnu / kappa);
        if (!(nu > 0.0))
            throw NumericalError("rank_reduce: nu collapsed during reduction");
    }
    throw NumericalError("rank_reduce: failed to reach the target rank");
}

double rescale_beta(const QuadraticForms& forms, double nu, const CMat& f_tilde) {
    const double inf = std::numeric_limits<double>::infinity();
    double beta = 1.0;
    const double qb = std::real(quad_form(f_tilde, forms.b.mat(), f_tilde));
    const double head = std::max(1.0 - forms.c0 * nu, 0.0);
    if (qb > 0.0) beta = std::min(beta, std::sqrt(head / qb));
    for (std::size_t i = 0; i < forms.d.size(); ++i) {
        const double qd = std::real(quad_form(f_tilde, forms.d[i].mat(), f_tilde));
        const double cap = qd > 0.0 ? std::sqrt(forms.power_limits[i] * nu / qd) : inf;
        beta = std::min(beta, cap);
    }
    return beta;
}

CMat randomize_and_rescale(const Herm& y, double nu, const QuadraticForms& forms, idx samples,
                           std::uint64_t seed) {
    if (!(nu > 0.0)) throw DegenerateError("randomize_and_rescale: nonpositive nu");
    const idx n = y.order();
    EigDecomposition eig = herm_eig(y);
    idx r = 0;
    for (double v : eig.values)
        if (v > 0.0) ++r;
    if (r == 0) throw DegenerateError("randomize_and_rescale: zero covariance");
    CMat factor(n, r);
    for (idx j = 0; j < r; ++j) {
        const double s = std::sqrt(eig.values[static_cast<std::size_t>(j)]);
        for (idx i = 0; i < n; ++i) factor(i, j) = eig.vectors(i, j) * s;
    }

    CMat best(n, 1);
    double best_obj = -1.0;
    idx best_index = -1;
    const double inv_sqrt_nu = 1.0 / std::sqrt(nu);
    for (idx k = 0; k < samples; ++k) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        CMat z = rng.cscg_matrix(r, 1);
        CMat f = matmul(factor, z);
        const double beta = rescale_beta(forms, nu, f);
        f *= cd(beta * inv_sqrt_nu, 0.0);
        const double obj = fractional_objective(forms, f);
        if (obj > best_obj) {
            best_obj = obj;
            best = f;
            best_index = k;
        }
    }
    (void)best_index;
    if (!(best_obj > 0.0))
        throw DegenerateError("randomize_and_rescale: all samples scored zero");
    return best;
}

namespace {

CMat rank_one_factor(const Herm& y, double nu) {
    EigDecomposition eig = herm_eig(y);
    const double lam = std::max(eig.values.front(), 0.0);
    CMat f(y.order(), 1);
    const double s = std::sqrt(lam / nu);
    for (idx i = 0; i < y.order(); ++i) f[i] = eig.vectors(i, 0) * s;
    return f;
}

} // namespace

std::pair<BeamformerState, RunTrace> run_algorithm1(const NetworkModel& model,
                                                    const BeamformerState& init,
                                                    const AlgoOptions& opts) {
    using clock = std::chrono::steady_clock;
    BeamformerState state = init;
    RunTrace trace;
    trace.snr.push_back(evaluate_snr(model, state));

    SolveOptions conic_opts{opts.conic_tol, opts.conic_max_iters};
    const idx l = model.num_clusters();

    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        const auto t0 = clock::now();
        QuadraticForms forms = assemble_forms(model, state.postcoder);
        SdrResult res = solve_p4(forms, conic_opts);
        if (res.status != SolveStatus::Optimal) {
            trace.failure = std::string("precoder SDP: ") + to_string(res.status);
            break;
        }
        if (res.degenerate) {
            trace.failure = "precoder SDP degenerate (zero-signal boundary)";
            break;
        }
        CMat f;
        if (l <= 3) {
            Herm y = res.y_opt;
            double nu = res.nu_opt;
            rank_reduce(y, nu, forms);
            f = rank_one_factor(y, nu);
        } else {
            f = randomize_and_rescale(res.y_opt, res.nu_opt, forms, opts.samples,
                                      derive_seed(opts.seed, static_cast<std::uint64_t>(outer)));
        }
        state.precoders = unstack_precoders(model, f);
        enforce_power(model, state.precoders);
        CMat g = optimal_postcoder(model, state.precoders);
        g *= cd(1.0 / norm2(g), 0.0);
        state.postcoder = g;

        const double snr = evaluate_snr(model, state);
        trace.conic_iters.push_back(res.conic_iterations);
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
