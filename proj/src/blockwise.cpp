#include "snrbeam/blockwise.hpp"

#include "snrbeam/receiver.hpp"

#include <chrono>
#include <cmath>

namespace snrbeam {

namespace {

CMat ones_col(idx n) {
    CMat v(n, 1);
    for (idx i = 0; i < n; ++i) v[i] = cd(1.0, 0.0);
    return v;
}

RMat half_embed(const Herm& h) {
    RMat e = hermitian_to_real_embedding(h);
    e *= 0.5;
    return e;
}

// stacked factor for one cluster: 1_K kron (H^H g)
CMat cluster_factor(const CMat& h_g, idx sensors) {
    const idx n = h_g.rows();
    CMat a(sensors * n, 1);
    for (idx k = 0; k < sensors; ++k)
        for (idx r = 0; r < n; ++r) a[k * n + r] = h_g[r];
    return a;
}

} // namespace

SubproblemData subproblem_data(const NetworkModel& model, const CMat& g,
                               const std::vector<CMat>& precoders, idx i) {
    if (norm2(g) == 0.0) throw DegenerateError("subproblem_data: zero postcoder");
    SubproblemData data;
    data.cluster = i;
    data.power = model.power_limit(i);
    data.h_g = adjoint_mul(model.channel(i), g);

    CMat a_i = cluster_factor(data.h_g, model.sensors(i));
    data.a_ii = Herm::enforce(matmul(a_i, adjoint(a_i)));
    CMat outer = matmul(data.h_g, adjoint(data.h_g));
    data.b_i = Herm::enforce(kron(conjugate(model.sigma(i).mat()), outer));
    CMat pow_core = ones_col(model.sensors(i)) * transpose(ones_col(model.sensors(i)));
    pow_core += conjugate(model.sigma(i).mat());
    data.c_i = Herm::enforce(kron(pow_core, CMat::identity(model.tx_antennas(i))));

    // beta = sum_{j != i} f_j^H a_j = conj(g^H sum_{j != i} H_j F_j 1)
    cd acc = 0.0;
    double dload = model.fc_noise_power * norm2(g) * norm2(g);
    for (idx j = 0; j < model.num_clusters(); ++j) {
        if (j == i) continue;
        const CMat& fj = precoders[static_cast<std::size_t>(j)];
        CMat sig = matmul(model.channel(j), matmul(fj, ones_col(model.sensors(j))));
        acc += dotc(static_cast<std::size_t>(g.rows()), g.data(), sig.data());
        CMat w = adjoint_mul(matmul(model.channel(j), fj), g);
        dload += std::real(quad_form(w, model.sigma(j).mat(), w));
    }
    data.beta = std::conj(acc);
    data.c_const = std::norm(data.beta);
    data.d_const = dload;
    data.q_i = a_i;
    data.q_i *= std::conj(data.beta);
    return data;
}

double subproblem_objective(const SubproblemData& data, const CMat& f_i) {
    const double num = std::real(quad_form(f_i, data.a_ii.mat(), f_i)) +
                       2.0 * std::real(dotc(static_cast<std::size_t>(f_i.rows()), data.q_i.data(),
                                            f_i.data())) +
                       data.c_const;
    const double den = std::real(quad_form(f_i, data.b_i.mat(), f_i)) + data.d_const;
    return num / den;
}

namespace {

// 2x2-block lifted coefficient [[m, v],[v^H, s]]
Herm lift(const Herm& m, const CMat& v, double s) {
    const idx n = m.order();
    CMat out(n + 1, n + 1);
    for (idx j = 0; j < n; ++j)
        for (idx i = 0; i < n; ++i) out(i, j) = m(i, j);
    for (idx i = 0; i < n; ++i) {
        out(i, n) = v.empty() ? cd{} : v[i];
        out(n, i) = v.empty() ? cd{} : std::conj(v[i]);
    }
    out(n, n) = s;
    return Herm::enforce(out);
}

// Reduce a lifted optimum to rank one while preserving the given Hermitian
// trace functionals exactly; valid whenever rank^2 exceeds their count.
Herm trace_preserving_rank_one(const Herm& z, const std::vector<Herm>& keep) {
    Herm y = z;
    const idx order = z.order();
    for (idx guard = 0; guard <= order + 2; ++guard) {
        EigDecomposition eig = herm_eig(y);
        idx r = 0;
        const double lmax = std::max(eig.values.front(), 0.0);
        for (double v : eig.values)
            if (v > 1e-6 * lmax) ++r;
        if (r <= 1) return y;

        CMat v(order, r);
        for (idx j = 0; j < r; ++j) {
            const double s = std::sqrt(eig.values[static_cast<std::size_t>(j)]);
            for (idx i = 0; i < order; ++i) v(i, j) = eig.vectors(i, j) * s;
        }
        RMat rows(static_cast<idx>(keep.size()), r * r);
        for (std::size_t krow = 0; krow < keep.size(); ++krow) {
            CMat m = adjoint_mul(v, matmul(keep[krow].mat(), v));
            idx col = 0;
            for (idx k = 0; k < r; ++k) rows(static_cast<idx>(krow), col++) = m(k, k).real();
            for (idx k = 0; k < r; ++k)
                for (idx j = 0; j < k; ++j) {
                    rows(static_cast<idx>(krow), col++) = 2.0 * m(j, k).real();
                    rows(static_cast<idx>(krow), col++) = 2.0 * m(j, k).imag();
                }
        }
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
        EigDecomposition de = herm_eig(Herm::enforce(delta));
        // sign chosen so I - delta/kappa annihilates the dominant direction
        const double mat_ext = std::abs(de.values.back()) > std::abs(de.values.front())
                                   ? de.values.back()
                                   : de.values.front();
        if (mat_ext < 0.0) delta *= cd(-1.0, 0.0);
        const double kappa = std::abs(mat_ext);
        if (!(kappa > 0.0)) throw NumericalError("rank-one extraction: zero perturbation");
        CMat core = CMat::identity(r);
        CMat scaled = delta;
        scaled *= cd(-1.0 / kappa, 0.0);
        core += scaled;
        y = Herm::enforce(matmul(matmul(v, core), adjoint(v)));
    }
    throw NumericalError("rank-one extraction failed to converge");
}

CMat top_eigvec_scaled(const Herm& z) {
    EigDecomposition eig = herm_eig(z);
    CMat out(z.order(), 1);
    const double s = std::sqrt(std::max(eig.values.front(), 0.0));
    for (idx i = 0; i < z.order(); ++i) out[i] = eig.vectors(i, 0) * s;
    return out;
}

void clamp_cluster_power(const SubproblemData& data, CMat& f) {
    const double p = std::real(quad_form(f, data.c_i.mat(), f));
    if (p > data.power && p > 0.0) f *= cd(std::sqrt(data.power / p), 0.0);
}

} // namespace

OneShotResult oneshot_sdr(const SubproblemData& data, const SolveOptions& opts) {
    OneShotResult out;
    const idx n = data.a_ii.order();
    if (norm2(data.h_g) == 0.0) {
        // dead cluster: the objective does not depend on f at all
        out.f = CMat(n, 1);
        out.objective = data.c_const / data.d_const;
        out.status = SolveStatus::Optimal;
        return out;
    }

    Herm q1 = lift(data.a_ii, data.q_i, data.c_const);
    Herm q2 = lift(data.b_i, CMat(), data.d_const);
    Herm q3 = lift(data.c_i, CMat(), 0.0);
    Herm q4 = lift(Herm::zero(n), CMat(), 1.0);

    ConicProblem p;
    const idx zb = p.add_block(ConeType::Psd, 2 * (n + 1));
    const idx eb = p.add_block(ConeType::Nonneg, 1);
    LinearTerm obj = p.new_term();
    obj.coeffs[zb] = half_embed(q1);
    p.set_objective(obj, true);
    LinearTerm norm_row = p.new_term();
    norm_row.coeffs[zb] = half_embed(q2);
    p.add_equality(norm_row, 1.0);
    LinearTerm pow_row = p.new_term();
    pow_row.coeffs[zb] = half_embed(q3);
    pow_row.coeffs[eb] = RMat(1, 1, {-data.power});
    p.add_inequality(pow_row, 0.0);
    LinearTerm eta_row = p.new_term();
    eta_row.coeffs[zb] = half_embed(q4);
    eta_row.coeffs[eb] = RMat(1, 1, {-1.0});
    p.add_equality(eta_row, 0.0);

    ConicSolution sol = solve(p, opts);
    out.status = sol.status;
    out.conic_iterations = sol.iterations;
    if (sol.status != SolveStatus::Optimal) return out;

    Herm z = herm_from_embedded(sol.primal[static_cast<std::size_t>(zb)]);
    const double opt_val = sol.objective_value;

    // keep the objective-vs-normalization combination and the two remaining
    // trace functionals, then peel down to rank one
    CMat combo = q1.mat();
    CMat q2s = q2.mat();
    q2s *= cd(opt_val, 0.0);
    combo -= q2s;
    std::vector<Herm> keep = {Herm::enforce(combo), q3, q4};
    z = trace_preserving_rank_one(z, keep);

    CMat zvec = top_eigvec_scaled(z);
    const cd z2 = zvec[n];
    if (std::abs(z2) <= 1e-9 * (1.0 + norm2(zvec)))
        throw NumericalError("oneshot_sdr: vanishing homogenization coordinate");
    out.f = CMat(n, 1);
    for (idx i = 0; i < n; ++i) out.f[i] = zvec[i] / z2;
    clamp_cluster_power(data, out.f);
    out.objective = subproblem_objective(data, out.f);
    return out;
}

ClosedFormInputs make_closed_form_inputs(const SubproblemData& data, double alpha) {
    ClosedFormInputs in;
    in.beta = data.beta;
    // |f|^2 cap implied by the isotropic power form of a single-sensor cluster
    in.p_bar = data.power / data.c_i(0, 0).real();
    in.h_g = data.h_g;
    in.alpha = alpha;
    return in;
}

LevelProbe solve_p8_closed(const ClosedFormInputs& in, const SubproblemData& data) {
    const double hn = norm2(in.h_g);
    if (hn == 0.0) throw DegenerateError("solve_p8_closed: dead cluster");
    // K = 1: the denominator block is sigma^2 (H^H g)(H^H g)^H
    const double sigma2 = std::real(trace(data.b_i.mat())) / (hn * hn);
    const double quad = in.alpha * sigma2 - 1.0;
    const double offset = in.alpha * data.d_const - data.c_const;
    const double babs = std::abs(in.beta);
    const double sq_pbar = std::sqrt(in.p_bar);

    cd tau;
    double opt;
    if (babs == 0.0) {
        if (quad >= 0.0) {
            tau = cd(0.0, 0.0);
            opt = offset;
        } else {
            tau = cd(sq_pbar, 0.0);
            opt = quad * hn * hn * in.p_bar + offset;
        }
    } else if (quad > 0.0 && babs / (hn * quad) <= sq_pbar) {
        tau = std::conj(in.beta) / (hn * quad);
        opt = offset - babs * babs / quad;
    } else if (quad == 0.0) {
        tau = sq_pbar * std::conj(in.beta) / babs;
        opt = -2.0 * hn * babs * sq_pbar + offset;
    } else {
        // full transmit power, phase aligned with conj(beta)
        tau = sq_pbar * std::conj(in.beta) / babs;
        opt = quad * hn * hn * in.p_bar - 2.0 * hn * sq_pbar * babs + offset;
    }
    LevelProbe probe;
    probe.opt_value = opt;
    probe.f = in.h_g;
    probe.f *= (tau / hn);
    return probe;
}

LevelProbe solve_p8_sdr(const SubproblemData& data, double alpha, const SolveOptions& opts) {
    const idx n = data.a_ii.order();
    if (n < 2) throw DimensionError("solve_p8_sdr: needs K_i N_i >= 2");

    CMat top = data.b_i.mat();
    top *= cd(alpha, 0.0);
    top -= data.a_ii.mat();
    CMat negq = data.q_i;
    negq *= cd(-1.0, 0.0);
    Herm p1 = lift(Herm::enforce(top), negq, alpha * data.d_const - data.c_const);
    Herm p2 = lift(data.c_i, CMat(), 0.0);
    Herm p3 = lift(Herm::zero(n), CMat(), 1.0);

    ConicProblem p;
    const idx xb = p.add_block(ConeType::Psd, 2 * (n + 1));
    LinearTerm obj = p.new_term();
    obj.coeffs[xb] = half_embed(p1);
    p.set_objective(obj, false);
    LinearTerm pow_row = p.new_term();
    pow_row.coeffs[xb] = half_embed(p2);
    p.add_inequality(pow_row, data.power);
    LinearTerm unit_row = p.new_term();
    unit_row.coeffs[xb] = half_embed(p3);
    p.add_equality(unit_row, 1.0);

    ConicSolution sol = solve(p, opts);
    if (sol.status != SolveStatus::Optimal)
        throw NumericalError(std::string("solve_p8_sdr: ") + to_string(sol.status));

    Herm x = herm_from_embedded(sol.primal[static_cast<std::size_t>(xb)]);
    std::vector<Herm> keep = {p1, p2, p3};
    x = trace_preserving_rank_one(x, keep);
    CMat xv = top_eigvec_scaled(x);
    const cd x2 = xv[n];
    if (std::abs(x2) <= 1e-9)
        throw NumericalError("solve_p8_sdr: vanishing homogenization coordinate");
    LevelProbe probe;
    probe.f = CMat(n, 1);
    for (idx i = 0; i < n; ++i) probe.f[i] = xv[i] / x2;
    clamp_cluster_power(data, probe.f);
    probe.opt_value = sol.objective_value;
    return probe;
}

double subproblem_upper_bound(const SubproblemData& data) {
    // lambda_max of the rank-one numerator block is K ||H^H g||^2
    const double hn2 = norm2(data.h_g) * norm2(data.h_g);
    const idx sensors = data.h_g.rows() > 0 ? data.a_ii.order() / data.h_g.rows() : 1;
    const double lam_max_a = static_cast<double>(sensors) * hn2;
    EigDecomposition ec = herm_eig(data.c_i);
    const double lam_min_c = ec.values.back();
    const double qn = norm2(data.q_i);
    const double num = lam_max_a * data.power / lam_min_c +
                       2.0 * qn * std::sqrt(data.power / lam_min_c) + data.c_const;
    return num / data.d_const;
}

ClusterBisection bisect_cluster(const SubproblemData& data, double current_snr, double eps_bis) {
    if (data.a_ii.order() != data.h_g.rows())
        throw DimensionError("bisect_cluster: single-sensor clusters only");
    if (norm2(data.h_g) == 0.0) throw DegenerateError("bisect_cluster: dead cluster");

    ClusterBisection out;
    double lo = current_snr;
    double hi = std::max(subproblem_upper_bound(data), lo);
    while (hi - lo >= eps_bis) {
        const double alpha = 0.5 * (lo + hi);
        LevelProbe probe = solve_p8_closed(make_closed_form_inputs(data, alpha), data);
        out.probes += 1;
        const double slack =
            1e-12 * (1.0 + std::abs(alpha * data.d_const) + std::abs(data.c_const));
        if (probe.opt_value <= slack)
            lo = alpha;
        else
            hi = alpha;
    }
    LevelProbe last = solve_p8_closed(make_closed_form_inputs(data, lo), data);
    out.f = last.f;
    out.achieved = lo;
    return out;
}

std::pair<BeamformerState, RunTrace> run_algorithm3(const NetworkModel& model,
                                                    const BeamformerState& init,
                                                    const AlgoOptions& opts) {
    using clock = std::chrono::steady_clock;
    BeamformerState state = init;
    RunTrace trace;
    trace.snr.push_back(evaluate_snr(model, state));

    SolveOptions conic_opts{opts.conic_tol, opts.conic_max_iters};

    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        const auto t0 = clock::now();
        int probes = 0, conic_iters = 0;
        bool aborted = false;
        for (idx i = 0; i < model.num_clusters() && !aborted; ++i) {
            CMat hg = adjoint_mul(model.channel(i), state.postcoder);
            if (norm2(hg) <= 1e-14 * (1.0 + frob_norm(model.channel(i)))) continue;
            SubproblemData data = subproblem_data(model, state.postcoder, state.precoders, i);
            CMat f_i;
            if (model.sensors(i) > 1) {
                OneShotResult res = oneshot_sdr(data, conic_opts);
                if (res.status != SolveStatus::Optimal) {
                    trace.failure = std::string("cluster SDP: ") + to_string(res.status);
                    aborted = true;
                    break;
                }
                conic_iters += res.conic_iterations;
                f_i = res.f;
            } else {
                ClusterBisection bis =
                    bisect_cluster(data, evaluate_snr(model, state), opts.bisect_tol);
                probes += bis.probes;
                f_i = bis.f;
            }
            state.precoders[static_cast<std::size_t>(i)] =
                unvec(f_i, model.tx_antennas(i), model.sensors(i));
            enforce_power(model, state.precoders);
            CMat g = optimal_postcoder(model, state.precoders);
            g *= cd(1.0 / norm2(g), 0.0);
            state.postcoder = g;
        }
        if (aborted) break;

        const double snr = evaluate_snr(model, state);
        trace.probe_counts.push_back(probes);
        trace.conic_iters.push_back(conic_iters);
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
