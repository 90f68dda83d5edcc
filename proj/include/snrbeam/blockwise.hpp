#pragma once

// Per-cluster precoder updates: a single-cluster fractional subproblem is
// solved either by a one-shot lifted SDP with rank-one extraction, or, for
// single-sensor clusters, by bisection with a fully closed-form inner step.

#include "snrbeam/conic.hpp"
#include "snrbeam/forms.hpp"
#include "snrbeam/trace.hpp"

namespace snrbeam {

struct SubproblemData {
    idx cluster = 0;
    Herm a_ii;       // rank-one numerator block
    Herm b_i;        // denominator block
    Herm c_i;        // power form, positive definite
    CMat q_i;        // cross coupling from the other clusters
    cd beta = 0.0;   // sum_{j != i} f_j^H a_j, with q_i = a_i conj(beta)
    double c_const = 0.0; // |beta|^2
    double d_const = 0.0; // c0 plus the other clusters' denominator load
    double power = 0.0;
    CMat h_g;        // H_i^H g
};

SubproblemData subproblem_data(const NetworkModel& model, const CMat& g,
                               const std::vector<CMat>& precoders, idx i);

// Blocked objective (f^H A_ii f + 2 Re{q^H f} + c) / (f^H B_i f + d); equals
// the stacked fractional objective at the full precoder state.
double subproblem_objective(const SubproblemData& data, const CMat& f_i);

struct OneShotResult {
    CMat f;
    double objective = 0.0;
    int conic_iterations = 0;
    SolveStatus status = SolveStatus::NumericalFailure;
};

// Lifted SDP for the cluster subproblem plus deterministic rank-one
// extraction; exact for this constraint structure.
OneShotResult oneshot_sdr(const SubproblemData& data, const SolveOptions& opts = {});

struct ClosedFormInputs {
    cd beta = 0.0;
    double p_bar = 0.0; // effective power cap on |tau_1|^2
    CMat h_g;
    double alpha = 0.0;
};

ClosedFormInputs make_closed_form_inputs(const SubproblemData& data, double alpha);

struct LevelProbe {
    CMat f;
    double opt_value = 0.0; // minimum of the level-test quadratic; <= 0 means
                            // the SNR level alpha is achievable
};

// Closed-form minimizer of the level-test quadratic for single-sensor
// clusters (three cases on the sign of alpha sigma^2 - 1).
LevelProbe solve_p8_closed(const ClosedFormInputs& in, const SubproblemData& data);

// Same level test through the lifted SDP route (any cluster size with
// K_i N_i >= 2); used to cross-check the closed form.
LevelProbe solve_p8_sdr(const SubproblemData& data, double alpha,
                        const SolveOptions& opts = {});

// d^{-1} (lambda_max(A_ii) P / lambda_min(C) + 2 ||q|| sqrt(P / lambda_min(C)) + c).
double subproblem_upper_bound(const SubproblemData& data);

struct ClusterBisection {
    CMat f;
    double achieved = 0.0;
    int probes = 0;
};

// Bisection on the SNR level with the closed-form inner step (K_i = 1).
ClusterBisection bisect_cluster(const SubproblemData& data, double current_snr, double eps_bis);

// Multi-block ascent sweeping the clusters, postcoder refreshed after every
// cluster update.
std::pair<BeamformerState, RunTrace> run_algorithm3(const NetworkModel& model,
                                                    const BeamformerState& init,
                                                    const AlgoOptions& opts = {});

} // namespace snrbeam
