#pragma once

// Joint precoder update by semidefinite relaxation: the fractional program
// is lifted to an SDP through the Charnes-Cooper change of variables, and a
// rank-one solution is recovered either by the constraint-preserving
// homogeneous perturbation loop (deterministic, up to three clusters) or by
// Gaussian randomization with rescaling.

#include "snrbeam/conic.hpp"
#include "snrbeam/forms.hpp"
#include "snrbeam/trace.hpp"

namespace snrbeam {

struct SdrResult {
    Herm y_opt;
    double nu_opt = 0.0;
    double objective = 0.0;
    CMat recovered_f;          // set by the caller after rank-one extraction
    double tightness_gap = 0.0; // SDP objective minus the recovered fractional value
    double active_gap = 0.0;    // |Tr(B Y) + c0 nu - 1|
    bool degenerate = false;    // zero-signal boundary (Y = 0)
    int conic_iterations = 0;
    SolveStatus status = SolveStatus::NumericalFailure;
};

// Lifted precoder SDP with the normalization posed as an inequality; the
// optimum activates it, so the solution also solves the equality form.
SdrResult solve_p4(const QuadraticForms& forms, const SolveOptions& opts = {});

// Constraint-preserving rank reduction: repeatedly move along a homogeneous
// Hermitian perturbation of a full-rank factor until rank^2(Y) + 1 <= L + 1.
// Objective and constraints are preserved up to solver accuracy.
void rank_reduce(Herm& y, double& nu, const QuadraticForms& forms);

// Numerical rank with the eigenvalue cutoff 1e-6 * lambda_max.
idx numerical_rank(const std::vector<double>& eigenvalues);

// Draw `samples` Gaussian vectors with covariance y, rescale each into the
// feasible set, and return the one with the best fractional objective.
// Deterministic in (seed, sample index) regardless of evaluation order.
CMat randomize_and_rescale(const Herm& y, double nu, const QuadraticForms& forms, idx samples,
                           std::uint64_t seed);

// Rescaling factor for one sample (exposed for tests).
double rescale_beta(const QuadraticForms& forms, double nu, const CMat& f_tilde);

// 2-block ascent: precoder block by SDR (rank reduction when L <= 3, else
// randomization), postcoder block in closed form.
std::pair<BeamformerState, RunTrace> run_algorithm1(const NetworkModel& model,
                                                    const BeamformerState& init,
                                                    const AlgoOptions& opts = {});

} // namespace snrbeam
