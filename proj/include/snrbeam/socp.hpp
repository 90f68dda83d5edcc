#pragma once

// Precoder update by bisection on the achievable SNR level: each probe
// solves a second-order cone feasibility program posed through the rank-one
// factor of the numerator form.

#include "snrbeam/conic.hpp"
#include "snrbeam/forms.hpp"
#include "snrbeam/trace.hpp"

namespace snrbeam {

// Upper bound on the best fractional objective at this postcoder:
// (sum_i K_i sqrt(P_i / lambda_min(C_i)) ||H_i^H g||)^2 / c0.
double snr_upper_bound(const NetworkModel& model, const CMat& g);

struct SocpProbe {
    CMat f;              // minimizer (when the level is attainable at all)
    double u_opt = 0.0;  // max_i f^H D_i f / P_i at the minimizer; +inf when
                         // no f meets the SNR-level cone regardless of power
    int conic_iterations = 0;
    SolveStatus status = SolveStatus::NumericalFailure;
};

// min u s.t. sqrt(gamma) ||[B^{1/2} f; sqrt(c0)]|| <= Re{a^H f},
// Im{a^H f} = 0, f^H C_i f <= u P_i. Feasible at level gamma iff u_opt <= 1.
// Levels above the power-unconstrained ratio make the cone itself empty; the
// probe reports that as u_opt = +inf with status Optimal-by-certificate.
SocpProbe solve_p7gamma(const QuadraticForms& forms, const CMat& a, double gamma,
                        const SolveOptions& opts = {});

struct BisectionResult {
    CMat f;
    double achieved = 0.0; // final lower bound on the SNR level
    int probes = 0;
    int conic_iterations = 0;
};

// Halve [bd_l, bd_u] until the width drops below eps_bis, then re-solve at
// the final feasible level. bd_l must be achievable on entry.
BisectionResult bisect_precoders(const QuadraticForms& forms, const CMat& a, double bd_l,
                                 double bd_u, double eps_bis, const SolveOptions& opts = {});

// 2-block ascent with the bisection update for the precoder block.
std::pair<BeamformerState, RunTrace> run_algorithm2(const NetworkModel& model,
                                                    const BeamformerState& init,
                                                    const AlgoOptions& opts = {});

} // namespace snrbeam
