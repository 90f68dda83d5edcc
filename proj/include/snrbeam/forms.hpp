#pragma once

// Quadratic-form data for the precoder subproblem at a fixed postcoder:
// the stacked numerator form A, block-diagonal denominator form B, the
// per-cluster power forms, and the noise constant.

#include "snrbeam/model.hpp"

namespace snrbeam {

struct QuadraticForms {
    Herm a;                  // stacked, PSD and rank one
    Herm b;                  // block-diagonal PSD
    std::vector<Herm> c;     // per-cluster power forms, each positive definite
    std::vector<Herm> d;     // c_i embedded at block i of the stacked space
    double c0 = 0.0;         // fc_noise_power * ||g||^2
    std::vector<idx> block_dims; // K_i N_i
    std::vector<double> power_limits;

    idx total_dim() const;
    idx block_offset(idx i) const;
};

// Eq.-level assembly at a fixed postcoder; throws DegenerateError on zero g.
QuadraticForms assemble_forms(const NetworkModel& model, const CMat& g);

// Rank-one factor with a a^H equal to the stacked numerator form.
CMat build_a(const NetworkModel& model, const CMat& g);

// Stack vec(F_i) into one column / split it back.
CMat stack_precoders(const NetworkModel& model, const std::vector<CMat>& precoders);
std::vector<CMat> unstack_precoders(const NetworkModel& model, const CMat& f);

// Fractional objective value f^H A f / (f^H B f + c0).
double fractional_objective(const QuadraticForms& forms, const CMat& f);

// Always-feasible dual point for the precoder SDP's derived dual:
// mu_i = lambda_max(A)/lambda_min(C_i), lambda = (sum_i mu_i P_i)/c0.
struct DualPoint {
    double lambda = 0.0;
    std::vector<double> mu;
};
DualPoint dual_feasible_point(const QuadraticForms& forms);

// Feasibility residuals of a dual point: PSD slack smallest eigenvalue of
// lambda B + sum mu_i D_i - A (should be >= 0) and the scalar margin
// c0 lambda - sum mu_i P_i (should be >= 0).
struct DualFeasibility {
    double psd_margin = 0.0;
    double scalar_margin = 0.0;
};
DualFeasibility check_dual_point(const QuadraticForms& forms, const DualPoint& pt);

} // namespace snrbeam
