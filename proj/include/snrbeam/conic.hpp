#pragma once

// Dense primal-dual interior-point solver for small cone programs over
// products of PSD, second-order, and nonnegative-orthant cones, with free
// variables eliminated in a presolve step.
//
// Problems are stated over a block variable. Coefficients pair with blocks
// as follows: a PSD block of order n takes a symmetric n-by-n coefficient
// matrix C and contributes Tr{C X}; SOC / nonnegative / free blocks take a
// column of coefficients and contribute the plain inner product.
//
// The solve runs a homogeneous self-dual embedding with Nesterov-Todd
// scaling and a Mehrotra predictor-corrector step, so primal/dual
// infeasibility is detected by certificate rather than by divergence.

#include "snrbeam/errors.hpp"
#include "snrbeam/matrix.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace snrbeam {

enum class ConeType { Psd, Soc, Nonneg, Free };

struct ConeBlock {
    ConeType type = ConeType::Nonneg;
    idx dim = 0; // Psd: matrix order; otherwise vector length
};

// One coefficient per block; an empty matrix means a zero coefficient.
struct LinearTerm {
    std::vector<RMat> coeffs;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus s);

struct KktResiduals {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
};

struct ConicSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    // Per user block: Psd blocks come back as symmetric matrices, all other
    // blocks as columns.
    std::vector<RMat> primal;
    // Multipliers in the derived-dual convention: inequality duals are
    // nonnegative at an optimum regardless of the objective sense. Empty
    // when free-variable elimination rewrote the constraint system.
    std::vector<double> eq_duals;
    std::vector<double> ineq_duals;
    double objective_value = 0.0;
    double dual_objective_value = 0.0;
    KktResiduals kkt;
    int iterations = 0;
    std::string message;
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iters = 100;
};

class ConicProblem {
  public:
    idx add_block(ConeType type, idx dim);

    idx num_blocks() const { return static_cast<idx>(blocks_.size()); }
    const std::vector<ConeBlock>& blocks() const { return blocks_; }

    // Fresh all-zero functional shaped for this problem's blocks.
    LinearTerm new_term() const { return LinearTerm{std::vector<RMat>(blocks_.size())}; }

    void set_objective(LinearTerm t, bool maximize);
    void add_equality(LinearTerm t, double rhs);
    void add_inequality(LinearTerm t, double rhs); // functional <= rhs

    bool maximize() const { return maximize_; }
    const LinearTerm& objective() const { return objective_; }
    const std::vector<std::pair<LinearTerm, double>>& equalities() const { return equalities_; }
    const std::vector<std::pair<LinearTerm, double>>& inequalities() const { return inequalities_; }

    void validate() const;

  private:
    std::vector<ConeBlock> blocks_;
    bool maximize_ = false;
    LinearTerm objective_;
    std::vector<std::pair<LinearTerm, double>> equalities_;
    std::vector<std::pair<LinearTerm, double>> inequalities_;
};

ConicSolution solve(const ConicProblem& p, const SolveOptions& opts = {});

// Plain-text sparse triplet dump (one line per nonzero) for external
// cross-checking of a posed problem.
void dump_triplets(const ConicProblem& p, std::ostream& os);

} // namespace snrbeam
