#pragma once

// Dense complex/real factorizations and the handful of algebraic primitives
// everything else is built on: Kronecker products, vec, Hermitian
// eigendecomposition, Cholesky, QR, nullspace sampling, and the real
// embedding used to pose complex semidefinite constraints over real cones.

#include "snrbeam/errors.hpp"
#include "snrbeam/matrix.hpp"

#include <vector>

namespace snrbeam {

CMat kron(const CMat& a, const CMat& b);

// Column-major stacking; vec(a b^T) = b (x) a.
CMat vec(const CMat& m);
CMat unvec(const CMat& v, idx rows, idx cols);

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending,
/// eigenvectors orthonormal as columns.
struct EigDecomposition {
    std::vector<double> values;
    CMat vectors;
};

struct RealEig {
    std::vector<double> values;
    RMat vectors;
};

// Householder tridiagonalization followed by implicit-shift QL.
// Throws NumericalError if the QL iteration fails to converge.
EigDecomposition herm_eig(const Herm& m);
RealEig sym_eig(const RMat& m); // m assumed symmetric

// Scale-aware default floor for positive-definiteness checks.
double default_pd_floor(const Herm& m);

// R with R*m*R = I. Throws SingularError when an eigenvalue is <= floor.
Herm inv_sqrt_psd(const Herm& m, double floor_eps);
Herm inv_sqrt_psd(const Herm& m);

// PSD square root; eigenvalues below zero are clipped.
Herm psd_sqrt(const Herm& m);
RMat psd_sqrt_real(const RMat& m);

struct CholC {
    CMat l;
    bool ok = false;
};
struct CholR {
    RMat l;
    bool ok = false;
};

CholC chol(const Herm& a);
CholR chol_real(const RMat& a);

// Solve (L L^H) x = b given the lower Cholesky factor.
CMat chol_solve(const CMat& l, const CMat& b);
RMat chol_solve(const RMat& l, const RMat& b);
// Solve L x = b / L^H x = b.
CMat solve_lower(const CMat& l, const CMat& b);
RMat solve_lower(const RMat& l, const RMat& b);
CMat solve_lower_adjoint(const CMat& l, const CMat& b);
RMat solve_lower_adjoint(const RMat& l, const RMat& b);

// Householder QR of an m-by-n real matrix.
class RealQR {
  public:
    explicit RealQR(RMat a);

    idx rows() const { return m_; }
    idx cols() const { return n_; }

    RMat qt_apply(const RMat& b) const; // Q^T b
    RMat q_apply(const RMat& b) const;  // Q b
    RMat full_q() const;
    // Upper-triangular top block R[0:n,0:n].
    const RMat& r() const { return r_; }
    double min_abs_r_diag() const;
    // Solve R[0:n,0:n] x = b.
    RMat solve_r(const RMat& b) const;

  private:
    idx m_ = 0, n_ = 0;
    RMat r_;                      // factored matrix, reflectors below diagonal
    std::vector<double> beta_;    // reflector scales
};

// Nonzero unit-norm x with a*x = 0 for an underdetermined system (u > e).
// Throws NumericalError when no vector meets ||a x|| <= 1e-10 ||a||_F.
RMat real_nullspace_sample(const RMat& a);

// [[Re m, -Im m], [Im m, Re m]]; PSD iff m is PSD, trace doubles.
RMat hermitian_to_real_embedding(const Herm& m);
// Same layout for an arbitrary complex matrix acting on embedded vectors.
RMat complex_op_real(const CMat& m);

RMat real_embed_vec(const CMat& v);           // [Re v; Im v]
CMat complex_from_embedded_vec(const RMat& x);
// Recover a complex Hermitian matrix from a real symmetric matrix of doubled
// order by averaging over the embedding symmetry.
Herm herm_from_embedded(const RMat& x);

} // namespace snrbeam
