#include "snrbeam/conic.hpp"

#include "snrbeam/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace snrbeam {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        default: return "numerical_failure";
    }
}

idx ConicProblem::add_block(ConeType type, idx dim) {
    if (dim <= 0) throw DimensionError("conic: block dimension must be positive");
    blocks_.push_back({type, dim});
    return static_cast<idx>(blocks_.size()) - 1;
}

namespace {

void check_term(const std::vector<ConeBlock>& blocks, const LinearTerm& t) {
    if (t.coeffs.size() != blocks.size())
        throw DimensionError("conic: functional has wrong block count");
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const RMat& c = t.coeffs[k];
        if (c.empty()) continue;
        const ConeBlock& b = blocks[k];
        if (b.type == ConeType::Psd) {
            if (c.rows() != b.dim || c.cols() != b.dim)
                throw DimensionError("conic: PSD coefficient shape mismatch");
        } else if (c.rows() != b.dim || c.cols() != 1) {
            throw DimensionError("conic: vector coefficient shape mismatch");
        }
    }
}

} // namespace

void ConicProblem::set_objective(LinearTerm t, bool maximize) {
    check_term(blocks_, t);
    objective_ = std::move(t);
    maximize_ = maximize;
}

void ConicProblem::add_equality(LinearTerm t, double rhs) {
    check_term(blocks_, t);
    equalities_.emplace_back(std::move(t), rhs);
}

void ConicProblem::add_inequality(LinearTerm t, double rhs) {
    check_term(blocks_, t);
    inequalities_.emplace_back(std::move(t), rhs);
}

void ConicProblem::validate() const {
    if (blocks_.empty()) throw DimensionError("conic: at least one block required");
    if (objective_.coeffs.size() != blocks_.size())
        throw DimensionError("conic: objective not set");
    if (equalities_.empty() && inequalities_.empty())
        throw DimensionError("conic: at least one constraint required");
}

// ---------------------------------------------------------------------------
// svec packing: lower triangle column-major, off-diagonals scaled by sqrt(2)
// so that <svec(A), svec(B)> = Tr{A B}.

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

idx svec_len(idx n) { return n * (n + 1) / 2; }

void svec_into(const RMat& m, double* out) {
    const idx n = m.rows();
    idx k = 0;
    for (idx j = 0; j < n; ++j) {
        out[k++] = m(j, j);
        for (idx i = j + 1; i < n; ++i) out[k++] = m(i, j) * kSqrt2;
    }
}

RMat smat(const double* v, idx n) {
    RMat m(n, n);
    idx k = 0;
    for (idx j = 0; j < n; ++j) {
        m(j, j) = v[k++];
        for (idx i = j + 1; i < n; ++i) {
            const double val = v[k++] / kSqrt2;
            m(i, j) = val;
            m(j, i) = val;
        }
    }
    return m;
}

void symmetrize(RMat& m) {
    for (idx j = 0; j < m.cols(); ++j)
        for (idx i = j + 1; i < m.rows(); ++i) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = v;
            m(j, i) = v;
        }
}

struct IBlock {
    ConeType type;
    idx dim;  // order / length
    idx off;  // offset into packed vectors
    idx len;  // packed length
};

struct Internal {
    std::vector<IBlock> blocks;
    idx n = 0; // packed cone dimension
    idx m = 0; // constraint rows after reduction
    RMat at;   // n x m (columns are constraint rows)
    RMat b;    // m x 1
    RMat c;    // n x 1
    double obj_const = 0.0;
    bool maximize = false;
    double degree = 0.0;

    // free-variable recovery: w = r1^{-1} (b1 - e1 x)
    idx n_free = 0;
    RMat free_e1; // n_free x n
    RMat free_b1; // n_free x 1
    RMat free_r1; // n_free x n_free upper triangular
    bool rows_rotated = false;
};

void pack_term(const std::vector<ConeBlock>& ublocks, const std::vector<idx>& cone_off,
               const std::vector<idx>& free_off, const LinearTerm& t, double* cone_out,
               double* free_out) {
    for (std::size_t k = 0; k < ublocks.size(); ++k) {
        const RMat& c = t.coeffs[k];
        if (c.empty()) continue;
        const ConeBlock& b = ublocks[k];
        if (b.type == ConeType::Psd) {
            svec_into(c, cone_out + cone_off[k]);
        } else if (b.type == ConeType::Free) {
            for (idx i = 0; i < b.dim; ++i) free_out[free_off[k] + i] = c[i];
        } else {
            for (idx i = 0; i < b.dim; ++i) cone_out[cone_off[k] + i] = c[i];
        }
    }
}

// ---------------------------------------------------------------------------
// Cone-wise operations on packed vectors.
//
// Conventions: the Nesterov-Todd map H for each block satisfies H x = s for
// the current iterate. W is its positive square root, lambda = W x = W^{-1} s,
// and the linearized complementarity gives ds = W(lambda \ rhs) - H dx.

// For the second-order cone we use the Jordan-algebra forms. With
// wbar = (xbar + J sbar)/(2 gamma) and qbar = J wbar:
//   H^{-1} u = eta * (2 wbar (wbar^T u) - J u),      eta = jnrm(x)/jnrm(s)
//   H     u = (1/eta) * (2 qbar (qbar^T u) - J u)
//   W     u = T(qbar) u / sqrt(eta)
//   W^-1  u = sqrt(eta) * T(wbar) u
// where T(v) u = (v0 u0 + v1^T u1 ; u1 + v1 (u0 + v1^T u1 / (1 + v0))) is the
// PSD square root of the quadratic representation of a unit-J-norm point v.
struct SocScaling {
    double sqrt_eta = 1.0;
    RMat wbar; // unit J-norm scaling direction
};

struct PsdScaling {
    RMat lx;   // chol factor of X
    RMat r;    // r^{-1} X r^{-T} = r^T S r = diag(lambda)
    RMat rti;  // r^{-T}
    std::vector<double> lambda;
};

struct Scaling {
    std::vector<RMat> nn_x, nn_s;
    std::vector<SocScaling> soc;
    std::vector<PsdScaling> psd;
    RMat lambda; // full packed scaled point
};

double jnorm2(const double* x, idx dim) {
    double t = x[0] * x[0];
    for (idx i = 1; i < dim; ++i) t -= x[i] * x[i];
    return t;
}

// smallest positive root of a*t^2 + b*t + c = 0, infinity when none
double smallest_positive_root(double a, double b, double c) {
    const double inf = std::numeric_limits<double>::infinity();
    if (a == 0.0) {
        if (b >= 0.0) return inf;
        return -c / b;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return inf;
    const double sq = std::sqrt(disc);
    double r1, r2;
    if (b >= 0.0) {
        const double q = -(b + sq) / 2.0;
        r1 = q / a;
        r2 = (q != 0.0) ? c / q : 0.0;
    } else {
        const double q = -(b - sq) / 2.0;
        r1 = q / a;
        r2 = (q != 0.0) ? c / q : 0.0;
    }
    double best = inf;
    if (r1 > 0.0) best = std::min(best, r1);
    if (r2 > 0.0) best = std::min(best, r2);
    return best;
}

class ConeOps {
  public:
    explicit ConeOps(const Internal& in) : in_(in) {}

    bool compute_scaling(const RMat& x, const RMat& s, Scaling& sc) const {
        const auto& blocks = in_.blocks;
        sc.nn_x.assign(blocks.size(), RMat());
        sc.nn_s.assign(blocks.size(), RMat());
        sc.soc.assign(blocks.size(), SocScaling());
        sc.psd.assign(blocks.size(), PsdScaling());
        sc.lambda = RMat(in_.n, 1);
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            const IBlock& b = blocks[k];
            const double* xb = x.data() + b.off;
            const double* sb = s.data() + b.off;
            double* lb = sc.lambda.data() + b.off;
            switch (b.type) {
                case ConeType::Nonneg: {
                    RMat wx(b.dim, 1), ws(b.dim, 1);
                    for (idx i = 0; i < b.dim; ++i) {
                        if (!(xb[i] > 0.0) || !(sb[i] > 0.0)) return false;
                        wx[i] = xb[i];
                        ws[i] = sb[i];
                        lb[i] = std::sqrt(xb[i] * sb[i]);
                    }
                    sc.nn_x[k] = std::move(wx);
                    sc.nn_s[k] = std::move(ws);
                    break;
                }
                case ConeType::Soc: {
                    const double jx2 = jnorm2(xb, b.dim);
                    const double js2 = jnorm2(sb, b.dim);
                    if (!(jx2 > 0.0) || !(js2 > 0.0) || !(xb[0] > 0.0) || !(sb[0] > 0.0))
                        return false;
                    const double rjx = std::sqrt(jx2), rjs = std::sqrt(js2);
                    double dot = xb[0] * sb[0];
                    for (idx i = 1; i < b.dim; ++i) dot += xb[i] * sb[i];
                    const double gamma = std::sqrt((1.0 + dot / (rjx * rjs)) / 2.0);
                    SocScaling& w = sc.soc[k];
                    w.sqrt_eta = std::sqrt(rjx / rjs);
                    w.wbar = RMat(b.dim, 1);
                    w.wbar[0] = (xb[0] / rjx + sb[0] / rjs) / (2.0 * gamma);
                    for (idx i = 1; i < b.dim; ++i)
                        w.wbar[i] = (xb[i] / rjx - sb[i] / rjs) / (2.0 * gamma);
                    soc_w_apply(w, xb, lb, b.dim);
                    break;
                }
                case ConeType::Psd: {
                    PsdScaling& p = sc.psd[k];
                    RMat xm = smat(xb, b.dim);
                    RMat sm = smat(sb, b.dim);
                    CholR cx = chol_real(xm);
                    if (!cx.ok) return false;
                    p.lx = std::move(cx.l);
                    RMat m1 = matmul(transpose(p.lx), matmul(sm, p.lx));
                    symmetrize(m1);
                    RealEig eig = sym_eig(m1);
                    p.lambda.resize(static_cast<std::size_t>(b.dim));
                    for (idx i = 0; i < b.dim; ++i) {
                        const double d = eig.values[static_cast<std::size_t>(i)];
                        if (!(d > 0.0)) return false;
                        p.lambda[static_cast<std::size_t>(i)] = std::sqrt(d);
                    }
                    RMat vd = eig.vectors;  // lx v d^{-1/4}
                    RMat vdi = eig.vectors; // lx^{-T} v d^{1/4}
                    for (idx j = 0; j < b.dim; ++j) {
                        const double q = std::sqrt(p.lambda[static_cast<std::size_t>(j)]);
                        for (idx i = 0; i < b.dim; ++i) {
                            vd(i, j) /= q;
                            vdi(i, j) *= q;
                        }
                    }
                    p.r = matmul(p.lx, vd);
                    p.rti = solve_lower_adjoint(p.lx, vdi);
                    RMat lam_m(b.dim, b.dim);
                    for (idx i = 0; i < b.dim; ++i)
                        lam_m(i, i) = p.lambda[static_cast<std::size_t>(i)];
                    svec_into(lam_m, lb);
                    break;
                }
                default:
                    return false;
            }
        }
        return true;
    }

    void apply_hinv(const Scaling& sc, const RMat& u, RMat& out) const {
        out = RMat(in_.n, 1);
        for (std::size_t k = 0; k < in_.blocks.size(); ++k) {
            const IBlock& b = in_.blocks[k];
            const double* ub = u.data() + b.off;
            double* ob = out.data() + b.off;
            switch (b.type) {
                case ConeType::Nonneg: {
                    const RMat& xv = sc.nn_x[k];
                    const RMat& sv = sc.nn_s[k];
                    for (idx i = 0; i < b.dim; ++i) ob[i] = ub[i] * xv[i] / sv[i];
                    break;
                }
                case ConeType::Soc: {
                    const SocScaling& w = sc.soc[k];
                    const double eta = w.sqrt_eta * w.sqrt_eta;
                    double dot = 0.0;
                    for (idx i = 0; i < b.dim; ++i) dot += w.wbar[i] * ub[i];
                    ob[0] = eta * (2.0 * w.wbar[0] * dot - ub[0]);
                    for (idx i = 1; i < b.dim; ++i) ob[i] = eta * (2.0 * w.wbar[i] * dot + ub[i]);
                    break;
                }
                case ConeType::Psd: {
                    const PsdScaling& p = sc.psd[k];
                    RMat um = smat(ub, b.dim);
                    RMat res = matmul(transpose(p.r), matmul(um, p.r));
                    res = matmul(p.r, matmul(res, transpose(p.r)));
                    symmetrize(res);
                    svec_into(res, ob);
                    break;
                }
                default: break;
            }
        }
    }

    void apply_h(const Scaling& sc, const RMat& u, RMat& out) const {
        out = RMat(in_.n, 1);
        for (std::size_t k = 0; k < in_.blocks.size(); ++k) {
            const IBlock& b = in_.blocks[k];
            const double* ub = u.data() + b.off;
            double* ob = out.data() + b.off;
            switch (b.type) {
                case ConeType::Nonneg: {
                    const RMat& xv = sc.nn_x[k];
                    const RMat& sv = sc.nn_s[k];
                    for (idx i = 0; i < b.dim; ++i) ob[i] = ub[i] * sv[i] / xv[i];
                    break;
                }
                case ConeType::Soc: {
                    const SocScaling& w = sc.soc[k];
                    const double inv_eta = 1.0 / (w.sqrt_eta * w.sqrt_eta);
                    // qbar = J wbar
                    double dot = w.wbar[0] * ub[0];
                    for (idx i = 1; i < b.dim; ++i) dot -= w.wbar[i] * ub[i];
                    ob[0] = inv_eta * (2.0 * w.wbar[0] * dot - ub[0]);
                    for (idx i = 1; i < b.dim; ++i)
                        ob[i] = inv_eta * (-2.0 * w.wbar[i] * dot + ub[i]);
                    break;
                }
                case ConeType::Psd: {
                    const PsdScaling& p = sc.psd[k];
                    RMat um = smat(ub, b.dim);
                    RMat res = matmul(transpose(p.rti), matmul(um, p.rti));
                    res = matmul(p.rti, matmul(res, transpose(p.rti)));
                    symmetrize(res);
                    svec_into(res, ob);
                    break;
                }
                default: break;
            }
        }
    }

    // out = W (lambda \ u)
    void apply_w_lambda_inv(const Scaling& sc, const RMat& u, RMat& out) const {
        out = RMat(in_.n, 1);
        for (std::size_t k = 0; k < in_.blocks.size(); ++k) {
            const IBlock& b = in_.blocks[k];
            const double* ub = u.data() + b.off;
            const double* lb = sc.lambda.data() + b.off;
            double* ob = out.data() + b.off;
            switch (b.type) {
                case ConeType::Nonneg: {
                    const RMat& xv = sc.nn_x[k];
                    for (idx i = 0; i < b.dim; ++i) ob[i] = ub[i] / xv[i];
                    break;
                }
                case ConeType::Soc: {
                    RMat t1(b.dim, 1);
                    arrow_solve(lb, ub, t1.data(), b.dim);
                    soc_w_apply(sc.soc[k], t1.data(), ob, b.dim);
                    break;
                }
                case ConeType::Psd: {
                    const PsdScaling& p = sc.psd[k];
                    RMat um = smat(ub, b.dim);
                    for (idx j = 0; j < b.dim; ++j)
                        for (idx i = 0; i < b.dim; ++i)
                            um(i, j) *= 2.0 / (p.lambda[static_cast<std::size_t>(i)] +
                                               p.lambda[static_cast<std::size_t>(j)]);
                    RMat res = matmul(p.rti, matmul(um, transpose(p.rti)));
                    symmetrize(res);
                    svec_into(res, ob);
                    break;
                }
                default: break;
            }
        }
    }

    // rhs = sigma*mu*e - lambda o lambda - (W dx_aff) o (W^{-1} ds_aff)
    void compl_rhs(const Scaling& sc, double sigma_mu, const RMat* dx_aff, const RMat* ds_aff,
                   RMat& out) const {
        out = RMat(in_.n, 1);
        for (std::size_t k = 0; k < in_.blocks.size(); ++k) {
            const IBlock& b = in_.blocks[k];
            const double* lb = sc.lambda.data() + b.off;
            double* ob = out.data() + b.off;
            switch (b.type) {
                case ConeType::Nonneg: {
                    for (idx i = 0; i < b.dim; ++i) ob[i] = sigma_mu - lb[i] * lb[i];
                    if (dx_aff) {
                        const double* dxb = dx_aff->data() + b.off;
                        const double* dsb = ds_aff->data() + b.off;
                        for (idx i = 0; i < b.dim; ++i) ob[i] -= dxb[i] * dsb[i];
                    }
                    break;
                }
                case ConeType::Soc: {
                    double lam2 = 0.0;
                    for (idx i = 0; i < b.dim; ++i) lam2 += lb[i] * lb[i];
                    ob[0] = sigma_mu - lam2;
                    for (idx i = 1; i < b.dim; ++i) ob[i] = -2.0 * lb[0] * lb[i];
                    if (dx_aff) {
                        RMat wx(b.dim, 1), ws(b.dim, 1);
                        soc_w_apply(sc.soc[k], dx_aff->data() + b.off, wx.data(), b.dim);
                        soc_winv_apply(sc.soc[k], ds_aff->data() + b.off, ws.data(), b.dim);
                        double dot = 0.0;
                        for (idx i = 0; i < b.dim; ++i) dot += wx[i] * ws[i];
                        ob[0] -= dot;
                        for (idx i = 1; i < b.dim; ++i) ob[i] -= wx[0] * ws[i] + ws[0] * wx[i];
                    }
                    break;
                }
                case ConeType::Psd: {
                    const PsdScaling& p = sc.psd[k];
                    RMat res(b.dim, b.dim);
                    for (idx i = 0; i < b.dim; ++i) {
                        const double lam = p.lambda[static_cast<std::size_t>(i)];
                        res(i, i) = sigma_mu - lam * lam;
                    }
                    if (dx_aff) {
                        RMat dxm = smat(dx_aff->data() + b.off, b.dim);
                        RMat dsm = smat(ds_aff->data() + b.off, b.dim);
                        RMat m1 = matmul(transpose(p.rti), matmul(dxm, p.rti)); // W dx
                        RMat m2 = matmul(transpose(p.r), matmul(dsm, p.r));     // W^{-1} ds
                        RMat prod = matmul(m1, m2);
                        RMat prod2 = matmul(m2, m1);
                        for (idx j = 0; j < b.dim; ++j)
                            for (idx i = 0; i < b.dim; ++i)
                                res(i, j) -= 0.5 * (prod(i, j) + prod2(i, j));
                        symmetrize(res);
                    }
                    svec_into(res, ob);
                    break;
                }
                default: break;
            }
        }
    }

    double max_step(const RMat& x, const RMat& dx, const Scaling* sc, bool is_x_side) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < in_.blocks.size(); ++k) {
            const IBlock& b = in_.blocks[k];
            const double* xb = x.data() + b.off;
            const double* db = dx.data() + b.off;
            switch (b.type) {
                case ConeType::Nonneg: {
                    for (idx i = 0; i < b.dim; ++i)
                        if (db[i] < 0.0) best = std::min(best, -xb[i] / db[i]);
                    break;
                }
                case ConeType::Soc: {
                    const double a = db[0] * db[0] - dot_tail(db, db, b.dim);
                    const double bb = 2.0 * (xb[0] * db[0] - dot_tail(xb, db, b.dim));
                    const double c = xb[0] * xb[0] - dot_tail(xb, xb, b.dim);
                    best = std::min(best, smallest_positive_root(a, bb, c));
                    break;
                }
                case ConeType::Psd: {
                    RMat dm = smat(db, b.dim);
                    RMat l;
                    if (sc && is_x_side) {
                        l = sc->psd[k].lx;
                    } else {
                        CholR f = chol_real(smat(xb, b.dim));
                        if (!f.ok) return 0.0;
                        l = std::move(f.l);
                    }
                    RMat w = solve_lower(l, dm);
                    w = transpose(solve_lower(l, transpose(w)));
                    symmetrize(w);
                    RealEig e = sym_eig(w);
                    const double lmin = e.values.back();
                    if (lmin < 0.0) best = std::min(best, -1.0 / lmin);
                    break;
                }
                default: break;
            }
        }
        return best;
    }

    RMat identity_point() const {
        RMat e(in_.n, 1);
        for (const IBlock& b : in_.blocks) {
            switch (b.type) {
                case ConeType::Nonneg:
                    for (idx i = 0; i < b.dim; ++i) e[b.off + i] = 1.0;
                    break;
                case ConeType::Soc:
                    e[b.off] = 1.0;
                    break;
                case ConeType::Psd: {
                    RMat id = RMat::identity(b.dim);
                    svec_into(id, e.data() + b.off);
                    break;
                }
                default: break;
            }
        }
        return e;
    }

  private:
    static double dot_tail(const double* a, const double* b, idx dim) {
        double t = 0.0;
        for (idx i = 1; i < dim; ++i) t += a[i] * b[i];
        return t;
    }

    // u <- W v = T(J wbar) v / sqrt_eta
    static void soc_w_apply(const SocScaling& w, const double* v, double* u, idx dim) {
        double dot = 0.0;
        for (idx i = 1; i < dim; ++i) dot -= w.wbar[i] * v[i]; // (J wbar) tail
        u[0] = (w.wbar[0] * v[0] + dot) / w.sqrt_eta;
        const double f = (v[0] + dot / (1.0 + w.wbar[0])) / w.sqrt_eta;
        for (idx i = 1; i < dim; ++i) u[i] = v[i] / w.sqrt_eta - w.wbar[i] * f;
    }

    // u <- W^{-1} v = sqrt_eta * T(wbar) v
    static void soc_winv_apply(const SocScaling& w, const double* v, double* u, idx dim) {
        double dot = 0.0;
        for (idx i = 1; i < dim; ++i) dot += w.wbar[i] * v[i];
        u[0] = w.sqrt_eta * (w.wbar[0] * v[0] + dot);
        const double f = w.sqrt_eta * (v[0] + dot / (1.0 + w.wbar[0]));
        for (idx i = 1; i < dim; ++i) u[i] = w.sqrt_eta * v[i] + w.wbar[i] * f;
    }

    // z = Arw(lambda)^{-1} u in the second-order cone algebra
    static void arrow_solve(const double* lam, const double* u, double* z, idx dim) {
        double lam2t = 0.0, ltu = 0.0;
        for (idx i = 1; i < dim; ++i) {
            lam2t += lam[i] * lam[i];
            ltu += lam[i] * u[i];
        }
        const double a = lam[0] * lam[0] - lam2t;
        z[0] = (lam[0] * u[0] - ltu) / a;
        for (idx i = 1; i < dim; ++i)
            z[i] = (-u[0] * lam[i] + (a * u[i] + lam[i] * ltu) / lam[0]) / a;
    }

    const Internal& in_;

    friend class HsdSolver;
};

// ---------------------------------------------------------------------------
// Presolve: slacks for inequalities, QR elimination of free variables.

Internal build_internal(const ConicProblem& p, ConicSolution& early_fail, bool& failed) {
    failed = false;
    const auto& ublocks = p.blocks();
    const idx n_eq = static_cast<idx>(p.equalities().size());
    const idx n_ineq = static_cast<idx>(p.inequalities().size());
    const idx m_rows = n_eq + n_ineq;

    Internal in;
    in.maximize = p.maximize();

    std::vector<idx> cone_off(ublocks.size(), -1), free_off(ublocks.size(), -1);
    idx n_cone = 0, n_free = 0;
    for (std::size_t k = 0; k < ublocks.size(); ++k) {
        const ConeBlock& b = ublocks[k];
        switch (b.type) {
            case ConeType::Psd:
                cone_off[k] = n_cone;
                in.blocks.push_back({b.type, b.dim, n_cone, svec_len(b.dim)});
                n_cone += svec_len(b.dim);
                break;
            case ConeType::Soc:
            case ConeType::Nonneg:
                cone_off[k] = n_cone;
                in.blocks.push_back({b.type, b.dim, n_cone, b.dim});
                n_cone += b.dim;
                break;
            case ConeType::Free:
                free_off[k] = n_free;
                n_free += b.dim;
                break;
        }
    }
    idx slack_off = -1;
    if (n_ineq > 0) {
        slack_off = n_cone;
        in.blocks.push_back({ConeType::Nonneg, n_ineq, n_cone, n_ineq});
        n_cone += n_ineq;
    }
    in.n = n_cone;
    in.n_free = n_free;

    in.degree = 0.0;
    for (const IBlock& b : in.blocks)
        in.degree += (b.type == ConeType::Psd)   ? static_cast<double>(b.dim)
                     : (b.type == ConeType::Soc) ? 1.0
                                                 : static_cast<double>(b.dim);

    RMat rows(m_rows, n_cone);
    RMat rows_free(m_rows, std::max<idx>(n_free, 1));
    RMat rhs(m_rows, 1);

    auto fill_row = [&](idx r, const LinearTerm& t) {
        std::vector<double> cone_buf(static_cast<std::size_t>(n_cone), 0.0);
        std::vector<double> free_buf(static_cast<std::size_t>(std::max<idx>(n_free, 1)), 0.0);
        pack_term(ublocks, cone_off, free_off, t, cone_buf.data(), free_buf.data());
        for (idx j = 0; j < n_cone; ++j) rows(r, j) = cone_buf[static_cast<std::size_t>(j)];
        for (idx j = 0; j < n_free; ++j) rows_free(r, j) = free_buf[static_cast<std::size_t>(j)];
    };

    for (idx r = 0; r < n_eq; ++r) {
        fill_row(r, p.equalities()[static_cast<std::size_t>(r)].first);
        rhs[r] = p.equalities()[static_cast<std::size_t>(r)].second;
    }
    for (idx r = 0; r < n_ineq; ++r) {
        fill_row(n_eq + r, p.inequalities()[static_cast<std::size_t>(r)].first);
        rows(n_eq + r, slack_off + r) = 1.0;
        rhs[n_eq + r] = p.inequalities()[static_cast<std::size_t>(r)].second;
    }

    std::vector<double> crow(static_cast<std::size_t>(n_cone), 0.0);
    std::vector<double> crow_free(static_cast<std::size_t>(std::max<idx>(n_free, 1)), 0.0);
    pack_term(ublocks, cone_off, free_off, p.objective(), crow.data(), crow_free.data());
    const double sense = p.maximize() ? -1.0 : 1.0;
    in.c = RMat(n_cone, 1);
    for (idx j = 0; j < n_cone; ++j) in.c[j] = sense * crow[static_cast<std::size_t>(j)];

    if (n_free == 0) {
        in.m = m_rows;
        in.at = transpose(rows);
        in.b = rhs;
        return in;
    }

    if (m_rows < n_free) {
        early_fail.status = SolveStatus::NumericalFailure;
        early_fail.message = "free variables underdetermined by constraints";
        failed = true;
        return in;
    }
    RealQR qr(rows_free);
    if (qr.min_abs_r_diag() <= 1e-12 * (1.0 + frob_norm(rows_free))) {
        early_fail.status = SolveStatus::NumericalFailure;
        early_fail.message = "free variable block is rank deficient";
        failed = true;
        return in;
    }
    RMat rot_rows = qr.qt_apply(rows);
    RMat rot_rhs = qr.qt_apply(rhs);

    in.free_r1 = RMat(n_free, n_free);
    for (idx i = 0; i < n_free; ++i)
        for (idx j = i; j < n_free; ++j) in.free_r1(i, j) = qr.r()(i, j);
    in.free_e1 = RMat(n_free, n_cone);
    in.free_b1 = RMat(n_free, 1);
    for (idx i = 0; i < n_free; ++i) {
        for (idx j = 0; j < n_cone; ++j) in.free_e1(i, j) = rot_rows(i, j);
        in.free_b1[i] = rot_rhs[i];
    }

    in.m = m_rows - n_free;
    RMat red_rows(in.m, n_cone);
    in.b = RMat(in.m, 1);
    for (idx i = 0; i < in.m; ++i) {
        for (idx j = 0; j < n_cone; ++j) red_rows(i, j) = rot_rows(n_free + i, j);
        in.b[i] = rot_rhs[n_free + i];
    }
    in.at = transpose(red_rows);
    in.rows_rotated = true;

    bool cfree_nonzero = false;
    for (idx j = 0; j < n_free; ++j)
        if (crow_free[static_cast<std::size_t>(j)] != 0.0) cfree_nonzero = true;
    if (cfree_nonzero) {
        RMat cf(n_free, 1);
        for (idx j = 0; j < n_free; ++j) cf[j] = sense * crow_free[static_cast<std::size_t>(j)];
        // zz = r1^{-T} cf, then c <- c - e1^T zz, const <- zz^T b1
        RMat zz = solve_lower(transpose(in.free_r1), cf);
        for (idx j = 0; j < n_cone; ++j) {
            double acc = 0.0;
            for (idx i = 0; i < n_free; ++i) acc += in.free_e1(i, j) * zz[i];
            in.c[j] -= acc;
        }
        double cst = 0.0;
        for (idx i = 0; i < n_free; ++i) cst += zz[i] * in.free_b1[i];
        in.obj_const = cst;
    }
    return in;
}

// ---------------------------------------------------------------------------
// Homogeneous self-dual Mehrotra predictor-corrector loop.

class HsdSolver {
  public:
    HsdSolver(const Internal& in, const SolveOptions& opts) : in_(in), ops_(in), opts_(opts) {}

    void run(ConicSolution& sol) {
        const idx n = in_.n, m = in_.m;
        RMat x = ops_.identity_point();
        RMat s = x;
        RMat y(m, 1);
        double tau = 1.0, kappa = 1.0;

        const double norm_b = 1.0 + norm2(in_.b);
        const double norm_c = 1.0 + norm2(in_.c);
        (void)0;

        for (int iter = 0;; ++iter) {
            RMat ax = a_apply(x);
            RMat aty = at_apply(y);
            const double ctx = dot_full(in_.c, x);
            const double bty = dot_full(in_.b, y);

            RMat rp = ax; // A x - b tau
            for (idx i = 0; i < m; ++i) rp[i] -= in_.b[i] * tau;
            RMat rd(n, 1); // -A^T y - s + c tau
            for (idx j = 0; j < n; ++j) rd[j] = -aty[j] - s[j] + in_.c[j] * tau;
            const double rg = bty - ctx - kappa;

            const double gap = dot_full(x, s);
            const double mu = (gap + tau * kappa) / (in_.degree + 1.0);

            const double pobj = ctx / tau;
            const double dobj = bty / tau;
            double pres = 0.0;
            for (idx i = 0; i < m; ++i) {
                const double v = ax[i] / tau - in_.b[i];
                pres += v * v;
            }
            pres = std::sqrt(pres) / norm_b;
            double dres = 0.0;
            for (idx j = 0; j < n; ++j) {
                const double v = aty[j] / tau + s[j] / tau - in_.c[j];
                dres += v * v;
            }
            dres = std::sqrt(dres) / norm_c;
            const double relgap = (gap / (tau * tau)) / (1.0 + std::abs(pobj) + std::abs(dobj));

            sol.kkt = {pres, dres, relgap};
            sol.iterations = iter;

            if (pres <= opts_.tol && dres <= opts_.tol && relgap <= opts_.tol) {
                sol.status = SolveStatus::Optimal;
                sol.message = "optimal";
                dehomogenize(sol, x, y, tau);
                return;
            }

            // certificates: a ray with A^T y + s = 0, b^T y = 1 proves primal
            // infeasibility; a ray with A x = 0, c^T x = -1 proves dual
            // infeasibility (primal unboundedness)
            if (bty > 0.0) {
                double cert = 0.0;
                for (idx j = 0; j < n; ++j) {
                    const double v = aty[j] + s[j];
                    cert += v * v;
                }
                if (std::sqrt(cert) / bty <= opts_.tol * norm_c) {
                    sol.status = SolveStatus::Infeasible;
                    sol.message = "primal infeasibility certificate found";
                    return;
                }
            }
            if (-ctx > 0.0) {
                double cert = 0.0;
                for (idx i = 0; i < m; ++i) cert += ax[i] * ax[i];
                if (std::sqrt(cert) / (-ctx) <= opts_.tol * norm_b) {
                    sol.status = SolveStatus::Unbounded;
                    sol.message = "dual infeasibility certificate found";
                    return;
                }
            }
            if (tau <= 1e-10 * std::min(1.0, kappa)) {
                sol.status = SolveStatus::NumericalFailure;
                sol.message = "tau collapsed without a clean certificate";
                dehomogenize(sol, x, y, std::max(tau, 1e-300));
                return;
            }
            if (iter >= opts_.max_iters) {
                sol.status = SolveStatus::NumericalFailure;
                sol.message = "iteration limit reached";
                dehomogenize(sol, x, y, tau);
                return;
            }

            Scaling sc;
            if (!ops_.compute_scaling(x, s, sc)) {
                sol.status = SolveStatus::NumericalFailure;
                sol.message = "scaling failure: iterate left the cone interior";
                dehomogenize(sol, x, y, tau);
                return;
            }

            // Schur complement G = A H^{-1} A^T, plus the tau-column solve
            RMat ha(n, m);
            for (idx j = 0; j < m; ++j) {
                RMat aj(n, 1);
                for (idx i = 0; i < n; ++i) aj[i] = in_.at(i, j);
                RMat hz;
                ops_.apply_hinv(sc, aj, hz);
                for (idx i = 0; i < n; ++i) ha(i, j) = hz[i];
            }
            RMat g(m, m);
            for (idx j = 0; j < m; ++j)
                for (idx k = j; k < m; ++k) {
                    const double acc =
                        kernels::ddot(static_cast<std::size_t>(n), ha.col(j), in_.at.col(k));
                    g(j, k) = acc;
                    g(k, j) = acc;
                }
            CholR gf = factor_with_jitter(g);
            if (!gf.ok) {
                sol.status = SolveStatus::NumericalFailure;
                sol.message = "Schur complement factorization failed";
                dehomogenize(sol, x, y, tau);
                return;
            }

            RMat hinv_c;
            ops_.apply_hinv(sc, in_.c, hinv_c);
            RMat rhs1 = a_apply(hinv_c);
            for (idx i = 0; i < m; ++i) rhs1[i] += in_.b[i];
            RMat u1 = chol_solve(gf.l, rhs1);
            RMat x1 = matmul(ha, u1);
            for (idx i = 0; i < n; ++i) x1[i] -= hinv_c[i];
            const double btu1 = dot_full(in_.b, u1);
            const double ctx1 = dot_full(in_.c, x1);
            const double denom = btu1 - ctx1 + kappa / tau;

            auto solve_direction = [&](const RMat& compl_rhs_v, double res_scale, double rhs_tk,
                                       RMat& dx, RMat& dy, RMat& ds, double& dtau,
                                       double& dkappa) {
                RMat w;
                ops_.apply_w_lambda_inv(sc, compl_rhs_v, w);
                RMat rxhat(n, 1);
                for (idx i = 0; i < n; ++i) rxhat[i] = -res_scale * rd[i] + w[i];
                RMat hx;
                ops_.apply_hinv(sc, rxhat, hx);
                RMat ahx = a_apply(hx);
                RMat rhs2(m, 1);
                for (idx i = 0; i < m; ++i) rhs2[i] = -res_scale * rp[i] - ahx[i];
                RMat u2 = chol_solve(gf.l, rhs2);
                RMat x2 = matmul(ha, u2);
                for (idx i = 0; i < n; ++i) x2[i] += hx[i];
                const double rghat = -res_scale * rg + rhs_tk / tau;
                dtau = (rghat - dot_full(in_.b, u2) + dot_full(in_.c, x2)) / denom;
                dy = u2;
                for (idx i = 0; i < m; ++i) dy[i] += dtau * u1[i];
                dx = x2;
                for (idx i = 0; i < n; ++i) dx[i] += dtau * x1[i];
                dkappa = (rhs_tk - kappa * dtau) / tau;
                // ds from the dual-feasibility equation; this form is immune
                // to the ill conditioning of the scaling map near convergence
                RMat atdy = at_apply(dy);
                ds = RMat(n, 1);
                for (idx i = 0; i < n; ++i)
                    ds[i] = -atdy[i] + in_.c[i] * dtau + res_scale * rd[i];
            };

            // predictor
            RMat compl_aff;
            ops_.compl_rhs(sc, 0.0, nullptr, nullptr, compl_aff);
            RMat dx_a, dy_a, ds_a;
            double dtau_a, dkappa_a;
            solve_direction(compl_aff, 1.0, -tau * kappa, dx_a, dy_a, ds_a, dtau_a, dkappa_a);

            double alpha_aff = 1.0;
            alpha_aff = std::min(alpha_aff, ops_.max_step(x, dx_a, &sc, true));
            alpha_aff = std::min(alpha_aff, ops_.max_step(s, ds_a, nullptr, false));
            if (dtau_a < 0.0) alpha_aff = std::min(alpha_aff, -tau / dtau_a);
            if (dkappa_a < 0.0) alpha_aff = std::min(alpha_aff, -kappa / dkappa_a);

            double gap_aff = 0.0;
            for (idx i = 0; i < n; ++i)
                gap_aff += (x[i] + alpha_aff * dx_a[i]) * (s[i] + alpha_aff * ds_a[i]);
            const double mu_aff =
                (gap_aff + (tau + alpha_aff * dtau_a) * (kappa + alpha_aff * dkappa_a)) /
                (in_.degree + 1.0);
            double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

            // corrector
            RMat compl_comb;
            ops_.compl_rhs(sc, sigma * mu, &dx_a, &ds_a, compl_comb);
            const double rhs_tk = sigma * mu - tau * kappa - dtau_a * dkappa_a;
            RMat dx, dy, ds;
            double dtau, dkappa;
            solve_direction(compl_comb, 1.0 - sigma, rhs_tk, dx, dy, ds, dtau, dkappa);

            double alpha = 1.0;
            alpha = std::min(alpha, 0.99 * ops_.max_step(x, dx, &sc, true));
            alpha = std::min(alpha, 0.99 * ops_.max_step(s, ds, nullptr, false));
            if (dtau < 0.0) alpha = std::min(alpha, -0.99 * tau / dtau);
            if (dkappa < 0.0) alpha = std::min(alpha, -0.99 * kappa / dkappa);

            for (idx i = 0; i < n; ++i) x[i] += alpha * dx[i];
            for (idx i = 0; i < m; ++i) y[i] += alpha * dy[i];
            for (idx i = 0; i < n; ++i) s[i] += alpha * ds[i];
            tau += alpha * dtau;
            kappa += alpha * dkappa;
        }
    }

    RMat x_scaled, y_scaled;

  private:
    RMat at_apply(const RMat& y) const { // A^T y
        RMat out(in_.n, 1);
        for (idx j = 0; j < in_.m; ++j) {
            const double yj = y[j];
            if (yj == 0.0) continue;
            kernels::daxpy(static_cast<std::size_t>(in_.n), yj, in_.at.col(j), out.data());
        }
        return out;
    }

    RMat a_apply(const RMat& x) const { // A x
        RMat out(in_.m, 1);
        for (idx j = 0; j < in_.m; ++j)
            out[j] = kernels::ddot(static_cast<std::size_t>(in_.n), in_.at.col(j), x.data());
        return out;
    }

    static double dot_full(const RMat& a, const RMat& b) {
        return kernels::ddot(static_cast<std::size_t>(a.size()), a.data(), b.data());
    }

    CholR factor_with_jitter(const RMat& g) const {
        double jitter = 0.0;
        const double base = 1e-14 * (1.0 + std::abs(trace(g)) / std::max<idx>(g.rows(), 1));
        for (int attempt = 0; attempt < 4; ++attempt) {
            RMat gj = g;
            if (jitter > 0.0)
                for (idx i = 0; i < g.rows(); ++i) gj(i, i) += jitter;
            CholR f = chol_real(gj);
            if (f.ok) return f;
            jitter = (jitter == 0.0) ? base : jitter * 100.0;
        }
        return CholR{};
    }

    void dehomogenize(ConicSolution& sol, const RMat& x, const RMat& y, double tau) {
        x_scaled = x;
        y_scaled = y;
        const double inv_tau = 1.0 / tau;
        x_scaled *= inv_tau;
        y_scaled *= inv_tau;
        const double sense = in_.maximize ? -1.0 : 1.0;
        sol.objective_value = sense * (dot_full(in_.c, x_scaled) + in_.obj_const);
        sol.dual_objective_value = sense * (dot_full(in_.b, y_scaled) + in_.obj_const);
    }

    const Internal& in_;
    ConeOps ops_;
    SolveOptions opts_;
};

} // namespace

ConicSolution solve(const ConicProblem& p, const SolveOptions& opts) {
    p.validate();
    ConicSolution sol;
    bool failed = false;
    Internal in = build_internal(p, sol, failed);
    if (failed) return sol;

    HsdSolver solver(in, opts);
    solver.run(sol);

    if (sol.status == SolveStatus::Infeasible || sol.status == SolveStatus::Unbounded) return sol;
    if (solver.x_scaled.empty()) return sol;

    const auto& ublocks = p.blocks();
    sol.primal.clear();
    std::vector<std::pair<idx, idx>> free_spans;
    idx free_cursor = 0;
    std::size_t iblock = 0;
    for (std::size_t k = 0; k < ublocks.size(); ++k) {
        const ConeBlock& b = ublocks[k];
        if (b.type == ConeType::Free) {
            free_spans.emplace_back(static_cast<idx>(k), free_cursor);
            free_cursor += b.dim;
            sol.primal.emplace_back();
            continue;
        }
        const IBlock& ib = in.blocks[iblock++];
        if (b.type == ConeType::Psd) {
            sol.primal.push_back(smat(solver.x_scaled.data() + ib.off, b.dim));
        } else {
            RMat v(b.dim, 1);
            for (idx i = 0; i < b.dim; ++i) v[i] = solver.x_scaled[ib.off + i];
            sol.primal.push_back(std::move(v));
        }
    }
    if (in.n_free > 0) {
        RMat rhs = in.free_b1;
        RMat e1x = matmul(in.free_e1, solver.x_scaled);
        for (idx i = 0; i < in.n_free; ++i) rhs[i] -= e1x[i];
        RMat w(in.n_free, 1);
        for (idx i = in.n_free - 1; i >= 0; --i) {
            double v = rhs[i];
            for (idx j = i + 1; j < in.n_free; ++j) v -= in.free_r1(i, j) * w[j];
            w[i] = v / in.free_r1(i, i);
        }
        for (auto [ublock, off] : free_spans) {
            const idx dim = ublocks[static_cast<std::size_t>(ublock)].dim;
            RMat v(dim, 1);
            for (idx i = 0; i < dim; ++i) v[i] = w[off + i];
            sol.primal[static_cast<std::size_t>(ublock)] = std::move(v);
        }
    }

    if (!in.rows_rotated && sol.status == SolveStatus::Optimal) {
        const idx n_eq = static_cast<idx>(p.equalities().size());
        const idx n_ineq = static_cast<idx>(p.inequalities().size());
        sol.eq_duals.resize(static_cast<std::size_t>(n_eq));
        sol.ineq_duals.resize(static_cast<std::size_t>(n_ineq));
        for (idx i = 0; i < n_eq; ++i)
            sol.eq_duals[static_cast<std::size_t>(i)] = -solver.y_scaled[i];
        for (idx i = 0; i < n_ineq; ++i)
            sol.ineq_duals[static_cast<std::size_t>(i)] = -solver.y_scaled[n_eq + i];
    }
    return sol;
}

void dump_triplets(const ConicProblem& p, std::ostream& os) {
    const auto& blocks = p.blocks();
    os << "sense " << (p.maximize() ? "max" : "min") << "\n";
    os << "blocks " << blocks.size() << "\n";
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const char* t = "nonneg";
        switch (blocks[k].type) {
            case ConeType::Psd: t = "psd"; break;
            case ConeType::Soc: t = "soc"; break;
            case ConeType::Free: t = "free"; break;
            default: break;
        }
        os << "block " << k << " " << t << " " << blocks[k].dim << "\n";
    }
    auto dump_term = [&](const char* tag, idx row, const LinearTerm& t) {
        for (std::size_t k = 0; k < t.coeffs.size(); ++k) {
            const RMat& c = t.coeffs[k];
            if (c.empty()) continue;
            for (idx j = 0; j < c.cols(); ++j)
                for (idx i = 0; i < c.rows(); ++i)
                    if (c(i, j) != 0.0) {
                        os << tag;
                        if (row >= 0) os << " " << row;
                        os << " " << k << " " << i << " " << j << " " << c(i, j) << "\n";
                    }
        }
    };
    dump_term("obj", -1, p.objective());
    for (std::size_t r = 0; r < p.equalities().size(); ++r) {
        dump_term("eq", static_cast<idx>(r), p.equalities()[r].first);
        os << "eqrhs " << r << " " << p.equalities()[r].second << "\n";
    }
    for (std::size_t r = 0; r < p.inequalities().size(); ++r) {
        dump_term("ineq", static_cast<idx>(r), p.inequalities()[r].first);
        os << "ineqrhs " << r << " " << p.inequalities()[r].second << "\n";
    }
}

} // namespace snrbeam
