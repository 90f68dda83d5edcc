#include "snrbeam/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace snrbeam {

CMat kron(const CMat& a, const CMat& b) {
    CMat k(a.rows() * b.rows(), a.cols() * b.cols());
    for (idx ja = 0; ja < a.cols(); ++ja)
        for (idx ia = 0; ia < a.rows(); ++ia) {
            const cd v = a(ia, ja);
            if (v == cd{}) continue;
            for (idx jb = 0; jb < b.cols(); ++jb)
                for (idx ib = 0; ib < b.rows(); ++ib)
                    k(ia * b.rows() + ib, ja * b.cols() + jb) = v * b(ib, jb);
        }
    return k;
}

CMat vec(const CMat& m) {
    CMat v(m.size(), 1);
    for (idx k = 0; k < m.size(); ++k) v[k] = m[k];
    return v;
}

CMat unvec(const CMat& v, idx rows, idx cols) {
    if (v.size() != rows * cols)
        throw DimensionError("unvec: length mismatch");
    CMat m(rows, cols);
    for (idx k = 0; k < m.size(); ++k) m[k] = v[k];
    return m;
}

namespace {

template <class S>
double abs_val(S x) {
    return std::abs(x);
}

template <class S>
double norm2_generic(const Mat<S>& v) {
    double s = 0.0;
    for (idx i = 0; i < v.size(); ++i) s += std::norm(cd(v[i]));
    return std::sqrt(s);
}

inline double unit_phase(double x) { return x >= 0.0 ? 1.0 : -1.0; }
inline cd unit_phase(cd x) {
    const double m = std::abs(x);
    return m > 0.0 ? x / m : cd{1.0, 0.0};
}

// Householder reduction of a Hermitian/symmetric matrix to real tridiagonal
// form. On return q holds the accumulated unitary with a = q T q^H,
// d the diagonal and e the (real, nonnegative) subdiagonal of T.
template <class S>
void tridiagonalize(Mat<S> a, Mat<S>& q, std::vector<double>& d, std::vector<double>& e) {
    const idx n = a.rows();
    d.assign(static_cast<std::size_t>(n), 0.0);
    e.assign(static_cast<std::size_t>(n), 0.0);
    std::vector<Mat<S>> vs;
    std::vector<double> betas;
    std::vector<S> sub(static_cast<std::size_t>(std::max<idx>(n - 1, 0)), S{});

    for (idx k = 0; k + 2 < n; ++k) {
        const idx len = n - k - 1;
        Mat<S> x(len, 1);
        for (idx i = 0; i < len; ++i) x[i] = a(k + 1 + i, k);
        double sigma = norm2_generic(x);
        if (sigma == 0.0) {
            sub[static_cast<std::size_t>(k)] = S{};
            vs.emplace_back();
            betas.push_back(0.0);
            continue;
        }
        S phase = unit_phase(x[0]);
        Mat<S> v = x;
        v[0] += phase * S{sigma};
        double vnorm2 = 0.0;
        for (idx i = 0; i < len; ++i) vnorm2 += std::norm(cd(v[i]));
        const double beta = 2.0 / vnorm2;

        // a22 <- H a22 H with H = I - beta v v^H
        Mat<S> p(len, 1);
        for (idx i = 0; i < len; ++i) {
            S s{};
            for (idx j = 0; j < len; ++j) s += a(k + 1 + i, k + 1 + j) * v[j];
            p[i] = S{beta} * s;
        }
        S vhp{};
        for (idx i = 0; i < len; ++i) vhp += conj_val(v[i]) * p[i];
        Mat<S> w = p;
        const S kk = S{beta / 2.0} * vhp;
        for (idx i = 0; i < len; ++i) w[i] -= kk * v[i];
        for (idx i = 0; i < len; ++i)
            for (idx j = 0; j < len; ++j)
                a(k + 1 + i, k + 1 + j) -= v[i] * conj_val(w[j]) + w[i] * conj_val(v[j]);

        sub[static_cast<std::size_t>(k)] = -phase * S{sigma};
        vs.push_back(std::move(v));
        betas.push_back(beta);
    }
    if (n >= 2) sub[static_cast<std::size_t>(n - 2)] = a(n - 1, n - 2);
    for (idx i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = real_part(a(i, i));

    // Back-accumulate q = H_0 H_1 ... H_{n-3}
    q = Mat<S>::identity(n);
    for (idx k = static_cast<idx>(vs.size()) - 1; k >= 0; --k) {
        if (betas[static_cast<std::size_t>(k)] == 0.0) continue;
        const Mat<S>& v = vs[static_cast<std::size_t>(k)];
        const idx len = v.rows();
        const double beta = betas[static_cast<std::size_t>(k)];
        for (idx j = 0; j < n; ++j) {
            S s{};
            for (idx i = 0; i < len; ++i) s += conj_val(v[i]) * q(k + 1 + i, j);
            s *= S{beta};
            for (idx i = 0; i < len; ++i) q(k + 1 + i, j) -= v[i] * s;
        }
    }

    // Rotate phases so the subdiagonal becomes real nonnegative.
    std::vector<S> phi(static_cast<std::size_t>(n), S{1});
    for (idx k = 0; k + 1 < n; ++k) {
        const S s = sub[static_cast<std::size_t>(k)];
        const double m = abs_val(s);
        if (m > 0.0)
            phi[static_cast<std::size_t>(k + 1)] = phi[static_cast<std::size_t>(k)] * (s / S{m});
        else
            phi[static_cast<std::size_t>(k + 1)] = phi[static_cast<std::size_t>(k)];
        e[static_cast<std::size_t>(k)] = m;
    }
    for (idx j = 0; j < n; ++j) {
        const S f = phi[static_cast<std::size_t>(j)];
        for (idx i = 0; i < n; ++i) q(i, j) *= f;
    }
}

// Implicit-shift QL on a real symmetric tridiagonal matrix, rotations
// accumulated into the columns of q.
template <class S>
void tqli(std::vector<double>& d, std::vector<double>& e, Mat<S>& q) {
    const idx n = static_cast<idx>(d.size());
    if (n <= 1) return;
    const double eps = std::numeric_limits<double>::epsilon();
    for (idx l = 0; l < n; ++l) {
        int iter = 0;
        idx m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw NumericalError("eigen iteration failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                idx i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (idx k = 0; k < q.rows(); ++k) {
                        const S fk = q(k, i + 1);
                        q(k, i + 1) = S{s} * q(k, i) + S{c} * fk;
                        q(k, i) = S{c} * q(k, i) - S{s} * fk;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

template <class S>
void sort_descending(std::vector<double>& d, Mat<S>& q) {
    const idx n = static_cast<idx>(d.size());
    std::vector<idx> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), idx{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](idx a, idx b) { return d[static_cast<std::size_t>(a)] > d[static_cast<std::size_t>(b)]; });
    std::vector<double> d2(static_cast<std::size_t>(n));
    Mat<S> q2(q.rows(), n);
    for (idx j = 0; j < n; ++j) {
        const idx src = order[static_cast<std::size_t>(j)];
        d2[static_cast<std::size_t>(j)] = d[static_cast<std::size_t>(src)];
        for (idx i = 0; i < q.rows(); ++i) q2(i, j) = q(i, src);
    }
    d = std::move(d2);
    q = std::move(q2);
}

template <class S>
void eig_impl(const Mat<S>& m, std::vector<double>& values, Mat<S>& vectors) {
    std::vector<double> e;
    tridiagonalize(m, vectors, values, e);
    tqli(values, e, vectors);
    sort_descending(values, vectors);
}

} // namespace

EigDecomposition herm_eig(const Herm& m) {
    EigDecomposition out;
    eig_impl(m.mat(), out.values, out.vectors);
    return out;
}

RealEig sym_eig(const RMat& m) {
    if (m.rows() != m.cols()) throw DimensionError("sym_eig: square input required");
    RealEig out;
    eig_impl(m, out.values, out.vectors);
    return out;
}

double default_pd_floor(const Herm& m) {
    return 1e-12 * (1.0 + std::abs(trace(m.mat()).real()));
}

Herm inv_sqrt_psd(const Herm& m, double floor_eps) {
    EigDecomposition eig = herm_eig(m);
    const idx n = m.order();
    for (double v : eig.values)
        if (!(v > floor_eps)) throw SingularError("inv_sqrt_psd: eigenvalue at or below floor");
    CMat scaled = eig.vectors;
    for (idx j = 0; j < n; ++j) {
        const cd s = 1.0 / std::sqrt(eig.values[static_cast<std::size_t>(j)]);
        for (idx i = 0; i < n; ++i) scaled(i, j) *= s;
    }
    return Herm::enforce(matmul(scaled, adjoint(eig.vectors)));
}

Herm inv_sqrt_psd(const Herm& m) { return inv_sqrt_psd(m, default_pd_floor(m)); }

Herm psd_sqrt(const Herm& m) {
    EigDecomposition eig = herm_eig(m);
    const idx n = m.order();
    CMat scaled = eig.vectors;
    for (idx j = 0; j < n; ++j) {
        const double lam = std::max(eig.values[static_cast<std::size_t>(j)], 0.0);
        const cd s = std::sqrt(lam);
        for (idx i = 0; i < n; ++i) scaled(i, j) *= s;
    }
    return Herm::enforce(matmul(scaled, adjoint(eig.vectors)));
}

RMat psd_sqrt_real(const RMat& m) {
    RealEig eig = sym_eig(m);
    const idx n = m.rows();
    RMat scaled = eig.vectors;
    for (idx j = 0; j < n; ++j) {
        const double s = std::sqrt(std::max(eig.values[static_cast<std::size_t>(j)], 0.0));
        for (idx i = 0; i < n; ++i) scaled(i, j) *= s;
    }
    RMat out = matmul(scaled, transpose(eig.vectors));
    // exact symmetry
    for (idx j = 0; j < n; ++j)
        for (idx i = j + 1; i < n; ++i) {
            const double v = 0.5 * (out(i, j) + out(j, i));
            out(i, j) = v;
            out(j, i) = v;
        }
    return out;
}

namespace {

template <class S>
bool chol_impl(const Mat<S>& a, Mat<S>& l) {
    const idx n = a.rows();
    l = Mat<S>(n, n);
    for (idx j = 0; j < n; ++j) {
        double s = real_part(a(j, j));
        for (idx k = 0; k < j; ++k) s -= std::norm(cd(l(j, k)));
        if (!(s > 0.0) || !std::isfinite(s)) return false;
        const double ljj = std::sqrt(s);
        l(j, j) = S{ljj};
        for (idx i = j + 1; i < n; ++i) {
            S v = a(i, j);
            for (idx k = 0; k < j; ++k) v -= l(i, k) * conj_val(l(j, k));
            l(i, j) = v / S{ljj};
        }
    }
    return true;
}

template <class S>
Mat<S> solve_lower_impl(const Mat<S>& l, const Mat<S>& b) {
    Mat<S> x = b;
    const idx n = l.rows();
    for (idx col = 0; col < b.cols(); ++col)
        for (idx i = 0; i < n; ++i) {
            S v = x(i, col);
            for (idx k = 0; k < i; ++k) v -= l(i, k) * x(k, col);
            x(i, col) = v / l(i, i);
        }
    return x;
}

template <class S>
Mat<S> solve_lower_adjoint_impl(const Mat<S>& l, const Mat<S>& b) {
    Mat<S> x = b;
    const idx n = l.rows();
    for (idx col = 0; col < b.cols(); ++col)
        for (idx i = n - 1; i >= 0; --i) {
            S v = x(i, col);
            for (idx k = i + 1; k < n; ++k) v -= conj_val(l(k, i)) * x(k, col);
            x(i, col) = v / l(i, i);
        }
    return x;
}

} // namespace

CholC chol(const Herm& a) {
    CholC f;
    f.ok = chol_impl(a.mat(), f.l);
    return f;
}

CholR chol_real(const RMat& a) {
    CholR f;
    f.ok = chol_impl(a, f.l);
    return f;
}

CMat chol_solve(const CMat& l, const CMat& b) { return solve_lower_adjoint_impl(l, solve_lower_impl(l, b)); }
RMat chol_solve(const RMat& l, const RMat& b) { return solve_lower_adjoint_impl(l, solve_lower_impl(l, b)); }
CMat solve_lower(const CMat& l, const CMat& b) { return solve_lower_impl(l, b); }
RMat solve_lower(const RMat& l, const RMat& b) { return solve_lower_impl(l, b); }
CMat solve_lower_adjoint(const CMat& l, const CMat& b) { return solve_lower_adjoint_impl(l, b); }
RMat solve_lower_adjoint(const RMat& l, const RMat& b) { return solve_lower_adjoint_impl(l, b); }

RealQR::RealQR(RMat a) : m_(a.rows()), n_(a.cols()), r_(std::move(a)) {
    const idx steps = std::min(m_, n_);
    beta_.assign(static_cast<std::size_t>(steps), 0.0);
    for (idx k = 0; k < steps; ++k) {
        double sigma = 0.0;
        for (idx i = k; i < m_; ++i) sigma += r_(i, k) * r_(i, k);
        sigma = std::sqrt(sigma);
        if (sigma == 0.0) continue;
        const double alpha = r_(k, k) >= 0.0 ? -sigma : sigma;
        const double v0 = r_(k, k) - alpha;
        double vnorm2 = v0 * v0;
        for (idx i = k + 1; i < m_; ++i) vnorm2 += r_(i, k) * r_(i, k);
        if (vnorm2 == 0.0) continue;
        const double beta = 2.0 / vnorm2;
        // store v below the diagonal, v0 separately via beta sign trick:
        // we keep v normalized so that v[k] = 1 and fold v0 into beta.
        for (idx i = k + 1; i < m_; ++i) r_(i, k) /= v0;
        beta_[static_cast<std::size_t>(k)] = beta * v0 * v0;
        // apply reflector to the trailing columns
        for (idx j = k + 1; j < n_; ++j) {
            double s = r_(k, j);
            for (idx i = k + 1; i < m_; ++i) s += r_(i, k) * r_(i, j);
            s *= beta_[static_cast<std::size_t>(k)];
            r_(k, j) -= s;
            for (idx i = k + 1; i < m_; ++i) r_(i, j) -= r_(i, k) * s;
        }
        r_(k, k) = alpha;
    }
}

RMat RealQR::qt_apply(const RMat& b) const {
    RMat x = b;
    const idx steps = static_cast<idx>(beta_.size());
    for (idx k = 0; k < steps; ++k) {
        const double beta = beta_[static_cast<std::size_t>(k)];
        if (beta == 0.0) continue;
        for (idx j = 0; j < x.cols(); ++j) {
            double s = x(k, j);
            for (idx i = k + 1; i < m_; ++i) s += r_(i, k) * x(i, j);
            s *= beta;
            x(k, j) -= s;
            for (idx i = k + 1; i < m_; ++i) x(i, j) -= r_(i, k) * s;
        }
    }
    return x;
}

RMat RealQR::q_apply(const RMat& b) const {
    RMat x = b;
    for (idx k = static_cast<idx>(beta_.size()) - 1; k >= 0; --k) {
        const double beta = beta_[static_cast<std::size_t>(k)];
        if (beta == 0.0) continue;
        for (idx j = 0; j < x.cols(); ++j) {
            double s = x(k, j);
            for (idx i = k + 1; i < m_; ++i) s += r_(i, k) * x(i, j);
            s *= beta;
            x(k, j) -= s;
            for (idx i = k + 1; i < m_; ++i) x(i, j) -= r_(i, k) * s;
        }
    }
    return x;
}

RMat RealQR::full_q() const { return q_apply(RMat::identity(m_)); }

double RealQR::min_abs_r_diag() const {
    double mn = std::numeric_limits<double>::infinity();
    for (idx k = 0; k < std::min(m_, n_); ++k) mn = std::min(mn, std::abs(r_(k, k)));
    return mn;
}

RMat RealQR::solve_r(const RMat& b) const {
    if (b.rows() != n_ || m_ < n_) throw DimensionError("solve_r: shape mismatch");
    RMat x = b;
    for (idx col = 0; col < b.cols(); ++col)
        for (idx i = n_ - 1; i >= 0; --i) {
            double v = x(i, col);
            for (idx k = i + 1; k < n_; ++k) v -= r_(i, k) * x(k, col);
            const double d = r_(i, i);
            if (d == 0.0) throw SingularError("solve_r: zero diagonal");
            x(i, col) = v / d;
        }
    return x;
}

RMat real_nullspace_sample(const RMat& a) {
    const idx e = a.rows(), u = a.cols();
    if (u <= e) throw DimensionError("real_nullspace_sample: system not underdetermined");
    RealQR qr(transpose(a));
    RMat unit(u, 1);
    unit(u - 1, 0) = 1.0;
    RMat x = qr.q_apply(unit);
    const double nx = norm2(x);
    if (nx == 0.0) throw NumericalError("nullspace sample vanished");
    x *= 1.0 / nx;
    RMat res = matmul(a, x);
    if (norm2(res) > 1e-10 * frob_norm(a))
        throw NumericalError("nullspace sample residual above tolerance");
    return x;
}

RMat hermitian_to_real_embedding(const Herm& m) {
    const idx n = m.order();
    RMat e(2 * n, 2 * n);
    for (idx j = 0; j < n; ++j)
        for (idx i = 0; i < n; ++i) {
            const cd v = m(i, j);
            e(i, j) = v.real();
            e(n + i, n + j) = v.real();
            e(i, n + j) = -v.imag();
            e(n + i, j) = v.imag();
        }
    return e;
}

RMat complex_op_real(const CMat& m) {
    RMat e(2 * m.rows(), 2 * m.cols());
    for (idx j = 0; j < m.cols(); ++j)
        for (idx i = 0; i < m.rows(); ++i) {
            const cd v = m(i, j);
            e(i, j) = v.real();
            e(m.rows() + i, m.cols() + j) = v.real();
            e(i, m.cols() + j) = -v.imag();
            e(m.rows() + i, j) = v.imag();
        }
    return e;
}

RMat real_embed_vec(const CMat& v) {
    const idx n = v.rows();
    RMat x(2 * n, 1);
    for (idx i = 0; i < n; ++i) {
        x[i] = v[i].real();
        x[n + i] = v[i].imag();
    }
    return x;
}

CMat complex_from_embedded_vec(const RMat& x) {
    const idx n = x.rows() / 2;
    CMat v(n, 1);
    for (idx i = 0; i < n; ++i) v[i] = cd(x[i], x[n + i]);
    return v;
}

Herm herm_from_embedded(const RMat& x) {
    const idx n = x.rows() / 2;
    CMat m(n, n);
    for (idx j = 0; j < n; ++j)
        for (idx i = 0; i < n; ++i) {
            const double re = 0.5 * (x(i, j) + x(n + i, n + j));
            const double im = 0.5 * (x(n + i, j) - x(i, n + j));
            m(i, j) = cd(re, im);
        }
    return Herm::enforce(m);
}

} // namespace snrbeam
