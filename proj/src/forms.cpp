#include "snrbeam/forms.hpp"

#include "snrbeam/linalg.hpp"

namespace snrbeam {

idx QuadraticForms::total_dim() const {
    idx n = 0;
    for (idx d_i : block_dims) n += d_i;
    return n;
}

idx QuadraticForms::block_offset(idx i) const {
    idx off = 0;
    for (idx j = 0; j < i; ++j) off += block_dims[static_cast<std::size_t>(j)];
    return off;
}

namespace {

CMat ones_mat(idx r, idx c) {
    CMat m(r, c);
    for (idx k = 0; k < m.size(); ++k) m[k] = cd(1.0, 0.0);
    return m;
}

} // namespace

QuadraticForms assemble_forms(const NetworkModel& model, const CMat& g) {
    if (norm2(g) == 0.0) throw DegenerateError("assemble_forms: zero postcoder");
    const idx l = model.num_clusters();

    QuadraticForms forms;
    forms.c0 = model.fc_noise_power * norm2(g) * norm2(g);
    for (idx i = 0; i < l; ++i) {
        forms.block_dims.push_back(model.sensors(i) * model.tx_antennas(i));
        forms.power_limits.push_back(model.power_limit(i));
    }
    const idx n = forms.total_dim();

    // hg_i = H_i^H g
    std::vector<CMat> hg;
    hg.reserve(static_cast<std::size_t>(l));
    for (idx i = 0; i < l; ++i) hg.push_back(adjoint_mul(model.channel(i), g));

    CMat a(n, n);
    CMat b(n, n);
    for (idx i = 0; i < l; ++i) {
        const idx oi = forms.block_offset(i);
        for (idx j = 0; j < l; ++j) {
            const idx oj = forms.block_offset(j);
            // (1_{K_i} 1_{K_j}^T) kron (hg_i hg_j^H)
            CMat outer = matmul(hg[static_cast<std::size_t>(i)],
                                adjoint(hg[static_cast<std::size_t>(j)]));
            CMat aij = kron(ones_mat(model.sensors(i), model.sensors(j)), outer);
            for (idx col = 0; col < aij.cols(); ++col)
                for (idx row = 0; row < aij.rows(); ++row)
                    a(oi + row, oj + col) = aij(row, col);
        }
        CMat outer = matmul(hg[static_cast<std::size_t>(i)],
                            adjoint(hg[static_cast<std::size_t>(i)]));
        CMat bi = kron(conjugate(model.sigma(i).mat()), outer);
        for (idx col = 0; col < bi.cols(); ++col)
            for (idx row = 0; row < bi.rows(); ++row) b(oi + row, oi + col) = bi(row, col);

        CMat pow_core = ones_mat(model.sensors(i), model.sensors(i));
        pow_core += conjugate(model.sigma(i).mat());
        CMat ci = kron(pow_core, CMat::identity(model.tx_antennas(i)));
        forms.c.push_back(Herm::enforce(ci));

        CMat di(n, n);
        for (idx col = 0; col < ci.cols(); ++col)
            for (idx row = 0; row < ci.rows(); ++row) di(oi + row, oi + col) = ci(row, col);
        forms.d.push_back(Herm::enforce(di));
    }
    forms.a = Herm::enforce(a);
    forms.b = Herm::enforce(b);
    return forms;
}

CMat build_a(const NetworkModel& model, const CMat& g) {
    if (norm2(g) == 0.0) throw DegenerateError("build_a: zero postcoder");
    const idx l = model.num_clusters();
    idx n = 0;
    for (idx i = 0; i < l; ++i) n += model.sensors(i) * model.tx_antennas(i);
    CMat a(n, 1);
    idx off = 0;
    for (idx i = 0; i < l; ++i) {
        CMat hg = adjoint_mul(model.channel(i), g);
        for (idx k = 0; k < model.sensors(i); ++k)
            for (idx r = 0; r < model.tx_antennas(i); ++r) a[off + k * model.tx_antennas(i) + r] = hg[r];
        off += model.sensors(i) * model.tx_antennas(i);
    }
    return a;
}

CMat stack_precoders(const NetworkModel& model, const std::vector<CMat>& precoders) {
    idx n = model.stacked_dim();
    CMat f(n, 1);
    idx off = 0;
    for (idx i = 0; i < model.num_clusters(); ++i) {
        CMat v = vec(precoders[static_cast<std::size_t>(i)]);
        for (idx k = 0; k < v.size(); ++k) f[off + k] = v[k];
        off += v.size();
    }
    return f;
}

std::vector<CMat> unstack_precoders(const NetworkModel& model, const CMat& f) {
    std::vector<CMat> out;
    idx off = 0;
    for (idx i = 0; i < model.num_clusters(); ++i) {
        const idx ni = model.tx_antennas(i), ki = model.sensors(i);
        CMat v(ni * ki, 1);
        for (idx k = 0; k < v.size(); ++k) v[k] = f[off + k];
        out.push_back(unvec(v, ni, ki));
        off += ni * ki;
    }
    return out;
}

double fractional_objective(const QuadraticForms& forms, const CMat& f) {
    const double num = std::real(quad_form(f, forms.a.mat(), f));
    const double den = std::real(quad_form(f, forms.b.mat(), f)) + forms.c0;
    return num / den;
}

DualPoint dual_feasible_point(const QuadraticForms& forms) {
    DualPoint pt;
    EigDecomposition ea = herm_eig(forms.a);
    const double lam_max_a = ea.values.front();
    const idx l = static_cast<idx>(forms.c.size());
    pt.mu.resize(static_cast<std::size_t>(l));
    double acc = 0.0;
    for (idx i = 0; i < l; ++i) {
        EigDecomposition ec = herm_eig(forms.c[static_cast<std::size_t>(i)]);
        const double lam_min_c = ec.values.back();
        pt.mu[static_cast<std::size_t>(i)] = lam_max_a / lam_min_c;
        acc += pt.mu[static_cast<std::size_t>(i)] * forms.power_limits[static_cast<std::size_t>(i)];
    }
    pt.lambda = acc / forms.c0;
    return pt;
}

DualFeasibility check_dual_point(const QuadraticForms& forms, const DualPoint& pt) {
    CMat slack = forms.b.mat();
    slack *= cd(pt.lambda, 0.0);
    for (std::size_t i = 0; i < pt.mu.size(); ++i) {
        CMat di = forms.d[i].mat();
        di *= cd(pt.mu[i], 0.0);
        slack += di;
    }
    slack -= forms.a.mat();
    EigDecomposition e = herm_eig(Herm::enforce(slack));
    DualFeasibility out;
    out.psd_margin = e.values.back();
    double acc = 0.0;
    for (std::size_t i = 0; i < pt.mu.size(); ++i)
        acc += pt.mu[i] * forms.power_limits[i];
    out.scalar_margin = forms.c0 * pt.lambda - acc;
    return out;
}

} // namespace snrbeam
