#include "doctest.h"

#include "snrbeam/linalg.hpp"
#include "snrbeam/rng.hpp"

using namespace snrbeam;

namespace {

Herm random_herm(Rng& rng, idx n) {
    CMat m = rng.cscg_matrix(n, n);
    return Herm::enforce(m);
}

Herm random_pd(Rng& rng, idx n) {
    CMat m = rng.cscg_matrix(n, n);
    CMat p = adjoint_mul(m, m); // m^H m, PSD
    for (idx i = 0; i < n; ++i) p(i, i) += cd(0.5, 0.0);
    return Herm::enforce(p);
}

} // namespace

TEST_CASE("kron basics") {
    CMat one(1, 1, {cd(1)});
    Rng rng(3);
    CMat m = rng.cscg_matrix(3, 2);
    CMat k1 = kron(one, m);
    CHECK(frob_norm(k1 - m) == doctest::Approx(0.0));

    // kron(ones(2x2), [s]) is a 2x2 matrix of all s
    CMat ones22(2, 2, {cd(1), cd(1), cd(1), cd(1)});
    CMat s(1, 1, {cd(2.5, -1.0)});
    CMat k2 = kron(ones22, s);
    for (idx i = 0; i < 2; ++i)
        for (idx j = 0; j < 2; ++j) CHECK(std::abs(k2(i, j) - cd(2.5, -1.0)) < 1e-15);

    // kron(diag(1,2), diag(3,4)) = diag(3,4,6,8), expanded by hand
    CMat d1(2, 2, {cd(1), cd(0), cd(0), cd(2)});
    CMat d2(2, 2, {cd(3), cd(0), cd(0), cd(4)});
    CMat k3 = kron(d1, d2);
    CHECK(k3(0, 0) == cd(3));
    CHECK(k3(1, 1) == cd(4));
    CHECK(k3(2, 2) == cd(6));
    CHECK(k3(3, 3) == cd(8));
    for (idx i = 0; i < 4; ++i)
        for (idx j = 0; j < 4; ++j)
            if (i != j) CHECK(k3(i, j) == cd(0));
}

TEST_CASE("vec is column-major and round-trips") {
    CMat m(2, 2, {cd(1), cd(3), cd(2), cd(4)}); // [[1,3],[2,4]]
    CMat v = vec(m);
    CHECK(v[0] == cd(1));
    CHECK(v[1] == cd(2));
    CHECK(v[2] == cd(3));
    CHECK(v[3] == cd(4));

    CMat z = vec(CMat::zero(2, 2));
    for (idx i = 0; i < 4; ++i) CHECK(z[i] == cd(0));

    Rng rng(11);
    CMat r = rng.cscg_matrix(3, 2);
    CHECK(frob_norm(unvec(vec(r), 3, 2) - r) == doctest::Approx(0.0));
}

TEST_CASE("vec(a b^T) = b kron a") {
    Rng rng(5);
    CMat a = rng.cscg_matrix(3, 1);
    CMat b = rng.cscg_matrix(2, 1);
    CMat outer = matmul(a, transpose(b));
    CMat lhs = vec(outer);
    CMat rhs = matmul(kron(b, CMat::identity(1)), CMat::identity(1)); // placeholder shape
    rhs = kron(b, a);
    CHECK(frob_norm(lhs - rhs) < 1e-14);
}

TEST_CASE("kron/vec identity vec(ABC) = (C^T kron A) vec(B)") {
    Rng rng(7);
    for (int t = 0; t < 10; ++t) {
        CMat a = rng.cscg_matrix(3, 2);
        CMat b = rng.cscg_matrix(2, 4);
        CMat c = rng.cscg_matrix(4, 3);
        CMat lhs = vec(matmul(matmul(a, b), c));
        CMat rhs = matmul(kron(transpose(c), a), vec(b));
        CHECK(frob_norm(lhs - rhs) < 1e-10 * (1.0 + frob_norm(lhs)));
    }
}

TEST_CASE("herm_eig diagonal and rank-one cases") {
    CMat d(2, 2, {cd(2), cd(0), cd(0), cd(1)});
    EigDecomposition e = herm_eig(Herm::enforce(d));
    CHECK(e.values[0] == doctest::Approx(2.0));
    CHECK(e.values[1] == doctest::Approx(1.0));
    CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(e.vectors(1, 1)) == doctest::Approx(1.0));

    // h h^H for h = (1,1)/sqrt(2): eigenvalues (1, 0)
    const double s = 1.0 / std::sqrt(2.0);
    CMat h(2, 1, {cd(s), cd(s)});
    EigDecomposition p = herm_eig(Herm::enforce(matmul(h, adjoint(h))));
    CHECK(p.values[0] == doctest::Approx(1.0));
    CHECK(p.values[1] == doctest::Approx(0.0));
}

TEST_CASE("herm_eig reconstruction and unitarity on random matrices") {
    Rng rng(13);
    for (idx n : {1, 2, 3, 5, 8, 20}) {
        Herm m = random_herm(rng, n);
        EigDecomposition e = herm_eig(m);
        CMat lam(n, n);
        for (idx i = 0; i < n; ++i) lam(i, i) = e.values[static_cast<std::size_t>(i)];
        CMat rec = matmul(matmul(e.vectors, lam), adjoint(e.vectors));
        CHECK(frob_norm(rec - m.mat()) <= 1e-10 * (1.0 + frob_norm(m.mat())));
        CMat vhv = adjoint_mul(e.vectors, e.vectors);
        CHECK(frob_norm(vhv - CMat::identity(n)) <= 1e-10);
        for (idx i = 0; i + 1 < n; ++i)
            CHECK(e.values[static_cast<std::size_t>(i)] >= e.values[static_cast<std::size_t>(i + 1)]);
    }
}

TEST_CASE("sym_eig agrees with herm_eig through the real embedding") {
    Rng rng(17);
    Herm m = random_herm(rng, 5);
    EigDecomposition ce = herm_eig(m);
    RealEig re = sym_eig(hermitian_to_real_embedding(m));
    // eigenvalues doubled in multiplicity
    for (idx i = 0; i < 5; ++i) {
        CHECK(re.values[static_cast<std::size_t>(2 * i)] ==
              doctest::Approx(ce.values[static_cast<std::size_t>(i)]).epsilon(1e-9));
        CHECK(re.values[static_cast<std::size_t>(2 * i + 1)] ==
              doctest::Approx(ce.values[static_cast<std::size_t>(i)]).epsilon(1e-9));
    }
}

TEST_CASE("inv_sqrt_psd identity, diagonal, property") {
    Herm id = Herm::identity(3);
    Herm r = inv_sqrt_psd(id, 1e-14);
    CHECK(frob_norm(r.mat() - CMat::identity(3)) < 1e-12);

    CMat d(2, 2, {cd(4), cd(0), cd(0), cd(9)});
    Herm rd = inv_sqrt_psd(Herm::enforce(d), 1e-14);
    CHECK(std::abs(rd(0, 0) - cd(0.5)) < 1e-12);
    CHECK(std::abs(rd(1, 1) - cd(1.0 / 3.0)) < 1e-12);

    Rng rng(19);
    for (int t = 0; t < 5; ++t) {
        Herm m = random_pd(rng, 4);
        Herm rm = inv_sqrt_psd(m);
        CMat prod = matmul(matmul(rm.mat(), m.mat()), rm.mat());
        CHECK(frob_norm(prod - CMat::identity(4)) < 1e-9);
    }
    // R^2 * M = I within 1e-8 for orders up to 20
    Herm big = random_pd(rng, 20);
    Herm rb = inv_sqrt_psd(big);
    CMat r2 = matmul(rb.mat(), rb.mat());
    CHECK(frob_norm(matmul(r2, big.mat()) - CMat::identity(20)) < 1e-8 * (1.0 + frob_norm(big.mat())));

    // singular input rejected
    CMat sing(2, 2, {cd(1), cd(0), cd(0), cd(0)});
    CHECK_THROWS_AS(inv_sqrt_psd(Herm::enforce(sing)), SingularError);
}

TEST_CASE("real_nullspace_sample examples and property") {
    RMat a(1, 2, {1.0, 1.0});
    RMat x = real_nullspace_sample(a);
    CHECK(std::abs(x[0] + x[1]) < 1e-12);
    CHECK(norm2(x) == doctest::Approx(1.0));

    RMat z(1, 3);
    RMat xz = real_nullspace_sample(z);
    CHECK(norm2(xz) == doctest::Approx(1.0));

    Rng rng(23);
    for (int t = 0; t < 20; ++t) {
        RMat r = rng.normal_matrix(3, 6);
        RMat n = real_nullspace_sample(r);
        CHECK(norm2(n) == doctest::Approx(1.0));
        CHECK(norm2(matmul(r, n)) < 1e-10 * frob_norm(r));
    }

    CHECK_THROWS_AS(real_nullspace_sample(RMat(3, 2)), DimensionError);
}

TEST_CASE("hermitian_to_real_embedding structure") {
    CMat one(1, 1, {cd(1)});
    RMat e1 = hermitian_to_real_embedding(Herm::enforce(one));
    CHECK(e1(0, 0) == 1.0);
    CHECK(e1(1, 1) == 1.0);
    CHECK(e1(0, 1) == 0.0);

    // [[0, i], [-i, 0]]
    CMat m(2, 2, {cd(0), cd(0, 1), cd(0, -1), cd(0)});
    RMat e = hermitian_to_real_embedding(Herm::enforce(m));
    RMat want(4, 4, {0, 0, 0, -1, 0, 0, 1, 0, 0, 1, 0, 0, -1, 0, 0, 0});
    CHECK(frob_norm(e - want) < 1e-15);

    Rng rng(29);
    Herm h = random_herm(rng, 4);
    RMat emb = hermitian_to_real_embedding(h);
    CHECK(std::abs(trace(emb) - 2.0 * trace(h.mat()).real()) < 1e-12);
    // recovery round-trip
    Herm back = herm_from_embedded(emb);
    CHECK(frob_norm(back.mat() - h.mat()) < 1e-14);
}

TEST_CASE("cholesky solve round-trip") {
    Rng rng(31);
    Herm m = random_pd(rng, 6);
    CholC f = chol(m);
    REQUIRE(f.ok);
    CMat b = rng.cscg_matrix(6, 2);
    CMat x = chol_solve(f.l, b);
    CHECK(frob_norm(matmul(m.mat(), x) - b) < 1e-10 * (1.0 + frob_norm(b)));

    RMat rm(3, 3, {4, 1, 0, 1, 3, 1, 0, 1, 2});
    CholR rf = chol_real(rm);
    REQUIRE(rf.ok);
    RMat rb = rng.normal_matrix(3, 1);
    RMat rx = chol_solve(rf.l, rb);
    CHECK(frob_norm(matmul(rm, rx) - rb) < 1e-12);

    // indefinite input is rejected
    RMat bad(2, 2, {1, 2, 2, 1});
    CHECK_FALSE(chol_real(bad).ok);
}

TEST_CASE("real QR reproduces the matrix and orthogonal Q") {
    Rng rng(37);
    for (auto [m, n] : {std::pair<idx, idx>{5, 3}, {3, 5}, {4, 4}}) {
        RMat a = rng.normal_matrix(m, n);
        RealQR qr(a);
        RMat q = qr.full_q();
        CHECK(frob_norm(matmul(transpose(q), q) - RMat::identity(m)) < 1e-12);
        // Q^T A should be upper trapezoidal and equal R
        RMat qta = qr.qt_apply(a);
        for (idx j = 0; j < n; ++j)
            for (idx i = j + 1; i < m; ++i) CHECK(std::abs(qta(i, j)) < 1e-12);
    }
}
