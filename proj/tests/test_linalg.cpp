#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <complex>
#include <vector>

#include "torsor/linalg.hpp"
#include "torsor/random_gen.hpp"

using namespace torsor;

namespace {

// Characteristic polynomial coefficients by Faddeev-LeVerrier:
// p(x) = x^n + c_{n-1} x^{n-1} + ... + c_0.
std::vector<Complex> char_poly(const Matrix& a) {
    const Eigen::Index n = a.rows();
    std::vector<Complex> c(n + 1);
    c[n] = 1.0;
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        m = a * m + c[n - k + 1] * Matrix::Identity(n, n);
        c[n - k] = -(a * m).trace() / static_cast<double>(k);
    }
    return c;
}

// Durand-Kerner iteration; independent of any eigensolver.
std::vector<Complex> poly_roots(const std::vector<Complex>& coeff) {
    const size_t n = coeff.size() - 1;
    std::vector<Complex> r(n);
    for (size_t i = 0; i < n; ++i) r[i] = std::pow(Complex(0.4, 0.9), static_cast<double>(i));
    auto eval = [&](Complex x) {
        Complex acc = 0.0;
        for (size_t i = coeff.size(); i-- > 0;) acc = acc * x + coeff[i];
        return acc;
    };
    for (int it = 0; it < 500; ++it) {
        double moved = 0.0;
        for (size_t i = 0; i < n; ++i) {
            Complex denom = 1.0;
            for (size_t j = 0; j < n; ++j)
                if (j != i) denom *= r[i] - r[j];
            Complex step = eval(r[i]) / denom;
            r[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-14) break;
    }
    return r;
}

}  // namespace

TEST_CASE("hermitian_eig on diagonal and zero matrices") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    EigResult r = hermitian_eig(d);
    CHECK(r.values(0) == doctest::Approx(1.0));
    CHECK(r.values(1) == doctest::Approx(3.0));

    EigResult z = hermitian_eig(Matrix::Zero(2, 2));
    CHECK(z.values(0) == doctest::Approx(0.0));
    CHECK(z.values(1) == doctest::Approx(0.0));
}

TEST_CASE("hermitian_eig matches characteristic-polynomial roots on a random 5x5") {
    Rng rng(42);
    Matrix g = random_matrix(rng, 5, 5);
    Matrix a = 0.5 * (g + g.adjoint());
    EigResult r = hermitian_eig(a);

    auto roots = poly_roots(char_poly(a));
    std::vector<double> expected;
    for (auto z : roots) {
        CHECK(std::abs(z.imag()) < 1e-8);
        expected.push_back(z.real());
    }
    std::sort(expected.begin(), expected.end());
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(r.values(i) == doctest::Approx(expected[i]).epsilon(1e-8));
}

TEST_CASE("hermitian_eig reconstruction residual on random 8x8") {
    Rng rng(7);
    Matrix g = random_matrix(rng, 8, 8);
    Matrix a = 0.5 * (g + g.adjoint());
    EigResult r = hermitian_eig(a);
    Matrix rebuilt = r.vectors * r.values.asDiagonal() * r.vectors.adjoint();
    CHECK((a - rebuilt).norm() <= 1e-10 * a.norm());
}

TEST_CASE("hermitian_eig respects a Gram form") {
    Rng rng(3);
    Matrix g = random_spd(rng, 4);
    Matrix h = random_matrix(rng, 4, 4);
    Matrix herm = 0.5 * (h + h.adjoint());
    // Self-adjoint w.r.t. G: A = G^{-1} herm (so G A = herm is Hermitian).
    Matrix a = g.fullPivLu().solve(herm);
    EigResult r = hermitian_eig(a, g);
    // A v = lambda v within residual tolerance
    for (Eigen::Index i = 0; i < 4; ++i) {
        Matrix v = r.vectors.col(i);
        CHECK((a * v - r.values(i) * v).norm() < 1e-9 * (1.0 + std::abs(r.values(i))));
    }
    // eigenvectors G-orthonormal
    Matrix id_check = r.vectors.adjoint() * g * r.vectors;
    CHECK((id_check - Matrix::Identity(4, 4)).norm() < 1e-9);
}

TEST_CASE("hermitian_eig rejects bad input") {
    CHECK_THROWS_AS(hermitian_eig(Matrix::Zero(2, 3)), ValidationError);
    Matrix a(2, 2);
    a << 0.0, 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(hermitian_eig(a), ValidationError);
}

TEST_CASE("rank_split on the rank-1 outer product") {
    Matrix a(2, 2);
    a << 1.0, 1.0, 1.0, 1.0;
    RankSplit rs = rank_split(a);
    CHECK(rs.rank == 1);
    REQUIRE(rs.kernel_basis.cols() == 1);
    Matrix k = rs.kernel_basis.col(0);
    // kernel spanned by (1,-1)/sqrt(2) up to phase
    CHECK(std::abs(std::abs(k(0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK((a * k).norm() < 1e-12);
    CHECK(rs.rank + rs.kernel_basis.cols() == a.cols());
}

TEST_CASE("rank_split of the zero map") {
    RankSplit rs = rank_split(Matrix::Zero(3, 4));
    CHECK(rs.rank == 0);
    CHECK(rs.kernel_basis.cols() == 4);
}

TEST_CASE("rank_split detects a forced rank-2 product") {
    Rng rng(11);
    Matrix a = random_matrix(rng, 4, 2) * random_matrix(rng, 2, 6);
    RankSplit rs = rank_split(a);
    CHECK(rs.rank == 2);
    // bases orthonormal
    CHECK((rs.kernel_basis.adjoint() * rs.kernel_basis - Matrix::Identity(4, 4)).norm() < 1e-12);
    CHECK((a * rs.kernel_basis).norm() < 1e-10 * a.norm());
}

TEST_CASE("rank_split with Gram geometries keeps bases Gram-orthonormal") {
    Rng rng(5);
    Matrix gs = random_spd(rng, 5), gt = random_spd(rng, 3);
    Matrix a = random_matrix(rng, 3, 5);
    RankSplit rs = rank_split(a, gs, gt);
    CHECK(rs.rank == 3);
    Matrix kk = rs.kernel_basis.adjoint() * gs * rs.kernel_basis;
    CHECK((kk - Matrix::Identity(kk.rows(), kk.cols())).norm() < 1e-10);
    Matrix rr = rs.range_basis.adjoint() * gt * rs.range_basis;
    CHECK((rr - Matrix::Identity(rr.rows(), rr.cols())).norm() < 1e-10);
    CHECK_THROWS_AS(rank_split(a, Matrix::Zero(5, 5), gt), ValidationError);
}

TEST_CASE("rank of the adjoint matches under matching Grams") {
    Rng rng(17);
    Matrix gs = random_spd(rng, 6), gt = random_spd(rng, 4);
    Matrix a = random_matrix(rng, 4, 2) * random_matrix(rng, 2, 6);
    // adjoint w.r.t. the Grams: G_src^{-1} A^H G_tgt
    Matrix adj = gs.fullPivLu().solve(a.adjoint() * gt);
    CHECK(rank_split(a, gs, gt).rank == rank_split(adj, gt, gs).rank);
}

TEST_CASE("det_map basics") {
    CHECK(det_map(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
    Matrix t(2, 2);
    t << 1.0, 1.0, 0.0, 1.0;
    CHECK(det_map(t) == doctest::Approx(1.0));
    Matrix u(2, 2);
    u << 2.0, 5.0, 0.0, 3.0;
    CHECK(det_map(u) == doctest::Approx(6.0));
    Matrix two(1, 1), three(1, 1);
    two << 2.0;
    three << 3.0;
    CHECK(det_map(u) == doctest::Approx(det_map(two) * det_map(three)));
}

TEST_CASE("Det is multiplicative for bijective factors") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix s = random_invertible(rng, 4);
        Matrix t = random_invertible(rng, 4);
        CHECK(det_map(t * s) == doctest::Approx(det_map(t) * det_map(s)).epsilon(1e-10));
    }
}

TEST_CASE("Det of block upper-triangular maps splits, Eq-style") {
    Rng rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix t1 = random_invertible(rng, 3);
        Matrix t2 = random_invertible(rng, 2);
        Matrix t12 = random_matrix(rng, 3, 2);
        Matrix t = Matrix::Zero(5, 5);
        t.topLeftCorner(3, 3) = t1;
        t.topRightCorner(3, 2) = t12;
        t.bottomRightCorner(2, 2) = t2;
        double lhs = det_map(t);
        double rhs = det_map(t1) * det_map(t2);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
}

TEST_CASE("pseudo_inverse basics and Moore-Penrose conditions") {
    CHECK((pseudo_inverse(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() < 1e-12);

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 2.0;
    Matrix dp = pseudo_inverse(d);
    CHECK(dp(0, 0).real() == doctest::Approx(0.5));
    CHECK(std::abs(dp(1, 1)) < 1e-14);

    Rng rng(31);
    Matrix a = random_matrix(rng, 5, 3);
    Matrix ap = pseudo_inverse(a);
    CHECK((ap * a - Matrix::Identity(3, 3)).norm() < 1e-10);

    // Gram geometry: all four conditions, adjoints taken in the Gram forms.
    Matrix gs = random_spd(rng, 5), gt = random_spd(rng, 3);
    Matrix b = random_matrix(rng, 3, 5);
    Matrix bp = pseudo_inverse(b, gs, gt);
    CHECK((b * bp * b - b).norm() < 1e-10);
    CHECK((bp * b * bp - bp).norm() < 1e-10);
    // B B+ self-adjoint w.r.t. G_tgt; B+ B w.r.t. G_src.
    Matrix bbp = gt * b * bp;
    CHECK((bbp - bbp.adjoint()).norm() < 1e-10);
    Matrix bpb = gs * bp * b;
    CHECK((bpb - bpb.adjoint()).norm() < 1e-10);
}

TEST_CASE("singular values in Gram geometry agree with det_map") {
    Rng rng(37);
    Matrix gs = random_spd(rng, 4), gt = random_spd(rng, 4);
    Matrix a = random_invertible(rng, 4);
    RealVector sv = singular_values(a, gs, gt);
    double prod = 1.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) prod *= sv(i);
    CHECK(det_map(a, gs, gt) == doctest::Approx(prod));
}
