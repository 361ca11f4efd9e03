#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/QR>
#include <cmath>

#include "torsor/exact.hpp"
#include "torsor/random_gen.hpp"

using namespace torsor;

namespace {

Matrix scalar(double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return m;
}

ChainMap identity_map(const HilbertComplex& c) {
    std::vector<Matrix> blocks;
    for (Eigen::Index j = 0; j < c.degrees(); ++j)
        blocks.push_back(Matrix::Identity(c.dim(j), c.dim(j)));
    return ChainMap{c, c, std::move(blocks)};
}

// Independent zigzag: QR least-squares lifts instead of Gram pseudo-inverses,
// one explicit cocycle representative per basis vector.
Matrix delta_oracle(const ShortExactSequence& s, Eigen::Index k) {
    auto hb = harmonic_bases(s.B);
    auto ha = harmonic_bases(s.A);
    Matrix out(ha[k + 1].cols(), hb[k].cols());
    for (Eigen::Index i = 0; i < hb[k].cols(); ++i) {
        Matrix b = hb[k].col(i);
        Matrix c = s.beta[k].colPivHouseholderQr().solve(b);
        Matrix dc = s.C.diff(k) * c;
        Matrix a = s.alpha[k + 1].colPivHouseholderQr().solve(dc);
        out.col(i) = ha[k + 1].adjoint() * a;
    }
    return out;
}

ShortExactSequence direct_sum_ses(std::uint64_t seed) {
    return random_ses({2, 3, 1}, {2, 2, 2}, seed, {.couple = false});
}

}  // namespace

TEST_CASE("induced map of the identity is the identity") {
    HilbertComplex c = random_complex({2, 3, 2}, 1);
    ChainMap f = identity_map(c);
    for (Eigen::Index j = 0; j < c.degrees(); ++j) {
        Matrix m = induced_cohomology_map(f, j);
        CHECK((m - Matrix::Identity(m.rows(), m.cols())).norm() < 1e-12);
    }
}

TEST_CASE("induced map of a scalar map on a zero-differential complex") {
    HilbertComplex c({2, 3}, {Matrix::Zero(3, 2)});
    std::vector<Matrix> blocks = {2.5 * Matrix::Identity(2, 2), 2.5 * Matrix::Identity(3, 3)};
    ChainMap f{c, c, blocks};
    for (Eigen::Index j = 0; j < 2; ++j) {
        Matrix m = induced_cohomology_map(f, j);
        CHECK((m - 2.5 * Matrix::Identity(m.rows(), m.cols())).norm() < 1e-12);
    }
}

TEST_CASE("induced maps are functorial under composition") {
    HilbertComplex c = random_complex({3, 4, 2}, 2);
    ChainMap f = random_chain_iso(c, 10);
    ChainMap g = random_chain_iso(f.target, 11);
    std::vector<Matrix> comp;
    for (Eigen::Index j = 0; j < c.degrees(); ++j) comp.push_back(g.blocks[j] * f.blocks[j]);
    ChainMap gf{c, g.target, comp};
    for (Eigen::Index j = 0; j < c.degrees(); ++j) {
        Matrix lhs = induced_cohomology_map(gf, j);
        Matrix rhs = induced_cohomology_map(g, j) * induced_cohomology_map(f, j);
        CHECK((lhs - rhs).norm() < 1e-9);
    }
}

TEST_CASE("chain map validation rejects non-commuting blocks") {
    HilbertComplex c = random_complex({2, 2}, 3);
    std::vector<Matrix> blocks = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
    blocks[0](0, 0) = 5.0;  // breaks commutation unless d is very special
    ChainMap f{c, c, blocks};
    if (chain_map_residual(f) > 1e-10) CHECK_THROWS_AS(induced_cohomology_map(f, 0), ValidationError);
}

TEST_CASE("connecting homomorphism vanishes for a direct sum") {
    ShortExactSequence s = direct_sum_ses(4);
    for (Eigen::Index k = 0; k + 1 < s.A.degrees(); ++k) {
        Matrix d = connecting_homomorphism(s, k);
        CHECK(d.norm() < 1e-10);
    }
}

TEST_CASE("connecting homomorphism matches the exhaustive zigzag oracle") {
    for (std::uint64_t seed : {5u, 6u, 7u}) {
        ShortExactSequence s = random_ses({2, 3, 2}, {2, 2, 1}, seed);
        for (Eigen::Index k = 0; k + 1 < s.A.degrees(); ++k) {
            Matrix lib = connecting_homomorphism(s, k);
            Matrix oracle = delta_oracle(s, k);
            CHECK((lib - oracle).norm() < 1e-9 * (1.0 + oracle.norm()));
        }
    }
}

TEST_CASE("connecting homomorphism is independent of the lift") {
    ShortExactSequence s = random_ses({2, 2, 2}, {1, 2, 1}, 8);
    for (Eigen::Index k = 0; k + 1 < s.A.degrees(); ++k) {
        Matrix base = connecting_homomorphism(s, k);
        Matrix alt = connecting_homomorphism_alt_lift(s, k, 999);
        CHECK((base - alt).norm() < 1e-9 * (1.0 + base.norm()));
    }
}

TEST_CASE("connecting map to or from trivial cohomology is the empty matrix") {
    // B acyclic in every degree: delta has zero columns.
    ShortExactSequence s = random_ses({2, 3, 1}, {1, 2, 1}, 9,
                                      {.couple = true, .complex_opts = {.acyclic = true}});
    auto hb = harmonic_bases(s.B);
    for (Eigen::Index k = 0; k + 1 < s.A.degrees(); ++k) {
        if (hb[k].cols() != 0) continue;
        Matrix d = connecting_homomorphism(s, k);
        CHECK(d.cols() == 0);
    }
}

TEST_CASE("LES of a direct sum has zero torsion") {
    ShortExactSequence s = direct_sum_ses(12);
    HilbertComplex les = build_les(s);
    for (Eigen::Index b : les.betti()) CHECK(b == 0);
    CHECK(std::abs(log_torsion(les).log_torsion_det) < 1e-9);
}

TEST_CASE("LES of random twisted sequences is acyclic") {
    for (std::uint64_t seed : {13u, 14u}) {
        ShortExactSequence s = random_ses({2, 3, 2}, {2, 2, 2}, seed);
        HilbertComplex les = build_les(s);
        for (Eigen::Index b : les.betti()) CHECK(b == 0);
    }
}

TEST_CASE("LES of two acyclic complexes is empty") {
    ShortExactSequence s = random_ses({2, 2}, {1, 1}, 15,
                                      {.couple = true, .complex_opts = {.acyclic = true}});
    HilbertComplex les = build_les(s);
    for (Eigen::Index j = 0; j < les.degrees(); ++j) CHECK(les.dim(j) == 0);
    CHECK(log_torsion(les).log_torsion_det == doctest::Approx(0.0));
}

TEST_CASE("delta beta_* = 0 and alpha_* delta = 0") {
    ShortExactSequence s = random_ses({2, 3, 2}, {2, 2, 1}, 16);
    HilbertComplex les = build_les(s);
    // Complex property of the assembled LES is exactly these compositions.
    for (Eigen::Index j = 0; j + 1 < les.degrees(); ++j) {
        if (les.diff(j).size() == 0 || les.diff(j + 1).size() == 0) continue;
        CHECK((les.diff(j + 1) * les.diff(j)).norm() < 1e-9);
    }
}

TEST_CASE("length-2 torsion of an isometric splitting vanishes") {
    Matrix alpha = Matrix::Zero(3, 1);
    alpha(0, 0) = 1.0;
    Matrix beta = Matrix::Zero(2, 3);
    beta(0, 1) = 1.0;
    beta(1, 2) = 1.0;
    CHECK(length2_torsion(alpha, beta) == doctest::Approx(0.0));
}

TEST_CASE("length-2 torsion picks up scaling of alpha and beta") {
    Matrix alpha = Matrix::Zero(2, 1);
    alpha(0, 0) = 2.0;
    Matrix beta = Matrix::Zero(1, 2);
    beta(0, 1) = 1.0;
    CHECK(length2_torsion(alpha, beta) == doctest::Approx(std::log(2.0)));

    Matrix alpha1 = Matrix::Zero(2, 1);
    alpha1(0, 0) = 1.0;
    Matrix beta3 = Matrix::Zero(1, 2);
    beta3(0, 1) = 3.0;
    CHECK(length2_torsion(alpha1, beta3) == doctest::Approx(-std::log(3.0)));

    Matrix not_injective = Matrix::Zero(2, 1);
    CHECK_THROWS_AS(length2_torsion(not_injective, beta3), ValidationError);
}

TEST_CASE("Milnor identity for a direct sum: residual zero and additivity") {
    ShortExactSequence s = direct_sum_ses(17);
    MilnorReport rep = milnor(s);
    CHECK(rep.residual < 1e-10);
    CHECK(std::abs(rep.log_tau_les) < 1e-10);
    CHECK(rep.log_tau_c == doctest::Approx(rep.log_tau_a + rep.log_tau_b).epsilon(1e-10));
}

TEST_CASE("Milnor identity on random twisted sequences") {
    for (std::uint64_t seed = 20; seed < 26; ++seed) {
        RandomSesOptions opts;
        opts.gram_twist = seed % 2 == 0;
        ShortExactSequence s = random_ses({2, 3, 2}, {2, 2, 1}, seed, opts);
        CHECK(milnor_residual(s) < 1e-8);
    }
}

TEST_CASE("Milnor identity with non-isometric alpha includes the correction term") {
    RandomSesOptions opts;
    opts.alpha_scale = 2.0;
    ShortExactSequence s = random_ses({1, 2, 1}, {2, 1, 2}, 27, opts);
    MilnorReport rep = milnor(s);
    CHECK(std::abs(rep.length2_correction) > 1e-3);  // genuinely nonzero
    CHECK(rep.residual < 1e-8);
}

TEST_CASE("chain transfer: identity and scalar maps") {
    HilbertComplex c = random_complex({2, 3, 2}, 30);
    TransferReport id_rep = chain_iso_transfer(identity_map(c));
    CHECK(id_rep.residual < 1e-10);
    CHECK(id_rep.cochain_correction == doctest::Approx(0.0));

    std::vector<Matrix> blocks;
    for (Eigen::Index j = 0; j < c.degrees(); ++j)
        blocks.push_back(1.7 * Matrix::Identity(c.dim(j), c.dim(j)));
    // c id commutes with every differential, so this is a chain map c -> c.
    TransferReport rep = chain_iso_transfer(ChainMap{c, c, blocks});
    CHECK(rep.residual < 1e-10);
}

TEST_CASE("chain transfer on random isomorphisms") {
    for (std::uint64_t seed = 40; seed < 45; ++seed) {
        HilbertComplex c = random_complex({3, 4, 2}, seed);
        TransferReport rep = chain_iso_transfer(random_chain_iso(c, seed + 100));
        CHECK(rep.residual < 1e-8);
    }
}

TEST_CASE("Gram change of coordinates shifts torsion by the transfer corrections") {
    HilbertComplex c = random_complex({3, 3, 2}, 50);
    Rng rng(51);
    std::vector<Matrix> s_blocks;
    for (Eigen::Index j = 0; j < c.degrees(); ++j) s_blocks.push_back(random_invertible(rng, c.dim(j)));
    // C' = (S^{-1} d S, S^H S): x -> S x is a chain isomorphism C' -> C.
    std::vector<Matrix> diffs;
    std::vector<Matrix> grams;
    for (Eigen::Index j = 0; j < c.degrees(); ++j) grams.push_back(s_blocks[j].adjoint() * s_blocks[j]);
    for (Eigen::Index j = 0; j + 1 < c.degrees(); ++j)
        diffs.push_back(s_blocks[j + 1].fullPivLu().solve(c.diff(j) * s_blocks[j]));
    HilbertComplex transformed(c.dims(), std::move(diffs), std::move(grams));
    TransferReport rep = chain_iso_transfer(ChainMap{transformed, c, s_blocks});
    CHECK(rep.residual < 1e-8);
}

TEST_CASE("random SES generator produces exact sequences with tiny d^2 residual") {
    ShortExactSequence s = random_ses({2, 2, 2}, {1, 2, 1}, 11);
    CHECK(validate(s.C).valid);
    CHECK(validate(s.C).max_d2_residual < 1e-12);
    validate_ses(s);

    ShortExactSequence degen = random_ses({0, 0, 0}, {2, 2, 1}, 18);
    validate_ses(degen);
    for (Eigen::Index k = 0; k + 1 < degen.A.degrees(); ++k)
        CHECK(connecting_homomorphism(degen, k).norm() < 1e-12);
}
