#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "torsor/hilbert_complex.hpp"
#include "torsor/random_gen.hpp"

using namespace torsor;

namespace {

Matrix scalar(double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return m;
}

HilbertComplex interval_complex() {
    Matrix d(1, 2);
    d << -1.0, 1.0;
    return HilbertComplex({2, 1}, {d});
}

HilbertComplex two_term(double a) { return HilbertComplex({1, 1}, {scalar(a)}); }

HilbertComplex zero_diff_complex(std::vector<Eigen::Index> dims) {
    std::vector<Matrix> diffs;
    for (size_t j = 0; j + 1 < dims.size(); ++j) diffs.push_back(Matrix::Zero(dims[j + 1], dims[j]));
    return HilbertComplex(std::move(dims), std::move(diffs));
}

}  // namespace

TEST_CASE("validate accepts the interval complex and rejects d^2 != 0") {
    CHECK(validate(interval_complex()).valid);

    HilbertComplex bad({1, 1, 1}, {scalar(1.0), scalar(1.0)});
    CHECK_FALSE(validate(bad).valid);
    CHECK_THROWS_AS(log_torsion(bad), ValidationError);

    CHECK(validate(random_complex({3, 4, 2}, 99)).valid);
}

TEST_CASE("construction rejects structural mismatches") {
    CHECK_THROWS_AS(HilbertComplex({2, 2}, {Matrix::Zero(3, 2)}), ValidationError);
    CHECK_THROWS_AS(HilbertComplex({2, 2}, {}), ValidationError);
    Matrix indefinite = -Matrix::Identity(2, 2);
    CHECK_THROWS_AS(HilbertComplex({2, 1}, {Matrix::Zero(1, 2)}, {indefinite, Matrix::Identity(1, 1)}),
                    ValidationError);
}

TEST_CASE("laplacians of the one-dimensional complex d = [2]") {
    LaplaceData lap = laplacians(two_term(2.0));
    CHECK(lap.spectra[0](0) == doctest::Approx(4.0));
    CHECK(lap.spectra[1](0) == doctest::Approx(4.0));
    CHECK(lap.coclosed[0].size() == 1);
    CHECK(lap.closed[1].size() == 1);
    CHECK(lap.closed[0].size() == 0);   // Delta^cl_0 acts on the trivial space
    CHECK(lap.coclosed[1].size() == 0); // Delta^ccl_N likewise
}

TEST_CASE("laplacians vanish for zero differentials") {
    LaplaceData lap = laplacians(zero_diff_complex({2, 3}));
    CHECK(lap.spectra[0].cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(lap.spectra[1].cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("triangle-circle degree-0 Laplacian spectrum is {0,3,3}") {
    Matrix d0(3, 3);
    // edges (0,1), (0,2), (1,2) of the triangle boundary
    d0 << -1, 1, 0, -1, 0, 1, 0, -1, 1;
    HilbertComplex circle({3, 3}, {d0});
    LaplaceData lap = laplacians(circle);
    CHECK(lap.spectra[0](0) == doctest::Approx(0.0));
    CHECK(lap.spectra[0](1) == doctest::Approx(3.0));
    CHECK(lap.spectra[0](2) == doctest::Approx(3.0));
}

TEST_CASE("closed and coclosed spectra coincide across degrees with multiplicities") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        HilbertComplex c = random_complex({4, 5, 3, 2}, seed);
        LaplaceData lap = laplacians(c);
        for (Eigen::Index j = 0; j + 1 < c.degrees(); ++j) {
            const RealVector& ccl = lap.coclosed[j];
            const RealVector& cl = lap.closed[j + 1];
            REQUIRE(ccl.size() == cl.size());
            std::vector<double> a(ccl.data(), ccl.data() + ccl.size());
            std::vector<double> b(cl.data(), cl.data() + cl.size());
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
        }
    }
}

TEST_CASE("hodge of zero differentials is all harmonic") {
    HodgeData h = hodge(zero_diff_complex({3, 2}));
    CHECK(h.betti[0] == 3);
    CHECK(h.betti[1] == 2);
    CHECK(h.harmonic_basis[0].cols() == 3);
    CHECK(h.exact_basis[1].cols() == 0);
}

TEST_CASE("hodge of the interval complex") {
    HodgeData h = hodge(interval_complex());
    CHECK(h.betti[0] == 1);
    CHECK(h.betti[1] == 0);
    REQUIRE(h.harmonic_basis[0].cols() == 1);
    Matrix v = h.harmonic_basis[0].col(0);
    CHECK(std::abs(std::abs(v(0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(v(0) - v(1)) < 1e-12);
}

TEST_CASE("hodge splitting is orthogonal and complete on an acyclic random complex") {
    HilbertComplex c = random_complex({2, 4, 2}, 5, {.acyclic = true});
    HodgeData h = hodge(c);
    for (Eigen::Index j = 0; j < c.degrees(); ++j) {
        CHECK(h.betti[j] == 0);
        Matrix all(c.dim(j), h.harmonic_basis[j].cols() + h.exact_basis[j].cols() + h.coexact_basis[j].cols());
        all << h.harmonic_basis[j], h.exact_basis[j], h.coexact_basis[j];
        REQUIRE(all.cols() == c.dim(j));
        Matrix gramian = all.adjoint() * c.gram(j) * all;
        CHECK((gramian - Matrix::Identity(all.cols(), all.cols())).norm() < 1e-9);
    }
}

TEST_CASE("heat invariants of d = [2] at t = 1") {
    HeatTrace ht = heat_invariants(two_term(2.0), 1.0);
    CHECK(ht.traces[0] == doctest::Approx(std::exp(-4.0)));
    CHECK(ht.traces[1] == doctest::Approx(std::exp(-4.0)));
    CHECK(std::abs(ht.alternating_sum) < 1e-14);
    CHECK(ht.euler_characteristic == 0);
    CHECK_THROWS_AS(heat_invariants(two_term(2.0), 0.0), ValidationError);
}

TEST_CASE("zero differentials give the alternating dimension count at any t") {
    HilbertComplex c = zero_diff_complex({3, 1, 2});
    for (double t : {0.1, 1.0, 10.0}) {
        HeatTrace ht = heat_invariants(c, t);
        CHECK(ht.alternating_sum == doctest::Approx(3 - 1 + 2));
    }
}

TEST_CASE("McKean-Singer: alternating heat trace equals chi at three decades of t") {
    for (std::uint64_t seed : {10u, 11u, 12u}) {
        HilbertComplex c = random_complex({3, 5, 4, 2}, seed);
        for (double t : {0.1, 1.0, 10.0}) {
            HeatTrace ht = heat_invariants(c, t);
            CHECK(std::abs(ht.alternating_sum - static_cast<double>(ht.euler_characteristic)) < 1e-10);
        }
    }
}

TEST_CASE("weighted heat traces telescope into closed and coclosed sums") {
    HilbertComplex c = random_complex({4, 5, 3}, 21);
    LaplaceData lap = laplacians(c);
    auto betti = c.betti();
    for (double t : {0.3, 1.0, 3.0}) {
        double weighted = 0.0, cl_sum = 0.0, ccl_sum = 0.0;
        for (Eigen::Index j = 0; j < c.degrees(); ++j) {
            double sign = (j % 2 == 0) ? 1.0 : -1.0;
            double tr = 0.0;
            for (Eigen::Index i = 0; i < lap.spectra[j].size(); ++i)
                tr += std::exp(-t * lap.spectra[j](i));
            weighted += sign * static_cast<double>(j) * (tr - static_cast<double>(betti[j]));
            double trc = 0.0, trcc = 0.0;
            for (Eigen::Index i = 0; i < lap.closed[j].size(); ++i) trc += std::exp(-t * lap.closed[j](i));
            for (Eigen::Index i = 0; i < lap.coclosed[j].size(); ++i) trcc += std::exp(-t * lap.coclosed[j](i));
            cl_sum += sign * trc;
            ccl_sum += sign * trcc;
        }
        CHECK(std::abs(weighted - cl_sum) < 1e-10);
        CHECK(std::abs(weighted + ccl_sum) < 1e-10);
    }
}

TEST_CASE("torsion of d = [2] is log 2 by both methods") {
    TorsionReport rep = log_torsion(two_term(2.0));
    CHECK(rep.log_torsion_det == doctest::Approx(std::log(2.0)));
    CHECK(rep.log_torsion_zeta == doctest::Approx(std::log(2.0)));
    CHECK(rep.agreement_residual < 1e-12);
}

TEST_CASE("torsion vanishes for zero differentials and the empty complex") {
    CHECK(log_torsion(zero_diff_complex({2, 3, 1})).log_torsion_det == doctest::Approx(0.0));
    CHECK(log_torsion(HilbertComplex()).log_torsion_det == doctest::Approx(0.0));
}

TEST_CASE("torsion of the interval complex is half log 2") {
    TorsionReport rep = log_torsion(interval_complex());
    CHECK(rep.log_torsion_det == doctest::Approx(0.5 * std::log(2.0)));
    CHECK(rep.log_torsion_zeta == doctest::Approx(0.5 * std::log(2.0)));
}

TEST_CASE("two-method torsion agreement on random complexes") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        HilbertComplex c = random_complex({3, 4, 4, 2}, 100 + seed,
                                          {.acyclic = false, .spectral_floor = 0.25, .random_grams = seed % 2 == 1});
        TorsionReport rep = log_torsion(c);
        CHECK(rep.agreement_residual < 1e-9 * (1.0 + std::abs(rep.log_torsion_det)));
    }
}

TEST_CASE("tensor product with an acyclic factor scales by chi") {
    HilbertComplex k = two_term(2.0);  // acyclic, chi = 0, log T = log 2
    HilbertComplex c = random_complex({2, 3}, 55);
    TorsionReport rc = log_torsion(c);
    long chi_c = rc.euler_characteristic;
    TorsionReport rp = log_torsion(tensor_product(k, c));
    CHECK(rp.euler_characteristic == 0);
    CHECK(rp.log_torsion_det ==
          doctest::Approx(static_cast<double>(chi_c) * std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("tensoring with the one-dimensional trivial complex changes nothing") {
    HilbertComplex unit = zero_diff_complex({1});
    HilbertComplex c = random_complex({2, 3, 1}, 66);
    TorsionReport before = log_torsion(c);
    TorsionReport after = log_torsion(tensor_product(c, unit));
    CHECK(after.log_torsion_det == doctest::Approx(before.log_torsion_det).epsilon(1e-10));
    CHECK(after.euler_characteristic == before.euler_characteristic);
}

TEST_CASE("tensor-product torsion formula on random pairs") {
    for (std::uint64_t seed : {70u, 71u, 72u}) {
        HilbertComplex a = random_complex({2, 3}, seed);
        HilbertComplex b = random_complex({3, 2, 2}, seed + 1000);
        TorsionReport ra = log_torsion(a), rb = log_torsion(b);
        TorsionReport rp = log_torsion(tensor_product(a, b));
        CHECK(rp.euler_characteristic == ra.euler_characteristic * rb.euler_characteristic);
        double expected = static_cast<double>(ra.euler_characteristic) * rb.log_torsion_det +
                          static_cast<double>(rb.euler_characteristic) * ra.log_torsion_det;
        CHECK(std::abs(rp.log_torsion_det - expected) < 1e-8);
    }
}

TEST_CASE("direct sum adds torsions") {
    HilbertComplex a = two_term(2.0), b = two_term(3.0);
    CHECK(log_torsion(direct_sum(a, b)).log_torsion_det ==
          doctest::Approx(std::log(2.0) + std::log(3.0)));

    HilbertComplex c = random_complex({3, 3}, 81);
    CHECK(log_torsion(direct_sum(c, HilbertComplex())).log_torsion_det ==
          doctest::Approx(log_torsion(c).log_torsion_det));

    HilbertComplex d = random_complex({2, 4, 1}, 82);
    HilbertComplex e = random_complex({3, 2, 2}, 83);
    double sum = log_torsion(d).log_torsion_det + log_torsion(e).log_torsion_det;
    CHECK(std::abs(log_torsion(direct_sum(d, e)).log_torsion_det - sum) < 1e-10);
}

TEST_CASE("random complex generation is reproducible and honors requests") {
    HilbertComplex a = random_complex({2, 2}, 7);
    HilbertComplex b = random_complex({2, 2}, 7);
    for (Eigen::Index j = 0; j + 1 < a.degrees(); ++j) CHECK((a.diff(j) - b.diff(j)).norm() == 0.0);

    HilbertComplex ac = random_complex({1, 2, 1}, 8, {.acyclic = true});
    for (Eigen::Index bt : ac.betti()) CHECK(bt == 0);

    HilbertComplex degen = random_complex({3, 0, 3}, 9);
    CHECK(log_torsion(degen).log_torsion_det == doctest::Approx(0.0));

    CHECK_THROWS_AS(random_complex({2, 1}, 10, {.acyclic = true}), ValidationError);
}

TEST_CASE("spectral floor bounds the nonzero Laplacian spectrum") {
    HilbertComplex c = random_complex({3, 4, 2}, 14, {.acyclic = false, .spectral_floor = 0.5});
    LaplaceData lap = laplacians(c);
    for (Eigen::Index j = 0; j < c.degrees(); ++j)
        for (Eigen::Index i = 0; i < lap.spectra[j].size(); ++i) {
            double lam = lap.spectra[j](i);
            if (lam > 1e-8) CHECK(lam >= 0.5 - 1e-9);
        }
}

TEST_CASE("alternating heat sum telescopes for zero-dimensional middle degrees") {
    HilbertComplex c = random_complex({3, 0, 3}, 15);
    HeatTrace ht = heat_invariants(c, 0.7);
    CHECK(std::abs(ht.alternating_sum - static_cast<double>(ht.euler_characteristic)) < 1e-10);
}
