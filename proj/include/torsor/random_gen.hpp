#pragma once

#include <cstdint>
#include <vector>

#include "torsor/exact.hpp"
#include "torsor/gluing.hpp"
#include "torsor/hilbert_complex.hpp"

namespace torsor {

/// Deterministic 64-bit generator (splitmix64 stream + Box-Muller normals).
/// std::normal_distribution is implementation-defined, which would break the
/// byte-identical-output contract, so the mapping to doubles is spelled out
/// here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64();
    double uniform();            // [0, 1)
    double uniform(double a, double b);
    double normal();
    Complex complex_normal();    // standard complex Gaussian
    Eigen::Index index(Eigen::Index lo, Eigen::Index hi);  // inclusive range

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols);
Matrix random_unitary(Rng& rng, Eigen::Index n);
/// Invertible matrix with singular values in [smin, smax].
Matrix random_invertible(Rng& rng, Eigen::Index n, double smin = 0.5, double smax = 1.5);
/// Hermitian positive definite, moderately conditioned.
Matrix random_spd(Rng& rng, Eigen::Index n);

struct RandomComplexOptions {
    bool acyclic = false;
    double spectral_floor = 0.25;  // lower bound for nonzero Laplacian eigenvalues
    bool random_grams = false;
};

/// Seed-reproducible complex with d^2 = 0 by construction: differentials are
/// built through orthonormal frames split per degree into harmonic / exact /
/// coexact columns. Throws ValidationError for infeasible acyclic rank
/// requests.
HilbertComplex random_complex(const std::vector<Eigen::Index>& dims, std::uint64_t seed,
                              const RandomComplexOptions& opts = {});

struct RandomSesOptions {
    bool couple = true;        // solve for a nonzero coupling block
    bool gram_twist = false;   // non-identity Gram on the middle complex
    double alpha_scale = 1.0;  // alpha = scale * inclusion
    RandomComplexOptions complex_opts = {};
};

/// 0 -> A -> A (+) B -> B -> 0 with middle differential [[d_A, m], [0, d_B]]
/// where the coupling solves d_A m + m d_B = 0.
ShortExactSequence random_ses(const std::vector<Eigen::Index>& dims_a,
                              const std::vector<Eigen::Index>& dims_b, std::uint64_t seed,
                              const RandomSesOptions& opts = {});

struct RandomGluingOptions {
    bool isometric = true;     // keep r_j partial isometries
    RandomComplexOptions complex_opts = {};
};

/// C_j = K_j (+) B with differential [[d_K, m_j], [0, d_B]] and r_j the
/// coordinate projection onto B; with identity Grams the r_j are partial
/// isometries. isometric = false rescales r_1.
GluingData random_gluing(const std::vector<Eigen::Index>& dims_b,
                         const std::vector<Eigen::Index>& dims_k1,
                         const std::vector<Eigen::Index>& dims_k2, std::uint64_t seed,
                         const RandomGluingOptions& opts = {});

/// Random chain isomorphism f: C -> C' where C' is the conjugated copy of C
/// (d' = S_{j+1} d S_j^{-1} with the same Grams transported).
ChainMap random_chain_iso(const HilbertComplex& c, std::uint64_t seed);

/// Coupling blocks m_j: B^j -> A^{j+1} solving d_A m + m d_B = 0, drawn from
/// the solution space with seeded coefficients. Empty blocks when the only
/// solution is zero.
std::vector<Matrix> random_coupling(const HilbertComplex& a, const HilbertComplex& b, Rng& rng,
                                    double scale = 0.75);

}  // namespace torsor
