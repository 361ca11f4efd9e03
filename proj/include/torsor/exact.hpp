#pragma once

#include <vector>

#include "torsor/hilbert_complex.hpp"

namespace torsor {

/// Degreewise linear maps f_j: source^j -> target^j commuting with the
/// differentials.
struct ChainMap {
    HilbertComplex source;
    HilbertComplex target;
    std::vector<Matrix> blocks;  // f_j, sized target.dim(j) x source.dim(j)
};

/// Largest relative commuting defect max_j |f d - d f| / (|f| |d|).
double chain_map_residual(const ChainMap& f);
void require_chain_map(const ChainMap& f, double tol = 1e-10);

/// Matrix of H^j(f) in Gram-orthonormal harmonic bases: apply f to a harmonic
/// representative and project to the target's harmonic space.
Matrix induced_cohomology_map(const ChainMap& f, Eigen::Index j);
Matrix induced_cohomology_map(const ChainMap& f, Eigen::Index j,
                              const std::vector<Matrix>& source_harmonics,
                              const std::vector<Matrix>& target_harmonics);

struct ShortExactSequence {
    HilbertComplex A, C, B;
    std::vector<Matrix> alpha;  // A^j -> C^j, injective
    std::vector<Matrix> beta;   // C^j -> B^j, surjective
};

/// Degreewise injectivity/surjectivity, chain-map property, beta alpha = 0
/// and the rank bookkeeping dim A + dim B = dim C.
void validate_ses(const ShortExactSequence& s, double tol = 1e-8);

/// Connecting homomorphism delta_k: H^k(B) -> H^{k+1}(A) via the
/// pseudo-inverse zigzag (lift through beta, apply d_C, pull back through
/// alpha, project to harmonics). Throws NumericError when the pullback
/// residual exceeds tol (exactness violation mid-zigzag).
Matrix connecting_homomorphism(const ShortExactSequence& s, Eigen::Index k, double tol = 1e-8);

/// Same zigzag with a seeded random element of ker beta added to the lift;
/// the result must agree with connecting_homomorphism (lift independence).
Matrix connecting_homomorphism_alt_lift(const ShortExactSequence& s, Eigen::Index k,
                                        std::uint64_t seed, double tol = 1e-8);

/// The long exact cohomology sequence assembled as one acyclic HilbertComplex
/// on the harmonic inner products: spaces H^0(A), H^0(C), H^0(B), H^1(A), ...
/// and differentials alpha_*, beta_*, delta. Throws ValidationError when the
/// result is not acyclic within its rank tolerance.
HilbertComplex build_les(const ShortExactSequence& s);

/// Torsion of the acyclic two-term complex 0 -> A^j -> C^j -> B^j -> 0:
/// (1/2) log Det(alpha^* alpha) - (1/2) log Det(beta beta^*). Grams default
/// to identity.
double length2_torsion(const Matrix& alpha_j, const Matrix& beta_j,
                       const std::optional<Matrix>& gram_a = std::nullopt,
                       const std::optional<Matrix>& gram_c = std::nullopt,
                       const std::optional<Matrix>& gram_b = std::nullopt);

struct MilnorReport {
    double residual = 0.0;
    double log_tau_c = 0.0, log_tau_a = 0.0, log_tau_b = 0.0, log_tau_les = 0.0;
    double length2_correction = 0.0;  // sum_j (-1)^j length2_torsion(alpha_j, beta_j)
    bool conditioning_warning = false;
};

/// Absolute residual of log tau(C) = log tau(A) + log tau(B) + log tau(H)
/// - sum_j (-1)^j log tau(0 -> A^j -> C^j -> B^j -> 0).
MilnorReport milnor(const ShortExactSequence& s);
double milnor_residual(const ShortExactSequence& s);

struct TransferReport {
    double residual = 0.0;
    double log_tau_source = 0.0, log_tau_target = 0.0;
    double cochain_correction = 0.0;     // sum (-1)^j log Det(f_j)
    double cohomology_correction = 0.0;  // sum (-1)^j log Det(H^j(f))
};

/// Residual of the chain-isomorphism transfer identity
/// log tau(src) = log tau(tgt) + sum (-1)^j log Det(f_j) - sum (-1)^j log Det(H^j(f)).
TransferReport chain_iso_transfer(const ChainMap& f);

}  // namespace torsor
