#pragma once

#include <string>
#include <vector>

#include "torsor/linalg.hpp"

namespace torsor {

struct ComplexDiagnostics {
    bool valid = true;
    double max_d2_residual = 0.0;  // relative to |d_{j+1}| |d_j|
    std::string message;
};

/// A finite-dimensional Hilbert complex: graded inner-product spaces C^0..C^N
/// with differentials d_j: C^j -> C^{j+1} composing to zero. Immutable after
/// construction; all derived data (Gram factors, normalized differentials,
/// singular values, ranks) is computed once and shared freely across threads.
class HilbertComplex {
public:
    HilbertComplex() = default;  // the empty complex

    /// grams empty means identity inner products throughout.
    /// rank_tol_rel < 0 selects max(dims)*eps; singular values below
    /// rank_tol_rel * sigma_ref count as zero, where sigma_ref is the largest
    /// singular value over all differentials of the complex.
    HilbertComplex(std::vector<Eigen::Index> dims, std::vector<Matrix> diffs,
                   std::vector<Matrix> grams = {}, double rank_tol_rel = -1.0);

    Eigen::Index degrees() const { return static_cast<Eigen::Index>(dims_.size()); }
    Eigen::Index top_degree() const { return degrees() - 1; }
    Eigen::Index dim(Eigen::Index j) const { return dims_[j]; }
    const std::vector<Eigen::Index>& dims() const { return dims_; }
    const Matrix& diff(Eigen::Index j) const { return diffs_[j]; }
    const std::vector<Matrix>& diffs() const { return diffs_; }
    const Matrix& gram(Eigen::Index j) const { return grams_[j]; }
    bool identity_grams() const { return identity_grams_; }

    /// Differential in orthonormal coordinates: S_{j+1} d_j S_j^{-1}.
    const Matrix& norm_diff(Eigen::Index j) const { return norm_diffs_[j]; }
    /// Orthonormalizing factor S_j and its inverse (x |-> S_j x is an isometry
    /// (C^j, G_j) -> (C^j, id)).
    const Matrix& gram_s(Eigen::Index j) const { return s_[j]; }
    const Matrix& gram_s_inv(Eigen::Index j) const { return s_inv_[j]; }

    /// Numerical rank of d_j and its singular values (nonincreasing).
    Eigen::Index rank(Eigen::Index j) const { return ranks_[j]; }
    const RealVector& sv(Eigen::Index j) const { return sv_[j]; }

    double sigma_ref() const { return sigma_ref_; }
    double rank_tol_rel() const { return rank_tol_rel_; }
    /// Absolute singular-value cutoff shared by every rank decision made for
    /// this complex (and the matching eigenvalue cutoff for its Laplacians).
    double sigma_cutoff() const;
    double lambda_cutoff() const;

    std::vector<Eigen::Index> betti() const;
    long euler_characteristic() const;

    const ComplexDiagnostics& diagnostics() const { return diag_; }
    void require_valid() const;

private:
    std::vector<Eigen::Index> dims_;
    std::vector<Matrix> diffs_;
    std::vector<Matrix> grams_;
    bool identity_grams_ = true;
    std::vector<Matrix> s_, s_inv_, norm_diffs_;
    std::vector<RealVector> sv_;
    std::vector<Eigen::Index> ranks_;
    double sigma_ref_ = 0.0;
    double rank_tol_rel_ = 0.0;
    ComplexDiagnostics diag_;
};

ComplexDiagnostics validate(const HilbertComplex& c);

struct LaplaceData {
    std::vector<Matrix> laplacians;        // Delta_j in the original coordinates
    std::vector<RealVector> spectra;       // full spectrum per degree, nondecreasing
    std::vector<RealVector> closed;        // nonzero spectrum of Delta^cl_j
    std::vector<RealVector> coclosed;      // nonzero spectrum of Delta^ccl_j
};
LaplaceData laplacians(const HilbertComplex& c);

struct HodgeData {
    std::vector<Matrix> harmonic_basis;    // Gram-orthonormal columns per degree
    std::vector<Matrix> exact_basis;
    std::vector<Matrix> coexact_basis;
    std::vector<RealVector> laplacian_spectrum;
    std::vector<Eigen::Index> betti;
};
HodgeData hodge(const HilbertComplex& c);

/// Gram-orthonormal harmonic bases only (the hodge subset every cohomology
/// computation needs).
std::vector<Matrix> harmonic_bases(const HilbertComplex& c);

struct HeatTrace {
    std::vector<double> traces;            // Tr exp(-t Delta_j)
    double alternating_sum = 0.0;
    long euler_characteristic = 0;
};
HeatTrace heat_invariants(const HilbertComplex& c, double t);

enum class TorsionMethod { det, zeta, both };

struct TorsionReport {
    double log_torsion_det = 0.0;
    double log_torsion_zeta = 0.0;
    std::vector<double> per_degree_log_dets;  // log Det(d_p : ker^perp -> im)
    long euler_characteristic = 0;
    std::vector<Eigen::Index> betti;
    double agreement_residual = 0.0;
    bool conditioning_warning = false;     // smallest kept sigma < 1e-6 * sigma_ref
    double smallest_kept_ratio = 1.0;
};
TorsionReport log_torsion(const HilbertComplex& c, TorsionMethod method = TorsionMethod::both);

HilbertComplex tensor_product(const HilbertComplex& a, const HilbertComplex& b);
HilbertComplex direct_sum(const HilbertComplex& a, const HilbertComplex& b);

}  // namespace torsor
