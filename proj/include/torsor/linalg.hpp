#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>

#include "torsor/errors.hpp"

namespace torsor {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Orthogonal splitting of a linear map between two inner-product spaces.
/// Bases are orthonormal in the respective Gram inner products; singular
/// values are nonincreasing.
struct RankSplit {
    Eigen::Index rank = 0;
    Matrix kernel_basis;    // source-side, spans ker A
    Matrix cokernel_basis;  // target-side, spans (im A)^perp
    Matrix range_basis;     // target-side, spans im A
    RealVector singular_values;
};

struct EigResult {
    RealVector values;  // nondecreasing
    Matrix vectors;     // Gram-orthonormal columns
};

/// Default numerical-rank cutoff relative to the largest singular value.
double default_rank_tol(Eigen::Index rows, Eigen::Index cols);

/// Cholesky-based orthonormalization factor S with <x,y>_G = <Sx,Sy>_2.
/// Throws ValidationError if G is not Hermitian positive definite.
Matrix gram_factor(const Matrix& gram);

/// Eigendecomposition of a map that is self-adjoint w.r.t. the Gram form
/// (identity if omitted). Throws on non-square or asymmetric input.
EigResult hermitian_eig(const Matrix& a, const std::optional<Matrix>& gram = std::nullopt,
                        double symmetry_tol = 1e-10);

/// Numerical rank and orthonormal kernel/range/cokernel bases of A in the
/// geometry given by the Gram matrices. tol < 0 selects the default cutoff.
RankSplit rank_split(const Matrix& a, const std::optional<Matrix>& source_gram = std::nullopt,
                     const std::optional<Matrix>& target_gram = std::nullopt, double tol = -1.0);

/// Det(T) = det(T^* T)^{1/2} with the adjoint taken in the Gram inner
/// products; equals the product of all singular values, hence 0 when T^*T
/// is singular.
double det_map(const Matrix& t, const std::optional<Matrix>& source_gram = std::nullopt,
               const std::optional<Matrix>& target_gram = std::nullopt);

/// Sum of log(sigma) over singular values above the cutoff: the log of
/// Det(T restricted to ker T^perp -> im T). Returns 0 for the zero map.
double log_det_restricted(const Matrix& t, const std::optional<Matrix>& source_gram = std::nullopt,
                          const std::optional<Matrix>& target_gram = std::nullopt, double tol = -1.0);

/// Moore-Penrose pseudo-inverse in the Gram geometry.
Matrix pseudo_inverse(const Matrix& a, const std::optional<Matrix>& source_gram = std::nullopt,
                      const std::optional<Matrix>& target_gram = std::nullopt, double tol = -1.0);

/// Singular values (nonincreasing) of A viewed between Gram geometries.
RealVector singular_values(const Matrix& a, const std::optional<Matrix>& source_gram = std::nullopt,
                           const std::optional<Matrix>& target_gram = std::nullopt);

}  // namespace torsor
