#include "torsor/linalg.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace torsor {

namespace {

bool all_finite(const Matrix& m) {
    return m.array().isFinite().all();
}

void check_finite(const Matrix& m, const char* what) {
    if (!all_finite(m)) throw ValidationError(std::string(what) + ": non-finite entries");
}

// A in Gram geometry == S_tgt * A * S_src^{-1} in plain coordinates.
Matrix to_plain(const Matrix& a, const std::optional<Matrix>& gsrc, const std::optional<Matrix>& gtgt) {
    Matrix out = a;
    if (gtgt) out = gram_factor(*gtgt) * out;
    if (gsrc) {
        Matrix s = gram_factor(*gsrc);
        out = s.transpose().triangularView<Eigen::Lower>().solve(out.transpose()).transpose();
    }
    return out;
}

}  // namespace

double default_rank_tol(Eigen::Index rows, Eigen::Index cols) {
    return static_cast<double>(std::max<Eigen::Index>({rows, cols, 1})) *
           std::numeric_limits<double>::epsilon();
}

Matrix gram_factor(const Matrix& gram) {
    if (gram.rows() != gram.cols()) throw ValidationError("Gram matrix must be square");
    check_finite(gram, "Gram matrix");
    if (gram.rows() == 0) return gram;
    double scale = gram.cwiseAbs().maxCoeff();
    if ((gram - gram.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1.0))
        throw ValidationError("Gram matrix is not Hermitian");
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success)
        throw ValidationError("Gram matrix is not positive definite");
    return llt.matrixL().adjoint();  // S = L^H, <x,y>_G = <Sx,Sy>
}

EigResult hermitian_eig(const Matrix& a, const std::optional<Matrix>& gram, double symmetry_tol) {
    if (a.rows() != a.cols()) throw ValidationError("hermitian_eig: matrix is not square");
    check_finite(a, "hermitian_eig");
    if (a.rows() == 0) return {RealVector(0), Matrix(0, 0)};

    Matrix s, a_plain;
    if (gram) {
        s = gram_factor(*gram);
        // S A S^{-1}: self-adjointness w.r.t. G becomes plain Hermitian.
        a_plain = s.transpose()
                      .triangularView<Eigen::Lower>()
                      .solve((s * a).transpose())
                      .transpose();
    } else {
        a_plain = a;
    }
    double scale = std::max(a_plain.cwiseAbs().maxCoeff(), 1e-300);
    if ((a_plain - a_plain.adjoint()).cwiseAbs().maxCoeff() > symmetry_tol * scale)
        throw ValidationError("hermitian_eig: matrix is not Hermitian within tolerance");

    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a_plain + a_plain.adjoint()));
    if (es.info() != Eigen::Success) throw NumericError("hermitian_eig: eigensolver failed");
    Matrix vecs = es.eigenvectors();
    if (gram) {
        Matrix s_inv_vecs = gram_factor(*gram).triangularView<Eigen::Upper>().solve(vecs);
        return {es.eigenvalues(), s_inv_vecs};  // G-orthonormal
    }
    return {es.eigenvalues(), vecs};
}

RankSplit rank_split(const Matrix& a, const std::optional<Matrix>& source_gram,
                     const std::optional<Matrix>& target_gram, double tol) {
    check_finite(a, "rank_split");
    const Eigen::Index m = a.rows(), n = a.cols();
    RankSplit out;
    if (m == 0 || n == 0) {
        out.rank = 0;
        out.singular_values = RealVector(0);
        out.kernel_basis = Matrix::Identity(n, n);
        out.cokernel_basis = Matrix::Identity(m, m);
        out.range_basis = Matrix(m, 0);
        if (source_gram && n > 0)
            out.kernel_basis = gram_factor(*source_gram).triangularView<Eigen::Upper>().solve(out.kernel_basis);
        if (target_gram && m > 0)
            out.cokernel_basis = gram_factor(*target_gram).triangularView<Eigen::Upper>().solve(out.cokernel_basis);
        return out;
    }

    Matrix a_plain = to_plain(a, source_gram, target_gram);
    Eigen::JacobiSVD<Matrix> svd(a_plain, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RealVector sv = svd.singularValues();
    double smax = sv.size() ? sv(0) : 0.0;
    double cutoff = (tol < 0 ? default_rank_tol(m, n) : tol) * smax;
    Eigen::Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) ++r;

    out.rank = r;
    out.singular_values = sv;
    out.range_basis = svd.matrixU().leftCols(r);
    out.cokernel_basis = svd.matrixU().rightCols(m - r);
    out.kernel_basis = svd.matrixV().rightCols(n - r);
    if (source_gram)
        out.kernel_basis = gram_factor(*source_gram).triangularView<Eigen::Upper>().solve(out.kernel_basis);
    if (target_gram) {
        Matrix s = gram_factor(*target_gram);
        out.range_basis = s.triangularView<Eigen::Upper>().solve(out.range_basis);
        out.cokernel_basis = s.triangularView<Eigen::Upper>().solve(out.cokernel_basis);
    }
    return out;
}

RealVector singular_values(const Matrix& a, const std::optional<Matrix>& source_gram,
                           const std::optional<Matrix>& target_gram) {
    if (a.rows() == 0 || a.cols() == 0) return RealVector(0);
    check_finite(a, "singular_values");
    Matrix a_plain = to_plain(a, source_gram, target_gram);
    Eigen::JacobiSVD<Matrix> svd(a_plain);
    return svd.singularValues();
}

double det_map(const Matrix& t, const std::optional<Matrix>& source_gram,
               const std::optional<Matrix>& target_gram) {
    if (t.cols() == 0) return 1.0;  // empty product
    if (t.rows() == 0) return 0.0;  // T^*T is the zero map on a nonzero space
    RealVector sv = singular_values(t, source_gram, target_gram);
    double prod = 1.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) prod *= sv(i);
    if (t.cols() > t.rows()) prod = 0.0;  // fewer singular values than det(T^*T) factors
    return prod;
}

double log_det_restricted(const Matrix& t, const std::optional<Matrix>& source_gram,
                          const std::optional<Matrix>& target_gram, double tol) {
    RealVector sv = singular_values(t, source_gram, target_gram);
    double smax = sv.size() ? sv(0) : 0.0;
    double cutoff = (tol < 0 ? default_rank_tol(t.rows(), t.cols()) : tol) * smax;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < sv.size() && sv(i) > cutoff; ++i) acc += std::log(sv(i));
    return acc;
}

Matrix pseudo_inverse(const Matrix& a, const std::optional<Matrix>& source_gram,
                      const std::optional<Matrix>& target_gram, double tol) {
    if (a.rows() == 0 || a.cols() == 0) return Matrix::Zero(a.cols(), a.rows());
    check_finite(a, "pseudo_inverse");
    Matrix a_plain = to_plain(a, source_gram, target_gram);
    Eigen::JacobiSVD<Matrix> svd(a_plain, Eigen::ComputeThinU | Eigen::ComputeThinV);
    RealVector sv = svd.singularValues();
    double smax = sv.size() ? sv(0) : 0.0;
    double cutoff = (tol < 0 ? default_rank_tol(a.rows(), a.cols()) : tol) * smax;
    RealVector inv = RealVector::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
    Matrix p_plain = svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
    // Undo the coordinate changes: A+ = S_src^{-1} (S_tgt A S_src^{-1})^+ S_tgt.
    Matrix out = p_plain;
    if (target_gram) out = out * gram_factor(*target_gram);
    if (source_gram) out = gram_factor(*source_gram).triangularView<Eigen::Upper>().solve(out);
    return out;
}

}  // namespace torsor
