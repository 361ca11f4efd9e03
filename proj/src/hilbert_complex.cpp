#include "torsor/hilbert_complex.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

namespace torsor {

namespace {

RealVector svd_values(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return RealVector(0);
    return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

}  // namespace

HilbertComplex::HilbertComplex(std::vector<Eigen::Index> dims, std::vector<Matrix> diffs,
                               std::vector<Matrix> grams, double rank_tol_rel)
    : dims_(std::move(dims)), diffs_(std::move(diffs)), grams_(std::move(grams)) {
    const auto n_deg = static_cast<Eigen::Index>(dims_.size());
    for (Eigen::Index j = 0; j < n_deg; ++j)
        if (dims_[j] < 0) throw ValidationError("negative dimension");
    if (static_cast<Eigen::Index>(diffs_.size()) != std::max<Eigen::Index>(n_deg - 1, 0))
        throw ValidationError("expected one differential per consecutive pair of degrees");
    for (Eigen::Index j = 0; j + 1 < n_deg; ++j) {
        const Matrix& d = diffs_[j];
        if (d.rows() != dims_[j + 1] || d.cols() != dims_[j]) {
            std::ostringstream os;
            os << "dimension mismatch at differential " << j << ": expected " << dims_[j + 1]
               << "x" << dims_[j] << ", got " << d.rows() << "x" << d.cols();
            throw ValidationError(os.str());
        }
        if (!d.array().isFinite().all()) throw ValidationError("non-finite differential entries");
    }

    identity_grams_ = grams_.empty();
    if (!identity_grams_ && static_cast<Eigen::Index>(grams_.size()) != n_deg)
        throw ValidationError("expected one Gram matrix per degree");
    if (identity_grams_) {
        grams_.reserve(dims_.size());
        for (Eigen::Index j = 0; j < n_deg; ++j) grams_.push_back(Matrix::Identity(dims_[j], dims_[j]));
    }

    s_.resize(dims_.size());
    s_inv_.resize(dims_.size());
    for (Eigen::Index j = 0; j < n_deg; ++j) {
        if (grams_[j].rows() != dims_[j] || grams_[j].cols() != dims_[j])
            throw ValidationError("Gram matrix size does not match degree dimension");
        if (identity_grams_) {
            s_[j] = grams_[j];
            s_inv_[j] = grams_[j];
        } else {
            s_[j] = gram_factor(grams_[j]);  // throws on indefinite Gram
            s_inv_[j] = s_[j].triangularView<Eigen::Upper>().solve(Matrix::Identity(dims_[j], dims_[j]));
        }
    }

    norm_diffs_.resize(diffs_.size());
    for (size_t j = 0; j < diffs_.size(); ++j)
        norm_diffs_[j] = identity_grams_ ? diffs_[j] : Matrix(s_[j + 1] * diffs_[j] * s_inv_[j]);

    sv_.resize(diffs_.size());
    ranks_.assign(diffs_.size(), 0);
    sigma_ref_ = 0.0;
    for (size_t j = 0; j < diffs_.size(); ++j) {
        sv_[j] = svd_values(norm_diffs_[j]);
        if (sv_[j].size()) sigma_ref_ = std::max(sigma_ref_, sv_[j](0));
    }
    Eigen::Index max_dim = 1;
    for (Eigen::Index d : dims_) max_dim = std::max(max_dim, d);
    rank_tol_rel_ = rank_tol_rel < 0 ? static_cast<double>(max_dim) * std::numeric_limits<double>::epsilon()
                                     : rank_tol_rel;
    const double cut = sigma_cutoff();
    for (size_t j = 0; j < diffs_.size(); ++j) {
        Eigen::Index r = 0;
        while (r < sv_[j].size() && sv_[j](r) > cut) ++r;
        ranks_[j] = r;
    }

    // d^2 = 0 check, relative to the product of the factors' norms.
    diag_.valid = true;
    for (size_t j = 0; j + 1 < norm_diffs_.size(); ++j) {
        const Matrix& a = norm_diffs_[j + 1];
        const Matrix& b = norm_diffs_[j];
        if (a.rows() == 0 || a.cols() == 0 || b.cols() == 0) continue;
        double scale = a.norm() * b.norm();
        double resid = (a * b).norm();
        double rel = scale > 0 ? resid / scale : resid;
        if (rel > diag_.max_d2_residual) diag_.max_d2_residual = rel;
        if (rel > 1e-12 && diag_.valid) {
            diag_.valid = false;
            std::ostringstream os;
            os << "d_" << j + 1 << " * d_" << j << " != 0 (relative residual " << rel << ")";
            diag_.message = os.str();
        }
    }
}

double HilbertComplex::sigma_cutoff() const { return rank_tol_rel_ * sigma_ref_; }

double HilbertComplex::lambda_cutoff() const {
    Eigen::Index max_dim = 1;
    for (Eigen::Index d : dims_) max_dim = std::max(max_dim, d);
    double eig_noise = static_cast<double>(max_dim) * std::numeric_limits<double>::epsilon();
    return std::max(sigma_cutoff() * sigma_cutoff(), eig_noise * sigma_ref_ * sigma_ref_);
}

std::vector<Eigen::Index> HilbertComplex::betti() const {
    std::vector<Eigen::Index> b(dims_.size());
    for (size_t j = 0; j < dims_.size(); ++j) {
        Eigen::Index out_rank = j < ranks_.size() ? ranks_[j] : 0;
        Eigen::Index in_rank = j > 0 ? ranks_[j - 1] : 0;
        b[j] = dims_[j] - out_rank - in_rank;
    }
    return b;
}

long HilbertComplex::euler_characteristic() const {
    long chi = 0;
    for (size_t j = 0; j < dims_.size(); ++j) chi += (j % 2 == 0 ? 1 : -1) * static_cast<long>(dims_[j]);
    // Alternating sum of dims equals alternating sum of betti numbers.
    return chi;
}

void HilbertComplex::require_valid() const {
    if (!diag_.valid) throw ValidationError("invalid Hilbert complex: " + diag_.message);
}

ComplexDiagnostics validate(const HilbertComplex& c) { return c.diagnostics(); }

LaplaceData laplacians(const HilbertComplex& c) {
    c.require_valid();
    const Eigen::Index n = c.degrees();
    LaplaceData out;
    out.laplacians.resize(n);
    out.spectra.resize(n);
    out.closed.resize(n);
    out.coclosed.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        Matrix lap_norm = Matrix::Zero(c.dim(j), c.dim(j));
        if (j < n - 1) lap_norm += c.norm_diff(j).adjoint() * c.norm_diff(j);
        if (j > 0) lap_norm += c.norm_diff(j - 1) * c.norm_diff(j - 1).adjoint();
        out.laplacians[j] = c.identity_grams() ? lap_norm : Matrix(c.gram_s_inv(j) * lap_norm * c.gram_s(j));
        if (c.dim(j) > 0) {
            Eigen::SelfAdjointEigenSolver<Matrix> es(lap_norm);
            out.spectra[j] = es.eigenvalues();
        } else {
            out.spectra[j] = RealVector(0);
        }
        // Closed spectrum of degree j: nonzero sigma^2 of d_{j-1}; coclosed: of d_j.
        auto squares = [&](Eigen::Index dj) {
            const RealVector& sv = c.sv(dj);
            Eigen::Index r = c.rank(dj);
            RealVector v(r);
            for (Eigen::Index i = 0; i < r; ++i) v(i) = sv(i) * sv(i);
            return v;
        };
        out.closed[j] = j > 0 ? squares(j - 1) : RealVector(0);
        out.coclosed[j] = j < n - 1 ? squares(j) : RealVector(0);
    }
    return out;
}

HodgeData hodge(const HilbertComplex& c) {
    c.require_valid();
    const Eigen::Index n = c.degrees();
    HodgeData out;
    out.harmonic_basis.resize(n);
    out.exact_basis.resize(n);
    out.coexact_basis.resize(n);
    out.laplacian_spectrum.resize(n);
    out.betti = c.betti();
    const double lam_cut = c.lambda_cutoff();
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index nj = c.dim(j);
        if (nj == 0) {
            out.harmonic_basis[j] = Matrix(0, 0);
            out.exact_basis[j] = Matrix(0, 0);
            out.coexact_basis[j] = Matrix(0, 0);
            out.laplacian_spectrum[j] = RealVector(0);
            continue;
        }
        Matrix lap_norm = Matrix::Zero(nj, nj);
        if (j < n - 1) lap_norm += c.norm_diff(j).adjoint() * c.norm_diff(j);
        if (j > 0) lap_norm += c.norm_diff(j - 1) * c.norm_diff(j - 1).adjoint();
        Eigen::SelfAdjointEigenSolver<Matrix> es(lap_norm);
        out.laplacian_spectrum[j] = es.eigenvalues();
        Eigen::Index h = 0;
        while (h < nj && es.eigenvalues()(h) <= lam_cut) ++h;
        if (h != out.betti[j]) {
            std::ostringstream os;
            os << "ill-conditioned spectrum in degree " << j << ": harmonic dimension " << h
               << " from the eigensolver vs betti " << out.betti[j] << " from rank bookkeeping";
            throw NumericError(os.str());
        }
        Matrix harm = es.eigenvectors().leftCols(h);
        Matrix exact(nj, 0), coexact(nj, 0);
        if (j > 0 && c.rank(j - 1) > 0) {
            Eigen::JacobiSVD<Matrix> svd(c.norm_diff(j - 1), Eigen::ComputeThinU);
            exact = svd.matrixU().leftCols(c.rank(j - 1));
        }
        if (j < n - 1 && c.rank(j) > 0) {
            Eigen::JacobiSVD<Matrix> svd(c.norm_diff(j), Eigen::ComputeThinV);
            coexact = svd.matrixV().leftCols(c.rank(j));
        }
        if (!c.identity_grams()) {
            harm = c.gram_s_inv(j) * harm;
            exact = c.gram_s_inv(j) * exact;
            coexact = c.gram_s_inv(j) * coexact;
        }
        out.harmonic_basis[j] = harm;
        out.exact_basis[j] = exact;
        out.coexact_basis[j] = coexact;
    }
    return out;
}

std::vector<Matrix> harmonic_bases(const HilbertComplex& c) {
    return hodge(c).harmonic_basis;
}

HeatTrace heat_invariants(const HilbertComplex& c, double t) {
    if (!(t > 0)) throw ValidationError("heat_invariants: t must be positive");
    c.require_valid();
    LaplaceData lap = laplacians(c);
    HeatTrace out;
    out.traces.resize(c.degrees());
    double alt = 0.0;
    long chi = 0;
    auto betti = c.betti();
    for (Eigen::Index j = 0; j < c.degrees(); ++j) {
        double tr = 0.0;
        for (Eigen::Index i = 0; i < lap.spectra[j].size(); ++i)
            tr += std::exp(-t * std::max(lap.spectra[j](i), 0.0));
        out.traces[j] = tr;
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        alt += sign * tr;
        chi += static_cast<long>(sign) * static_cast<long>(betti[j]);
    }
    out.alternating_sum = alt;
    out.euler_characteristic = chi;
    return out;
}

TorsionReport log_torsion(const HilbertComplex& c, TorsionMethod method) {
    c.require_valid();
    TorsionReport rep;
    rep.betti = c.betti();
    rep.euler_characteristic = 0;
    for (size_t j = 0; j < rep.betti.size(); ++j)
        rep.euler_characteristic += (j % 2 == 0 ? 1 : -1) * static_cast<long>(rep.betti[j]);
    const Eigen::Index n = c.degrees();
    if (n == 0) return rep;  // torsion of the empty complex is 0

    double smallest_kept = 1.0;
    if (method != TorsionMethod::zeta) {
        rep.per_degree_log_dets.resize(std::max<Eigen::Index>(n - 1, 0));
        double acc = 0.0;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            double ld = 0.0;
            for (Eigen::Index i = 0; i < c.rank(p); ++i) {
                ld += std::log(c.sv(p)(i));
                if (c.sigma_ref() > 0) smallest_kept = std::min(smallest_kept, c.sv(p)(i) / c.sigma_ref());
            }
            rep.per_degree_log_dets[p] = ld;
            acc += (p % 2 == 0 ? 1.0 : -1.0) * ld;
        }
        rep.log_torsion_det = acc;
    }
    if (method != TorsionMethod::det) {
        // 1/2 sum_j (-1)^j j zeta'(Delta_j; 0), zeta'(0) = -sum_{lambda>0} log lambda.
        const double lam_cut = c.lambda_cutoff();
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (c.dim(j) == 0 || j == 0) continue;  // j = 0 has weight zero
            Matrix lap = Matrix::Zero(c.dim(j), c.dim(j));
            if (j < n - 1) lap += c.norm_diff(j).adjoint() * c.norm_diff(j);
            lap += c.norm_diff(j - 1) * c.norm_diff(j - 1).adjoint();
            Eigen::SelfAdjointEigenSolver<Matrix> es(lap);
            double zeta_prime = 0.0;
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
                if (es.eigenvalues()(i) > lam_cut) zeta_prime -= std::log(es.eigenvalues()(i));
            acc += 0.5 * (j % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(j) * zeta_prime;
        }
        rep.log_torsion_zeta = acc;
    }
    if (method == TorsionMethod::both)
        rep.agreement_residual = std::abs(rep.log_torsion_det - rep.log_torsion_zeta);
    rep.smallest_kept_ratio = smallest_kept;
    rep.conditioning_warning = smallest_kept < 1e-6;
    return rep;
}

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace

HilbertComplex tensor_product(const HilbertComplex& a, const HilbertComplex& b) {
    a.require_valid();
    b.require_valid();
    if (a.degrees() == 0 || b.degrees() == 0) return HilbertComplex();
    const Eigen::Index na = a.top_degree(), nb = b.top_degree();
    const Eigen::Index n = na + nb;  // product top degree

    // Degree-k space: direct sum over i+j=k of C'^i (x) C''^j, blocks ordered
    // by ascending i.
    auto blocks_of = [&](Eigen::Index k) {
        std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
        for (Eigen::Index i = std::max<Eigen::Index>(0, k - nb); i <= std::min(na, k); ++i)
            blocks.push_back({i, k - i});
        return blocks;
    };
    std::vector<Eigen::Index> dims(n + 1, 0);
    for (Eigen::Index k = 0; k <= n; ++k)
        for (auto [i, j] : blocks_of(k)) dims[k] += a.dim(i) * b.dim(j);

    std::vector<Matrix> diffs;
    for (Eigen::Index k = 0; k < n; ++k) {
        auto src = blocks_of(k);
        auto tgt = blocks_of(k + 1);
        Matrix d = Matrix::Zero(dims[k + 1], dims[k]);
        std::vector<Eigen::Index> tgt_off(tgt.size() + 1, 0);
        for (size_t t = 0; t < tgt.size(); ++t)
            tgt_off[t + 1] = tgt_off[t] + a.dim(tgt[t].first) * b.dim(tgt[t].second);
        Eigen::Index src_off = 0;
        for (auto [i, j] : src) {
            const Eigen::Index w = a.dim(i) * b.dim(j);
            // d' (x) I lands in block (i+1, j); (-1)^i I (x) d'' in block (i, j+1).
            for (size_t t = 0; t < tgt.size(); ++t) {
                if (tgt[t] == std::make_pair(i + 1, j) && i < na && w > 0)
                    d.block(tgt_off[t], src_off, a.dim(i + 1) * b.dim(j), w) =
                        kron(a.diff(i), Matrix::Identity(b.dim(j), b.dim(j)));
                if (tgt[t] == std::make_pair(i, j + 1) && j < nb && w > 0)
                    d.block(tgt_off[t], src_off, a.dim(i) * b.dim(j + 1), w) =
                        (i % 2 == 0 ? 1.0 : -1.0) * kron(Matrix::Identity(a.dim(i), a.dim(i)), b.diff(j));
            }
            src_off += w;
        }
        diffs.push_back(std::move(d));
    }

    std::vector<Matrix> grams;
    if (!a.identity_grams() || !b.identity_grams()) {
        for (Eigen::Index k = 0; k <= n; ++k) {
            Matrix g = Matrix::Zero(dims[k], dims[k]);
            Eigen::Index off = 0;
            for (auto [i, j] : blocks_of(k)) {
                const Eigen::Index w = a.dim(i) * b.dim(j);
                if (w > 0) g.block(off, off, w, w) = kron(a.gram(i), b.gram(j));
                off += w;
            }
            grams.push_back(std::move(g));
        }
    }
    return HilbertComplex(std::move(dims), std::move(diffs), std::move(grams));
}

HilbertComplex direct_sum(const HilbertComplex& a, const HilbertComplex& b) {
    a.require_valid();
    b.require_valid();
    const Eigen::Index n = std::max(a.degrees(), b.degrees());
    auto dim_a = [&](Eigen::Index j) { return j < a.degrees() ? a.dim(j) : 0; };
    auto dim_b = [&](Eigen::Index j) { return j < b.degrees() ? b.dim(j) : 0; };
    std::vector<Eigen::Index> dims(n);
    for (Eigen::Index j = 0; j < n; ++j) dims[j] = dim_a(j) + dim_b(j);
    std::vector<Matrix> diffs;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        Matrix d = Matrix::Zero(dims[j + 1], dims[j]);
        if (j + 1 < a.degrees() && a.diff(j).size())
            d.block(0, 0, dim_a(j + 1), dim_a(j)) = a.diff(j);
        if (j + 1 < b.degrees() && b.diff(j).size())
            d.block(dim_a(j + 1), dim_a(j), dim_b(j + 1), dim_b(j)) = b.diff(j);
        diffs.push_back(std::move(d));
    }
    std::vector<Matrix> grams;
    if (!a.identity_grams() || !b.identity_grams()) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Matrix g = Matrix::Identity(dims[j], dims[j]);
            if (j < a.degrees()) g.block(0, 0, dim_a(j), dim_a(j)) = a.gram(j);
            if (j < b.degrees()) g.block(dim_a(j), dim_a(j), dim_b(j), dim_b(j)) = b.gram(j);
            grams.push_back(std::move(g));
        }
    }
    return HilbertComplex(std::move(dims), std::move(diffs), std::move(grams));
}

}  // namespace torsor
