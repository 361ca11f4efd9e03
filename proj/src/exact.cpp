#include "torsor/exact.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "torsor/random_gen.hpp"

namespace torsor {

namespace {

double log_det_full(const Matrix& m, double floor_ratio = 1e-13) {
    // log of the product of all singular values; throws when singular.
    if (m.rows() != m.cols()) throw ValidationError("log_det_full: matrix is not square");
    if (m.rows() == 0) return 0.0;
    RealVector sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) <= floor_ratio * sv(0)) throw ValidationError("singular map where an isomorphism is required");
        acc += std::log(sv(i));
    }
    return acc;
}

}  // namespace

double chain_map_residual(const ChainMap& f) {
    const auto& src = f.source;
    const auto& tgt = f.target;
    if (src.degrees() != tgt.degrees())
        throw ValidationError("chain map between complexes of different length");
    if (static_cast<Eigen::Index>(f.blocks.size()) != src.degrees())
        throw ValidationError("chain map needs one block per degree");
    double worst = 0.0;
    for (Eigen::Index j = 0; j < src.degrees(); ++j) {
        if (f.blocks[j].rows() != tgt.dim(j) || f.blocks[j].cols() != src.dim(j))
            throw ValidationError("chain map block size mismatch");
        if (j + 1 >= src.degrees()) continue;
        Matrix lhs = f.blocks[j + 1] * src.diff(j);
        Matrix rhs = tgt.diff(j) * f.blocks[j];
        double scale = std::max({lhs.norm(), rhs.norm(), 1e-300});
        worst = std::max(worst, (lhs - rhs).norm() / scale);
    }
    return worst;
}

void require_chain_map(const ChainMap& f, double tol) {
    double r = chain_map_residual(f);
    if (r > tol) {
        std::ostringstream os;
        os << "chain-map residual " << r << " exceeds tolerance " << tol;
        throw ValidationError(os.str());
    }
}

Matrix induced_cohomology_map(const ChainMap& f, Eigen::Index j,
                              const std::vector<Matrix>& source_harmonics,
                              const std::vector<Matrix>& target_harmonics) {
    const Matrix& hs = source_harmonics[j];
    const Matrix& ht = target_harmonics[j];
    // Coordinates of the harmonic projection: H^adj G x for G-orthonormal H.
    return ht.adjoint() * f.target.gram(j) * f.blocks[j] * hs;
}

Matrix induced_cohomology_map(const ChainMap& f, Eigen::Index j) {
    require_chain_map(f);
    return induced_cohomology_map(f, j, harmonic_bases(f.source), harmonic_bases(f.target));
}

void validate_ses(const ShortExactSequence& s, double tol) {
    s.A.require_valid();
    s.C.require_valid();
    s.B.require_valid();
    if (s.A.degrees() != s.C.degrees() || s.C.degrees() != s.B.degrees())
        throw ValidationError("short exact sequence requires complexes of equal length");
    ChainMap am{s.A, s.C, s.alpha};
    ChainMap bm{s.C, s.B, s.beta};
    require_chain_map(am, tol);
    require_chain_map(bm, tol);
    for (Eigen::Index j = 0; j < s.A.degrees(); ++j) {
        if (s.A.dim(j) + s.B.dim(j) != s.C.dim(j))
            throw ValidationError("exactness bookkeeping: dim A + dim B != dim C");
        RankSplit ra = rank_split(s.alpha[j], s.A.gram(j), s.C.gram(j));
        if (ra.rank != s.A.dim(j)) throw ValidationError("alpha is not injective");
        RankSplit rb = rank_split(s.beta[j], s.C.gram(j), s.B.gram(j));
        if (rb.rank != s.B.dim(j)) throw ValidationError("beta is not surjective");
        if (s.A.dim(j) > 0 && s.B.dim(j) > 0) {
            Matrix comp = s.beta[j] * s.alpha[j];
            double scale = std::max({s.beta[j].norm() * s.alpha[j].norm(), 1e-300});
            if (comp.norm() / scale > tol) throw ValidationError("beta alpha != 0: sequence not exact");
        }
    }
}

namespace {

struct SesWorkspace {
    std::vector<Matrix> ha, hc, hb;         // harmonic bases
    std::vector<Matrix> beta_pinv, alpha_pinv;
};

SesWorkspace make_workspace(const ShortExactSequence& s) {
    SesWorkspace w;
    w.ha = harmonic_bases(s.A);
    w.hc = harmonic_bases(s.C);
    w.hb = harmonic_bases(s.B);
    w.beta_pinv.resize(s.beta.size());
    w.alpha_pinv.resize(s.alpha.size());
    for (size_t j = 0; j < s.beta.size(); ++j) {
        w.beta_pinv[j] = pseudo_inverse(s.beta[j], s.C.gram(j), s.B.gram(j));
        w.alpha_pinv[j] = pseudo_inverse(s.alpha[j], s.A.gram(j), s.C.gram(j));
    }
    return w;
}

Matrix connecting_impl(const ShortExactSequence& s, const SesWorkspace& w, Eigen::Index k,
                       const Matrix* lift_noise, double tol) {
    const Matrix& hb = w.hb[k];
    const Matrix& ha_next = w.ha[k + 1];
    if (hb.cols() == 0 || ha_next.cols() == 0)
        return Matrix::Zero(ha_next.cols(), hb.cols());
    Matrix lift = w.beta_pinv[k] * hb;  // representatives in C^k
    if (lift_noise) lift += *lift_noise;
    Matrix dc = s.C.diff(k) * lift;     // closed, lands in ker beta = ran alpha
    Matrix pulled = w.alpha_pinv[k + 1] * dc;
    double scale = std::max(dc.norm(), 1e-300);
    double resid = (s.alpha[k + 1] * pulled - dc).norm() / scale;
    if (dc.norm() > tol * std::max(1.0, lift.norm()) && resid > tol) {
        std::ostringstream os;
        os << "connecting homomorphism: pullback residual " << resid
           << " in degree " << k << " (exactness violation)";
        throw NumericError(os.str());
    }
    return ha_next.adjoint() * s.A.gram(k + 1) * pulled;
}

}  // namespace

Matrix connecting_homomorphism(const ShortExactSequence& s, Eigen::Index k, double tol) {
    validate_ses(s);
    SesWorkspace w = make_workspace(s);
    return connecting_impl(s, w, k, nullptr, tol);
}

Matrix connecting_homomorphism_alt_lift(const ShortExactSequence& s, Eigen::Index k,
                                        std::uint64_t seed, double tol) {
    validate_ses(s);
    SesWorkspace w = make_workspace(s);
    // A random element of ker beta_k = ran alpha_k added per column.
    Rng rng(seed);
    Matrix noise = s.alpha[k] * random_matrix(rng, s.A.dim(k), w.hb[k].cols());
    return connecting_impl(s, w, k, &noise, tol);
}

HilbertComplex build_les(const ShortExactSequence& s) {
    validate_ses(s);
    SesWorkspace w = make_workspace(s);
    const Eigen::Index n = s.A.degrees();
    std::vector<Eigen::Index> dims;
    std::vector<Matrix> diffs;
    dims.reserve(3 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        dims.push_back(w.ha[j].cols());
        dims.push_back(w.hc[j].cols());
        dims.push_back(w.hb[j].cols());
    }
    ChainMap am{s.A, s.C, s.alpha};
    ChainMap bm{s.C, s.B, s.beta};
    for (Eigen::Index j = 0; j < n; ++j) {
        diffs.push_back(induced_cohomology_map(am, j, w.ha, w.hc));
        diffs.push_back(induced_cohomology_map(bm, j, w.hc, w.hb));
        if (j + 1 < n) diffs.push_back(connecting_impl(s, w, j, nullptr, 1e-8));
    }
    // Pseudo-inverse zigzags amplify round-off well above eps, so the
    // assembled sequence carries a coarser rank floor than a raw complex.
    HilbertComplex les(std::move(dims), std::move(diffs), {}, 1e-10);
    if (!les.diagnostics().valid)
        throw ValidationError("long exact sequence assembly: " + les.diagnostics().message);
    for (Eigen::Index b : les.betti())
        if (b != 0)
            throw ValidationError("long exact sequence is not acyclic (input sequence not exact?)");
    return les;
}

double length2_torsion(const Matrix& alpha_j, const Matrix& beta_j,
                       const std::optional<Matrix>& gram_a, const std::optional<Matrix>& gram_c,
                       const std::optional<Matrix>& gram_b) {
    if (alpha_j.cols() + beta_j.rows() != alpha_j.rows() || alpha_j.rows() != beta_j.cols())
        throw ValidationError("length2_torsion: 0 -> A -> C -> B -> 0 dimension bookkeeping failed");
    double acc = 0.0;
    // log Det(alpha^* alpha)^(1/2) = sum of log singular values of alpha.
    if (alpha_j.cols() > 0) {
        RealVector sa = singular_values(alpha_j, gram_a, gram_c);
        for (Eigen::Index i = 0; i < sa.size(); ++i) {
            if (sa(i) <= default_rank_tol(alpha_j.rows(), alpha_j.cols()) * sa(0))
                throw ValidationError("length2_torsion: alpha not injective");
            acc += std::log(sa(i));
        }
    }
    if (beta_j.rows() > 0) {
        RealVector sb = singular_values(beta_j, gram_c, gram_b);
        for (Eigen::Index i = 0; i < beta_j.rows(); ++i) {
            if (i >= sb.size() || sb(i) <= default_rank_tol(beta_j.rows(), beta_j.cols()) * sb(0))
                throw ValidationError("length2_torsion: beta not surjective");
            acc -= std::log(sb(i));
        }
    }
    return acc;
}

MilnorReport milnor(const ShortExactSequence& s) {
    validate_ses(s);
    MilnorReport rep;
    TorsionReport tc = log_torsion(s.C, TorsionMethod::det);
    TorsionReport ta = log_torsion(s.A, TorsionMethod::det);
    TorsionReport tb = log_torsion(s.B, TorsionMethod::det);
    HilbertComplex les = build_les(s);
    TorsionReport th = log_torsion(les, TorsionMethod::det);
    rep.log_tau_c = tc.log_torsion_det;
    rep.log_tau_a = ta.log_torsion_det;
    rep.log_tau_b = tb.log_torsion_det;
    rep.log_tau_les = th.log_torsion_det;
    double corr = 0.0;
    for (Eigen::Index j = 0; j < s.A.degrees(); ++j) {
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        corr += sign * length2_torsion(s.alpha[j], s.beta[j], s.A.gram(j), s.C.gram(j), s.B.gram(j));
    }
    rep.length2_correction = corr;
    rep.residual = std::abs(rep.log_tau_c - rep.log_tau_a - rep.log_tau_b - rep.log_tau_les + corr);
    rep.conditioning_warning =
        tc.conditioning_warning || ta.conditioning_warning || tb.conditioning_warning || th.conditioning_warning;
    return rep;
}

double milnor_residual(const ShortExactSequence& s) { return milnor(s).residual; }

TransferReport chain_iso_transfer(const ChainMap& f) {
    require_chain_map(f);
    TransferReport rep;
    rep.log_tau_source = log_torsion(f.source, TorsionMethod::det).log_torsion_det;
    rep.log_tau_target = log_torsion(f.target, TorsionMethod::det).log_torsion_det;
    auto hs = harmonic_bases(f.source);
    auto ht = harmonic_bases(f.target);
    for (Eigen::Index j = 0; j < f.source.degrees(); ++j) {
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        if (f.source.dim(j) != f.target.dim(j))
            throw ValidationError("chain isomorphism requires equal dimensions per degree");
        if (f.source.dim(j) > 0) {
            // Det of f_j between the Gram geometries.
            RealVector sv = singular_values(f.blocks[j], f.source.gram(j), f.target.gram(j));
            for (Eigen::Index i = 0; i < sv.size(); ++i) {
                if (sv(i) <= 1e-13 * sv(0)) throw ValidationError("singular f_j in chain_iso_transfer");
                rep.cochain_correction += sign * std::log(sv(i));
            }
        }
        if (hs[j].cols() != ht[j].cols())
            throw ValidationError("chain isomorphism with mismatched cohomology dimensions");
        if (hs[j].cols() > 0) {
            Matrix ind = induced_cohomology_map(f, j, hs, ht);
            rep.cohomology_correction += sign * log_det_full(ind);
        }
    }
    rep.residual = std::abs(rep.log_tau_source -
                            (rep.log_tau_target + rep.cochain_correction - rep.cohomology_correction));
    return rep;
}

}  // namespace torsor
