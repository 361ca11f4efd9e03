#include "torsor/gluing.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace torsor {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

HilbertComplex normalized_copy(const HilbertComplex& c) {
    if (c.identity_grams()) return c;
    std::vector<Matrix> diffs;
    for (Eigen::Index j = 0; j + 1 < c.degrees(); ++j) diffs.push_back(c.norm_diff(j));
    return HilbertComplex(c.dims(), std::move(diffs));
}

// Orthonormal kernel bases of the normalized restriction maps.
std::pair<HilbertComplex, std::vector<Matrix>> kernel_complex(const HilbertComplex& cn,
                                                              const std::vector<Matrix>& rn) {
    const Eigen::Index n = cn.degrees();
    std::vector<Matrix> bases(n);
    std::vector<Eigen::Index> dims(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        RankSplit rs = rank_split(rn[j]);
        bases[j] = rs.kernel_basis;
        dims[j] = bases[j].cols();
    }
    std::vector<Matrix> diffs;
    for (Eigen::Index j = 0; j + 1 < n; ++j)
        diffs.push_back(bases[j + 1].adjoint() * cn.norm_diff(j) * bases[j]);
    return {HilbertComplex(std::move(dims), std::move(diffs)), std::move(bases)};
}

double fd_central(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace

std::string sweep_to_csv(const SweepResult& s) {
    std::ostringstream os;
    os << "theta,log_tau,dlog_tau_fd,dlog_tau_ha7,dlog_tau_ha8,dlog_tau_ha9,"
          "resid_ha7,resid_ha8,resid_ha9";
    for (Eigen::Index j = 0; j < s.betti_count; ++j) os << ",betti_" << j;
    if (s.has_heat) os << ",heat_residual";
    os << "\n";
    os.precision(12);
    for (const SweepRow& r : s.rows) {
        os << r.theta << "," << r.log_tau << "," << r.dlog_tau_fd << "," << r.ha7 << "," << r.ha8
           << "," << r.ha9 << "," << r.resid_ha7 << "," << r.resid_ha8 << "," << r.resid_ha9;
        for (Eigen::Index b : r.betti) os << "," << b;
        if (s.has_heat) os << "," << r.heat_residual;
        os << "\n";
    }
    return os.str();
}

Gluing::Gluing(GluingData data) : data_(std::move(data)) {
    data_.C1.require_valid();
    data_.C2.require_valid();
    data_.B.require_valid();
    const Eigen::Index n = data_.C1.degrees();
    if (data_.C2.degrees() != n || data_.B.degrees() != n)
        throw ValidationError("gluing data requires complexes of equal length");
    if (static_cast<Eigen::Index>(data_.r1.size()) != n ||
        static_cast<Eigen::Index>(data_.r2.size()) != n)
        throw ValidationError("gluing data needs one restriction block per degree");

    c1n_ = normalized_copy(data_.C1);
    c2n_ = normalized_copy(data_.C2);
    bn_ = normalized_copy(data_.B);
    chi_c2_ = 0;
    {
        auto b2 = c2n_.betti();
        for (size_t j = 0; j < b2.size(); ++j) chi_c2_ += (j % 2 == 0 ? 1 : -1) * static_cast<long>(b2[j]);
    }

    auto normalize_r = [&](const std::vector<Matrix>& r, const HilbertComplex& c) {
        std::vector<Matrix> rn(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (r[j].rows() != data_.B.dim(j) || r[j].cols() != c.dim(j))
                throw ValidationError("restriction block size mismatch");
            rn[j] = data_.B.identity_grams() && c.identity_grams()
                        ? r[j]
                        : Matrix(data_.B.gram_s(j) * r[j] * c.gram_s_inv(j));
        }
        return rn;
    };
    r1n_ = normalize_r(data_.r1, data_.C1);
    r2n_ = normalize_r(data_.r2, data_.C2);

    // r_j must be surjective chain maps; flagged maps must be coisometries.
    ChainMap m1{c1n_, bn_, r1n_};
    ChainMap m2{c2n_, bn_, r2n_};
    require_chain_map(m1);
    require_chain_map(m2);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (rank_split(r1n_[j]).rank != data_.B.dim(j))
            throw ValidationError("r1 is not surjective (HA1 requires surjective restriction maps)");
        if (rank_split(r2n_[j]).rank != data_.B.dim(j))
            throw ValidationError("r2 is not surjective (HA1 requires surjective restriction maps)");
    }
    auto check_isometry = [&](const std::vector<Matrix>& rn, const char* name) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (data_.B.dim(j) == 0) continue;
            Matrix prod = rn[j] * rn[j].adjoint();
            double resid = (prod - Matrix::Identity(prod.rows(), prod.cols())).norm();
            if (resid > 1e-10 * std::max(1.0, prod.norm())) {
                std::ostringstream os;
                os << name << " flagged as a partial isometry but r r^* - id has norm " << resid
                   << " in degree " << j;
                throw ValidationError(os.str());
            }
        }
    };
    if (data_.r1_partial_isometry) check_isometry(r1n_, "r1");
    if (data_.r2_partial_isometry) check_isometry(r2n_, "r2");

    auto [k1, v1] = kernel_complex(c1n_, r1n_);
    auto [k2, v2] = kernel_complex(c2n_, r2n_);
    k1_ = std::move(k1);
    v1_ = std::move(v1);
    k2_ = std::move(k2);
    v2_ = std::move(v2);
}

ThetaComplex Gluing::theta_complex(double theta) const {
    const Eigen::Index n = degrees();
    ThetaComplex out;
    out.theta = theta;
    out.subspace_bases.resize(n);
    out.dim_c1.resize(n);
    const double c = std::cos(theta), s = std::sin(theta);
    std::vector<Eigen::Index> dims(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index n1 = c1n_.dim(j), n2 = c2n_.dim(j), nb = bn_.dim(j);
        out.dim_c1[j] = n1;
        if (nb == 0) {
            out.subspace_bases[j] = Matrix::Identity(n1 + n2, n1 + n2);
        } else {
            Matrix constraint(nb, n1 + n2);
            constraint.leftCols(n1) = c * r1n_[j];
            constraint.rightCols(n2) = -s * r2n_[j];
            RankSplit rs = rank_split(constraint);
            if (rs.rank != nb)
                throw ValidationError(
                    "theta constraint is rank deficient (restriction maps not surjective)");
            out.subspace_bases[j] = rs.kernel_basis;
        }
        dims[j] = out.subspace_bases[j].cols();
    }
    std::vector<Matrix> diffs;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const Eigen::Index n1 = c1n_.dim(j), n2 = c2n_.dim(j);
        Matrix amb = Matrix::Zero(c1n_.dim(j + 1) + c2n_.dim(j + 1), n1 + n2);
        amb.topLeftCorner(c1n_.dim(j + 1), n1) = c1n_.diff(j);
        amb.bottomRightCorner(c2n_.dim(j + 1), n2) = c2n_.diff(j);
        diffs.push_back(out.subspace_bases[j + 1].adjoint() * amb * out.subspace_bases[j]);
    }
    out.compressed = HilbertComplex(std::move(dims), std::move(diffs));
    return out;
}

ShortExactSequence Gluing::ses_ha3(int side) const {
    const bool one = side == 1;
    const HilbertComplex& k = one ? k1_ : k2_;
    const HilbertComplex& c = one ? c1n_ : c2n_;
    const std::vector<Matrix>& v = one ? v1_ : v2_;
    const std::vector<Matrix>& r = one ? r1n_ : r2n_;
    ShortExactSequence ses;
    ses.A = k;
    ses.C = c;
    ses.B = bn_;
    ses.alpha = v;
    ses.beta = r;
    return ses;
}

ShortExactSequence Gluing::ses_ha4(const ThetaComplex& t) const {
    ShortExactSequence ses;
    ses.A = k1_;
    ses.C = t.compressed;
    ses.B = c2n_;
    const Eigen::Index n = degrees();
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index n1 = c1n_.dim(j), n2 = c2n_.dim(j);
        Matrix incl = Matrix::Zero(n1 + n2, k1_.dim(j));
        incl.topRows(n1) = v1_[j];
        ses.alpha.push_back(t.subspace_bases[j].adjoint() * incl);
        ses.beta.push_back(t.subspace_bases[j].bottomRows(n2));
    }
    return ses;
}

ShortExactSequence Gluing::ses_ha4(double theta) const { return ses_ha4(theta_complex(theta)); }

ShortExactSequence Gluing::ses_ha5(const ThetaComplex& t) const {
    ShortExactSequence ses;
    ses.A = direct_sum(k1_, k2_);
    ses.C = t.compressed;
    ses.B = bn_;
    const double s = std::sin(t.theta), c = std::cos(t.theta);
    const Eigen::Index n = degrees();
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index n1 = c1n_.dim(j), n2 = c2n_.dim(j);
        Matrix incl = Matrix::Zero(n1 + n2, k1_.dim(j) + k2_.dim(j));
        incl.topLeftCorner(n1, k1_.dim(j)) = v1_[j];
        incl.bottomRightCorner(n2, k2_.dim(j)) = v2_[j];
        ses.alpha.push_back(t.subspace_bases[j].adjoint() * incl);
        ses.beta.push_back(s * r1n_[j] * t.subspace_bases[j].topRows(n1) +
                           c * r2n_[j] * t.subspace_bases[j].bottomRows(n2));
    }
    return ses;
}

ShortExactSequence Gluing::ses_ha5(double theta) const { return ses_ha5(theta_complex(theta)); }

double Gluing::trace_projection(const ThetaComplex& t, Eigen::Index j, bool on_cohomology) const {
    Matrix cols;
    if (on_cohomology) {
        auto harm = harmonic_bases(t.compressed);
        cols = t.subspace_bases[j] * harm[j];
    } else {
        cols = t.subspace_bases[j];
    }
    const Eigen::Index n1 = t.dim_c1[j];
    double acc = 0.0;
    for (Eigen::Index i = 0; i < cols.cols(); ++i) acc += cols.col(i).tail(cols.rows() - n1).squaredNorm();
    return acc;
}

double Gluing::log_tau_theta(double theta) const {
    return log_torsion(theta_complex(theta).compressed, TorsionMethod::det).log_torsion_det;
}

double Gluing::log_tau_les4(double theta) const {
    return log_torsion(build_les(ses_ha4(theta)), TorsionMethod::det).log_torsion_det;
}

double Gluing::log_tau_les5(double theta) const {
    return log_torsion(build_les(ses_ha5(theta)), TorsionMethod::det).log_torsion_det;
}

double Gluing::dlog_tau_analytic(double theta, DerivativeFormula which, double guard) const {
    constexpr double half_pi = 1.5707963267948966;
    if (theta < guard || theta > half_pi - guard) {
        std::ostringstream os;
        os << "theta = " << theta << " outside the guard band [" << guard << ", "
           << half_pi - guard << "] of the 2/sin(2 theta) singularity";
        throw ValidationError(os.str());
    }
    ThetaComplex t = theta_complex(theta);
    double tr_h = 0.0, tr_c = 0.0;
    for (Eigen::Index j = 0; j < degrees(); ++j) {
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        tr_h += sign * trace_projection(t, j, true);
        if (which == DerivativeFormula::ha7) tr_c += sign * trace_projection(t, j, false);
    }
    const double pref = 2.0 / std::sin(2.0 * theta);
    switch (which) {
        case DerivativeFormula::ha7:
            return pref * (-tr_h + tr_c);
        case DerivativeFormula::ha8:
            return pref * (-tr_h + static_cast<double>(chi_c2_));
        case DerivativeFormula::ha9:
            return pref * (-tr_h + static_cast<double>(chi_c2_)) -
                   std::tan(theta) * static_cast<double>(chi_b());
    }
    return kNan;
}

std::array<FdCheck, 3> Gluing::finite_difference_check(double theta, double h, double guard) const {
    auto betti_at = [&](double th) { return theta_complex(th).compressed.betti(); };
    auto b0 = betti_at(theta);
    if (betti_at(theta - h) != b0 || betti_at(theta + h) != b0)
        throw NumericError("cohomology dimension jump across the finite-difference stencil "
                           "(theta too close to 0 or pi/2)");
    std::array<FdCheck, 3> out;
    out[0].analytic = dlog_tau_analytic(theta, DerivativeFormula::ha7, guard);
    out[1].analytic = dlog_tau_analytic(theta, DerivativeFormula::ha8, guard);
    out[2].analytic = dlog_tau_analytic(theta, DerivativeFormula::ha9, guard);
    out[0].finite_difference = fd_central([&](double x) { return log_tau_theta(x); }, theta, h);
    out[1].finite_difference = fd_central([&](double x) { return log_tau_les4(x); }, theta, h);
    out[2].finite_difference = fd_central([&](double x) { return log_tau_les5(x); }, theta, h);
    for (auto& c : out) c.residual = std::abs(c.analytic - c.finite_difference);
    return out;
}

GluingResiduals Gluing::gluing_residuals(double theta) const {
    GluingResiduals r;
    r.theta = theta;
    ThetaComplex t = theta_complex(theta);
    r.log_tau_theta = log_torsion(t.compressed, TorsionMethod::det).log_torsion_det;
    r.log_tau_k1 = log_torsion(k1_, TorsionMethod::det).log_torsion_det;
    r.log_tau_k2 = log_torsion(k2_, TorsionMethod::det).log_torsion_det;
    r.log_tau_c1 = log_torsion(c1n_, TorsionMethod::det).log_torsion_det;
    r.log_tau_c2 = log_torsion(c2n_, TorsionMethod::det).log_torsion_det;
    r.log_tau_b = log_torsion(bn_, TorsionMethod::det).log_torsion_det;

    MilnorReport ha3 = milnor(ses_ha3(1));
    r.ha11 = ha3.residual;
    r.ha11_correction = -ha3.length2_correction;

    r.isometry_identities = partial_isometries();
    r.ha13_correction = std::log(std::cos(theta)) * static_cast<double>(chi_b());
    if (r.isometry_identities) {
        HilbertComplex les5 = build_les(ses_ha5(t));
        r.log_tau_les_ha5 = log_torsion(les5, TorsionMethod::det).log_torsion_det;
        r.ha12 = std::abs(r.log_tau_theta - r.log_tau_k1 - r.log_tau_k2 - r.log_tau_les_ha5);
        HilbertComplex les4 = build_les(ses_ha4(t));
        r.log_tau_les_ha4 = log_torsion(les4, TorsionMethod::det).log_torsion_det;
        r.ha13 = std::abs(r.log_tau_theta - r.log_tau_k1 - r.log_tau_c2 - r.log_tau_les_ha4 -
                          r.ha13_correction);
    } else {
        r.ha12 = kNan;
        r.ha13 = kNan;
        r.log_tau_les_ha4 = kNan;
        r.log_tau_les_ha5 = kNan;
    }
    return r;
}

StructuralReport Gluing::structural_checks(double theta, double h) const {
    StructuralReport rep;
    ThetaComplex t = theta_complex(theta);
    const Eigen::Index n = degrees();

    for (Eigen::Index j = 0; j < n; ++j)
        if (t.compressed.dim(j) != c1n_.dim(j) + c2n_.dim(j) - bn_.dim(j)) rep.dims_ok = false;

    if (partial_isometries()) {
        ShortExactSequence s5 = ses_ha5(t);
        ShortExactSequence s4 = ses_ha4(t);
        const double tan2 = std::tan(theta) * std::tan(theta);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (bn_.dim(j) > 0) {
                Matrix prod = s5.beta[j] * s5.beta[j].adjoint();
                rep.r_theta_coisometry_residual =
                    std::max(rep.r_theta_coisometry_residual,
                             (prod - Matrix::Identity(prod.rows(), prod.cols())).norm());
                rep.r_theta_det_residual =
                    std::max(rep.r_theta_det_residual, std::abs(det_map(s5.beta[j]) - 1.0));
            }
            if (c2n_.dim(j) > 0) {
                double det_bb = std::pow(det_map(s4.beta[j]), 2.0);
                double expected = std::pow(1.0 + tan2, -static_cast<double>(bn_.dim(j)));
                rep.beta_det_residual = std::max(rep.beta_det_residual, std::abs(det_bb - expected));
            }
        }
    }

    // phi_{theta,theta'}(xi1, xi2) = (xi1, tan(theta)/tan(theta') xi2) as a
    // chain isomorphism C^theta -> C^theta'.
    auto phi_matrix = [&](const ThetaComplex& from, const ThetaComplex& to, Eigen::Index j) {
        const double scale = std::tan(from.theta) / std::tan(to.theta);
        const Eigen::Index n1 = from.dim_c1[j];
        Matrix amb = from.subspace_bases[j];
        Matrix scaled = amb;
        scaled.bottomRows(amb.rows() - n1) *= scale;
        return Matrix(to.subspace_bases[j].adjoint() * scaled);
    };
    const double theta_p = theta + h;
    ThetaComplex tp = theta_complex(theta_p);
    {
        std::vector<Matrix> blocks(n);
        for (Eigen::Index j = 0; j < n; ++j) blocks[j] = phi_matrix(t, tp, j);
        ChainMap phi{t.compressed, tp.compressed, blocks};
        rep.phi_chain_residual = chain_map_residual(phi);
        // HA16 commuting squares: phi alpha_theta = alpha_theta' and
        // tilde-phi beta_theta = beta_theta' phi.
        ShortExactSequence s4 = ses_ha4(t);
        ShortExactSequence s4p = ses_ha4(tp);
        const double scale = std::tan(theta) / std::tan(theta_p);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (k1_.dim(j) > 0) {
                double r1 = (blocks[j] * s4.alpha[j] - s4p.alpha[j]).norm();
                rep.phi_chain_residual = std::max(rep.phi_chain_residual, r1);
            }
            if (c2n_.dim(j) > 0) {
                double r2 = (scale * s4.beta[j] - s4p.beta[j] * blocks[j]).norm();
                rep.phi_chain_residual = std::max(rep.phi_chain_residual, r2);
            }
        }
    }

    // Trace-derivative identities by central differences in theta'.
    const double pref = 2.0 / std::sin(2.0 * theta);
    auto harm = harmonic_bases(t.compressed);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (t.compressed.dim(j) == 0) continue;
        auto log_det_phi_cochain = [&](double thp) {
            ThetaComplex dst = theta_complex(thp);
            Matrix m = phi_matrix(t, dst, j);
            RealVector sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
            double acc = 0.0;
            for (Eigen::Index i = 0; i < sv.size(); ++i) acc += std::log(sv(i));
            return acc;
        };
        double fd_cochain = fd_central(log_det_phi_cochain, theta, h);
        double expect_cochain = -pref * trace_projection(t, j, false);
        rep.ha18_cochain_residual =
            std::max(rep.ha18_cochain_residual, std::abs(fd_cochain - expect_cochain));

        if (harm[j].cols() > 0) {
            auto log_det_phi_cohom = [&](double thp) {
                ThetaComplex dst = theta_complex(thp);
                Matrix m = phi_matrix(t, dst, j);
                auto harm_dst = harmonic_bases(dst.compressed);
                Matrix ind = harm_dst[j].adjoint() * m * harm[j];
                RealVector sv = Eigen::JacobiSVD<Matrix>(ind).singularValues();
                double acc = 0.0;
                for (Eigen::Index i = 0; i < sv.size(); ++i) acc += std::log(sv(i));
                return acc;
            };
            double fd_cohom = fd_central(log_det_phi_cohom, theta, h);
            double expect_cohom = -pref * trace_projection(t, j, true);
            rep.ha18_cohomology_residual =
                std::max(rep.ha18_cohomology_residual, std::abs(fd_cohom - expect_cohom));
        }

        if (c2n_.dim(j) > 0) {
            auto log_det_tilde = [&](double thp) {
                return static_cast<double>(c2n_.dim(j)) * std::log(std::tan(theta) / std::tan(thp));
            };
            double fd_tilde = fd_central(log_det_tilde, theta, h);
            double expect_tilde = -pref * static_cast<double>(c2n_.dim(j));
            rep.ha19_residual = std::max(rep.ha19_residual, std::abs(fd_tilde - expect_tilde));
        }
    }
    return rep;
}

double Gluing::ha10_function(double theta, bool use_ha5) const {
    double tau = log_tau_theta(theta);
    return tau - (use_ha5 ? log_tau_les5(theta) : log_tau_les4(theta));
}

double Gluing::heat_identity_residual(double theta, double t, double h) const {
    auto weighted_heat = [&](double th) {
        ThetaComplex tc = theta_complex(th);
        HeatTrace ht = heat_invariants(tc.compressed, t);
        double acc = 0.0;
        for (size_t j = 0; j < ht.traces.size(); ++j)
            acc += (j % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(j) * ht.traces[j];
        return acc;
    };
    double lhs = fd_central(weighted_heat, theta, h);

    ThetaComplex tc = theta_complex(theta);
    double ddt = 0.0;  // d/dt sum (-1)^j Tr(P2 exp(-t Delta_j))
    for (Eigen::Index j = 0; j < degrees(); ++j) {
        const Eigen::Index nj = tc.compressed.dim(j);
        if (nj == 0) continue;
        Matrix lap = Matrix::Zero(nj, nj);
        if (j + 1 < degrees()) lap += tc.compressed.diff(j).adjoint() * tc.compressed.diff(j);
        if (j > 0) lap += tc.compressed.diff(j - 1) * tc.compressed.diff(j - 1).adjoint();
        Eigen::SelfAdjointEigenSolver<Matrix> es(lap);
        const Eigen::Index n1 = tc.dim_c1[j];
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        for (Eigen::Index i = 0; i < nj; ++i) {
            double lam = std::max(es.eigenvalues()(i), 0.0);
            Matrix v = tc.subspace_bases[j] * es.eigenvectors().col(i);
            double w = v.col(0).tail(v.rows() - n1).squaredNorm();
            ddt += sign * (-lam) * std::exp(-t * lam) * w;
        }
    }
    double rhs = -2.0 * t * (2.0 / std::sin(2.0 * theta)) * ddt;
    return std::abs(lhs - rhs);
}

SweepResult Gluing::sweep(const SweepParams& p) const {
    if (p.steps < 2) throw ValidationError("sweep needs at least 2 grid points");
    SweepResult out;
    out.has_heat = p.explore_heat;
    out.betti_count = degrees();
    for (int i = 0; i < p.steps; ++i) {
        double theta = p.from + (p.to - p.from) * static_cast<double>(i) /
                                    static_cast<double>(p.steps - 1);
        SweepRow row;
        row.theta = theta;
        ThetaComplex t = theta_complex(theta);
        row.log_tau = log_torsion(t.compressed, TorsionMethod::det).log_torsion_det;
        row.betti = t.compressed.betti();
        auto checks = finite_difference_check(theta, p.fd_step, p.guard);
        row.dlog_tau_fd = checks[0].finite_difference;
        row.ha7 = checks[0].analytic;
        row.ha8 = checks[1].analytic;
        row.ha9 = checks[2].analytic;
        row.resid_ha7 = checks[0].residual;
        row.resid_ha8 = checks[1].residual;
        row.resid_ha9 = checks[2].residual;
        row.heat_residual = p.explore_heat ? heat_identity_residual(theta, p.heat_time, p.fd_step) : kNan;
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace torsor
