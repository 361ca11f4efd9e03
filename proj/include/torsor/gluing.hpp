#pragma once

#include <array>
#include <string>
#include <vector>

#include "torsor/exact.hpp"
#include "torsor/hilbert_complex.hpp"

namespace torsor {

/// Two complexes with surjective chain maps onto a common boundary complex.
struct GluingData {
    HilbertComplex C1, C2, B;
    std::vector<Matrix> r1, r2;  // C_j^* -> B^*, surjective per degree
    bool r1_partial_isometry = false;
    bool r2_partial_isometry = false;
};

/// The glued complex at angle theta: the subcomplex of C1 (+) C2 cut out by
/// cos(theta) r1 xi1 = sin(theta) r2 xi2, carried by orthonormal bases of the
/// constraint kernel.
struct ThetaComplex {
    double theta = 0.0;
    std::vector<Matrix> subspace_bases;  // orthonormal columns in normalized C1 (+) C2 coordinates
    HilbertComplex compressed;           // differentials in subspace coordinates, identity Grams
    std::vector<Eigen::Index> dim_c1;    // size of the C1 block per degree
};

enum class DerivativeFormula { ha7, ha8, ha9 };

struct FdCheck {
    double analytic = 0.0;
    double finite_difference = 0.0;
    double residual = 0.0;
};

struct GluingResiduals {
    double theta = 0.0;
    double ha11 = 0.0;            // Milnor residual of 0 -> C_{1,r} -> C_1 -> B -> 0
    double ha11_correction = 0.0; // (1/2) sum (-1)^j log Det(r1 r1^*); 0 for partial isometries
    double ha12 = 0.0, ha13 = 0.0;       // NaN when partial-isometry flags are absent
    double ha13_correction = 0.0;        // log cos(theta) * chi(B)
    bool isometry_identities = false;
    double log_tau_theta = 0.0;
    double log_tau_k1 = 0.0, log_tau_k2 = 0.0;
    double log_tau_c1 = 0.0, log_tau_c2 = 0.0, log_tau_b = 0.0;
    double log_tau_les_ha4 = 0.0, log_tau_les_ha5 = 0.0;
};

struct StructuralReport {
    bool dims_ok = true;                     // dim (C^theta)^j = n1 + n2 - dim B^j
    double r_theta_coisometry_residual = 0;  // |r_theta r_theta^* - id|, flags only
    double r_theta_det_residual = 0;         // |Det(r_theta r_theta^*) - 1|, flags only
    double beta_det_residual = 0;            // |Det(beta beta^*) - (1+tan^2)^{-dim B^j}|, flags only
    double phi_chain_residual = 0;           // phi_{theta,theta'} chain map + commuting squares
    double ha18_cochain_residual = 0;        // FD in theta' vs -(2/sin2t) Tr(P2 | cochains)
    double ha18_cohomology_residual = 0;     // FD in theta' vs -(2/sin2t) Tr(P2 | H^j)
    double ha19_residual = 0;                // FD in theta' vs -(2/sin2t) dim C2^j
};

struct SweepParams {
    double from = 1e-3;
    double to = 1.5697963267948965;  // pi/2 - 1e-3
    int steps = 33;
    double fd_step = 1e-4;
    double guard = 1e-3;
    bool explore_heat = false;
    double heat_time = 1.0;
};

struct SweepRow {
    double theta = 0.0;
    double log_tau = 0.0;
    double dlog_tau_fd = 0.0;
    double ha7 = 0.0, ha8 = 0.0, ha9 = 0.0;
    double resid_ha7 = 0.0, resid_ha8 = 0.0, resid_ha9 = 0.0;
    std::vector<Eigen::Index> betti;
    double heat_residual = 0.0;  // exploratory column, NaN unless requested
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool has_heat = false;
    Eigen::Index betti_count = 0;
};

std::string sweep_to_csv(const SweepResult& s);

/// Validated gluing data with the normalized machinery Theorem A.1 needs:
/// kernel complexes C_{j,r}, the theta-complex family, its exact sequences,
/// trace functionals, variation formulas and the gluing identities.
class Gluing {
public:
    explicit Gluing(GluingData data);

    const GluingData& data() const { return data_; }
    Eigen::Index degrees() const { return c1n_.degrees(); }
    const HilbertComplex& kernel_complex_1() const { return k1_; }
    const HilbertComplex& kernel_complex_2() const { return k2_; }
    const HilbertComplex& normalized_c1() const { return c1n_; }
    const HilbertComplex& normalized_c2() const { return c2n_; }
    const HilbertComplex& normalized_b() const { return bn_; }
    bool partial_isometries() const { return data_.r1_partial_isometry && data_.r2_partial_isometry; }
    long chi_b() const { return bn_.euler_characteristic(); }
    long chi_c2() const { return chi_c2_; }

    ThetaComplex theta_complex(double theta) const;

    /// HA3 (side 1 or 2): 0 -> C_{j,r} -> C_j -> B -> 0.
    ShortExactSequence ses_ha3(int side) const;
    /// HA4: 0 -> C_{1,r} -> C^theta -> C_2 -> 0 (exact for theta in [0, pi/2)).
    ShortExactSequence ses_ha4(double theta) const;
    ShortExactSequence ses_ha4(const ThetaComplex& t) const;
    /// HA5: 0 -> C_{1,r} (+) C_{2,r} -> C^theta -> B -> 0.
    ShortExactSequence ses_ha5(double theta) const;
    ShortExactSequence ses_ha5(const ThetaComplex& t) const;

    /// Tr(beta_theta | V) = sum over an orthonormal basis of V of the squared
    /// norm of the C2 component; V is the degree-j harmonic space of the
    /// glued complex or its full cochain space.
    double trace_projection(const ThetaComplex& t, Eigen::Index j, bool on_cohomology) const;

    double dlog_tau_analytic(double theta, DerivativeFormula which, double guard = 1e-3) const;
    std::array<FdCheck, 3> finite_difference_check(double theta, double h = 1e-4,
                                                   double guard = 1e-3) const;

    GluingResiduals gluing_residuals(double theta) const;
    StructuralReport structural_checks(double theta, double h = 1e-4) const;

    /// log tau(C^theta) - log tau(H_theta), the combination that stays
    /// differentiable down to theta = 0.
    double ha10_function(double theta, bool use_ha5) const;

    /// Exploratory finite-dimensional heat-variation residual
    /// |d/dtheta sum (-1)^j j Tr exp(-t Delta_j^theta)
    ///   + 2t d/dt (2/sin 2theta) sum (-1)^j Tr(P2 exp(-t Delta_j^theta))|.
    /// Reported only, never gated.
    double heat_identity_residual(double theta, double t, double h = 1e-4) const;

    SweepResult sweep(const SweepParams& p) const;

private:
    double log_tau_theta(double theta) const;
    double log_tau_les4(double theta) const;
    double log_tau_les5(double theta) const;

    GluingData data_;
    HilbertComplex c1n_, c2n_, bn_;      // normalized (identity-Gram) copies
    std::vector<Matrix> r1n_, r2n_;      // restriction maps in normalized coordinates
    HilbertComplex k1_, k2_;             // kernel complexes C_{1,r}, C_{2,r}
    std::vector<Matrix> v1_, v2_;        // orthonormal kernel bases per degree
    long chi_c2_ = 0;
};

}  // namespace torsor
