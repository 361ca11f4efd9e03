#pragma once

#include <functional>

#include "torsor/hilbert_complex.hpp"

namespace torsor {

/// Explicit eigenvalue family lambda_n = (n pi / L)^2, n >= 1, of the model
/// interval Laplacian (the Dirichlet spectrum; the Neumann spectrum shares
/// the same nonzero part).
struct IntervalSpectrum {
    enum class Bc { dirichlet, neumann_nonzero };
    double length = 1.0;
    Bc bc = Bc::dirichlet;
};

/// Classical Riemann-zeta values used to evaluate the interval determinant.
inline constexpr double kZetaR0 = -0.5;
/// zeta_R'(0) = -(1/2) log(2 pi).
double zeta_r_prime0();

/// Euler-Maclaurin evaluation of zeta_R(s) for real s (s != 1); the
/// verification oracle for the embedded constants above.
double riemann_zeta_em(double s);

/// zeta_Delta'(0) through zeta_Delta(s) = (L/pi)^{2s} zeta_R(2s):
/// 2 log(L/pi) zeta_R(0) + 2 zeta_R'(0) = -log(2L).
double interval_zeta_prime_zero(const IntervalSpectrum& spec);

/// log of the zeta-regularized determinant, -zeta_Delta'(0) = log(2L).
double interval_log_det(const IntervalSpectrum& spec);

/// Degree-weighted torsion of the model interval complex: only Delta_1
/// contributes, with weight (-1)*1, giving (1/2) log(2L).
double interval_torsion(double length);

/// log T of the cylinder over the cross-section complex:
/// log T(B) + (1/2) log(2 eps) chi(B).
double cylinder_torsion(const HilbertComplex& base, double eps);

/// Composite Gauss-Legendre quadrature (8-point panels).
double quad_gl(const std::function<double(double)>& f, double a, double b, int panels = 64);

}  // namespace torsor
