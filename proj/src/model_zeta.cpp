#include "torsor/model_zeta.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace torsor {

double zeta_r_prime0() { return -0.5 * std::log(2.0 * std::numbers::pi); }

double riemann_zeta_em(double s) {
    if (s == 1.0) throw ValidationError("zeta has a pole at s = 1");
    // Euler-Maclaurin: sum_{n<N} n^{-s} + N^{1-s}/(s-1) + N^{-s}/2
    //   + sum_k B_{2k}/(2k)! (s)_{2k-1} N^{-s-2k+1}.
    constexpr int N = 24;
    constexpr std::array<double, 6> b2k = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730};
    double acc = 0.0;
    for (int n = 1; n < N; ++n) acc += std::pow(n, -s);
    acc += std::pow(N, 1.0 - s) / (s - 1.0);
    acc += 0.5 * std::pow(N, -s);
    double fact = 1.0;      // (2k)!
    double rising = 1.0;    // s (s+1) ... (s+2k-2)
    for (size_t k = 1; k <= b2k.size(); ++k) {
        fact *= (2.0 * k - 1.0) * (2.0 * k);
        if (k == 1) {
            rising = s;
        } else {
            rising *= (s + 2.0 * k - 3.0) * (s + 2.0 * k - 2.0);
        }
        acc += b2k[k - 1] / fact * rising * std::pow(N, -s - 2.0 * k + 1.0);
    }
    return acc;
}

double interval_zeta_prime_zero(const IntervalSpectrum& spec) {
    if (!(spec.length > 0)) throw ValidationError("interval length must be positive");
    return 2.0 * std::log(spec.length / std::numbers::pi) * kZetaR0 + 2.0 * zeta_r_prime0();
}

double interval_log_det(const IntervalSpectrum& spec) { return -interval_zeta_prime_zero(spec); }

double interval_torsion(double length) {
    IntervalSpectrum spec{length, IntervalSpectrum::Bc::dirichlet};
    return -0.5 * interval_zeta_prime_zero(spec);
}

double cylinder_torsion(const HilbertComplex& base, double eps) {
    if (!(eps > 0)) throw ValidationError("cylinder thickness must be positive");
    TorsionReport rep = log_torsion(base, TorsionMethod::det);
    return rep.log_torsion_det +
           0.5 * std::log(2.0 * eps) * static_cast<double>(rep.euler_characteristic);
}

double quad_gl(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels < 1) throw ValidationError("quadrature needs at least one panel");
    // 8-point Gauss-Legendre nodes and weights on [-1, 1].
    static const std::array<double, 4> x = {0.1834346424956498, 0.5255324099163290,
                                            0.7966664774136267, 0.9602898564975363};
    static const std::array<double, 4> w = {0.3626837833783620, 0.3137066458778873,
                                            0.2223810344533745, 0.1012285362903763};
    double acc = 0.0;
    const double hw = (b - a) / (2.0 * panels);
    for (int p = 0; p < panels; ++p) {
        double mid = a + (2.0 * p + 1.0) * hw;
        for (size_t i = 0; i < x.size(); ++i)
            acc += w[i] * (f(mid + hw * x[i]) + f(mid - hw * x[i]));
    }
    return acc * hw;
}

}  // namespace torsor
