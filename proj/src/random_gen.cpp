#include "torsor/random_gen.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <sstream>

namespace torsor {

std::uint64_t Rng::next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do { u1 = uniform(); } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
}

Complex Rng::complex_normal() {
    double re = normal();
    double im = normal();
    return Complex(re, im) / std::sqrt(2.0);
}

Eigen::Index Rng::index(Eigen::Index lo, Eigen::Index hi) {
    if (hi <= lo) return lo;
    auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<Eigen::Index>(next_u64() % span);
}

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_normal();
    return m;
}

Matrix random_unitary(Rng& rng, Eigen::Index n) {
    if (n == 0) return Matrix(0, 0);
    Matrix g = random_matrix(rng, n, n);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the phase ambiguity so the draw is a deterministic function of g.
    for (Eigen::Index i = 0; i < n; ++i) {
        Complex d = r(i, i);
        q.col(i) *= (std::abs(d) > 0 ? d / std::abs(d) : Complex(1, 0));
    }
    return q;
}

Matrix random_invertible(Rng& rng, Eigen::Index n, double smin, double smax) {
    if (n == 0) return Matrix(0, 0);
    Matrix u = random_unitary(rng, n);
    Matrix v = random_unitary(rng, n);
    RealVector s(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = rng.uniform(smin, smax);
    return u * s.asDiagonal() * v.adjoint();
}

Matrix random_spd(Rng& rng, Eigen::Index n) {
    if (n == 0) return Matrix(0, 0);
    Matrix q = random_unitary(rng, n);
    RealVector s(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = rng.uniform(0.5, 2.0);
    return q * s.asDiagonal() * q.adjoint();
}

HilbertComplex random_complex(const std::vector<Eigen::Index>& dims, std::uint64_t seed,
                              const RandomComplexOptions& opts) {
    for (Eigen::Index d : dims)
        if (d < 0) throw ValidationError("random_complex: negative dimension");
    const auto n_deg = static_cast<Eigen::Index>(dims.size());
    Rng rng(seed);
    const Eigen::Index n_diff = std::max<Eigen::Index>(n_deg - 1, 0);

    std::vector<Eigen::Index> ranks(n_diff, 0);
    Eigen::Index prev = 0;
    for (Eigen::Index j = 0; j < n_diff; ++j) {
        Eigen::Index max_rank = std::min(dims[j] - prev, dims[j + 1]);
        if (opts.acyclic) {
            Eigen::Index need = dims[j] - prev;
            if (need < 0 || need > dims[j + 1]) {
                std::ostringstream os;
                os << "acyclic complex infeasible for the given dimensions at degree " << j;
                throw ValidationError(os.str());
            }
            ranks[j] = need;
        } else {
            ranks[j] = rng.index(0, std::max<Eigen::Index>(max_rank, 0));
        }
        prev = ranks[j];
    }
    if (opts.acyclic && n_deg > 0 && dims[n_deg - 1] - prev != 0)
        throw ValidationError("acyclic complex infeasible: nonzero top-degree cohomology forced");

    // Orthonormal frame per degree, columns split as [harmonic | exact | coexact].
    std::vector<Matrix> frames(n_deg);
    for (Eigen::Index j = 0; j < n_deg; ++j) frames[j] = random_unitary(rng, dims[j]);
    std::vector<Matrix> diffs(n_diff);
    const double smin = std::sqrt(std::max(opts.spectral_floor, 1e-12));
    for (Eigen::Index j = 0; j < n_diff; ++j) {
        Eigen::Index r = ranks[j];
        Matrix coexact = frames[j].rightCols(r);
        Matrix exact_next = frames[j + 1].middleCols(dims[j + 1] - (j + 1 < n_diff ? ranks[j + 1] : 0) - r, r);
        Matrix m = random_invertible(rng, r, smin, smin + 1.0);
        diffs[j] = exact_next * m * coexact.adjoint();
    }
    std::vector<Matrix> grams;
    if (opts.random_grams)
        for (Eigen::Index j = 0; j < n_deg; ++j) grams.push_back(random_spd(rng, dims[j]));
    return HilbertComplex(dims, std::move(diffs), std::move(grams));
}

std::vector<Matrix> random_coupling(const HilbertComplex& a, const HilbertComplex& b, Rng& rng,
                                    double scale) {
    const Eigen::Index n = a.degrees();
    if (b.degrees() != n) throw ValidationError("random_coupling: complexes of different length");
    // Unknowns m_j: B^j -> A^{j+1}, j = 0..n-2.
    std::vector<Eigen::Index> offs;
    Eigen::Index total = 0;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        offs.push_back(total);
        total += a.dim(j + 1) * b.dim(j);
    }
    offs.push_back(total);
    std::vector<Matrix> out(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index j = 0; j + 1 < n; ++j) out[j] = Matrix::Zero(a.dim(j + 1), b.dim(j));
    if (total == 0) return out;

    Eigen::Index eq_rows = 0;
    for (Eigen::Index j = 0; j + 2 < n; ++j) eq_rows += a.dim(j + 2) * b.dim(j);
    Matrix sol;
    if (eq_rows == 0) {
        sol = random_matrix(rng, total, 1);
    } else {
        Matrix k = Matrix::Zero(eq_rows, total);
        Eigen::Index row = 0;
        auto kron = [](const Matrix& x, const Matrix& y) {
            Matrix z(x.rows() * y.rows(), x.cols() * y.cols());
            for (Eigen::Index i = 0; i < x.rows(); ++i)
                for (Eigen::Index c = 0; c < x.cols(); ++c)
                    z.block(i * y.rows(), c * y.cols(), y.rows(), y.cols()) = x(i, c) * y;
            return z;
        };
        for (Eigen::Index j = 0; j + 2 < n; ++j) {
            const Eigen::Index rows = a.dim(j + 2) * b.dim(j);
            if (rows == 0) continue;
            // vec(d_A m_j) = (I (x) d_A) vec(m_j); vec(m_{j+1} d_B) = (d_B^T (x) I) vec(m_{j+1}).
            if (a.dim(j + 1) * b.dim(j) > 0)
                k.block(row, offs[j], rows, a.dim(j + 1) * b.dim(j)) =
                    kron(Matrix::Identity(b.dim(j), b.dim(j)), a.diff(j + 1));
            if (a.dim(j + 2) * b.dim(j + 1) > 0)
                k.block(row, offs[j + 1], rows, a.dim(j + 2) * b.dim(j + 1)) =
                    kron(b.diff(j).transpose(), Matrix::Identity(a.dim(j + 2), a.dim(j + 2)));
            row += rows;
        }
        Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeFullV);
        RealVector sv = svd.singularValues();
        double cut = default_rank_tol(k.rows(), k.cols()) * (sv.size() ? sv(0) : 0.0);
        Eigen::Index rank = 0;
        while (rank < sv.size() && sv(rank) > cut) ++rank;
        Eigen::Index null_dim = total - rank;
        if (null_dim == 0) return out;  // only the zero coupling exists
        Matrix basis = svd.matrixV().rightCols(null_dim);
        sol = basis * random_matrix(rng, null_dim, 1);
    }
    double peak = sol.cwiseAbs().maxCoeff();
    if (peak > 0) sol *= scale / peak;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const Eigen::Index rows = a.dim(j + 1), cols = b.dim(j);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index i = 0; i < rows; ++i) out[j](i, c) = sol(offs[j] + c * rows + i, 0);
    }
    return out;
}

namespace {

HilbertComplex extension_complex(const HilbertComplex& a, const HilbertComplex& b,
                                 const std::vector<Matrix>& coupling, std::vector<Matrix> grams) {
    const Eigen::Index n = a.degrees();
    std::vector<Eigen::Index> dims(n);
    for (Eigen::Index j = 0; j < n; ++j) dims[j] = a.dim(j) + b.dim(j);
    std::vector<Matrix> diffs;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        Matrix d = Matrix::Zero(dims[j + 1], dims[j]);
        d.topLeftCorner(a.dim(j + 1), a.dim(j)) = a.diff(j);
        d.bottomRightCorner(b.dim(j + 1), b.dim(j)) = b.diff(j);
        d.topRightCorner(a.dim(j + 1), b.dim(j)) = coupling[j];
        diffs.push_back(std::move(d));
    }
    return HilbertComplex(std::move(dims), std::move(diffs), std::move(grams));
}

}  // namespace

ShortExactSequence random_ses(const std::vector<Eigen::Index>& dims_a,
                              const std::vector<Eigen::Index>& dims_b, std::uint64_t seed,
                              const RandomSesOptions& opts) {
    if (dims_a.size() != dims_b.size())
        throw ValidationError("random_ses: dimension lists must have equal length");
    Rng rng(seed ^ 0x5e730f1c9a2b84d1ULL);
    HilbertComplex a = random_complex(dims_a, seed ^ 1, opts.complex_opts);
    HilbertComplex b = random_complex(dims_b, seed ^ 2, opts.complex_opts);
    const Eigen::Index n = a.degrees();
    std::vector<Matrix> coupling(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index j = 0; j + 1 < n; ++j) coupling[j] = Matrix::Zero(a.dim(j + 1), b.dim(j));
    if (opts.couple) coupling = random_coupling(a, b, rng);

    std::vector<Matrix> grams_c;
    if (opts.gram_twist) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Matrix p = random_invertible(rng, a.dim(j) + b.dim(j), 0.8, 1.25);
            grams_c.push_back(p.adjoint() * p);
        }
    }
    ShortExactSequence s;
    s.A = a;
    s.B = b;
    s.C = extension_complex(a, b, coupling, std::move(grams_c));
    for (Eigen::Index j = 0; j < n; ++j) {
        Matrix al = Matrix::Zero(s.C.dim(j), a.dim(j));
        al.topRows(a.dim(j)) = opts.alpha_scale * Matrix::Identity(a.dim(j), a.dim(j));
        s.alpha.push_back(std::move(al));
        Matrix be = Matrix::Zero(b.dim(j), s.C.dim(j));
        be.rightCols(b.dim(j)) = Matrix::Identity(b.dim(j), b.dim(j));
        s.beta.push_back(std::move(be));
    }
    return s;
}

GluingData random_gluing(const std::vector<Eigen::Index>& dims_b,
                         const std::vector<Eigen::Index>& dims_k1,
                         const std::vector<Eigen::Index>& dims_k2, std::uint64_t seed,
                         const RandomGluingOptions& opts) {
    size_t n = std::max({dims_b.size(), dims_k1.size(), dims_k2.size()});
    auto pad = [&](std::vector<Eigen::Index> v) {
        v.resize(n, 0);
        return v;
    };
    Rng rng(seed ^ 0x2c3f0aa1d4e5b6c7ULL);
    HilbertComplex b = random_complex(pad(dims_b), seed ^ 11, opts.complex_opts);
    HilbertComplex k1 = random_complex(pad(dims_k1), seed ^ 12, opts.complex_opts);
    HilbertComplex k2 = random_complex(pad(dims_k2), seed ^ 13, opts.complex_opts);
    std::vector<Matrix> m1 = random_coupling(k1, b, rng);
    std::vector<Matrix> m2 = random_coupling(k2, b, rng);

    GluingData g;
    g.B = b;
    g.C1 = extension_complex(k1, b, m1, {});
    g.C2 = extension_complex(k2, b, m2, {});
    double r1_scale = opts.isometric ? 1.0 : rng.uniform(1.25, 2.0);
    for (size_t j = 0; j < n; ++j) {
        auto jj = static_cast<Eigen::Index>(j);
        Matrix r1 = Matrix::Zero(b.dim(jj), g.C1.dim(jj));
        r1.rightCols(b.dim(jj)) = r1_scale * Matrix::Identity(b.dim(jj), b.dim(jj));
        Matrix r2 = Matrix::Zero(b.dim(jj), g.C2.dim(jj));
        r2.rightCols(b.dim(jj)) = Matrix::Identity(b.dim(jj), b.dim(jj));
        g.r1.push_back(std::move(r1));
        g.r2.push_back(std::move(r2));
    }
    g.r1_partial_isometry = opts.isometric;
    g.r2_partial_isometry = true;
    return g;
}

ChainMap random_chain_iso(const HilbertComplex& c, std::uint64_t seed) {
    c.require_valid();
    Rng rng(seed ^ 0x77a3c1b2e4f59687ULL);
    const Eigen::Index n = c.degrees();
    std::vector<Matrix> blocks(n);
    for (Eigen::Index j = 0; j < n; ++j) blocks[j] = random_invertible(rng, c.dim(j), 0.6, 1.6);
    std::vector<Matrix> diffs;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        Matrix s_inv = blocks[j].fullPivLu().inverse();
        diffs.push_back(blocks[j + 1] * c.diff(j) * s_inv);
    }
    HilbertComplex target(c.dims(), std::move(diffs));
    return ChainMap{c, std::move(target), std::move(blocks)};
}

}  // namespace torsor
