#include "torsor/simplicial.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace torsor {

namespace {

std::vector<int> face(const std::vector<int>& simplex, size_t drop) {
    std::vector<int> f;
    f.reserve(simplex.size() - 1);
    for (size_t i = 0; i < simplex.size(); ++i)
        if (i != drop) f.push_back(simplex[i]);
    return f;
}

}  // namespace

long SimplicialComplex::euler_characteristic() const {
    long chi = 0;
    for (size_t d = 0; d < simplices.size(); ++d)
        chi += (d % 2 == 0 ? 1 : -1) * static_cast<long>(simplices[d].size());
    return chi;
}

SimplicialComplex make_simplicial(int vertex_count, std::vector<std::vector<int>> simplices) {
    SimplicialComplex k;
    k.vertex_count = vertex_count;
    std::vector<std::set<std::vector<int>>> by_dim;
    for (auto& s : simplices) {
        if (s.empty()) throw ValidationError("empty simplex");
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end())
            throw ValidationError("repeated vertex in a simplex");
        if (s.front() < 0 || s.back() >= vertex_count)
            throw ValidationError("simplex vertex out of range");
        size_t d = s.size() - 1;
        if (by_dim.size() <= d) by_dim.resize(d + 1);
        if (!by_dim[d].insert(s).second) throw ValidationError("duplicate simplex");
    }
    for (size_t d = 1; d < by_dim.size(); ++d)
        for (const auto& s : by_dim[d])
            for (size_t i = 0; i <= d; ++i)
                if (!by_dim[d - 1].count(face(s, i))) {
                    std::ostringstream os;
                    os << "missing face of a " << d << "-simplex";
                    throw ValidationError(os.str());
                }
    k.simplices.resize(by_dim.size());
    for (size_t d = 0; d < by_dim.size(); ++d)
        k.simplices[d] = std::vector<std::vector<int>>(by_dim[d].begin(), by_dim[d].end());
    return k;
}

Matrix LocalSystem::transport(int to_vertex, int from_vertex) const {
    if (to_vertex == from_vertex) return Matrix::Identity(fiber, fiber);
    bool forward = to_vertex < from_vertex;  // stored matrices map fiber(v) -> fiber(u), u < v
    auto key = forward ? std::make_pair(to_vertex, from_vertex) : std::make_pair(from_vertex, to_vertex);
    auto it = edges.find(key);
    if (it == edges.end()) return Matrix::Identity(fiber, fiber);
    if (it->second.rows() != fiber || it->second.cols() != fiber)
        throw ValidationError("local system edge matrix has wrong fiber dimension");
    return forward ? it->second : Matrix(it->second.fullPivLu().inverse());
}

double flatness_residual(const SimplicialComplex& k, const LocalSystem& l) {
    double worst = 0.0;
    if (k.simplices.size() < 3) return 0.0;
    for (const auto& tri : k.simplices[2]) {
        const int a = tri[0], b = tri[1], c = tri[2];
        Matrix lhs = l.transport(a, b) * l.transport(b, c);
        Matrix rhs = l.transport(a, c);
        worst = std::max(worst, (lhs - rhs).norm());
    }
    return worst;
}

void require_flat(const SimplicialComplex& k, const LocalSystem& l, double tol) {
    double r = flatness_residual(k, l);
    if (r > tol) {
        std::ostringstream os;
        os << "local system is not flat: triangle transport defect " << r;
        throw ValidationError(os.str());
    }
}

HilbertComplex cochain_complex(const SimplicialComplex& k, const LocalSystem& l,
                               Eigen::Index min_degrees) {
    require_flat(k, l);
    const Eigen::Index fiber = l.fiber;
    if (fiber <= 0) throw ValidationError("fiber dimension must be positive");
    Eigen::Index n_deg = std::max<Eigen::Index>(static_cast<Eigen::Index>(k.simplices.size()), min_degrees);
    if (n_deg == 0) return HilbertComplex();

    std::vector<Eigen::Index> dims(n_deg, 0);
    for (Eigen::Index d = 0; d < n_deg; ++d) dims[d] = k.count(d) * fiber;

    // Index of each simplex within its dimension.
    std::vector<std::map<std::vector<int>, Eigen::Index>> index(k.simplices.size());
    for (size_t d = 0; d < k.simplices.size(); ++d)
        for (size_t i = 0; i < k.simplices[d].size(); ++i)
            index[d][k.simplices[d][i]] = static_cast<Eigen::Index>(i);

    std::vector<Matrix> diffs;
    for (Eigen::Index d = 0; d + 1 < n_deg; ++d) {
        Matrix m = Matrix::Zero(dims[d + 1], dims[d]);
        if (k.count(d + 1) > 0 && k.count(d) > 0) {
            const auto& top = k.simplices[d + 1];
            for (size_t s = 0; s < top.size(); ++s) {
                const auto& sigma = top[s];
                for (size_t i = 0; i <= static_cast<size_t>(d + 1); ++i) {
                    std::vector<int> f = face(sigma, i);
                    Eigen::Index col = index[d].at(f);
                    double sign = (i % 2 == 0) ? 1.0 : -1.0;
                    // The 0th-face value lives at the face's leading vertex and is
                    // transported to the simplex's leading vertex.
                    Matrix block = (i == 0) ? Matrix(sign * l.transport(sigma[0], f[0]))
                                            : Matrix(sign * Matrix::Identity(fiber, fiber));
                    m.block(static_cast<Eigen::Index>(s) * fiber, col * fiber, fiber, fiber) = block;
                }
            }
        }
        diffs.push_back(std::move(m));
    }
    HilbertComplex out(std::move(dims), std::move(diffs));
    out.require_valid();
    return out;
}

bool is_subcomplex(const SimplicialComplex& k, const SimplicialComplex& y) {
    if (y.simplices.size() > k.simplices.size()) return false;
    for (size_t d = 0; d < y.simplices.size(); ++d) {
        std::set<std::vector<int>> have(k.simplices[d].begin(), k.simplices[d].end());
        for (const auto& s : y.simplices[d])
            if (!have.count(s)) return false;
    }
    return true;
}

SimplicialComplex induced_subcomplex(const SimplicialComplex& k, const std::vector<int>& vertices) {
    std::set<int> keep(vertices.begin(), vertices.end());
    std::vector<std::vector<int>> kept;
    for (const auto& level : k.simplices)
        for (const auto& s : level)
            if (std::all_of(s.begin(), s.end(), [&](int v) { return keep.count(v) > 0; }))
                kept.push_back(s);
    SimplicialComplex y = make_simplicial(k.vertex_count, std::move(kept));
    return y;
}

std::vector<Matrix> restriction_blocks(const SimplicialComplex& k, const SimplicialComplex& y,
                                       const LocalSystem& l) {
    if (!is_subcomplex(k, y)) throw ValidationError("restriction: Y is not a subcomplex");
    const Eigen::Index fiber = l.fiber;
    const auto n_deg = static_cast<Eigen::Index>(k.simplices.size());
    std::vector<Matrix> blocks;
    for (Eigen::Index d = 0; d < n_deg; ++d) {
        Matrix m = Matrix::Zero(y.count(d) * fiber, k.count(d) * fiber);
        if (y.count(d) > 0) {
            std::map<std::vector<int>, Eigen::Index> index;
            for (Eigen::Index i = 0; i < k.count(d); ++i) index[k.simplices[d][i]] = i;
            for (Eigen::Index i = 0; i < y.count(d); ++i) {
                Eigen::Index col = index.at(y.simplices[d][i]);
                m.block(i * fiber, col * fiber, fiber, fiber) = Matrix::Identity(fiber, fiber);
            }
        }
        blocks.push_back(std::move(m));
    }
    return blocks;
}

ChainMap restriction_map(const SimplicialComplex& k, const SimplicialComplex& y, const LocalSystem& l) {
    auto blocks = restriction_blocks(k, y, l);
    Eigen::Index n_deg = static_cast<Eigen::Index>(k.simplices.size());
    return ChainMap{cochain_complex(k, l), cochain_complex(y, l, n_deg), std::move(blocks)};
}

SplitData split(const SimplicialComplex& k, const SimplicialComplex& y) {
    if (!is_subcomplex(k, y)) throw ValidationError("split: Y is not a subcomplex");
    std::set<std::vector<int>> in_y;
    for (const auto& level : y.simplices) in_y.insert(level.begin(), level.end());

    // Union-find over the simplices outside Y, joined along codimension-1 faces.
    std::vector<std::vector<int>> outside;
    std::map<std::vector<int>, int> id;
    for (const auto& level : k.simplices)
        for (const auto& s : level)
            if (!in_y.count(s)) {
                id[s] = static_cast<int>(outside.size());
                outside.push_back(s);
            }
    if (outside.empty()) throw ValidationError("split: Y covers the whole complex");
    std::vector<int> parent(outside.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
    for (const auto& s : outside) {
        if (s.size() == 1) continue;
        for (size_t i = 0; i < s.size(); ++i) {
            std::vector<int> f = face(s, i);
            auto it = id.find(f);
            if (it != id.end()) unite(id[s], it->second);
        }
    }
    std::map<int, int> roots;
    for (size_t i = 0; i < outside.size(); ++i) {
        int r = find(static_cast<int>(i));
        if (!roots.count(r)) roots[r] = static_cast<int>(roots.size());
    }
    if (roots.size() != 2) {
        std::ostringstream os;
        os << "split: Y does not separate the complex into two sides (found " << roots.size()
           << " complementary component" << (roots.size() == 1 ? "" : "s") << ")";
        throw ValidationError(os.str());
    }

    std::vector<std::vector<int>> side0, side1;
    for (size_t i = 0; i < outside.size(); ++i)
        (roots[find(static_cast<int>(i))] == 0 ? side0 : side1).push_back(outside[i]);
    auto closed_side = [&](const std::vector<std::vector<int>>& side) {
        std::set<std::vector<int>> acc(side.begin(), side.end());
        for (const auto& level : y.simplices) acc.insert(level.begin(), level.end());
        // close under faces
        std::vector<std::vector<int>> stack(acc.begin(), acc.end());
        while (!stack.empty()) {
            auto s = stack.back();
            stack.pop_back();
            if (s.size() == 1) continue;
            for (size_t i = 0; i < s.size(); ++i) {
                auto f = face(s, i);
                if (acc.insert(f).second) stack.push_back(f);
            }
        }
        return make_simplicial(k.vertex_count,
                               std::vector<std::vector<int>>(acc.begin(), acc.end()));
    };
    SplitData out;
    out.x_minus = closed_side(side0);
    out.x_plus = closed_side(side1);
    out.y = y;
    return out;
}

GluingData split_to_gluing(const SimplicialComplex& k, const SimplicialComplex& y,
                           const LocalSystem& l) {
    SplitData sd = split(k, y);
    const auto n_deg = static_cast<Eigen::Index>(k.simplices.size());
    GluingData g;
    g.C1 = cochain_complex(sd.x_minus, l, n_deg);
    g.C2 = cochain_complex(sd.x_plus, l, n_deg);
    g.B = cochain_complex(sd.y, l, n_deg);
    g.r1 = restriction_blocks(sd.x_minus, sd.y, l);
    g.r2 = restriction_blocks(sd.x_plus, sd.y, l);
    g.r1.resize(n_deg, Matrix::Zero(0, 0));
    g.r2.resize(n_deg, Matrix::Zero(0, 0));
    for (Eigen::Index j = 0; j < n_deg; ++j) {
        if (g.r1[j].rows() != g.B.dim(j) || g.r1[j].cols() != g.C1.dim(j))
            g.r1[j] = Matrix::Zero(g.B.dim(j), g.C1.dim(j));
        if (g.r2[j].rows() != g.B.dim(j) || g.r2[j].cols() != g.C2.dim(j))
            g.r2[j] = Matrix::Zero(g.B.dim(j), g.C2.dim(j));
    }
    g.r1_partial_isometry = true;
    g.r2_partial_isometry = true;
    return g;
}

SimplicialComplex builtin_interval(int n_edges) {
    if (n_edges < 1) throw ValidationError("interval needs at least one edge");
    std::vector<std::vector<int>> s;
    for (int v = 0; v <= n_edges; ++v) s.push_back({v});
    for (int e = 0; e < n_edges; ++e) s.push_back({e, e + 1});
    return make_simplicial(n_edges + 1, std::move(s));
}

SimplicialComplex builtin_circle(int n_vertices) {
    if (n_vertices < 3) throw ValidationError("circle needs at least 3 vertices");
    std::vector<std::vector<int>> s;
    for (int v = 0; v < n_vertices; ++v) s.push_back({v});
    for (int v = 0; v < n_vertices; ++v) {
        int a = v, b = (v + 1) % n_vertices;
        s.push_back({std::min(a, b), std::max(a, b)});
    }
    return make_simplicial(n_vertices, std::move(s));
}

std::pair<SimplicialComplex, LocalSystem> builtin_twisted_circle(int n_vertices, double alpha) {
    SimplicialComplex k = builtin_circle(n_vertices);
    LocalSystem l;
    l.fiber = 1;
    Matrix h(1, 1);
    h(0, 0) = std::exp(Complex(0.0, alpha));
    l.edges[{0, n_vertices - 1}] = h;  // full holonomy on the closing edge
    return {std::move(k), std::move(l)};
}

SimplicialComplex builtin_disk(int n_boundary_vertices) {
    if (n_boundary_vertices < 3) throw ValidationError("disk needs at least 3 boundary vertices");
    const int apex = n_boundary_vertices;
    std::vector<std::vector<int>> s;
    for (int v = 0; v <= n_boundary_vertices; ++v) s.push_back({v});
    for (int v = 0; v < n_boundary_vertices; ++v) {
        int a = v, b = (v + 1) % n_boundary_vertices;
        s.push_back({std::min(a, b), std::max(a, b)});
        s.push_back({v, apex});
        s.push_back({std::min(a, b), std::max(a, b), apex});
    }
    return make_simplicial(n_boundary_vertices + 1, std::move(s));
}

}  // namespace torsor
