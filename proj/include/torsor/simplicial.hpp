#pragma once

#include <map>
#include <utility>
#include <vector>

#include "torsor/exact.hpp"
#include "torsor/gluing.hpp"
#include "torsor/hilbert_complex.hpp"

namespace torsor {

/// Finite abstract simplicial complex; simplices are stored per dimension as
/// sorted vertex tuples (orientation = increasing vertex order), sorted
/// lexicographically within each dimension.
struct SimplicialComplex {
    int vertex_count = 0;
    std::vector<std::vector<std::vector<int>>> simplices;  // [dim][index] = sorted vertices

    Eigen::Index count(Eigen::Index dim) const {
        return dim < static_cast<Eigen::Index>(simplices.size())
                   ? static_cast<Eigen::Index>(simplices[dim].size())
                   : 0;
    }
    long euler_characteristic() const;
};

/// Sorts, deduplicates and checks face closure. Throws ValidationError on
/// missing faces, duplicates or out-of-range vertices.
SimplicialComplex make_simplicial(int vertex_count, std::vector<std::vector<int>> simplices);

/// Flat twisting data: one invertible matrix per edge (u < v), transporting
/// the fiber at v to the fiber at u. Missing edges transport by the identity.
struct LocalSystem {
    Eigen::Index fiber = 1;
    std::map<std::pair<int, int>, Matrix> edges;

    Matrix transport(int to_vertex, int from_vertex) const;  // fiber(from) -> fiber(to)
};

/// Largest flatness defect |M_ab M_bc - M_ac| over all 2-simplices [a<b<c].
double flatness_residual(const SimplicialComplex& k, const LocalSystem& l);
void require_flat(const SimplicialComplex& k, const LocalSystem& l, double tol = 1e-10);

/// Twisted cochain complex with simplexwise-orthonormal Gram matrices.
/// min_degrees pads with zero-dimensional degrees (useful when a subcomplex
/// must match the ambient complex's length).
HilbertComplex cochain_complex(const SimplicialComplex& k, const LocalSystem& l = {},
                               Eigen::Index min_degrees = 0);

/// Is y a subcomplex of k?
bool is_subcomplex(const SimplicialComplex& k, const SimplicialComplex& y);

/// The subcomplex of k induced on a vertex subset (all simplices whose
/// vertices lie in the set).
SimplicialComplex induced_subcomplex(const SimplicialComplex& k, const std::vector<int>& vertices);

/// Degreewise coordinate projection of k-cochains onto y-cochains; a
/// surjective chain map and partial isometry.
std::vector<Matrix> restriction_blocks(const SimplicialComplex& k, const SimplicialComplex& y,
                                       const LocalSystem& l = {});
ChainMap restriction_map(const SimplicialComplex& k, const SimplicialComplex& y,
                         const LocalSystem& l = {});

struct SplitData {
    SimplicialComplex x_minus, x_plus, y;
};

/// Splits k along the separating subcomplex y into two closed sides computed
/// by connectivity of the complement; throws ValidationError when y does not
/// separate into exactly two pieces.
SplitData split(const SimplicialComplex& k, const SimplicialComplex& y);

/// Gluing data of a separating split: C_j = cochains of the closed sides,
/// B = cochains of y, r_j = restrictions (partial isometries).
GluingData split_to_gluing(const SimplicialComplex& k, const SimplicialComplex& y,
                           const LocalSystem& l = {});

/// Builtin triangulations.
SimplicialComplex builtin_interval(int n_edges);
SimplicialComplex builtin_circle(int n_vertices);
/// Circle with a 1-dimensional local system of holonomy exp(i alpha).
std::pair<SimplicialComplex, LocalSystem> builtin_twisted_circle(int n_vertices, double alpha);
/// Cone over the n-gon: n+1 vertices, filled with triangles.
SimplicialComplex builtin_disk(int n_boundary_vertices);

}  // namespace torsor
