#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "alex/polygon.hpp"

namespace alex {

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lower convex hull of lifted points (x_i, h_i), i.e. the regular
/// triangulation of the planar points with heights h.
///
/// Built by incremental insertion with topological flipping: the extreme
/// points of the planar hull are triangulated first, then the remaining
/// points are inserted one at a time (1-3, 2-4 or 1-2 splits) and the link
/// edges are flipped (2-2, or 3-1 when a vertex becomes redundant) until every
/// edge is locally convex. Points lying strictly above the final lower hull
/// are reported as redundant and do not appear in the triangulation.
///
/// Triangles are counter-clockwise. Edge k of a triangle is the edge opposite
/// its vertex k; `neighbor(t, k)` is the triangle across it or -1 on the hull.
class LowerHull {
public:
    /// `height_tol` is the absolute tolerance on lifted heights used for
    /// redundancy and flip decisions.
    LowerHull(std::span<const Vec2> points, std::span<const double> heights,
              double height_tol = 1e-9);

    std::size_t num_points() const { return pts_.size(); }
    std::size_t num_triangles() const { return tri_.size(); }
    const std::array<int, 3>& triangle(std::size_t t) const { return tri_[t]; }
    int neighbor(std::size_t t, int k) const { return nbr_[t][k]; }

    bool is_redundant(std::size_t i) const { return redundant_[i]; }
    std::size_t num_redundant() const;
    /// On the boundary of the planar convex hull.
    bool is_boundary(std::size_t i) const { return boundary_[i]; }

    /// Gradient of the affine function over triangle t.
    Vec2 gradient(std::size_t t) const { return grad_[t]; }

    /// Triangles around vertex i in counter-clockwise order. For boundary
    /// vertices the fan starts at the hull edge.
    std::vector<int> star(std::size_t i) const;
    /// Vertices adjacent to i (counter-clockwise, matching `star`).
    std::vector<int> link(std::size_t i) const;

    /// Triangle containing p (edges and vertices count as inside), or -1.
    int locate(const Vec2& p) const;
    /// Value of the lower hull at p; throws GeometryError outside the hull.
    double evaluate(const Vec2& p) const;

    /// Largest edge length.
    double max_edge_length() const;

    /// Worst violation of local convexity over interior edges (<= 0 when the
    /// triangulation is a lower hull).
    double max_convexity_defect() const;

private:
    struct Located {
        int tri = -1;
        int edge = -1;  ///< edge index when on an edge, else -1
        int vertex = -1;
    };

    void build_initial_hull();
    void insert(int p);
    Located walk(const Vec2& p, int start) const;
    void split_triangle(int t, int p);
    void split_edge(int t, int k, int p);
    void restore(int p);
    bool flip(int t, int k);
    bool remove_vertex(int vertex, int p);
    bool fix_edge(int t, int k);
    int degree(int vertex) const;
    std::vector<int> star_of(int vertex) const;
    double plane_height(int t, const Vec2& q) const;
    double edge_defect(int t, int k) const;
    int find_edge(int t, int a, int b) const;
    void set_neighbor_ref(int tri, int old_t, int new_t);
    int new_triangle(std::array<int, 3> v, std::array<int, 3> n);
    void rotate_to(int t, int vertex);
    void finalize();

    std::vector<Vec2> pts_;
    std::vector<double> h_;
    double tol_;
    double orient_tol_;
    std::vector<std::array<int, 3>> tri_;
    std::vector<std::array<int, 3>> nbr_;
    std::vector<bool> dead_;
    std::vector<int> vertex_tri_;
    std::vector<bool> redundant_;
    std::vector<bool> boundary_;
    std::vector<Vec2> grad_;
    std::vector<std::pair<int, int>> stack_;
    int last_ = 0;
    mutable unsigned rng_ = 0x9e3779b9u;
};

}  // namespace alex
