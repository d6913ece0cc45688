#pragma once

#include <functional>
#include <span>
#include <vector>

#include "alex/polygon.hpp"

namespace alex {

/// Node set for a convex polygonal domain. Boundary nodes sit on the polygon
/// (vertices and subdivided edges); required points are always nodes.
struct Mesh {
    ConvexPolygon domain;
    std::vector<Vec2> nodes;
    std::vector<char> boundary;
    double h = 0.0;      ///< nominal (largest) spacing
    double h_min = 0.0;  ///< smallest requested spacing

    std::size_t size() const { return nodes.size(); }
    std::size_t num_interior() const;
    /// Index of the node closest to p.
    int nearest(const Vec2& p) const;
};

/// Inscribed regular polygon with a vertex on the positive x axis.
ConvexPolygon ball_polygon(double radius, int sides = 64, const Vec2& center = Vec2::Zero());

/// Square lattice of spacing h through `anchor`, clipped to the domain, plus
/// boundary nodes at spacing <= h. Lattice points within h/2 of the boundary
/// or of a required point are dropped.
Mesh uniform_mesh(const ConvexPolygon& domain, double h, std::span<const Vec2> required = {},
                  const Vec2& anchor = Vec2::Zero());

/// Quadtree-graded nodes: a cell is split while its side exceeds the sizing
/// function anywhere on it. Keep `sizing` slowly varying (Lipschitz < 1/2).
Mesh graded_mesh(const ConvexPolygon& domain, const std::function<double(const Vec2&)>& sizing,
                 std::span<const Vec2> required = {});

/// Sizing clamp(ratio * dist(x, centers), h_min, h_max).
std::function<double(const Vec2&)> point_grading(std::vector<Vec2> centers, double ratio, double h_min,
                                                 double h_max);

}  // namespace alex
