#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "alex/lower_hull.hpp"
#include "alex/polygon.hpp"

namespace alex {

class NonConvexError : public GeometryError {
public:
    NonConvexError(const std::string& what, int node) : GeometryError(what), node_(node) {}
    int node() const { return node_; }

private:
    int node_;
};

/// Piecewise-linear convex function on the convex hull of a planar node set:
/// the lower hull of the lifted nodes. Every node must lie on that hull.
class PLConvexFunction {
public:
    /// Throws GeometryError for degenerate node sets and NonConvexError when a
    /// node lies above the envelope of the others by more than `height_tol`.
    PLConvexFunction(std::vector<Vec2> nodes, std::vector<double> values, double height_tol = 1e-9);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<double>& values() const { return values_; }
    const Vec2& node(std::size_t i) const { return nodes_[i]; }
    double value(std::size_t i) const { return values_[i]; }
    const LowerHull& hull() const { return hull_; }

    bool is_boundary(std::size_t i) const { return hull_.is_boundary(i); }
    /// Longest edge of the Delaunay triangulation of the nodes.
    double mesh_size() const { return mesh_size_; }
    /// max(1, max |u_i|), the scale for relative value tolerances.
    double value_scale() const;

    double evaluate(const Vec2& x) const { return hull_.evaluate(x); }

private:
    std::vector<Vec2> nodes_;
    std::vector<double> values_;
    LowerHull hull_;
    double mesh_size_;
};

PLConvexFunction build_pl(std::vector<Vec2> nodes, std::vector<double> values);

struct NodeMass {
    int node;
    double mass;
};

/// Monge-Ampere measure of a PL convex function. The measure is purely
/// atomic: each interior node carries the area of its subgradient cell.
/// Boundary cells are unbounded; they are reported clipped to the convex hull
/// of all facet gradients so that interior + boundary = gradient image area.
struct MAMeasure {
    std::vector<NodeMass> atoms;
    std::vector<NodeMass> boundary_cells;
    std::vector<double> per_cell;  ///< absolutely continuous part; empty for PL data
    double total_mass = 0.0;
    double gradient_image_area = 0.0;

    /// Dense per-node view (boundary nodes read 0).
    std::vector<double> node_masses(std::size_t num_nodes) const;
};

/// Subgradient cell of an interior vertex: facet gradients in counter-clockwise order.
std::vector<Vec2> subgradient_cell(const LowerHull& hull, std::size_t vertex);
double subgradient_cell_area(const LowerHull& hull, std::size_t vertex);

MAMeasure ma_measure(const PLConvexFunction& f);

/// Discrete Legendre transform. Dual nodes are the distinct facet gradients.
PLConvexFunction legendre_pl(const PLConvexFunction& f);
/// Legendre transform sampled at the given dual nodes: u*(p) = max_i p.x_i - u_i.
PLConvexFunction legendre_pl(const PLConvexFunction& f, std::span<const Vec2> dual_nodes);
std::vector<double> conjugate_values(const PLConvexFunction& f, std::span<const Vec2> points);

struct ContactReport {
    Vec2 base;
    double base_value = 0.0;
    Vec2 slope;               ///< plane: base_value + slope.(x - base)
    std::vector<int> nodes;   ///< nodes where u equals the plane within tolerance
    double diameter = 0.0;
    double tolerance = 0.0;

    double plane(const Vec2& x) const { return base_value + slope.dot(x - base); }
};

/// Supporting plane at x0 (mean of the distinct facet gradients at x0) and the
/// nodes it touches. Throws std::invalid_argument when x0 is outside the hull.
ContactReport contact_set(const PLConvexFunction& f, const Vec2& x0);

/// Singular support: isolated points and segments. C(Gamma) is their convex hull.
struct SingularSet {
    std::vector<Vec2> points;
    std::vector<std::pair<Vec2, Vec2>> segments;

    ConvexPolygon convex_hull() const;
    double hull_distance(const Vec2& x) const;
};

struct StrictConvexityMap {
    std::vector<bool> strict;          ///< per node (boundary nodes always true)
    std::vector<double> contact_diameter;
    /// Interior nodes farther than 2h from C(Gamma) whose contact set is not a
    /// singleton up to mesh size; empty for solutions of equations with
    /// density bounded below.
    std::vector<int> degenerate_outside;
    double mesh_size = 0.0;
};

StrictConvexityMap strict_convexity_region(const PLConvexFunction& f, const SingularSet& gamma,
                                           double mesh_size = 0.0);

/// Columnar text: `x y value` per node, `#` comment lines.
void write_columnar(std::ostream& os, const PLConvexFunction& f, std::string_view header = {});
/// Reads `x y value` rows; returns nodes and values without building the hull.
std::pair<std::vector<Vec2>, std::vector<double>> read_columnar(std::istream& is);
/// `node_index x y mass` rows.
void write_atoms(std::ostream& os, const PLConvexFunction& f, const MAMeasure& m);

}  // namespace alex
