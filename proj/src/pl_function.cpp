#include "alex/pl_function.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace alex {

namespace {

bool same_gradient(const Vec2& a, const Vec2& b) {
    return (a - b).norm() <= 1e-12 * (1.0 + std::max(a.norm(), b.norm()));
}

std::vector<Vec2> distinct_gradients(const LowerHull& hull) {
    std::vector<Vec2> g;
    g.reserve(hull.num_triangles());
    for (std::size_t t = 0; t < hull.num_triangles(); ++t) g.push_back(hull.gradient(t));
    std::sort(g.begin(), g.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    std::vector<Vec2> out;
    for (const auto& v : g) {
        bool dup = false;
        // Near-equal gradients can be separated in lexicographic order by a
        // tiny x difference; scan back while x stays within tolerance.
        for (auto it = out.rbegin(); it != out.rend(); ++it) {
            if (v.x() - it->x() > 1e-12 * (1.0 + std::abs(v.x()))) break;
            if (same_gradient(v, *it)) {
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(v);
    }
    return out;
}

double set_diameter(const std::vector<Vec2>& pts) {
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
    return d;
}

}  // namespace

PLConvexFunction::PLConvexFunction(std::vector<Vec2> nodes, std::vector<double> values,
                                   double height_tol)
    : nodes_(std::move(nodes)),
      values_(std::move(values)),
      hull_(nodes_, values_, height_tol),
      mesh_size_(0.0) {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (hull_.is_redundant(i))
            throw NonConvexError("node " + std::to_string(i) +
                                     " lies above the convex envelope (non-convex data)",
                                 static_cast<int>(i));
    // The hull of u may use long triangles across flat regions; the mesh
    // size is a property of the node set, taken from its Delaunay triangulation.
    std::vector<double> lift(nodes_.size());
    double top = 1.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) top = std::max(top, lift[i] = nodes_[i].squaredNorm());
    mesh_size_ = LowerHull(nodes_, lift, 1e-12 * top).max_edge_length();
}

double PLConvexFunction::value_scale() const {
    double m = 1.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

PLConvexFunction build_pl(std::vector<Vec2> nodes, std::vector<double> values) {
    return PLConvexFunction(std::move(nodes), std::move(values));
}

std::vector<double> MAMeasure::node_masses(std::size_t num_nodes) const {
    std::vector<double> m(num_nodes, 0.0);
    for (const auto& a : atoms) m[a.node] = a.mass;
    return m;
}

std::vector<Vec2> subgradient_cell(const LowerHull& hull, std::size_t vertex) {
    if (hull.is_boundary(vertex)) throw std::invalid_argument("boundary vertices have unbounded cells");
    std::vector<Vec2> cell;
    for (int t : hull.star(vertex)) {
        const Vec2 g = hull.gradient(t);
        if (cell.empty() || !same_gradient(cell.back(), g)) cell.push_back(g);
    }
    while (cell.size() > 1 && same_gradient(cell.front(), cell.back())) cell.pop_back();
    return cell;
}

double subgradient_cell_area(const LowerHull& hull, std::size_t vertex) {
    // Summation order is fixed by the star, so results do not depend on the
    // order in which vertices are visited.
    const auto star = hull.star(vertex);
    if (star.size() < 3) return 0.0;
    const Vec2 g0 = hull.gradient(star[0]);
    double twice = 0.0;
    for (std::size_t k = 1; k + 1 < star.size(); ++k)
        twice += orient2d(g0, hull.gradient(star[k]), hull.gradient(star[k + 1]));
    return 0.5 * twice;
}

MAMeasure ma_measure(const PLConvexFunction& f) {
    const auto& hull = f.hull();
    MAMeasure m;
    const auto grads = distinct_gradients(hull);
    const ConvexPolygon image(grads);
    m.gradient_image_area = image.empty() ? 0.0 : image.area();
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!hull.is_boundary(i)) {
            const double a = subgradient_cell_area(hull, i);
            m.atoms.push_back({static_cast<int>(i), a});
            m.total_mass += a;
            continue;
        }
        ConvexPolygon cell = image;
        for (int j : hull.link(i)) {
            if (cell.empty()) break;
            cell = cell.clipped(f.node(j) - f.node(i), f.value(j) - f.value(i));
        }
        m.boundary_cells.push_back({static_cast<int>(i), cell.empty() ? 0.0 : cell.area()});
    }
    return m;
}

PLConvexFunction legendre_pl(const PLConvexFunction& f) {
    const auto& hull = f.hull();
    std::vector<Vec2> dual;
    std::vector<double> vals;
    for (std::size_t t = 0; t < hull.num_triangles(); ++t) {
        const Vec2 g = hull.gradient(t);
        auto it = std::find_if(dual.begin(), dual.end(), [&](const Vec2& d) { return same_gradient(d, g); });
        if (it != dual.end()) continue;
        // The conjugate at a facet gradient is attained at the facet vertices.
        double v = 0.0;
        for (int k : hull.triangle(t)) v += g.dot(f.node(k)) - f.value(k);
        dual.push_back(g);
        vals.push_back(v / 3.0);
    }
    return PLConvexFunction(std::move(dual), std::move(vals));
}

std::vector<double> conjugate_values(const PLConvexFunction& f, std::span<const Vec2> points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < f.size(); ++i) best = std::max(best, p.dot(f.node(i)) - f.value(i));
        out.push_back(best);
    }
    return out;
}

PLConvexFunction legendre_pl(const PLConvexFunction& f, std::span<const Vec2> dual_nodes) {
    return PLConvexFunction(std::vector<Vec2>(dual_nodes.begin(), dual_nodes.end()),
                            conjugate_values(f, dual_nodes));
}

ContactReport contact_set(const PLConvexFunction& f, const Vec2& x0) {
    const auto& hull = f.hull();
    const int t0 = hull.locate(x0);
    if (t0 < 0) throw std::invalid_argument("contact base point lies outside the domain");
    ContactReport rep;
    rep.base = x0;
    const double snap = 1e-12 * std::max(1.0, f.mesh_size());
    int at_node = -1;
    for (int k : hull.triangle(t0))
        if ((f.node(k) - x0).norm() <= snap) at_node = k;

    Vec2 slope = Vec2::Zero();
    if (at_node >= 0) {
        // Mean of the distinct facet gradients: a point of the subgradient
        // cell that does not depend on how many triangles share a facet plane.
        std::vector<Vec2> distinct;
        for (int t : hull.star(at_node)) {
            const Vec2 g = hull.gradient(t);
            if (std::none_of(distinct.begin(), distinct.end(), [&](const Vec2& d) { return same_gradient(d, g); }))
                distinct.push_back(g);
        }
        for (const auto& g : distinct) slope += g;
        slope /= static_cast<double>(distinct.size());
        rep.base = f.node(at_node);
        rep.base_value = f.value(at_node);
    } else {
        // Average over every facet whose closure contains x0 (one, or two on an edge).
        int count = 0;
        const auto& tri = hull.triangle(t0);
        slope += hull.gradient(t0);
        ++count;
        for (int k = 0; k < 3; ++k) {
            const Vec2& a = f.node(tri[(k + 1) % 3]);
            const Vec2& b = f.node(tri[(k + 2) % 3]);
            const int u = hull.neighbor(t0, k);
            if (u >= 0 && std::abs(orient2d(a, b, x0)) <= snap * (b - a).norm()) {
                slope += hull.gradient(u);
                ++count;
            }
        }
        slope /= count;
        rep.base_value = f.evaluate(x0);
    }
    rep.slope = slope;
    rep.tolerance = 1e-9 * f.value_scale();
    std::vector<Vec2> touched;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (std::abs(f.value(i) - rep.plane(f.node(i))) <= rep.tolerance) {
            rep.nodes.push_back(static_cast<int>(i));
            touched.push_back(f.node(i));
        }
    }
    rep.diameter = set_diameter(touched);
    return rep;
}

ConvexPolygon SingularSet::convex_hull() const {
    std::vector<Vec2> pts = points;
    for (const auto& [a, b] : segments) {
        pts.push_back(a);
        pts.push_back(b);
    }
    return ConvexPolygon(std::move(pts));
}

double SingularSet::hull_distance(const Vec2& x) const { return convex_hull().distance(x); }

StrictConvexityMap strict_convexity_region(const PLConvexFunction& f, const SingularSet& gamma,
                                           double mesh_size) {
    StrictConvexityMap map;
    map.mesh_size = mesh_size > 0.0 ? mesh_size : f.mesh_size();
    map.strict.assign(f.size(), true);
    map.contact_diameter.assign(f.size(), 0.0);
    const ConvexPolygon c_gamma = gamma.convex_hull();
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.is_boundary(i)) continue;
        const auto rep = contact_set(f, f.node(i));
        map.contact_diameter[i] = rep.diameter;
        map.strict[i] = rep.diameter <= map.mesh_size * (1.0 + 1e-12);
        if (!map.strict[i] && c_gamma.distance(f.node(i)) > 2.0 * map.mesh_size)
            map.degenerate_outside.push_back(static_cast<int>(i));
    }
    return map;
}

void write_columnar(std::ostream& os, const PLConvexFunction& f, std::string_view header) {
    if (!header.empty()) os << "# " << header << '\n';
    os << "# x y value\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < f.size(); ++i)
        os << f.node(i).x() << ' ' << f.node(i).y() << ' ' << f.value(i) << '\n';
}

std::pair<std::vector<Vec2>, std::vector<double>> read_columnar(std::istream& is) {
    std::vector<Vec2> nodes;
    std::vector<double> values;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream row(line);
        double x, y, v;
        if (!(row >> x >> y >> v))
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected `x y value`");
        nodes.emplace_back(x, y);
        values.push_back(v);
    }
    return {std::move(nodes), std::move(values)};
}

void write_atoms(std::ostream& os, const PLConvexFunction& f, const MAMeasure& m) {
    os << "# node_index x y mass\n" << std::setprecision(17);
    for (const auto& a : m.atoms)
        os << a.node << ' ' << f.node(a.node).x() << ' ' << f.node(a.node).y() << ' ' << a.mass << '\n';
}

}  // namespace alex
