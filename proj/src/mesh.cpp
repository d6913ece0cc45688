#include "alex/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

namespace alex {

namespace {

void add_boundary(Mesh& m, const std::function<double(const Vec2&)>& sizing) {
    const auto& v = m.domain.vertices();
    for (std::size_t k = 0; k < v.size(); ++k) {
        const Vec2& a = v[k];
        const Vec2& b = v[(k + 1) % v.size()];
        const double len = (b - a).norm();
        // March with the local spacing, then shrink the steps so the last
        // one ends exactly at b.
        std::vector<double> ts{0.0};
        double t = 0.0;
        while (true) {
            t += sizing(a + std::min(t, len) / len * (b - a));
            if (t >= len * (1.0 - 1e-12)) break;
            ts.push_back(t);
        }
        const double scale = len / t;
        for (double s : ts) {
            m.nodes.push_back(a + s * scale / len * (b - a));
            m.boundary.push_back(1);
        }
    }
}

void add_required(Mesh& m, std::span<const Vec2> required, const std::function<double(const Vec2&)>& sizing) {
    for (const auto& r : required) {
        if (!m.domain.contains(r) || m.domain.boundary_distance(r) <= 1e-12 * (1.0 + r.norm()))
            throw std::invalid_argument("required node lies outside the open domain");
        const double clear = 0.5 * sizing(r);
        std::vector<Vec2> nodes;
        std::vector<char> bnd;
        for (std::size_t i = 0; i < m.nodes.size(); ++i) {
            if (!m.boundary[i] && (m.nodes[i] - r).norm() < clear) continue;
            nodes.push_back(m.nodes[i]);
            bnd.push_back(m.boundary[i]);
        }
        m.nodes = std::move(nodes);
        m.boundary = std::move(bnd);
    }
    for (const auto& r : required) {
        if (std::none_of(m.nodes.begin(), m.nodes.end(), [&](const Vec2& p) { return (p - r).norm() < 1e-12; })) {
            m.nodes.push_back(r);
            m.boundary.push_back(0);
        }
    }
}

}  // namespace

std::size_t Mesh::num_interior() const {
    return static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), 0));
}

int Mesh::nearest(const Vec2& p) const {
    int best = -1;
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double e = (nodes[i] - p).squaredNorm();
        if (e < d) {
            d = e;
            best = static_cast<int>(i);
        }
    }
    return best;
}

ConvexPolygon ball_polygon(double radius, int sides, const Vec2& center) {
    if (sides < 3 || !(radius > 0.0)) throw std::invalid_argument("ball polygon needs radius > 0, sides >= 3");
    return ConvexPolygon::regular(center, radius, sides);
}

Mesh uniform_mesh(const ConvexPolygon& domain, double h, std::span<const Vec2> required, const Vec2& anchor) {
    if (!(h > 0.0)) throw std::invalid_argument("mesh size must be positive");
    if (domain.empty()) throw std::invalid_argument("empty domain");
    Mesh m;
    m.domain = domain;
    m.h = m.h_min = h;
    const auto sizing = [h](const Vec2&) { return h; };
    add_boundary(m, sizing);

    Vec2 lo = domain.vertices()[0], hi = lo;
    for (const auto& v : domain.vertices()) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const long i0 = static_cast<long>(std::floor((lo.x() - anchor.x()) / h));
    const long i1 = static_cast<long>(std::ceil((hi.x() - anchor.x()) / h));
    const long j0 = static_cast<long>(std::floor((lo.y() - anchor.y()) / h));
    const long j1 = static_cast<long>(std::ceil((hi.y() - anchor.y()) / h));
    for (long i = i0; i <= i1; ++i)
        for (long j = j0; j <= j1; ++j) {
            const Vec2 p = anchor + Vec2(static_cast<double>(i) * h, static_cast<double>(j) * h);
            if (!domain.contains(p) || domain.boundary_distance(p) < 0.5 * h) continue;
            m.nodes.push_back(p);
            m.boundary.push_back(0);
        }
    add_required(m, required, sizing);
    return m;
}

Mesh graded_mesh(const ConvexPolygon& domain, const std::function<double(const Vec2&)>& sizing,
                 std::span<const Vec2> required) {
    if (domain.empty()) throw std::invalid_argument("empty domain");
    Mesh m;
    m.domain = domain;
    double extent = 0.0;
    for (const auto& v : domain.vertices()) extent = std::max(extent, v.cwiseAbs().maxCoeff());
    const double half = std::exp2(std::ceil(std::log2(extent)));
    constexpr int kMaxDepth = 30;
    const double unit = 2.0 * half / static_cast<double>(1L << kMaxDepth);

    std::set<std::pair<long, long>> corners;
    struct Cell {
        long i, j;  // lower-left corner in units
        int depth;
    };
    std::vector<Cell> stack{{0, 0, 0}};
    m.h = 0.0;
    m.h_min = std::numeric_limits<double>::infinity();
    while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        const long span = 1L << (kMaxDepth - c.depth);
        const double side = static_cast<double>(span) * unit;
        const Vec2 lo(-half + static_cast<double>(c.i) * unit, -half + static_cast<double>(c.j) * unit);
        const Vec2 box[5] = {lo, lo + Vec2(side, 0), lo + Vec2(0, side), lo + Vec2(side, side),
                             lo + Vec2(0.5 * side, 0.5 * side)};
        // Cells entirely outside the domain are dropped.
        const ConvexPolygon cell = ConvexPolygon::box(box[0], box[3]);
        bool outside = true;
        for (const auto& b : box)
            if (domain.contains(b)) outside = false;
        for (const auto& v : domain.vertices())
            if (cell.contains(v)) outside = false;
        if (outside && domain.distance(box[4]) > side) continue;
        double want = std::numeric_limits<double>::infinity();
        for (const auto& b : box) want = std::min(want, sizing(b));
        if (side > want && c.depth < kMaxDepth) {
            const long s2 = span / 2;
            for (long di : {0L, s2})
                for (long dj : {0L, s2}) stack.push_back({c.i + di, c.j + dj, c.depth + 1});
            continue;
        }
        for (long di : {0L, span})
            for (long dj : {0L, span}) corners.emplace(c.i + di, c.j + dj);
    }
    for (const auto& [i, j] : corners) {
        const Vec2 p(-half + static_cast<double>(i) * unit, -half + static_cast<double>(j) * unit);
        if (!domain.contains(p)) continue;
        const double s = sizing(p);
        if (domain.boundary_distance(p) < 0.5 * s) continue;
        m.nodes.push_back(p);
        m.boundary.push_back(0);
        m.h = std::max(m.h, s);
        m.h_min = std::min(m.h_min, s);
    }
    add_boundary(m, sizing);
    for (const auto& v : domain.vertices()) {
        m.h = std::max(m.h, sizing(v));
        m.h_min = std::min(m.h_min, sizing(v));
    }
    add_required(m, required, sizing);
    return m;
}

std::function<double(const Vec2&)> point_grading(std::vector<Vec2> centers, double ratio, double h_min,
                                                 double h_max) {
    if (!(h_min > 0.0) || h_max < h_min || !(ratio > 0.0)) throw std::invalid_argument("bad grading parameters");
    return [centers = std::move(centers), ratio, h_min, h_max](const Vec2& x) {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) d = std::min(d, (x - c).norm());
        if (centers.empty()) return h_max;
        return std::clamp(ratio * d, h_min, h_max);
    };
}

}  // namespace alex
