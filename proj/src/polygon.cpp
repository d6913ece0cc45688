#include "alex/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace alex {

double polygon_area(std::span<const Vec2> poly) {
    const std::size_t m = poly.size();
    if (m < 3) return 0.0;
    // Anchor at the first vertex so large coordinates do not cancel.
    double twice = 0.0;
    for (std::size_t k = 1; k + 1 < m; ++k) twice += orient2d(poly[0], poly[k], poly[k + 1]);
    return 0.5 * twice;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && orient2d(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && orient2d(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) : v_(convex_hull(std::move(vertices))) {}

ConvexPolygon ConvexPolygon::regular(const Vec2& center, double radius, int sides, double phase) {
    std::vector<Vec2> v;
    v.reserve(sides);
    for (int k = 0; k < sides; ++k) {
        const double t = phase + 2.0 * std::numbers::pi * k / sides;
        v.emplace_back(center.x() + radius * std::cos(t), center.y() + radius * std::sin(t));
    }
    ConvexPolygon poly;
    poly.v_ = std::move(v);
    return poly;
}

ConvexPolygon ConvexPolygon::box(const Vec2& lo, const Vec2& hi) {
    return ConvexPolygon({lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())});
}

double ConvexPolygon::area() const { return polygon_area(v_); }

double ConvexPolygon::diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i)
        for (std::size_t j = i + 1; j < v_.size(); ++j) d = std::max(d, (v_[i] - v_[j]).norm());
    return d;
}

ConvexPolygon ConvexPolygon::clipped(const Vec2& normal, double offset) const {
    ConvexPolygon out;
    const std::size_t m = v_.size();
    if (m == 0) return out;
    out.v_.reserve(m + 1);
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2& a = v_[i];
        const Vec2& b = v_[(i + 1) % m];
        const double sa = normal.dot(a) - offset;
        const double sb = normal.dot(b) - offset;
        if (sa <= 0.0) out.v_.push_back(a);
        if ((sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0)) {
            const double t = sa / (sa - sb);
            out.v_.push_back(a + t * (b - a));
        }
    }
    if (out.v_.size() < 3) out.v_.clear();
    return out;
}

bool ConvexPolygon::contains(const Vec2& p, double tol) const {
    const std::size_t m = v_.size();
    if (m < 3) return false;
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2& a = v_[i];
        const Vec2& b = v_[(i + 1) % m];
        const double len = (b - a).norm();
        if (orient2d(a, b, p) < -tol * len) return false;
    }
    return true;
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double ConvexPolygon::boundary_distance(const Vec2& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v_.size(); ++i)
        d = std::min(d, segment_distance(p, v_[i], v_[(i + 1) % v_.size()]));
    return d;
}

double ConvexPolygon::distance(const Vec2& p) const {
    if (v_.empty()) return std::numeric_limits<double>::infinity();
    if (v_.size() == 1) return (p - v_[0]).norm();
    if (v_.size() == 2) return segment_distance(p, v_[0], v_[1]);
    if (contains(p)) return 0.0;
    return boundary_distance(p);
}

}  // namespace alex
