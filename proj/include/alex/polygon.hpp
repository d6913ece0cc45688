#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace alex {

using Vec2 = Eigen::Vector2d;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Twice the signed area of (a, b, c); positive when counter-clockwise.
inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    return cross(b - a, c - a);
}

/// Signed shoelace area; vertices may repeat.
double polygon_area(std::span<const Vec2> poly);

/// Convex hull (counter-clockwise, collinear points dropped).
std::vector<Vec2> convex_hull(std::vector<Vec2> pts);

/// A convex polygon stored counter-clockwise.
class ConvexPolygon {
public:
    ConvexPolygon() = default;
    /// Takes the convex hull of `vertices`.
    explicit ConvexPolygon(std::vector<Vec2> vertices);

    static ConvexPolygon regular(const Vec2& center, double radius, int sides,
                                 double phase = 0.0);
    static ConvexPolygon box(const Vec2& lo, const Vec2& hi);

    const std::vector<Vec2>& vertices() const { return v_; }
    bool empty() const { return v_.size() < 3; }
    double area() const;
    double diameter() const;

    /// Keeps {p : normal . p <= offset}.
    ConvexPolygon clipped(const Vec2& normal, double offset) const;

    bool contains(const Vec2& p, double tol = 0.0) const;
    /// Euclidean distance to the polygon (0 inside).
    double distance(const Vec2& p) const;
    /// Distance from an interior point to the boundary.
    double boundary_distance(const Vec2& p) const;

private:
    std::vector<Vec2> v_;
};

/// Distance from p to the segment [a, b].
double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

}  // namespace alex
