#pragma once

// Brute-force oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "alex/polygon.hpp"

namespace oracle {

using alex::Vec2;

// Vertex enumeration of {p : n_k . p <= b_k}: every pairwise line
// intersection that satisfies all constraints.
inline double halfplane_area(const std::vector<std::pair<Vec2, double>>& hp) {
    std::vector<Vec2> verts;
    for (std::size_t a = 0; a < hp.size(); ++a)
        for (std::size_t b = a + 1; b < hp.size(); ++b) {
            const Vec2& na = hp[a].first;
            const Vec2& nb = hp[b].first;
            const double det = na.x() * nb.y() - na.y() * nb.x();
            if (std::abs(det) < 1e-14 * na.norm() * nb.norm()) continue;
            const Vec2 p((hp[a].second * nb.y() - na.y() * hp[b].second) / det,
                         (na.x() * hp[b].second - hp[a].second * nb.x()) / det);
            bool ok = true;
            for (const auto& [n, off] : hp)
                if (n.dot(p) > off + 1e-11 * (1.0 + std::abs(off))) {
                    ok = false;
                    break;
                }
            if (ok) verts.push_back(p);
        }
    // Order around the centroid and take the shoelace area.
    if (verts.size() < 3) return 0.0;
    Vec2 c = Vec2::Zero();
    for (const auto& v : verts) c += v;
    c /= verts.size();
    std::sort(verts.begin(), verts.end(), [&](const Vec2& a, const Vec2& b) {
        return std::atan2(a.y() - c.y(), a.x() - c.x()) < std::atan2(b.y() - c.y(), b.x() - c.x());
    });
    double twice = 0.0;
    for (std::size_t k = 0; k < verts.size(); ++k) {
        const Vec2& a = verts[k];
        const Vec2& b = verts[(k + 1) % verts.size()];
        twice += a.x() * b.y() - a.y() * b.x();
    }
    return 0.5 * twice;
}

// Brute-force subgradient cell of node i against every other node, clipped to
// the hull of the supplied polygon (given as CCW vertices) when non-empty.
inline double brute_cell_area(const std::vector<Vec2>& x, const std::vector<double>& u, std::size_t i,
                       const std::vector<Vec2>& clip = {}) {
    std::vector<std::pair<Vec2, double>> hp;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (j != i) hp.emplace_back(x[j] - x[i], u[j] - u[i]);
    for (std::size_t k = 0; k < clip.size(); ++k) {
        const Vec2& a = clip[k];
        const Vec2& b = clip[(k + 1) % clip.size()];
        const Vec2 n(b.y() - a.y(), a.x() - b.x());  // outward for CCW
        hp.emplace_back(n, n.dot(a));
    }
    return halfplane_area(hp);
}

struct Instance {
    std::vector<Vec2> x;
    std::vector<double> u;
};

inline std::vector<Instance> small_instances() {
    std::vector<Instance> out;
    out.push_back({{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}, {0, 1, 1, 1, 1}});
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int inst = 0; inst < 40; ++inst) {
        const int m = 5 + inst % 8;  // 5..12 nodes
        Instance I;
        // Corners of a box keep a non-trivial hull; the rest are random.
        I.x = {{-1.1, -1.1}, {1.1, -1.1}, {1.1, 1.1}, {-1.1, 1.1}};
        while (static_cast<int>(I.x.size()) < m) I.x.emplace_back(U(rng), U(rng));
        const Vec2 q(U(rng) * 0.5, U(rng) * 0.5);
        const double w = 0.5 + U(rng) * 0.4;
        for (const auto& p : I.x) I.u.push_back(0.5 * p.squaredNorm() + w * (p - q).norm() + 0.3 * p.x());
        out.push_back(I);
    }
    return out;
}

}  // namespace oracle
