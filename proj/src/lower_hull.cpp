#include "alex/lower_hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace alex {

namespace {

// Position along a Hilbert curve on a 2^16 grid; keeps the walk short.
std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y) {
    std::uint64_t d = 0;
    for (std::uint32_t s = 1u << 15; s > 0; s >>= 1) {
        const std::uint32_t rx = (x & s) ? 1u : 0u;
        const std::uint32_t ry = (y & s) ? 1u : 0u;
        d += static_cast<std::uint64_t>(s) * s * ((3u * rx) ^ ry);
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
    }
    return d;
}

constexpr int kNext[3] = {1, 2, 0};
constexpr int kPrev[3] = {2, 0, 1};

}  // namespace

LowerHull::LowerHull(std::span<const Vec2> points, std::span<const double> heights,
                     double height_tol)
    : pts_(points.begin(), points.end()), h_(heights.begin(), heights.end()), tol_(height_tol) {
    if (pts_.size() != h_.size()) throw std::invalid_argument("points/heights size mismatch");
    if (pts_.size() < 3) throw GeometryError("lower hull needs at least 3 points");
    for (std::size_t i = 0; i < pts_.size(); ++i)
        if (!pts_[i].allFinite() || !std::isfinite(h_[i]))
            throw std::invalid_argument("non-finite node or value at index " + std::to_string(i));

    Vec2 lo = pts_[0], hi = pts_[0];
    for (const auto& p : pts_) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double scale = std::max((hi - lo).maxCoeff(), std::numeric_limits<double>::min());
    orient_tol_ = 1e-12 * scale;

    redundant_.assign(pts_.size(), false);
    boundary_.assign(pts_.size(), false);
    vertex_tri_.assign(pts_.size(), -1);

    build_initial_hull();

    std::vector<int> order;
    std::vector<std::uint64_t> key(pts_.size());
    for (std::size_t i = 0; i < pts_.size(); ++i) {
        if (vertex_tri_[i] >= 0) continue;
        const Vec2 s = (pts_[i] - lo) / scale * 65535.0;
        key[i] = hilbert_index(static_cast<std::uint32_t>(s.x()), static_cast<std::uint32_t>(s.y()));
        order.push_back(static_cast<int>(i));
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
    for (int p : order) insert(p);

    // Tolerance-driven skips can leave non-convex edges behind.
    for (int pass = 0; pass < 256; ++pass) {
        bool changed = false;
        for (std::size_t t = 0; t < tri_.size(); ++t) {
            if (dead_[t]) continue;
            for (int k = 0; k < 3; ++k) {
                if (nbr_[t][k] < 0 || edge_defect(static_cast<int>(t), k) <= tol_) continue;
                if (fix_edge(static_cast<int>(t), k)) {
                    changed = true;
                    break;
                }
            }
        }
        stack_.clear();
        if (!changed) break;
    }
    finalize();
    if (max_convexity_defect() > 10.0 * tol_)
        throw GeometryError("lower hull construction left a non-convex edge (defect " +
                            std::to_string(max_convexity_defect()) + ")");
}

void LowerHull::build_initial_hull() {
    std::vector<int> idx(pts_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return pts_[a].x() < pts_[b].x() || (pts_[a].x() == pts_[b].x() && pts_[a].y() < pts_[b].y());
    });
    for (std::size_t i = 1; i < idx.size(); ++i)
        if ((pts_[idx[i]] - pts_[idx[i - 1]]).norm() <= orient_tol_)
            throw GeometryError("duplicate nodes at indices " + std::to_string(idx[i - 1]) + " and " +
                                std::to_string(idx[i]));

    // Monotone chain with exact pops; a tolerance here would break the
    // x-ordering of nearly vertical columns. Near-collinear vertices are
    // pruned afterwards and re-enter as edge insertions.
    std::vector<int> hull(2 * idx.size());
    std::size_t k = 0;
    for (int p : idx) {
        while (k >= 2 && orient2d(pts_[hull[k - 2]], pts_[hull[k - 1]], pts_[p]) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = idx.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && orient2d(pts_[hull[k - 2]], pts_[hull[k - 1]], pts_[idx[i]]) <= 0.0) --k;
        hull[k++] = idx[i];
    }
    hull.resize(k - 1);
    for (bool pruned = true; pruned && hull.size() > 3;) {
        pruned = false;
        for (std::size_t i = 0; i < hull.size() && hull.size() > 3; ++i) {
            const Vec2& a = pts_[hull[(i + hull.size() - 1) % hull.size()]];
            const Vec2& b = pts_[hull[i]];
            const Vec2& c = pts_[hull[(i + 1) % hull.size()]];
            if (orient2d(a, b, c) <= orient_tol_ * (c - a).norm()) {
                hull.erase(hull.begin() + static_cast<std::ptrdiff_t>(i));
                pruned = true;
            }
        }
    }
    if (hull.size() < 3 ||
        orient2d(pts_[hull[0]], pts_[hull[1]], pts_[hull[2]]) <= orient_tol_ * (pts_[hull[2]] - pts_[hull[0]]).norm())
        throw GeometryError("degenerate (collinear) node set");

    // Fan from hull[0]; neighbours across the internal diagonals.
    const int m = static_cast<int>(hull.size());
    for (int j = 1; j + 1 < m; ++j) {
        std::array<int, 3> v{hull[0], hull[j], hull[j + 1]};
        // Edge opposite hull[0] is on the hull; opposite hull[j] is the next
        // diagonal, opposite hull[j+1] the previous one.
        std::array<int, 3> n{-1, j + 1 < m - 1 ? j : -1, j > 1 ? j - 2 : -1};
        new_triangle(v, n);
    }
    // Lawson flips: points in convex position always give convex quads.
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t t = 0; t < tri_.size(); ++t)
            for (int e = 0; e < 3; ++e)
                if (nbr_[t][e] >= 0 && edge_defect(static_cast<int>(t), e) > tol_ &&
                    flip(static_cast<int>(t), e))
                    changed = true;
    }
    last_ = 0;
}

int LowerHull::new_triangle(std::array<int, 3> v, std::array<int, 3> n) {
    tri_.push_back(v);
    nbr_.push_back(n);
    dead_.push_back(false);
    const int t = static_cast<int>(tri_.size()) - 1;
    for (int x : v) vertex_tri_[x] = t;
    return t;
}

int LowerHull::find_edge(int t, int a, int b) const {
    for (int k = 0; k < 3; ++k) {
        const int x = tri_[t][kNext[k]], y = tri_[t][kPrev[k]];
        if ((x == a && y == b) || (x == b && y == a)) return k;
    }
    return -1;
}

void LowerHull::set_neighbor_ref(int tri, int old_t, int new_t) {
    if (tri < 0) return;
    for (int k = 0; k < 3; ++k)
        if (nbr_[tri][k] == old_t) {
            nbr_[tri][k] = new_t;
            return;
        }
}

void LowerHull::rotate_to(int t, int vertex) {
    while (tri_[t][0] != vertex) {
        std::rotate(tri_[t].begin(), tri_[t].begin() + 1, tri_[t].end());
        std::rotate(nbr_[t].begin(), nbr_[t].begin() + 1, nbr_[t].end());
    }
}

double LowerHull::plane_height(int t, const Vec2& q) const {
    const auto& v = tri_[t];
    const Vec2& a = pts_[v[0]];
    const Vec2& b = pts_[v[1]];
    const Vec2& c = pts_[v[2]];
    const double area = orient2d(a, b, c);
    const double la = orient2d(q, b, c) / area;
    const double lb = orient2d(a, q, c) / area;
    const double lc = 1.0 - la - lb;
    return la * h_[v[0]] + lb * h_[v[1]] + lc * h_[v[2]];
}

double LowerHull::edge_defect(int t, int k) const {
    const int u = nbr_[t][k];
    if (u < 0) return -std::numeric_limits<double>::infinity();
    const int a = tri_[t][kNext[k]], b = tri_[t][kPrev[k]];
    int d = -1;
    for (int x : tri_[u])
        if (x != a && x != b) d = x;
    return plane_height(t, pts_[d]) - h_[d];
}

LowerHull::Located LowerHull::walk(const Vec2& p, int start) const {
    int t = start;
    const std::size_t cap = 4 * tri_.size() + 64;
    for (std::size_t step = 0; step < cap; ++step) {
        rng_ ^= rng_ << 13;
        rng_ ^= rng_ >> 17;
        rng_ ^= rng_ << 5;
        const int r = static_cast<int>(rng_ % 3u);
        bool moved = false;
        for (int j = 0; j < 3 && !moved; ++j) {
            const int k = (r + j) % 3;
            const Vec2& a = pts_[tri_[t][kNext[k]]];
            const Vec2& b = pts_[tri_[t][kPrev[k]]];
            if (orient2d(a, b, p) < -orient_tol_ * (b - a).norm()) {
                if (nbr_[t][k] < 0) return {};
                t = nbr_[t][k];
                moved = true;
            }
        }
        if (moved) continue;
        Located loc;
        loc.tri = t;
        for (int k = 0; k < 3; ++k) {
            if ((pts_[tri_[t][k]] - p).norm() <= orient_tol_) {
                loc.vertex = tri_[t][k];
                return loc;
            }
        }
        for (int k = 0; k < 3; ++k) {
            const Vec2& a = pts_[tri_[t][kNext[k]]];
            const Vec2& b = pts_[tri_[t][kPrev[k]]];
            if (std::abs(orient2d(a, b, p)) <= orient_tol_ * (b - a).norm()) loc.edge = k;
        }
        return loc;
    }
    throw GeometryError("point location did not terminate");
}

void LowerHull::insert(int p) {
    int start = last_;
    if (start < 0 || start >= static_cast<int>(tri_.size()) || dead_[start]) {
        start = 0;
        while (dead_[start]) ++start;
    }
    const Located loc = walk(pts_[p], start);
    if (loc.tri < 0) throw GeometryError("point outside the initial hull");
    if (loc.vertex >= 0)
        throw GeometryError("duplicate nodes at indices " + std::to_string(loc.vertex) + " and " +
                            std::to_string(p));
    if (h_[p] > plane_height(loc.tri, pts_[p]) + tol_) {
        redundant_[p] = true;
        last_ = loc.tri;
        return;
    }
    if (loc.edge >= 0)
        split_edge(loc.tri, loc.edge, p);
    else
        split_triangle(loc.tri, p);
    restore(p);
    last_ = vertex_tri_[p];
}

void LowerHull::split_triangle(int t, int p) {
    const auto [a, b, c] = tri_[t];
    const auto [na, nb, nc] = nbr_[t];
    const int tb = static_cast<int>(tri_.size());
    const int tc = tb + 1;
    tri_[t] = {p, b, c};
    nbr_[t] = {na, tb, tc};
    new_triangle({p, c, a}, {nb, tc, t});
    new_triangle({p, a, b}, {nc, t, tb});
    set_neighbor_ref(nb, t, tb);
    set_neighbor_ref(nc, t, tc);
    for (int x : tri_[t]) vertex_tri_[x] = t;
    stack_.push_back({t, p});
    stack_.push_back({tb, p});
    stack_.push_back({tc, p});
}

void LowerHull::split_edge(int t, int k, int p) {
    rotate_to(t, tri_[t][k]);  // t = (c, a, b), p on ab
    const auto [c, a, b] = tri_[t];
    const int u = nbr_[t][0];
    const int t_bc = nbr_[t][1];
    const int t_ca = nbr_[t][2];
    if (u < 0) {
        const int t2 = static_cast<int>(tri_.size());
        tri_[t] = {p, b, c};
        nbr_[t] = {t_bc, t2, -1};
        new_triangle({p, c, a}, {t_ca, -1, t});
        set_neighbor_ref(t_ca, t, t2);
        for (int x : tri_[t]) vertex_tri_[x] = t;
        stack_.push_back({t, p});
        stack_.push_back({t2, p});
        return;
    }
    int j = 0;
    while (tri_[u][j] == a || tri_[u][j] == b) ++j;
    rotate_to(u, tri_[u][j]);  // u = (d, b, a)
    const int d = tri_[u][0];
    const int u_ad = nbr_[u][1];
    const int u_db = nbr_[u][2];
    const int t2 = static_cast<int>(tri_.size());
    const int t4 = t2 + 1;
    tri_[t] = {p, b, c};
    nbr_[t] = {t_bc, t2, t4};
    tri_[u] = {p, a, d};
    nbr_[u] = {u_ad, t4, t2};
    new_triangle({p, c, a}, {t_ca, u, t});
    new_triangle({p, d, b}, {u_db, t, u});
    set_neighbor_ref(t_ca, t, t2);
    set_neighbor_ref(u_db, u, t4);
    for (int x : tri_[t]) vertex_tri_[x] = t;
    for (int x : tri_[u]) vertex_tri_[x] = u;
    for (int tt : {t, u, t2, t4}) stack_.push_back({tt, p});
}

bool LowerHull::flip(int t, int k) {
    const int p = tri_[t][k];
    const int a = tri_[t][kNext[k]];
    const int b = tri_[t][kPrev[k]];
    const int u = nbr_[t][k];
    if (u < 0) return false;
    int j = 0;
    while (tri_[u][j] == a || tri_[u][j] == b) ++j;
    const int d = tri_[u][j];
    const double tol_ab = orient_tol_ * (pts_[d] - pts_[p]).norm();
    if (orient2d(pts_[p], pts_[a], pts_[d]) <= tol_ab || orient2d(pts_[p], pts_[d], pts_[b]) <= tol_ab)
        return false;
    const int t_pa = nbr_[t][kPrev[k]];
    const int t_bp = nbr_[t][kNext[k]];
    const int u_ad = nbr_[u][kNext[j]];
    const int u_db = nbr_[u][kPrev[j]];
    tri_[t] = {p, a, d};
    nbr_[t] = {u_ad, u, t_pa};
    tri_[u] = {p, d, b};
    nbr_[u] = {u_db, t_bp, t};
    set_neighbor_ref(u_ad, u, t);
    set_neighbor_ref(t_bp, t, u);
    for (int x : tri_[t]) vertex_tri_[x] = t;
    vertex_tri_[b] = u;
    return true;
}

bool LowerHull::remove_vertex(int vertex, int p) {
    // Closed star in counter-clockwise order; hull vertices are never removed.
    std::vector<int> star;
    const int t0 = vertex_tri_[vertex];
    if (t0 < 0) return false;
    int t = t0;
    do {
        star.push_back(t);
        int k = 0;
        while (tri_[t][k] != vertex) ++k;
        t = nbr_[t][kNext[k]];
        if (t < 0) return false;
    } while (t != t0 && star.size() < 64);
    if (t != t0) return false;
    const std::size_t m = star.size();
    std::vector<int> ring(m), outer(m);
    for (std::size_t s = 0; s < m; ++s) {
        rotate_to(star[s], vertex);
        ring[s] = tri_[star[s]][1];
        outer[s] = nbr_[star[s]][0];  // across the link edge ring[s] -> ring[s+1]
    }

    // Ear clipping of the star-shaped hole.
    struct Ear {
        std::array<int, 3> v;
    };
    std::vector<Ear> ears;
    std::vector<int> poly(m);
    std::iota(poly.begin(), poly.end(), 0);
    while (poly.size() > 3) {
        const std::size_t n = poly.size();
        std::size_t pick = n;
        for (std::size_t i = 0; i < n && pick == n; ++i) {
            const int a = ring[poly[(i + n - 1) % n]], b = ring[poly[i]], c = ring[poly[(i + 1) % n]];
            if (orient2d(pts_[a], pts_[b], pts_[c]) <= orient_tol_ * (pts_[c] - pts_[a]).norm()) continue;
            bool empty = true;
            for (std::size_t j = 0; j < n && empty; ++j) {
                const int x = ring[poly[j]];
                if (x == a || x == b || x == c) continue;
                if (orient2d(pts_[a], pts_[b], pts_[x]) >= 0.0 && orient2d(pts_[b], pts_[c], pts_[x]) >= 0.0 &&
                    orient2d(pts_[c], pts_[a], pts_[x]) >= 0.0)
                    empty = false;
            }
            if (empty) pick = i;
        }
        if (pick == n) return false;
        ears.push_back({{ring[poly[(pick + n - 1) % n]], ring[poly[pick]], ring[poly[(pick + 1) % n]]}});
        poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    ears.push_back({{ring[poly[0]], ring[poly[1]], ring[poly[2]]}});
    if (orient2d(pts_[ears.back().v[0]], pts_[ears.back().v[1]], pts_[ears.back().v[2]]) <= 0.0) return false;

    // Reuse the star slots for the m - 2 new triangles and kill the rest.
    std::vector<int> slots(star.begin(), star.begin() + static_cast<std::ptrdiff_t>(ears.size()));
    for (std::size_t s = ears.size(); s < m; ++s) dead_[star[s]] = true;
    for (std::size_t e = 0; e < ears.size(); ++e) {
        tri_[slots[e]] = ears[e].v;
        nbr_[slots[e]] = {-1, -1, -1};
    }
    // Interior adjacency between new triangles.
    for (std::size_t e = 0; e < ears.size(); ++e)
        for (int k = 0; k < 3; ++k) {
            const int a = ears[e].v[kNext[k]], b = ears[e].v[kPrev[k]];
            for (std::size_t f = 0; f < ears.size(); ++f) {
                if (f == e) continue;
                const int kk = find_edge(slots[f], a, b);
                if (kk >= 0) nbr_[slots[e]][k] = slots[f];
            }
        }
    // Outer adjacency across the link edges.
    for (std::size_t s = 0; s < m; ++s) {
        const int a = ring[s], b = ring[(s + 1) % m];
        for (std::size_t e = 0; e < ears.size(); ++e) {
            const int k = find_edge(slots[e], a, b);
            if (k < 0) continue;
            nbr_[slots[e]][k] = outer[s];
            if (outer[s] >= 0) {
                const int ko = find_edge(outer[s], a, b);
                nbr_[outer[s]][ko] = slots[e];
            }
        }
    }
    redundant_[vertex] = true;
    vertex_tri_[vertex] = -1;
    for (int slot : slots) {
        for (int x : tri_[slot]) vertex_tri_[x] = slot;
        for (int k = 0; k < 3; ++k)
            if (tri_[slot][k] == p) stack_.push_back({slot, p});
    }
    return true;
}

int LowerHull::degree(int vertex) const {
    const int t0 = vertex_tri_[vertex];
    int t = t0, d = 0;
    do {
        ++d;
        int k = 0;
        while (tri_[t][k] != vertex) ++k;
        t = nbr_[t][kNext[k]];
        if (t < 0) return -1;
    } while (t != t0);
    return d;
}

bool LowerHull::fix_edge(int t, int k) {
    const int u = nbr_[t][k];
    if (u < 0) return false;
    if (flip(t, k)) return true;
    // Reflex quad (q, a, d, b): the reflex vertex r is redundant when it has
    // degree three, or when it lies on the segment q-d (degenerate quad).
    const int q = tri_[t][k];
    const int a = tri_[t][kNext[k]];
    const int b = tri_[t][kPrev[k]];
    int j = 0;
    while (tri_[u][j] == a || tri_[u][j] == b) ++j;
    const int d = tri_[u][j];
    const double oa = orient2d(pts_[q], pts_[a], pts_[d]);
    const double ob = orient2d(pts_[q], pts_[d], pts_[b]);
    const int r = oa <= ob ? a : b;
    const double o = std::min(oa, ob);
    const double slack = orient_tol_ * (pts_[d] - pts_[q]).norm();
    if (o > slack) return false;
    if (std::abs(o) <= slack || degree(r) == 3) return remove_vertex(r, q);
    return false;
}

void LowerHull::restore(int p) {
    // A reflex link edge whose reflex vertex is not yet removable is skipped;
    // later flips can change that, so the star of p is rescanned until a
    // pass changes nothing.
    for (int round = 0; round < 1000; ++round) {
        bool changed = false;
        while (!stack_.empty()) {
            const auto [t, q] = stack_.back();
            stack_.pop_back();
            if (dead_[t]) continue;
            int k = -1;
            for (int i = 0; i < 3; ++i)
                if (tri_[t][i] == q) k = i;
            if (k < 0 || nbr_[t][k] < 0 || edge_defect(t, k) <= tol_) continue;
            const int u = nbr_[t][k];
            if (flip(t, k)) {
                stack_.push_back({t, q});
                stack_.push_back({u, q});
                changed = true;
            } else if (fix_edge(t, k)) {
                changed = true;
            }
        }
        if (!changed || vertex_tri_[p] < 0) return;
        for (int t : star_of(p))
            for (int k = 0; k < 3; ++k)
                if (tri_[t][k] == p && nbr_[t][k] >= 0 && edge_defect(t, k) > tol_) stack_.push_back({t, p});
        if (stack_.empty()) return;
    }
}

std::vector<int> LowerHull::star_of(int vertex) const {
    std::vector<int> out;
    const int t0 = vertex_tri_[vertex];
    if (t0 < 0) return out;
    int t = t0;
    do {
        out.push_back(t);
        int k = 0;
        while (tri_[t][k] != vertex) ++k;
        t = nbr_[t][kNext[k]];
    } while (t >= 0 && t != t0);
    if (t < 0) {
        t = t0;
        while (true) {
            int k = 0;
            while (tri_[t][k] != vertex) ++k;
            t = nbr_[t][kPrev[k]];
            if (t < 0) break;
            out.push_back(t);
        }
    }
    return out;
}

void LowerHull::finalize() {
    std::vector<int> remap(tri_.size(), -1);
    int live = 0;
    for (std::size_t t = 0; t < tri_.size(); ++t)
        if (!dead_[t]) remap[t] = live++;
    std::vector<std::array<int, 3>> tri;
    std::vector<std::array<int, 3>> nbr;
    tri.reserve(live);
    nbr.reserve(live);
    for (std::size_t t = 0; t < tri_.size(); ++t) {
        if (dead_[t]) continue;
        tri.push_back(tri_[t]);
        auto n = nbr_[t];
        for (int& x : n) x = x >= 0 ? remap[x] : -1;
        nbr.push_back(n);
    }
    tri_ = std::move(tri);
    nbr_ = std::move(nbr);
    dead_.assign(tri_.size(), false);
    std::fill(vertex_tri_.begin(), vertex_tri_.end(), -1);
    std::fill(boundary_.begin(), boundary_.end(), false);
    grad_.resize(tri_.size());
    for (std::size_t t = 0; t < tri_.size(); ++t) {
        const auto& v = tri_[t];
        for (int k = 0; k < 3; ++k) {
            vertex_tri_[v[k]] = static_cast<int>(t);
            if (nbr_[t][k] < 0) {
                boundary_[v[kNext[k]]] = true;
                boundary_[v[kPrev[k]]] = true;
            }
        }
        const Vec2 e1 = pts_[v[1]] - pts_[v[0]];
        const Vec2 e2 = pts_[v[2]] - pts_[v[0]];
        const double d1 = h_[v[1]] - h_[v[0]];
        const double d2 = h_[v[2]] - h_[v[0]];
        const double det = cross(e1, e2);
        grad_[t] = Vec2((d1 * e2.y() - d2 * e1.y()) / det, (e1.x() * d2 - e2.x() * d1) / det);
    }
    for (std::size_t i = 0; i < pts_.size(); ++i)
        if (!redundant_[i] && vertex_tri_[i] < 0) redundant_[i] = true;
    last_ = 0;
}

std::size_t LowerHull::num_redundant() const {
    return static_cast<std::size_t>(std::count(redundant_.begin(), redundant_.end(), true));
}

std::vector<int> LowerHull::star(std::size_t i) const {
    std::vector<int> out;
    int t = vertex_tri_[i];
    if (t < 0) return out;
    auto index_of = [&](int tt) {
        int k = 0;
        while (tri_[tt][k] != static_cast<int>(i)) ++k;
        return k;
    };
    if (boundary_[i]) {
        // Rewind clockwise to the hull edge.
        for (int prev = nbr_[t][kPrev[index_of(t)]]; prev >= 0; prev = nbr_[t][kPrev[index_of(t)]])
            t = prev;
    }
    const int first = t;
    do {
        out.push_back(t);
        t = nbr_[t][kNext[index_of(t)]];
    } while (t >= 0 && t != first);
    return out;
}

std::vector<int> LowerHull::link(std::size_t i) const {
    const auto s = star(i);
    std::vector<int> out;
    for (int t : s) {
        int k = 0;
        while (tri_[t][k] != static_cast<int>(i)) ++k;
        out.push_back(tri_[t][kNext[k]]);
    }
    if (boundary_[i] && !s.empty()) {
        const int t = s.back();
        int k = 0;
        while (tri_[t][k] != static_cast<int>(i)) ++k;
        out.push_back(tri_[t][kPrev[k]]);
    }
    return out;
}

int LowerHull::locate(const Vec2& p) const {
    if (tri_.empty()) return -1;
    return walk(p, last_).tri;
}

double LowerHull::evaluate(const Vec2& p) const {
    const int t = locate(p);
    if (t < 0) throw GeometryError("evaluation point outside the node hull");
    return plane_height(t, p);
}

double LowerHull::max_edge_length() const {
    double m = 0.0;
    for (const auto& v : tri_)
        for (int k = 0; k < 3; ++k) m = std::max(m, (pts_[v[kNext[k]]] - pts_[v[kPrev[k]]]).norm());
    return m;
}

double LowerHull::max_convexity_defect() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < tri_.size(); ++t)
        for (int k = 0; k < 3; ++k)
            if (nbr_[t][k] >= 0) worst = std::max(worst, edge_defect(static_cast<int>(t), k));
    return tri_.empty() ? 0.0 : worst;
}

}  // namespace alex
