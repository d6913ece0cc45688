#include <Eigen/Sparse>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <limits>

#include "alex/solver.hpp"

namespace alex {

namespace {

constexpr int kNext[3] = {1, 2, 0};
constexpr int kPrev[3] = {2, 0, 1};

double height_tolerance(const std::vector<double>& u) {
    double m = 1.0;
    for (double v : u) m = std::max(m, std::abs(v));
    return 1e-9 * m;
}

struct State {
    std::optional<LowerHull> hull;
    std::vector<double> mass;
    bool valid = false;
    double residual = std::numeric_limits<double>::infinity();
    double min_mass = 0.0;
};

State evaluate(const Mesh& mesh, const std::vector<double>& u, const std::vector<double>& target) {
    State s;
    try {
        s.hull.emplace(mesh.nodes, u, height_tolerance(u));
    } catch (const GeometryError& e) {
        return s;
    }
    const auto& hull = *s.hull;
    if (hull.num_redundant() > 0) {
        for (std::size_t i = 0; i < mesh.size(); ++i)
            if (mesh.boundary[i] && hull.is_redundant(i))
                throw std::invalid_argument("boundary data is not convex along the boundary (node " +
                                            std::to_string(i) + ")");
        return s;
    }
    s.valid = true;
    s.mass.assign(mesh.size(), 0.0);
    s.residual = 0.0;
    s.min_mass = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        if (mesh.boundary[i]) continue;
        if (hull.is_boundary(i)) {
            // An interior node on the planar hull: the mesh is malformed.
            throw std::invalid_argument("interior mesh node lies on the domain boundary");
        }
        s.mass[i] = subgradient_cell_area(hull, i);
        s.residual = std::max(s.residual, std::abs(s.mass[i] - target[i]));
        s.min_mass = std::min(s.min_mass, s.mass[i]);
    }
    return s;
}

// Half-plane cell {p : p.(x_j - x_i) <= u_j - t, j in cand} of node i at height t.
double local_cell_area(const Mesh& mesh, const std::vector<double>& u, int i, const std::vector<int>& cand, double t) {
    double bound = 0.0, reach = std::numeric_limits<double>::infinity();
    for (int j : cand) {
        bound = std::max(bound, std::abs(u[j] - t) + 1.0);
        reach = std::min(reach, (mesh.nodes[j] - mesh.nodes[i]).norm());
    }
    const double box = 1e3 * bound / reach;
    ConvexPolygon cell = ConvexPolygon::box(Vec2(-box, -box), Vec2(box, box));
    const Vec2& xi = mesh.nodes[i];
    for (int j : cand) {
        cell = cell.clipped(mesh.nodes[j] - xi, u[j] - t);
        if (cell.empty()) return 0.0;
    }
    for (const auto& v : cell.vertices())
        if (v.cwiseAbs().maxCoeff() >= 0.5 * box) return std::numeric_limits<double>::infinity();
    return cell.area();
}

std::vector<std::vector<int>> two_rings(const Mesh& mesh, const LowerHull& hull) {
    std::vector<std::vector<int>> ring(mesh.size());
    std::vector<std::vector<int>> link(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) link[i] = hull.link(i);
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        if (mesh.boundary[i]) continue;
        auto& r = ring[i];
        for (int j : link[i]) {
            r.push_back(j);
            for (int k : link[j])
                if (k != static_cast<int>(i)) r.push_back(k);
        }
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
    }
    return ring;
}

// One Gauss-Seidel sweep in index order. Each deficient node is lowered to
// the height where its local cell reaches the target; nodes never rise.
void node_lift_sweep(const Mesh& mesh, std::vector<double>& u, const std::vector<double>& target,
                     const LowerHull& hull) {
    const auto ring = two_rings(mesh, hull);
    for (std::size_t ii = 0; ii < mesh.size(); ++ii) {
        if (mesh.boundary[ii]) continue;
        const int i = static_cast<int>(ii);
        const auto area = [&](double t) { return local_cell_area(mesh, u, i, ring[i], t); };
        if (area(u[i]) >= target[i]) continue;
        double hi = u[i];
        double step = 1e-3 * std::max(1.0, std::abs(u[i]));
        double lo = hi - step;
        while (area(lo) < target[i]) {
            hi = lo;
            step *= 2.0;
            lo = hi - step;
        }
        while (hi - lo > 1e-12 * std::max(1.0, std::abs(hi))) {
            const double mid = 0.5 * (lo + hi);
            (area(mid) < target[i] ? hi : lo) = mid;
        }
        u[i] = hi;
    }
}

using SpMat = Eigen::SparseMatrix<double>;

// -J where J_ij = d mass_i / d u_j over interior nodes: a weighted Laplacian
// with weights |dual edge| / |primal edge|.
SpMat neg_jacobian(const Mesh& mesh, const LowerHull& hull, const std::vector<int>& index) {
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t t = 0; t < hull.num_triangles(); ++t)
        for (int k = 0; k < 3; ++k) {
            const int nb = hull.neighbor(t, k);
            if (nb < static_cast<int>(t)) continue;
            const int a = hull.triangle(t)[kNext[k]];
            const int b = hull.triangle(t)[kPrev[k]];
            const double w = (hull.gradient(t) - hull.gradient(nb)).norm() / (mesh.nodes[a] - mesh.nodes[b]).norm();
            const int ia = index[a], ib = index[b];
            if (ia >= 0) trip.emplace_back(ia, ia, w);
            if (ib >= 0) trip.emplace_back(ib, ib, w);
            if (ia >= 0 && ib >= 0) {
                trip.emplace_back(ia, ib, -w);
                trip.emplace_back(ib, ia, -w);
            }
        }
    const int n = *std::max_element(index.begin(), index.end()) + 1;
    SpMat m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

std::vector<double> envelope_start(const Mesh& mesh, const std::vector<double>& u) {
    std::vector<Vec2> bx;
    std::vector<double> bv;
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (mesh.boundary[i]) {
            bx.push_back(mesh.nodes[i]);
            bv.push_back(u[i]);
        }
    const LowerHull env(bx, bv, height_tolerance(bv));
    std::vector<double> out = u;
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (!mesh.boundary[i]) out[i] = env.evaluate(mesh.nodes[i]);
    return out;
}

struct Cone {
    Vec2 apex;
    double slope;
};

/// s|x|^2/2 plus cones at the atoms, plus the envelope of the boundary data
/// minus both. Strictly convex inside, so every cell is open when the boundary
/// stays in convex position. Empty when it does not.
std::vector<double> curved_start(const Mesh& mesh, const std::vector<double>& u, double s,
                                 const std::vector<Cone>& cones) {
    const auto bend = [&](const Vec2& x) {
        double b = 0.5 * s * x.squaredNorm();
        for (const auto& c : cones) b += c.slope * (x - c.apex).norm();
        return b;
    };
    std::vector<double> shifted = u;
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (mesh.boundary[i]) shifted[i] -= bend(mesh.nodes[i]);
    std::vector<double> out;
    try {
        out = envelope_start(mesh, shifted);
    } catch (const GeometryError&) {
        return {};
    }
    for (std::size_t i = 0; i < mesh.size(); ++i) out[i] = mesh.boundary[i] ? u[i] : out[i] + bend(mesh.nodes[i]);
    return out;
}

}  // namespace

double DirichletProblem::density_at(const Vec2& x) const {
    const double f = density ? density(x) : density_constant;
    if (!(f >= 0.0)) throw std::invalid_argument("density must be nonnegative");
    return f;
}

std::vector<double> target_masses(const Mesh& mesh, const DirichletProblem& p, std::vector<AtomSnap>* snaps) {
    std::vector<double> lift(mesh.size());
    double top = 1.0;
    for (std::size_t i = 0; i < mesh.size(); ++i) top = std::max(top, lift[i] = 0.5 * mesh.nodes[i].squaredNorm());
    const LowerHull delaunay(mesh.nodes, lift, 1e-12 * top);
    std::vector<double> target(mesh.size(), 0.0);
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        if (mesh.boundary[i]) continue;
        const auto cell = subgradient_cell(delaunay, i);
        if (!p.density) {
            target[i] = p.density_at(mesh.nodes[i]) * polygon_area(cell);
            continue;
        }
        // Fan from the node with the edge-midpoint rule (exact for quadratics).
        double m = 0.0;
        const Vec2& c = mesh.nodes[i];
        for (std::size_t k = 0; k < cell.size(); ++k) {
            const Vec2& a = cell[k];
            const Vec2& b = cell[(k + 1) % cell.size()];
            const double area = 0.5 * orient2d(c, a, b);
            m += area / 3.0 * (p.density_at(0.5 * (c + a)) + p.density_at(0.5 * (a + b)) + p.density_at(0.5 * (b + c)));
        }
        target[i] = m;
    }
    for (const auto& atom : p.atoms) {
        if (!(atom.mass >= 0.0)) throw std::invalid_argument("atom masses must be nonnegative");
        if (!mesh.domain.contains(atom.position) || mesh.domain.boundary_distance(atom.position) <= 0.0)
            throw std::invalid_argument("atom outside the domain");
        const int k = mesh.nearest(atom.position);
        if (mesh.boundary[k]) throw std::invalid_argument("atom snaps to a boundary node; refine the mesh");
        target[k] += atom.mass;
        if (snaps) snaps->push_back({k, (mesh.nodes[k] - atom.position).norm(), atom.mass});
    }
    return target;
}

double max_mass_residual(const PLConvexFunction& u, const std::vector<double>& targets) {
    const auto m = ma_measure(u);
    double r = 0.0;
    for (const auto& a : m.atoms) r = std::max(r, std::abs(a.mass - targets[a.node]));
    return r;
}

DirichletSolution solve_dirichlet(const DirichletProblem& p, const SolveOptions& opt) {
    const auto start_time = std::chrono::steady_clock::now();
    if (!p.boundary_data) throw std::invalid_argument("boundary data missing");
    Mesh mesh;
    if (p.mesh) {
        mesh = *p.mesh;
    } else {
        std::vector<Vec2> req;
        for (const auto& a : p.atoms) req.push_back(a.position);
        mesh = uniform_mesh(p.domain, p.h, req);
    }

    SolveReport rep;
    rep.h = mesh.h;
    const auto target = target_masses(mesh, p, &rep.snaps);
    rep.tolerance = opt.tol_scale * std::max(1e-8, 1e-3 * mesh.h_min * mesh.h_min);

    std::vector<double> u(mesh.size(), 0.0);
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (mesh.boundary[i]) u[i] = p.boundary_data(mesh.nodes[i]);
    if (opt.initial) {
        if (opt.initial->size() != mesh.size()) throw std::invalid_argument("initial guess has wrong size");
        for (std::size_t i = 0; i < mesh.size(); ++i)
            if (!mesh.boundary[i]) u[i] = (*opt.initial)[i];
    } else {
        u = envelope_start(mesh, u);
    }

    bool positive = true;
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (!mesh.boundary[i] && !(target[i] > 0.0)) positive = false;
    SolveMethod method = opt.method;
    if (method == SolveMethod::kAuto) method = positive ? SolveMethod::kNewton : SolveMethod::kNodeLift;
    if (method == SolveMethod::kNewton && !positive)
        throw std::invalid_argument("Newton iteration needs positive target masses at every interior node");
    rep.method = method == SolveMethod::kNewton ? "newton" : "node-lift";

    std::vector<int> index(mesh.size(), -1);
    int n_int = 0;
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (!mesh.boundary[i]) index[i] = n_int++;
    if (n_int == 0) throw std::invalid_argument("mesh has no interior nodes");

    const auto notify = [&] {
        if (opt.observer) opt.observer(u);
    };
    State s = evaluate(mesh, u, target);
    if (!s.valid) throw std::invalid_argument("initial values are not convex");

    const auto sweep = [&] {
        node_lift_sweep(mesh, u, target, *s.hull);
        ++rep.sweeps;
        // Nodes left above the envelope drop onto it (a further decrease).
        for (int pass = 0;; ++pass) {
            s = evaluate(mesh, u, target);
            if (s.valid) break;
            if (!s.hull || pass > 100) throw GeometryError("node lifting produced a degenerate envelope");
            for (std::size_t i = 0; i < mesh.size(); ++i)
                if (!mesh.boundary[i] && s.hull->is_redundant(i)) u[i] = s.hull->evaluate(mesh.nodes[i]);
        }
        notify();
    };
    const auto fail = [&](const std::string& why) {
        rep.max_residual = s.residual;
        rep.iterations = rep.sweeps + rep.newton_steps;
        rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
        throw ConvergenceError(why, rep);
    };

    if (method == SolveMethod::kNodeLift) {
        while (s.residual >= rep.tolerance) {
            if (rep.sweeps >= opt.max_sweeps) fail("node lifting did not converge within the sweep cap");
            sweep();
        }
    } else {
        // Newton needs every cell open. Try a strictly convex start first,
        // lifting from the envelope only when none is found.
        if (!opt.initial && !(s.min_mass > 0.0)) {
            // Cones carry the atoms (a cone of slope k has subgradient area
            // pi k^2); the quadratic carries the density.
            double total = 0.0;
            for (double t : target) total += t;
            std::vector<Cone> cones;
            for (const auto& snap : rep.snaps) {
                cones.push_back({mesh.nodes[snap.node], std::sqrt(snap.mass / std::numbers::pi)});
                total -= snap.mass;
            }
            const double s0 = std::sqrt(std::max(total, 0.0) / p.domain.area());
            bool found = false;
            for (int with_cones = cones.empty() ? 0 : 1; with_cones >= 0 && !found; --with_cones)
                for (double c = s0 > 0.0 ? s0 : 1e-3; c > 1e-6 * std::max(s0, 1e-3); c *= 0.5) {
                    auto cand = curved_start(mesh, u, c, with_cones ? cones : std::vector<Cone>{});
                    if (cand.empty()) continue;
                    State cs = evaluate(mesh, cand, target);
                    if (!cs.valid || !(cs.min_mass > 0.0)) continue;
                    u = std::move(cand);
                    s = std::move(cs);
                    found = true;
                    break;
                }
        }
        while (!(s.min_mass > 0.0)) {
            if (rep.sweeps >= std::min(opt.max_sweeps, 10000)) fail("could not reach a start with positive cells");
            sweep();
        }
        double floor_mass = 0.5 * s.min_mass;
        for (std::size_t i = 0; i < mesh.size(); ++i)
            if (!mesh.boundary[i]) floor_mass = std::min(floor_mass, 0.5 * target[i]);
        int stalls = 0;
        while (s.residual >= rep.tolerance) {
            if (rep.newton_steps >= opt.max_newton_steps) fail("Newton iteration did not converge within the step cap");
            const SpMat a = neg_jacobian(mesh, *s.hull, index);
            Eigen::VectorXd rhs(n_int);
            for (std::size_t i = 0; i < mesh.size(); ++i)
                if (index[i] >= 0) rhs[index[i]] = s.mass[i] - target[i];
            Eigen::SimplicialLDLT<SpMat> ldlt(a);
            if (ldlt.info() != Eigen::Success) fail("singular Newton system");
            const Eigen::VectorXd delta = ldlt.solve(rhs);
            ++rep.newton_steps;

            bool accepted = false;
            for (double alpha = 1.0; alpha >= 1.0 / 1024.0; alpha *= 0.5) {
                std::vector<double> trial = u;
                for (std::size_t i = 0; i < mesh.size(); ++i)
                    if (index[i] >= 0) trial[i] += alpha * delta[index[i]];
                State ts = evaluate(mesh, trial, target);
                if (!ts.valid || ts.min_mass < floor_mass) continue;
                if (ts.residual > (1.0 - 0.5 * alpha) * s.residual && ts.residual >= rep.tolerance) continue;
                u = std::move(trial);
                s = std::move(ts);
                accepted = true;
                break;
            }
            notify();
            if (accepted) {
                stalls = 0;
                continue;
            }
            if (++stalls > 20) fail("Newton line search stalled");
            for (int k = 0; k < 3; ++k) sweep();
            floor_mass = std::min(floor_mass, 0.5 * s.min_mass);
        }
    }

    PLConvexFunction f(mesh.nodes, u);
    rep.max_residual = max_mass_residual(f, target);
    rep.converged = rep.max_residual < rep.tolerance;
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (mesh.boundary[i]) rep.boundary_mismatch = std::max(rep.boundary_mismatch, std::abs(u[i] - p.boundary_data(mesh.nodes[i])));
    rep.iterations = rep.sweeps + rep.newton_steps;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    return DirichletSolution{std::move(f), std::move(rep), std::move(mesh), target};
}

}  // namespace alex
