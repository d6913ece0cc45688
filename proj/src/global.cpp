#include "alex/global.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "alex/mesh.hpp"
#include "alex/quadrature.hpp"

namespace alex {

namespace {

// (t^n + K)^{1/n} - t, stable for large t; K may be negative (t^n >= -K).
double excess(int n, double K, double t) {
    const double tn = std::pow(t, n);
    if (tn <= std::abs(K)) return std::pow(std::max(tn + K, 0.0), 1.0 / n) - t;
    return t * std::expm1(std::log1p(K / tn) / n);
}

// int_1^inf excess(n, K, t) dt for n >= 3.
double excess_tail(int n, double K) {
    // [1, 2] through t = 1 + s^n (removes the root singularity for K = -1),
    // [2, inf) through t = 2 / s.
    const double near = integrate(
        [&](double s) { return excess(n, K, 1.0 + std::pow(s, n)) * n * std::pow(s, n - 1); }, 0.0, 1.0, 1e-14);
    const double far = integrate(
        [&](double s) {
            if (s <= 0.0) return n == 3 ? K / 6.0 : 0.0;
            const double t = 2.0 / s;
            return 2.0 / (s * s) * excess(n, K, t);
        },
        0.0, 1.0, 1e-14);
    return near + far;
}

Eigen::VectorXd to_vec(const Vec2& p) { return Eigen::Vector2d(p.x(), p.y()); }

// Smooth radial bump supported in B_{1/4} with unit integral in R^n.
struct Bump {
    int n;
    double norm;
    explicit Bump(int dim) : n(dim) {
        const double shape = integrate([&](double r) { return raw(r) * std::pow(r, n - 1); }, 0.0, 0.25, 1e-16);
        norm = 1.0 / (n * unit_ball_volume(n) * shape);
    }
    static double raw(double r) {
        const double s = 1.0 - 16.0 * r * r;
        return s > 0.0 ? s * s * s : 0.0;
    }
    double operator()(double r) const { return norm * raw(r); }
};

}  // namespace

SingularConfiguration SingularConfiguration::make(int n, std::vector<Eigen::VectorXd> points,
                                                  std::vector<double> masses) {
    SingularConfiguration cfg;
    cfg.dimension = n;
    cfg.points = std::move(points);
    cfg.masses = std::move(masses);
    cfg.validate();
    return cfg;
}

Eigen::MatrixXd SingularConfiguration::matrix() const {
    return A.size() == 0 ? Eigen::MatrixXd::Identity(dimension, dimension) : A;
}

Eigen::VectorXd SingularConfiguration::shift() const {
    return b.size() == 0 ? Eigen::VectorXd::Zero(dimension) : b;
}

void SingularConfiguration::validate() const {
    if (dimension < 2) throw std::invalid_argument("dimension must be >= 2");
    if (points.size() != masses.size()) throw std::invalid_argument("points and masses differ in length");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != dimension) throw std::invalid_argument("point dimension mismatch");
        if (!(masses[i] > 0.0) || !std::isfinite(masses[i])) throw std::invalid_argument("masses must be positive");
        for (std::size_t j = 0; j < i; ++j)
            if ((points[i] - points[j]).norm() == 0.0) throw std::invalid_argument("repeated singular point");
    }
    const Eigen::MatrixXd m = matrix();
    if (m.rows() != dimension || m.cols() != dimension) throw std::invalid_argument("A has the wrong shape");
    if (std::abs(m.determinant() - 1.0) > 1e-10) throw std::invalid_argument("det A must be 1");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 || m.llt().info() != Eigen::Success)
        throw std::invalid_argument("A must be symmetric positive definite");
    if (shift().size() != dimension) throw std::invalid_argument("b has the wrong size");
}

bool SingularConfiguration::has_standard_asymptotics(double tol) const {
    const Eigen::MatrixXd m = matrix();
    return (m - Eigen::MatrixXd::Identity(dimension, dimension)).cwiseAbs().maxCoeff() <= tol &&
           shift().cwiseAbs().maxCoeff() <= tol && std::abs(c) <= tol;
}

// ---------------------------------------------------------------------------

AveragedSubsolution::AveragedSubsolution(const SingularConfiguration& cfg) : n_(cfg.dimension) {
    cfg.validate();
    if (cfg.size() == 0) throw std::invalid_argument("averaged subsolution needs at least one point");
    const double k = static_cast<double>(cfg.size());
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const double mass = std::pow(k, n_) * cfg.masses[i];
        parts_.emplace_back(n_, mass / unit_ball_volume(n_), cfg.points[i], AffineNormalization::identity(n_));
        points_.push_back(cfg.points[i]);
    }
}

void AveragedSubsolution::reject_singular(const Eigen::VectorXd& x) const {
    if (x.size() != n_) throw std::invalid_argument("point dimension mismatch");
    for (const auto& p : points_)
        if ((x - p).norm() == 0.0) throw std::domain_error("evaluation at a singular point");
}

double AveragedSubsolution::value(const Eigen::VectorXd& x) const {
    reject_singular(x);
    double s = 0.0;
    for (std::size_t i = 0; i < parts_.size(); ++i)
        s += parts_[i].value(x) + points_[i].dot(x) - 0.5 * points_[i].squaredNorm();
    return s / static_cast<double>(parts_.size());
}

Eigen::VectorXd AveragedSubsolution::gradient(const Eigen::VectorXd& x) const {
    reject_singular(x);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
    for (std::size_t i = 0; i < parts_.size(); ++i) g += parts_[i].gradient(x) + points_[i];
    return g / static_cast<double>(parts_.size());
}

Eigen::MatrixXd AveragedSubsolution::hessian(const Eigen::VectorXd& x) const {
    reject_singular(x);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& p : parts_) h += p.hessian(x);
    return h / static_cast<double>(parts_.size());
}

double AveragedSubsolution::hessian_det(const Eigen::VectorXd& x) const { return hessian(x).determinant(); }

double AveragedSubsolution::minkowski_defect(const Eigen::VectorXd& x) const {
    const double lhs = std::pow(hessian_det(x), 1.0 / n_);
    double rhs = 0.0;
    for (const auto& p : parts_) rhs += std::pow(p.hessian(x).determinant(), 1.0 / n_);
    return lhs - rhs / static_cast<double>(parts_.size());
}

AveragedSubsolution averaged_subsolution(const SingularConfiguration& cfg) { return AveragedSubsolution(cfg); }

// ---------------------------------------------------------------------------

namespace {

double barrier_coefficient(int n, double lambda, double r) {
    if (n < 2) throw std::invalid_argument("dimension must be >= 2");
    if (!(lambda > 0.0) || !(r > 0.0)) throw std::invalid_argument("barrier needs lambda > 0 and r > 0");
    return std::pow(lambda, 1.0 / n) * std::pow(r, 2.0 - 2.0 / n) / (2.0 * std::pow(4.0, (n - 1.0) / n));
}

}  // namespace

double ellipsoid_barrier(int n, double lambda, double r, const Eigen::VectorXd& x) {
    const double k = barrier_coefficient(n, lambda, r);
    if (x.size() != n) throw std::invalid_argument("point dimension mismatch");
    const double tangential = x.head(n - 1).squaredNorm();
    const double t = x[n - 1] - 0.75;
    return k * (4.0 * tangential / (r * r) + t * t - 1.0 / 16.0);
}

Eigen::MatrixXd ellipsoid_barrier_hessian(int n, double lambda, double r) {
    const double k = barrier_coefficient(n, lambda, r);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) h(i, i) = 8.0 * k / (r * r);
    h(n - 1, n - 1) = 2.0 * k;
    return h;
}

// ---------------------------------------------------------------------------

double sandwich_profile(int n, double K, double r) {
    if (r == 1.0) return 0.0;
    if (K < 0.0) {
        if (r < 1.0) return 0.0;
        // t = 1 + s^n removes the root singularity of (t^n - 1)^{1/n} at t = 1.
        const double top = std::pow(r - 1.0, 1.0 / n);
        return integrate(
            [&](double s) {
                const double t = 1.0 + std::pow(s, n);
                return std::pow(std::max(std::pow(t, n) + K, 0.0), 1.0 / n) * n * std::pow(s, n - 1);
            },
            0.0, top, 1e-13 * std::max(1.0, r * r));
    }
    return 0.5 * (r * r - 1.0) + integrate([&](double t) { return excess(n, K, t); }, 1.0, r, 1e-13);
}

double SandwichBounds::outer_slope() const { return std::pow(1.0 + K2, 1.0 / dimension); }

double SandwichBounds::lower(const Eigen::VectorXd& y) const {
    const double r = y.norm();
    if (r < 1.0) {
        const double v = (*inner)(y);
        if (std::isfinite(v)) return v;
    }
    return sandwich_profile(dimension, K2, r);
}

double SandwichBounds::upper(const Eigen::VectorXd& y) const {
    return sandwich_profile(dimension, -1.0, y.norm());
}

double SandwichBounds::lower_bound(const Eigen::VectorXd& x) const {
    return scale * scale * (lower(x / scale) + beta_minus);
}

double SandwichBounds::upper_bound(const Eigen::VectorXd& x) const {
    return scale * scale * (upper(x / scale) + beta_plus);
}

SandwichBounds build_sandwich(const SingularConfiguration& cfg, const SandwichOptions& opt) {
    cfg.validate();
    const int n = cfg.dimension;
    if (!cfg.has_standard_asymptotics())
        throw std::invalid_argument("sandwich bounds assume A = I, b = 0, c = 0");
    const bool finite = std::isfinite(opt.radius);
    if (n == 2 && !finite)
        throw std::invalid_argument("whole-plane sandwich shifts are infinite; give a finite radius");
    bool radial = cfg.size() == 0 || (cfg.size() == 1 && cfg.points[0].norm() == 0.0);
    if (!radial && n != 2) throw std::invalid_argument("non-radial data needs the planar solver (n = 2)");

    SandwichBounds sb;
    sb.dimension = n;
    double far = 0.0;
    for (const auto& p : cfg.points) far = std::max(far, p.norm());
    sb.scale = far > 0.0 ? 3.0 * far : 1.0;
    if (finite) {
        if (!(opt.radius > sb.scale)) throw std::invalid_argument("ball radius must exceed 3 max |P_i|");
        sb.radius = opt.radius / sb.scale;
    } else {
        sb.radius = std::numeric_limits<double>::infinity();
    }
    const double shrink = std::pow(sb.scale, -n);
    const Bump bump(n);
    std::shared_ptr<DirichletSolution> sol;

    if (radial) {
        const double atom = cfg.size() ? cfg.masses[0] * shrink : 0.0;
        const auto depth = [&](double a) {
            RadialMeasure mu;
            mu.dimension = n;
            mu.atom_at_center = atom;
            mu.density = [&bump, a](double r) { return 1.0 + a * bump(r); };
            return radial_ode_solve(mu, 1.0);
        };
        const auto c0_of = [&](double a) { return depth(a).value(1.0); };
        // Smallest bump mass giving K2 = (8 c0 / 3)^n >= 1, i.e. c0 >= 3/8.
        double a = 0.0;
        if (c0_of(0.0) < 0.375) {
            double hi = 1.0;
            while (c0_of(hi) < 0.375) hi *= 2.0;
            double lo = 0.0;
            for (int it = 0; it < 80 && hi - lo > 1e-13 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (c0_of(mid) < 0.375 ? lo : hi) = mid;
            }
            a = hi;
        }
        auto prof = std::make_shared<RadialProfile>(depth(a));
        const double top = prof->value(1.0);
        sb.a = a;
        sb.c0 = top - prof->value(0.0);
        sb.inner_resolution = 0.0;
        sb.inner = std::make_shared<const std::function<double(const Eigen::VectorXd&)>>(
            [prof, top](const Eigen::VectorXd& y) { return prof->value(std::min(y.norm(), 1.0)) - top; });
    } else {
        // Planar inner problem on an inscribed polygon of B_1.
        DirichletProblem p;
        p.domain = ball_polygon(1.0, 64);
        p.boundary_data = [](const Vec2&) { return 0.0; };
        for (std::size_t i = 0; i < cfg.size(); ++i)
            p.atoms.push_back({Vec2(cfg.points[i][0], cfg.points[i][1]) / sb.scale, cfg.masses[i] * shrink});
        p.h = opt.inner_h;
        double a = 0.0;
        double c0 = 0.0;
        for (int attempt = 0; attempt < 40; ++attempt) {
            p.density = [&bump, a](const Vec2& x) { return 1.0 + a * bump(x.norm()); };
            sol = std::make_shared<DirichletSolution>(solve_dirichlet(p));
            c0 = 0.0;
            for (std::size_t i = 0; i < sol->mesh.size(); ++i)
                if (sol->mesh.nodes[i].norm() <= 0.5) c0 = std::max(c0, -sol->u.value(i));
            if (c0 >= 0.375) break;
            a = a == 0.0 ? 1.0 : 2.0 * a;
        }
        sb.a = a;
        sb.c0 = c0;
        sb.inner_resolution = sol->u.mesh_size();
        sb.inner = std::make_shared<const std::function<double(const Eigen::VectorXd&)>>(
            [sol](const Eigen::VectorXd& y) {
                const Vec2 q(y[0], y[1]);
                if (!sol->mesh.domain.contains(q)) return std::numeric_limits<double>::quiet_NaN();
                return sol->u.evaluate(q);
            });
    }
    sb.K1 = 4.0 * sb.c0 / 3.0;
    sb.K2 = std::pow(2.0 * sb.K1, n);
    if (sb.K2 < 1.0) throw std::runtime_error("could not reach K2 >= 1");

    // v_1 >= v_2 on B_1, sampled along rays (radial) or at the inner nodes.
    sb.inner_above_v2 = true;
    const double slack = 1e-9 + sb.inner_resolution * sb.inner_resolution;
    const auto v2 = [&](double r) { return sb.K1 * (r * r - 1.0); };
    std::vector<double> inner_gap;  // |y|^2/2 - v_1(y) samples for beta_-
    if (radial) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
        for (int i = 0; i <= 2000; ++i) {
            const double r = i / 2000.0;
            y[0] = r;
            const double v = (*sb.inner)(y);
            if (v < v2(r) - slack) sb.inner_above_v2 = false;
            inner_gap.push_back(0.5 * r * r - v);
        }
    } else {
        for (std::size_t i = 0; i < sol->mesh.size(); ++i)
            if (sol->u.value(i) < v2(sol->mesh.nodes[i].norm()) - slack) sb.inner_above_v2 = false;
    }

    // Shifts. Outside B_1 both differences are monotone in r, so the extreme
    // sits at the outer radius (or its limit).
    const auto outer_lower_gap = [&](double r) { return 0.5 * r * r - sandwich_profile(n, sb.K2, r); };
    const auto upper_gap = [&](double r) { return 0.5 * r * r - sandwich_profile(n, -1.0, r); };
    double inner_min = std::numeric_limits<double>::infinity();
    if (radial) {
        for (double g : inner_gap) inner_min = std::min(inner_min, g);
        // Refine around the best sample.
        std::size_t best = 0;
        for (std::size_t i = 0; i < inner_gap.size(); ++i)
            if (inner_gap[i] < inner_gap[best]) best = i;
        double lo = std::max(0.0, (static_cast<double>(best) - 1.0) / 2000.0);
        double hi = std::min(1.0, (static_cast<double>(best) + 1.0) / 2000.0);
        Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
        const auto gap = [&](double r) {
            y[0] = r;
            return 0.5 * r * r - (*sb.inner)(y);
        };
        for (int it = 0; it < 100; ++it) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            (gap(m1) < gap(m2) ? hi : lo) = (gap(m1) < gap(m2) ? m2 : m1);
        }
        inner_min = std::min(inner_min, gap(0.5 * (lo + hi)));
    } else {
        // Node minimum, lowered by the interpolation bound of |y|^2/2.
        for (std::size_t i = 0; i < sol->mesh.size(); ++i)
            inner_min = std::min(inner_min, 0.5 * sol->mesh.nodes[i].squaredNorm() - sol->u.value(i));
        inner_min -= 0.125 * sb.inner_resolution * sb.inner_resolution;
    }
    double outer_min;
    double upper_sup;
    if (finite) {
        outer_min = std::min(outer_lower_gap(1.0), outer_lower_gap(sb.radius));
        upper_sup = std::max(upper_gap(1.0), upper_gap(sb.radius));
    } else {
        outer_min = 0.5 - excess_tail(n, sb.K2);
        upper_sup = 0.5 - excess_tail(n, -1.0);
    }
    sb.beta_minus = std::min(inner_min, outer_min);
    sb.beta_plus = upper_sup;
    if (!std::isfinite(sb.beta_minus) || !std::isfinite(sb.beta_plus))
        throw std::runtime_error("sandwich shifts are not finite");
    return sb;
}

// ---------------------------------------------------------------------------

double lipschitz_constant(const PLConvexFunction& u) {
    double best = 0.0;
    for (std::size_t t = 0; t < u.hull().num_triangles(); ++t) best = std::max(best, u.hull().gradient(t).norm());
    return best;
}

GlobalResult solve_global(const SingularConfiguration& cfg, const std::vector<double>& radii,
                          const GlobalOptions& opt) {
    cfg.validate();
    if (cfg.dimension != 2) throw std::invalid_argument("the ball solver is planar");
    if (radii.empty()) throw std::invalid_argument("empty radius schedule");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("radii must increase");
    double far = 0.0;
    std::vector<Vec2> centers;
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        const Vec2 p(cfg.points[i][0], cfg.points[i][1]);
        far = std::max(far, p.norm());
        centers.push_back(p);
        atoms.push_back({p, cfg.masses[i]});
    }
    if (!(far < 0.5 * radii.front())) throw std::invalid_argument("atoms must lie inside B_{R_1 / 2}");
    if (centers.empty()) centers.push_back(Vec2::Zero());

    GlobalResult out;
    for (double R : radii) {
        DirichletProblem p;
        p.domain = ball_polygon(R, opt.sides);
        p.atoms = atoms;
        p.boundary_data = [](const Vec2& x) { return 0.5 * x.squaredNorm(); };
        // The core B_{R_1} gets the same sizing on every ball; coarsening
        // starts outside it.
        const double h_max = std::max(opt.h_min, opt.h_max_fraction * R);
        const double h_core = std::max(opt.h_min, opt.h_max_fraction * radii.front());
        const auto base = point_grading(centers, opt.grading, opt.h_min, h_max);
        const double core = radii.front(), grading = opt.grading;
        const auto sizing = [base, h_core, core, grading](const Vec2& x) {
            return std::min(base(x), h_core + grading * std::max(0.0, x.norm() - core));
        };
        std::vector<Vec2> req;
        for (const auto& a : atoms) req.push_back(a.position);
        p.mesh = graded_mesh(p.domain, sizing, req);
        p.h = p.mesh->h;
        SolveOptions so;
        so.tol_scale = opt.tol_scale;
        GlobalStep step{.radius = R, .solution = solve_dirichlet(p, so), .sandwich = {}};

        SandwichOptions sopt = opt.sandwich;
        sopt.radius = R;
        step.sandwich = build_sandwich(cfg, sopt);

        const auto& sol = step.solution;
        step.lipschitz = lipschitz_constant(sol.u);
        step.sandwich_tolerance = 5.0 * sol.mesh.h * step.lipschitz;
        step.worst_sandwich_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < sol.mesh.size(); ++i) {
            const Eigen::VectorXd x = to_vec(sol.mesh.nodes[i]);
            const double u = sol.u.value(i);
            const double gap = std::min(u - step.sandwich.lower_bound(x), step.sandwich.upper_bound(x) - u);
            step.worst_sandwich_gap = std::min(step.worst_sandwich_gap, gap);
            if (gap < -step.sandwich_tolerance) ++step.sandwich_violations;
        }
        step.solution.report.sandwich_violations = step.sandwich_violations;

        if (out.steps.empty()) {
            step.cauchy_oscillation = std::numeric_limits<double>::quiet_NaN();
        } else {
            const auto& prev = out.steps.back().solution;
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (std::size_t i = 0; i < sol.mesh.size(); ++i) {
                const Vec2& x = sol.mesh.nodes[i];
                if (x.norm() > radii.front() || !prev.mesh.domain.contains(x)) continue;
                const double d = sol.u.value(i) - prev.u.evaluate(x);
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            step.cauchy_oscillation = hi - lo;
        }
        if (opt.abort_on_violation && step.sandwich_violations > 0) {
            const int count = step.sandwich_violations;
            throw SandwichViolation("sandwich violated at " + std::to_string(count) + " nodes on the ball of radius " +
                                        std::to_string(R),
                                    std::move(step));
        }
        out.steps.push_back(std::move(step));
    }
    return out;
}

// ---------------------------------------------------------------------------

ComparisonReport comparison_check(const PLConvexFunction& u, const PLConvexFunction& v, double tol) {
    if (u.size() != v.size()) throw std::invalid_argument("comparison needs a common mesh");
    for (std::size_t i = 0; i < u.size(); ++i)
        if ((u.node(i) - v.node(i)).norm() > 1e-12 * (1.0 + u.node(i).norm()))
            throw std::invalid_argument("comparison needs a common mesh");
    ComparisonReport rep;
    rep.max_excess = -std::numeric_limits<double>::infinity();
    const auto mu = ma_measure(u).node_masses(u.size());
    const auto mv = ma_measure(v).node_masses(v.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u.value(i) - v.value(i);
        rep.max_excess = std::max(rep.max_excess, d);
        if (d > tol) {
            rep.ordered = false;
            rep.violations.push_back(static_cast<int>(i));
        }
        if (u.is_boundary(i)) {
            if (d > tol) rep.boundary_ordered = false;
        } else if (mu[i] < mv[i] - tol) {
            rep.measure_ordered = false;
        }
    }
    return rep;
}

}  // namespace alex
