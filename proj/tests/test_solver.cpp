#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "alex/global.hpp"
#include "alex/radial.hpp"
#include "alex/solver.hpp"

using namespace alex;

namespace {

DirichletProblem one_atom(double h) {
    static const RadialSingularSolution exact(2, 1.0);
    DirichletProblem p;
    p.domain = ball_polygon(1.0, 64);
    p.atoms = {{Vec2::Zero(), std::numbers::pi}};
    p.boundary_data = [](const Vec2& x) { return radial_value(exact, x.norm()); };
    p.h = h;
    return p;
}

double radial_error(const DirichletSolution& s) {
    static const RadialSingularSolution exact(2, 1.0);
    double err = 0.0;
    for (std::size_t i = 0; i < s.mesh.size(); ++i)
        err = std::max(err, std::abs(s.u.value(i) - radial_value(exact, s.mesh.nodes[i].norm())));
    return err;
}

DirichletProblem paraboloid_square(double h) {
    DirichletProblem p;
    p.domain = ConvexPolygon::box(Vec2(-1, -1), Vec2(1, 1));
    p.boundary_data = [](const Vec2& x) { return 0.5 * x.squaredNorm(); };
    p.h = h;
    return p;
}

Mesh cone_mesh() {
    Mesh m;
    m.domain = ConvexPolygon({{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
    m.nodes = {{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    m.boundary = {0, 1, 1, 1, 1};
    m.h = m.h_min = 1.0;
    return m;
}

// Composite Simpson on [a, b].
template <class F>
double simpson(F f, double a, double b, int m = 20000) {
    const double h = (b - a) / m;
    double s = f(a) + f(b);
    for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("paraboloid data on the square is reproduced") {
    for (double h : {0.1, 0.05}) {
        const auto s = solve_dirichlet(paraboloid_square(h));
        CHECK(s.report.converged);
        double err = 0.0;
        for (std::size_t i = 0; i < s.mesh.size(); ++i)
            err = std::max(err, std::abs(s.u.value(i) - 0.5 * s.mesh.nodes[i].squaredNorm()));
        CHECK(err < h * h);
        CHECK(s.report.boundary_mismatch == 0.0);
    }
}

TEST_CASE("one atom converges to the radial profile") {
    double prev = 0.0;
    for (double h : {0.2, 0.1, 0.05}) {
        const auto s = solve_dirichlet(one_atom(h));
        REQUIRE(s.report.converged);
        REQUIRE(s.report.snaps.size() == 1);
        CHECK(s.report.snaps[0].distance == 0.0);
        const double err = radial_error(s);
        CHECK(err < 5.0 * h);
        if (prev > 0.0) CHECK(err <= 1.1 * prev);
        prev = err;
        // Reported residual is a recomputation from the returned function.
        CHECK(max_mass_residual(s.u, s.targets) == s.report.max_residual);
        CHECK(s.report.max_residual < s.report.tolerance);
        const auto masses = ma_measure(s.u).node_masses(s.u.size());
        const int a = s.report.snaps[0].node;
        CHECK(std::abs(masses[a] - s.targets[a]) <= s.report.tolerance);
    }
}

TEST_CASE("tolerance follows the mesh size") {
    const auto s = solve_dirichlet(one_atom(0.1));
    CHECK(s.report.tolerance == doctest::Approx(1e-5));
    SolveOptions o;
    o.tol_scale = 0.5;
    CHECK(solve_dirichlet(one_atom(0.1), o).report.tolerance == doctest::Approx(5e-6));
}

TEST_CASE("zero density with a mass-4 atom recovers the cone") {
    for (auto method : {SolveMethod::kAuto, SolveMethod::kNodeLift, SolveMethod::kNewton}) {
        DirichletProblem p;
        p.domain = cone_mesh().domain;
        p.density_constant = 0.0;
        p.atoms = {{Vec2::Zero(), 4.0}};
        p.boundary_data = [](const Vec2& x) { return std::abs(x.x()) + std::abs(x.y()); };
        p.mesh = cone_mesh();
        SolveOptions o;
        o.method = method;
        o.tol_scale = 1e-6;
        const auto s = solve_dirichlet(p, o);
        CHECK(s.targets[0] == 4.0);
        CHECK(s.u.value(0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
        CHECK(ma_measure(s.u).atoms[0].mass == doctest::Approx(4.0).epsilon(1e-9));
    }
}

TEST_CASE("node lifting only lowers values") {
    auto p = one_atom(0.25);
    SolveOptions o;
    o.method = SolveMethod::kNodeLift;
    std::vector<double> last;
    bool monotone = true;
    int calls = 0;
    o.observer = [&](const std::vector<double>& u) {
        ++calls;
        if (!last.empty())
            for (std::size_t i = 0; i < u.size(); ++i)
                if (u[i] > last[i] + 1e-12) monotone = false;
        last = u;
    };
    const auto s = solve_dirichlet(p, o);
    CHECK(s.report.method == "node-lift");
    CHECK(s.report.converged);
    CHECK(calls == s.report.sweeps);
    CHECK(monotone);
    CHECK(radial_error(s) < 5.0 * 0.25);
}

TEST_CASE("node lifting and Newton agree") {
    auto p = one_atom(0.25);
    SolveOptions lift;
    lift.method = SolveMethod::kNodeLift;
    lift.tol_scale = 1e-3;
    SolveOptions newton;
    newton.method = SolveMethod::kNewton;
    newton.tol_scale = 1e-3;
    const auto a = solve_dirichlet(p, lift);
    const auto b = solve_dirichlet(p, newton);
    double d = 0.0;
    for (std::size_t i = 0; i < a.u.size(); ++i) d = std::max(d, std::abs(a.u.value(i) - b.u.value(i)));
    CHECK(d < 1e-4);
}

TEST_CASE("two starting points give the same solution") {
    static const RadialSingularSolution exact(2, 1.0);
    auto p = one_atom(0.1);
    const auto a = solve_dirichlet(p);
    std::vector<double> start(a.mesh.size());
    for (std::size_t i = 0; i < start.size(); ++i) {
        const double r = a.mesh.nodes[i].norm();
        start[i] = radial_value(exact, r) + 0.05 * (r * r - 1.0);
    }
    SolveOptions o;
    o.initial = start;
    const auto b = solve_dirichlet(p, o);
    double d = 0.0;
    for (std::size_t i = 0; i < a.u.size(); ++i) d = std::max(d, std::abs(a.u.value(i) - b.u.value(i)));
    CHECK(d <= 2.0 * a.report.tolerance);
}

TEST_CASE("atoms below the paraboloid data stay below it") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> pos(-0.7, 0.7), mass(0.0, 0.5);
    for (int trial = 0; trial < 4; ++trial) {
        auto p = paraboloid_square(0.1);
        p.atoms.clear();
        for (int k = 0; k < 1 + trial; ++k) p.atoms.push_back({Vec2(pos(rng), pos(rng)), mass(rng)});
        const auto s = solve_dirichlet(p);
        const PLConvexFunction v(s.mesh.nodes, [&] {
            std::vector<double> q;
            for (const auto& x : s.mesh.nodes) q.push_back(0.5 * x.squaredNorm());
            return q;
        }());
        const auto rep = comparison_check(s.u, v, s.report.tolerance);
        CHECK(rep.ordered);
        CHECK(rep.boundary_ordered);
        CHECK(rep.measure_ordered);
        CHECK(rep.max_excess <= s.report.tolerance);
    }
}

TEST_CASE("comparison check") {
    const auto s = solve_dirichlet(one_atom(0.2));
    CHECK(comparison_check(s.u, s.u).ordered);
    std::vector<double> lifted = s.u.values();
    for (std::size_t i = 0; i < lifted.size(); ++i) lifted[i] += 0.1;
    const PLConvexFunction up(s.mesh.nodes, lifted);
    // u + 0.1 against u: flagged everywhere, boundary precondition broken.
    const auto rep = comparison_check(up, s.u);
    CHECK_FALSE(rep.ordered);
    CHECK_FALSE(rep.boundary_ordered);
    CHECK(rep.violations.size() == s.u.size());
    CHECK(comparison_check(s.u, up).ordered);
    const PLConvexFunction other(std::vector<Vec2>{{0, 0}, {1, 0}, {0, 1}}, std::vector<double>{0, 0, 0});
    CHECK_THROWS_AS(comparison_check(s.u, other), std::invalid_argument);
}

TEST_CASE("solver errors") {
    auto p = one_atom(0.2);
    p.atoms = {{Vec2(1.5, 0.0), 1.0}};
    CHECK_THROWS_AS(solve_dirichlet(p), std::invalid_argument);

    auto q = one_atom(0.1);
    SolveOptions o;
    o.max_newton_steps = 1;
    try {
        solve_dirichlet(q, o);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK_FALSE(e.report().converged);
        CHECK(e.report().newton_steps == 1);
        CHECK(e.report().max_residual > e.report().tolerance);
    }

    auto z = one_atom(0.2);
    z.density_constant = 0.0;
    z.atoms.clear();
    SolveOptions n;
    n.method = SolveMethod::kNewton;
    CHECK_THROWS_AS(solve_dirichlet(z, n), std::invalid_argument);
}

TEST_CASE("snapping records the distance") {
    auto p = one_atom(0.2);
    Mesh m = uniform_mesh(p.domain, 0.2);
    p.mesh = m;
    p.atoms = {{Vec2(0.03, 0.04), 1.0}};
    std::vector<AtomSnap> snaps;
    const auto t = target_masses(m, p, &snaps);
    REQUIRE(snaps.size() == 1);
    CHECK(snaps[0].distance == doctest::Approx(0.05));
    CHECK(m.nodes[snaps[0].node].norm() == 0.0);
    double total = 0.0;
    for (double x : t) total += x;
    // Voronoi cells of interior nodes cover the domain up to the boundary strip.
    CHECK(total > 1.0);
    CHECK(total < p.domain.area() + 1.0);
}

// ---------------------------------------------------------------------------

TEST_CASE("averaged subsolution") {
    SUBCASE("k = 1 is the tilted radial solution") {
        const auto cfg = SingularConfiguration::make(2, {Eigen::Vector2d(0.3, -0.2)}, {2.0});
        const auto u = averaged_subsolution(cfg);
        std::mt19937 rng(1);
        std::uniform_real_distribution<double> d(-2.0, 2.0);
        // Oracle: the radial ODE with the same atom.
        RadialMeasure mu;
        mu.dimension = 2;
        mu.atom_at_center = 2.0;
        const auto prof = radial_ode_solve(mu, 4.0);
        const Eigen::Vector2d P(0.3, -0.2);
        for (int i = 0; i < 50; ++i) {
            const Eigen::Vector2d x(d(rng), d(rng));
            CHECK(u.hessian_det(x) == doctest::Approx(1.0).epsilon(1e-12));
            const double expect = prof.value((x - P).norm()) + P.dot(x) - 0.5 * P.squaredNorm();
            CHECK(u.value(x) == doctest::Approx(expect).epsilon(1e-9));
        }
        CHECK_THROWS_AS(u.value(P), std::domain_error);
        CHECK_THROWS_AS(u.hessian(P), std::domain_error);
    }
    SUBCASE("n = 3, k = 2: det >= 1 and the Minkowski defect is nonnegative") {
        const auto cfg = SingularConfiguration::make(3, {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(-1, 0, 0)}, {1.0, 1.0});
        const auto u = averaged_subsolution(cfg);
        std::mt19937 rng(2);
        std::uniform_real_distribution<double> d(-3.0, 3.0);
        double worst = 1e300, defect = 1e300;
        for (int i = 0; i < 1000; ++i) {
            const Eigen::Vector3d x(d(rng), d(rng), d(rng));
            worst = std::min(worst, u.hessian_det(x));
            defect = std::min(defect, u.minkowski_defect(x));
        }
        CHECK(worst >= 1.0 - 1e-10);
        CHECK(defect >= -1e-10);
    }
    SUBCASE("gradient and Hessian match finite differences") {
        const auto cfg = SingularConfiguration::make(
            2, {Eigen::Vector2d(0.5, 0), Eigen::Vector2d(-0.5, 0.2), Eigen::Vector2d(0, 1)}, {1.0, 0.5, 2.0});
        const auto u = averaged_subsolution(cfg);
        const Eigen::Vector2d x(0.7, -0.9);
        const double e = 1e-5;
        Eigen::Vector2d g;
        Eigen::Matrix2d h;
        for (int k = 0; k < 2; ++k) {
            Eigen::Vector2d s = Eigen::Vector2d::Zero();
            s[k] = e;
            g[k] = (u.value(x + s) - u.value(x - s)) / (2 * e);
            h.col(k) = (u.gradient(x + s) - u.gradient(x - s)) / (2 * e);
        }
        CHECK((g - u.gradient(x)).norm() < 1e-7);
        CHECK((h - u.hessian(x)).norm() < 1e-6);
    }
    SUBCASE("bad configurations") {
        CHECK_THROWS_AS(SingularConfiguration::make(2, {Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0)}, {1, 1}),
                        std::invalid_argument);
        CHECK_THROWS_AS(SingularConfiguration::make(2, {Eigen::Vector2d(0, 0)}, {-1}), std::invalid_argument);
        SingularConfiguration c = SingularConfiguration::make(2, {Eigen::Vector2d(0, 0)}, {1});
        c.A = 2.0 * Eigen::Matrix2d::Identity();
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    }
}

TEST_CASE("barrier") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> pick(0.2, 3.0), coord(-1.0, 1.0);
    for (int n : {2, 3, 4}) {
        for (int i = 0; i < 100; ++i) {
            const double lambda = pick(rng), r = pick(rng);
            Eigen::VectorXd x(n);
            for (int k = 0; k < n; ++k) x[k] = coord(rng);
            // Second differences are exact for a quadratic up to rounding.
            const double e = 0.1;
            Eigen::MatrixXd h(n, n);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    Eigen::VectorXd sa = Eigen::VectorXd::Zero(n), sb = Eigen::VectorXd::Zero(n);
                    sa[a] = e;
                    sb[b] = e;
                    h(a, b) = (ellipsoid_barrier(n, lambda, r, x + sa + sb) - ellipsoid_barrier(n, lambda, r, x + sa - sb) -
                               ellipsoid_barrier(n, lambda, r, x - sa + sb) + ellipsoid_barrier(n, lambda, r, x - sa - sb)) /
                              (4 * e * e);
                }
            CHECK(h.determinant() == doctest::Approx(lambda).epsilon(1e-9));
            CHECK(ellipsoid_barrier_hessian(n, lambda, r).determinant() == doctest::Approx(lambda).epsilon(1e-12));
        }
        const double lambda = 2.0, r = 0.5;
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        c[n - 1] = 0.75;
        const double vmin = -std::pow(lambda, 1.0 / n) * std::pow(r, 2.0 - 2.0 / n) / (32.0 * std::pow(4.0, (n - 1.0) / n));
        CHECK(ellipsoid_barrier(n, lambda, r, c) == doctest::Approx(vmin).epsilon(1e-14));
        // A point on the ellipsoid boundary.
        Eigen::VectorXd b = c;
        b[0] = 0.5 * r * 0.25 * 0.6;
        b[n - 1] = 0.75 + 0.25 * 0.8;
        CHECK(std::abs(ellipsoid_barrier(n, lambda, r, b)) < 1e-15);
    }
    CHECK_THROWS_AS(ellipsoid_barrier(2, -1.0, 1.0, Eigen::Vector2d::Zero()), std::invalid_argument);
}

TEST_CASE("sandwich in three dimensions") {
    const auto cfg = SingularConfiguration::make(3, {Eigen::Vector3d::Zero()}, {1.0});
    const auto sb = build_sandwich(cfg);
    // Oracle: depth of v_1 with no bump, u'(r) = (r^3 + 1/omega_3)^{1/3}.
    const double w3 = 4.0 * std::numbers::pi / 3.0;
    const double c0 = simpson([&](double r) { return std::cbrt(r * r * r + 1.0 / w3); }, 0.0, 1.0);
    CHECK(sb.a == 0.0);
    CHECK(sb.c0 == doctest::Approx(c0).epsilon(1e-10));
    CHECK(sb.K1 == doctest::Approx(4.0 * c0 / 3.0));
    CHECK(sb.K2 == doctest::Approx(std::pow(2.0 * sb.K1, 3)));
    CHECK(sb.K2 >= 1.0);
    CHECK(std::isfinite(sb.beta_plus));
    CHECK(std::isfinite(sb.beta_minus));
    CHECK(sb.inner_above_v2);
    CHECK(sb.gradient_jump_holds());
    CHECK(sb.outer_slope() == doctest::Approx(std::cbrt(1.0 + sb.K2)));

    // beta_+ oracle: 1/2 + int_1^inf (t - (t^3 - 1)^{1/3}) dt, via t = 2/s
    // on the far part; t - c = 1 / (t^2 + t c + c^2) avoids cancellation.
    const auto gap = [](double t) {
        const double c = std::cbrt(t * t * t - 1.0);
        return 1.0 / (t * t + t * c + c * c);
    };
    const double tail = simpson(gap, 1.0, 2.0, 200000) + simpson(
                                                             [&](double s) {
                                                                 if (s == 0.0) return 1.0 / 6.0;
                                                                 return 2.0 / (s * s) * gap(2.0 / s);
                                                             },
                                                             0.0, 1.0, 200000);
    CHECK(sb.beta_plus == doctest::Approx(0.5 + tail).epsilon(1e-5));

    std::mt19937 rng(4);
    std::uniform_real_distribution<double> d(-6.0, 6.0);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Vector3d x(d(rng), d(rng), d(rng));
        const double r = x.norm();
        CHECK(sb.lower(x) <= sb.upper(x) + sb.beta_plus - sb.beta_minus + 1e-12);
        CHECK(sb.lower(x) <= 0.5 * r * r - sb.beta_minus + 1e-12);
        CHECK(sb.upper(x) >= 0.5 * r * r - sb.beta_plus - 1e-12);
        if (r > 1.0) {
            // det of the radial upper profile: u'' (u'/r)^2 with u' = (r^3 - 1)^{1/3}.
            const double e = 1e-4;
            const double up = (sb.upper(x * (1 + e / r)) - sb.upper(x * (1 - e / r))) / (2 * e);
            CHECK(up == doctest::Approx(std::cbrt(r * r * r - 1.0)).epsilon(1e-6));
            const double d1 = std::cbrt(r * r * r - 1.0);
            const double d2 = r * r * std::pow(r * r * r - 1.0, -2.0 / 3.0);
            CHECK(d2 * std::pow(d1 / r, 2) == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("sandwich for Lebesgue measure") {
    const auto sb = build_sandwich(SingularConfiguration::make(3, {}, {}));
    // c0 = 1/2 already exceeds 3/8, so no bump is needed.
    CHECK(sb.c0 == doctest::Approx(0.5));
    CHECK(sb.a == 0.0);
    for (double r : {0.0, 0.3, 0.9, 1.5, 4.0}) {
        const Eigen::Vector3d x(r, 0, 0);
        CHECK(sb.lower(x) <= 0.5 * r * r - sb.beta_minus);
    }
    CHECK_THROWS_AS(build_sandwich(SingularConfiguration::make(2, {}, {})), std::invalid_argument);
    CHECK_THROWS_AS(build_sandwich(SingularConfiguration::make(3, {Eigen::Vector3d(0.1, 0, 0)}, {1.0})),
                    std::invalid_argument);
}

TEST_CASE("unit density alone gives K2 >= 1") {
    // Depth of v_1 is at least int_0^1 r dr = 1/2 > 3/8, so no bump is added.
    SandwichOptions o;
    o.radius = 4.0;
    const auto sb = build_sandwich(SingularConfiguration::make(2, {Eigen::Vector2d::Zero()}, {1e-3}), o);
    CHECK(sb.a == 0.0);
    CHECK(sb.c0 >= 0.5);
    CHECK(sb.K2 >= 1.0);
    CHECK(sb.inner_above_v2);
    CHECK(sb.gradient_jump_holds());
}

TEST_CASE("growing balls") {
    SUBCASE("no atoms give the paraboloid") {
        GlobalOptions o;
        o.h_min = 0.25;
        const auto res = solve_global(SingularConfiguration::make(2, {}, {}), {2.0, 4.0}, o);
        for (const auto& st : res.steps) {
            double err = 0.0;
            for (std::size_t i = 0; i < st.solution.mesh.size(); ++i)
                err = std::max(err, std::abs(st.solution.u.value(i) - 0.5 * st.solution.mesh.nodes[i].squaredNorm()));
            CHECK(err < st.solution.mesh.h * st.solution.mesh.h);
            CHECK(st.sandwich_violations == 0);
        }
    }
    SUBCASE("one atom approaches the radial profile") {
        static const RadialSingularSolution exact(2, 1.0);
        GlobalOptions o;
        o.h_min = 0.05;
        const auto res = solve_global(SingularConfiguration::make(2, {Eigen::Vector2d::Zero()}, {std::numbers::pi}),
                                      {2.0, 4.0, 8.0}, o);
        REQUIRE(res.steps.size() == 3);
        std::vector<double> osc;
        for (const auto& st : res.steps) {
            CHECK(st.sandwich_violations == 0);
            CHECK(st.sandwich.gradient_jump_holds());
            double lo = 1e300, hi = -1e300;
            for (std::size_t i = 0; i < st.solution.mesh.size(); ++i) {
                const Vec2& x = st.solution.mesh.nodes[i];
                if (x.norm() > 2.0) continue;
                const double d = st.solution.u.value(i) - radial_value(exact, x.norm());
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            osc.push_back(hi - lo);
        }
        CHECK(std::isnan(res.steps[0].cauchy_oscillation));
        CHECK(osc[2] < osc[0]);
        CHECK(res.steps[2].cauchy_oscillation < res.steps[1].cauchy_oscillation);
    }
    SUBCASE("bad schedules") {
        const auto cfg = SingularConfiguration::make(2, {Eigen::Vector2d(1, 0)}, {1.0});
        CHECK_THROWS_AS(solve_global(cfg, {}), std::invalid_argument);
        CHECK_THROWS_AS(solve_global(cfg, {4.0, 3.0}), std::invalid_argument);
        CHECK_THROWS_AS(solve_global(cfg, {1.5}), std::invalid_argument);
        CHECK_THROWS_AS(solve_global(SingularConfiguration::make(3, {}, {}), {4.0}), std::invalid_argument);
    }
}
