#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "alex/global.hpp"
#include "alex/mesh.hpp"
#include "alex/radial.hpp"
#include "alex/solver.hpp"
#include "alex/verify.hpp"

using namespace alex;

namespace {

// Rank of the Jacobian of X -> X'X (upper triangle) at random m vectors in
// R^n: the dimension of m-point shapes modulo rotations.
int gram_rank(int n, int m, std::mt19937& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd X(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) X(i, j) = g(rng);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m * (m + 1) / 2, n * m);
    int row = 0;
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b, ++row) {
            J.block(row, a * n, 1, n) += X.col(b).transpose();
            J.block(row, b * n, 1, n) += X.col(a).transpose();
        }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(J);
    qr.setThreshold(1e-10);
    return static_cast<int>(qr.rank());
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

double mpmath_metric_e1() { return 0.6139778377661648; }

}  // namespace

TEST_CASE("power-law fit needs enough samples") {
    std::vector<double> x, y;
    for (int i = 0; i < 7; ++i) {
        x.push_back(std::pow(10.0, i * 0.5));
        y.push_back(1.0 / x.back());
    }
    CHECK_THROWS_AS(fit_power_law(x, y), InsufficientSamples);
    x.push_back(1e4);
    y.push_back(1e-4);
    const auto f = fit_power_law(x, y);
    CHECK(f.exponent == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.constant == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.residual < 1e-12);

    std::vector<double> narrow_x, narrow_y;
    for (int i = 0; i < 10; ++i) {
        narrow_x.push_back(1.0 + i);
        narrow_y.push_back(1.0);
    }
    CHECK_THROWS_AS(fit_power_law(narrow_x, narrow_y), InsufficientSamples);
    CHECK_THROWS_AS(fit_power_law({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("Hessian growth of the exact family") {
    const auto f = hessian_growth_fit(RadialSingularSolution(2, 1.0), 1e-6, 1e-3, 16);
    CHECK(std::abs(f.exponent + 1.0) < 0.02);
    CHECK(f.constant == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(f.decades() >= 2.0);

    const auto flat = hessian_growth_fit(RadialSingularSolution(2, 0.0), 1e-3, 1.0, 16);
    CHECK(std::abs(flat.exponent) < 1e-12);

    for (int n : {3, 4}) {
        const auto g = hessian_growth_fit(RadialSingularSolution(n, 2.0), 1e-6, 1e-3);
        CHECK(std::abs(g.exponent + 1.0) < 0.02);
        CHECK(g.constant == doctest::Approx(std::pow(2.0, 1.0 / n)).epsilon(1e-3));
    }
    CHECK_THROWS_AS(hessian_growth_fit(RadialSingularSolution(2, 1.0), 1e-3, 1e-2), InsufficientSamples);
}

TEST_CASE("Hessian growth of a solver output") {
    static const RadialSingularSolution exact(2, 1.0);
    const double h_min = 0.0005;
    DirichletProblem p;
    p.domain = ball_polygon(1.0, 64);
    p.atoms = {{Vec2::Zero(), std::numbers::pi}};
    p.boundary_data = [](const Vec2& x) { return radial_value(exact, x.norm()); };
    const std::vector<Vec2> gamma{Vec2::Zero()};
    p.mesh = graded_mesh(p.domain, point_grading(gamma, 0.2, h_min, 0.05), gamma);
    const auto s = solve_dirichlet(p);
    REQUIRE(s.report.converged);

    const auto fit = hessian_growth_fit(s.u, gamma, 4.0 * h_min, 0.3);
    CHECK(fit.exponent >= -1.1);
    CHECK(fit.exponent <= -0.9);

    // Same stencil on exact values.
    std::vector<double> ex;
    for (const auto& x : s.mesh.nodes) ex.push_back(radial_value(exact, x.norm()));
    const auto oracle = hessian_growth_fit(PLConvexFunction(s.mesh.nodes, ex), gamma, 4.0 * h_min, 0.3);
    CHECK(std::abs(fit.exponent - oracle.exponent) < 0.05);
}

TEST_CASE("decay of the exact family in n >= 3") {
    const auto d = asymptotic_decay_check(RadialSingularSolution(3, 1.0), 10.0, 1e4);
    CHECK(d.expected == doctest::Approx(1.0 / 3.0));
    CHECK(d.relative_error < 1e-2);
    CHECK(d.fit.exponent == doctest::Approx(-1.0).epsilon(1e-2));
    for (int n : {3, 4, 5})
        for (double c : {0.5, 1.0, 3.0}) {
            const auto e = asymptotic_decay_check(RadialSingularSolution(n, c), 10.0, 1e4);
            CHECK(e.expected == doctest::Approx(c / (n * (n - 2.0))));
            CHECK(e.relative_error < 1e-2);
            CHECK(e.fit.exponent == doctest::Approx(2.0 - n).epsilon(1e-2));
        }
    for (int n : {3, 4, 5}) {
        // Tail integral against the direct difference where it is still accurate.
        const RadialSingularSolution sol(n, 1.0);
        for (double r : {1.0, 3.0, 10.0})
            CHECK(std::abs(sol.asymptotic_tail(r) - (sol.asymptotic_offset() - sol.profile(r) + 0.5 * r * r)) < 1e-10);
    }
    CHECK_THROWS_AS(asymptotic_decay_check(RadialSingularSolution(3, 1.0), 10.0, 100.0), InsufficientSamples);
    CHECK_THROWS_AS(asymptotic_decay_check(RadialSingularSolution(2, 1.0), 10.0, 1e4), std::invalid_argument);
}

TEST_CASE("log coefficient in the plane") {
    SUBCASE("two atoms of mass pi") {
        const auto cfg = SingularConfiguration::make(2, {vec({1, 0}), vec({-1, 0})},
                                                     {std::numbers::pi, std::numbers::pi});
        CHECK(expected_log_coefficient(cfg) == doctest::Approx(1.0));
        const auto res = solve_global(cfg, {4.0, 8.0, 16.0});
        for (const auto& st : res.steps) CHECK(st.sandwich_violations == 0);
        const auto f = log_coefficient_fit(res.limit().u, Vec2::Zero(), 2.0, 8.0, 9);
        CHECK(f.d >= 0.9);
        CHECK(f.d <= 1.1);
    }
    SUBCASE("no atoms") {
        GlobalOptions o;
        o.h_min = 0.25;
        const auto res = solve_global(SingularConfiguration::make(2, {}, {}), {4.0, 8.0}, o);
        const auto f = log_coefficient_fit(res.limit().u, Vec2::Zero(), 1.0, 4.0, 9);
        CHECK(std::abs(f.d) < 1e-3);
    }
    SUBCASE("range") {
        const PLConvexFunction u({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, {1, 1, 1, 1});
        CHECK_THROWS_AS(log_coefficient_fit(u, Vec2::Zero(), 0.2, 0.3), InsufficientSamples);
        CHECK_THROWS_AS(log_coefficient_fit(u, Vec2::Zero(), 0.2, 0.9, 4), InsufficientSamples);
    }
}

TEST_CASE("orbifold dimension") {
    CHECK(orbifold_dimension(3, 2) == 2);
    CHECK(orbifold_dimension(3, 5) == 13);
    CHECK(orbifold_dimension(4, 3) == 5);
    std::mt19937 rng(7);
    for (int n = 3; n <= 10; ++n) {
        // Branch boundary k - 1 = n.
        CHECK(orbifold_dimension_branches(n, n + 1) == (n + 1) * n - n * (n - 1) / 2);
        CHECK(n * (n + 3) / 2 == (n + 1) * n - n * (n - 1) / 2);
        for (int k = 2; k <= 12; ++k) {
            CHECK(orbifold_dimension_branches(n, k) == orbifold_dimension_counting(n, k));
            if (k - 1 <= n) CHECK(orbifold_dimension(n, k) == k - 1 + (k - 1) * k / 2);
            CHECK(orbifold_dimension(n, k) == k - 1 + gram_rank(n, k - 1, rng));
        }
    }
    CHECK_THROWS_AS(orbifold_dimension(2, 3), std::invalid_argument);
    CHECK_THROWS_AS(orbifold_dimension(3, 1), std::invalid_argument);
}

TEST_CASE("canonical form") {
    SUBCASE("already canonical") {
        const auto cfg = SingularConfiguration::make(3, {vec({0, 0, 0})}, {1.0});
        const auto c = canonicalize(cfg);
        CHECK(c.scale == 1.0);
        CHECK(c.cfg.points[0].norm() == 0.0);
        CHECK(c.cfg.masses[0] == 1.0);
        CHECK(c.cfg.has_standard_asymptotics());
    }
    SUBCASE("mass 8 at e1") {
        const auto cfg = SingularConfiguration::make(3, {vec({1, 0, 0})}, {8.0});
        const auto c = canonicalize(cfg);
        CHECK(c.scale == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(c.cfg.masses[0] == 1.0);
        CHECK(c.cfg.points[0].norm() == 0.0);
        CHECK((c.translation - vec({1, 0, 0})).norm() == 0.0);
        // b' = P / s, c' = |P|^2 / (2 s^2).
        CHECK((c.cfg.b - vec({0.5, 0, 0})).norm() < 1e-15);
        CHECK(c.cfg.c == doctest::Approx(0.125));
    }
    SUBCASE("idempotent on random configurations") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> U(-2.0, 2.0), M(0.2, 5.0);
        for (int t = 0; t < 50; ++t) {
            const int n = 2 + t % 3, k = 1 + t % 4;
            std::vector<Eigen::VectorXd> pts;
            std::vector<double> masses;
            for (int i = 0; i < k; ++i) {
                Eigen::VectorXd p(n);
                for (int j = 0; j < n; ++j) p[j] = U(rng);
                pts.push_back(p);
                masses.push_back(M(rng));
            }
            const auto once = canonicalize(SingularConfiguration::make(n, pts, masses));
            const auto twice = canonicalize(once.cfg);
            CHECK(twice.scale == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(twice.translation.norm() == 0.0);
            for (int i = 0; i < k; ++i) {
                CHECK((twice.cfg.points[i] - once.cfg.points[i]).norm() < 1e-12);
                CHECK(twice.cfg.masses[i] == doctest::Approx(once.cfg.masses[i]).epsilon(1e-14));
            }
            CHECK((twice.cfg.b - once.cfg.b).norm() < 1e-12);
            CHECK(twice.cfg.c == doctest::Approx(once.cfg.c).epsilon(1e-12));
        }
    }
    SUBCASE("radial pull-back") {
        // u solves det = 1 + a delta_P: u(x) = v_c(x - P) with c = a / omega_n.
        // Canonical u~(y) = s^{-2} u(s y + P) solves det = 1 + delta_0.
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        for (int n : {2, 3, 4}) {
            Eigen::VectorXd P(n);
            for (int j = 0; j < n; ++j) P[j] = U(rng);
            const double a = 2.7;
            const auto c = canonicalize(SingularConfiguration::make(n, {P}, {a}));
            const RadialSingularSolution u(n, a / unit_ball_volume(n));
            const RadialSingularSolution canon(n, 1.0 / unit_ball_volume(n));
            for (int t = 0; t < 20; ++t) {
                Eigen::VectorXd y(n);
                for (int j = 0; j < n; ++j) y[j] = 3.0 * U(rng);
                const Eigen::VectorXd x = c.scale * y + c.translation;
                const double pulled = u.value(x - P) / (c.scale * c.scale);
                CHECK(std::abs(pulled - canon.value(y)) < 1e-10);
            }
        }
    }
}

TEST_CASE("metric completion") {
    const std::vector<Vec2> e1{{1.0, 0.0}};
    SUBCASE("flat metric is Euclidean") {
        const RadialSingularSolution flat(2, 0.0);
        CHECK(hessian_metric_length(flat, 0.0, 1.0) == 1.0);
        CHECK(segment_metric_length(flat, Vec2(0.3, -0.2), Vec2(-0.5, 0.6)) ==
              doctest::Approx((Vec2(0.3, -0.2) - Vec2(-0.5, 0.6)).norm()).epsilon(1e-14));
        const auto rep = metric_completion_check(flat, e1, 0);
        CHECK(rep.radial_distance[0] == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("distance from e1 to the singular point") {
        const RadialSingularSolution sol(2, 1.0);
        const auto rep = metric_completion_check(sol, e1, 0);
        REQUIRE(rep.finite);
        CHECK(std::abs(rep.radial_distance[0] - mpmath_metric_e1()) < 1e-6);
        CHECK(rep.graph_distance[0] == doctest::Approx(rep.radial_distance[0]).epsilon(1e-12));
    }
    SUBCASE("triangle inequality on random triples") {
        const RadialSingularSolution sol(2, 1.0);
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<Vec2> probes;
        for (int i = 0; i < 40; ++i) {
            const double r = std::sqrt(U(rng)), th = 2.0 * std::numbers::pi * U(rng);
            probes.emplace_back(r * std::cos(th), r * std::sin(th));
        }
        const auto rep = metric_completion_check(sol, probes, 100, 9);
        CHECK(rep.finite);
        CHECK(rep.triples == 100);
        CHECK(rep.triangle_violations == 0);
        for (std::size_t k = 0; k < probes.size(); ++k) {
            // Rays are shortest to the center; graph paths only zig-zag around them.
            CHECK(rep.graph_distance[k] >= rep.radial_distance[k] - 1e-9);
            CHECK(rep.graph_distance[k] <= 1.05 * rep.radial_distance[k] + 0.01);
        }
    }
    SUBCASE("segment length refines") {
        const RadialSingularSolution sol(2, 1.0);
        const Vec2 p(0.7, 0.1), q(-0.2, 0.5);
        const double coarse = segment_metric_length(sol, p, q, 4);
        const double fine = segment_metric_length(sol, p, q, 64);
        CHECK(std::abs(coarse - fine) < 1e-6);
        CHECK(segment_metric_length(sol, Vec2::Zero(), Vec2(1, 0), 64) ==
              doctest::Approx(mpmath_metric_e1()).epsilon(1e-4));
    }
    SUBCASE("bad input") {
        const RadialSingularSolution sol(2, 1.0);
        const std::vector<Vec2> outside{{1.5, 0.0}};
        CHECK_THROWS_AS(metric_completion_check(sol, outside), std::invalid_argument);
    }
}

TEST_CASE("check records") {
    CheckRecord r;
    r.name = "decay";
    r.tag = "decay-coefficient";
    r.inputs["n"] = 3;
    r.inputs["c"] = 0.1;
    r.measured = 1.0 / 3.0;
    r.expected = 1.0 / 3.0;
    r.tolerance = 1e-2;
    r.pass = true;
    const std::string line = to_json_line(r);
    CHECK(line ==
          R"({"name":"decay","tag":"decay-coefficient","inputs":{"n":3,"c":0.10000000000000001},)"
          R"("measured":0.33333333333333331,"expected":0.33333333333333331,"tolerance":0.01,"pass":true})");
    CHECK(line.find('\n') == std::string::npos);
    const auto back = nlohmann::json::parse(line);
    CHECK(back["measured"].get<double>() == 1.0 / 3.0);
    r.measured = std::numeric_limits<double>::infinity();
    CHECK(to_json_line(r).find("\"measured\":null") != std::string::npos);
}
