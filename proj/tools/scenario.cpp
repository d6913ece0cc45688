#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "alex/global.hpp"
#include "alex/mesh.hpp"
#include "alex/pl_function.hpp"
#include "alex/radial.hpp"
#include "alex/solver.hpp"
#include "checks.hpp"

namespace alex::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (seps.find(ch) != std::string::npos) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// Plain decimal, or a multiple of pi: `pi`, `2pi`, `0.5*pi`.
bool parse_number(const std::string& tok, double& out) {
    std::string t = tok;
    double unit = 1.0;
    if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
        unit = std::numbers::pi;
        t.erase(t.size() - 2);
        if (!t.empty() && t.back() == '*') t.pop_back();
        if (t.empty()) {
            out = unit;
            return true;
        }
    }
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0' || !std::isfinite(v)) return false;
    out = v * unit;
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------

Config Config::load(const fs::path& file) {
    Config c;
    c.file_ = file;
    std::ifstream in(file);
    if (!in) throw ConfigError(file.string() + ": cannot open");
    std::string line;
    while (std::getline(in, line)) c.lines_.push_back(line);
    try {
        boost::property_tree::ini_parser::read_ini(file.string(), c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(file.string() + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    return c;
}

int Config::line_of(const std::string& section, const std::string& key) const {
    std::string current;
    for (std::size_t i = 0; i < lines_.size(); ++i) {
        const std::string l = trim(lines_[i]);
        if (l.empty() || l[0] == ';' || l[0] == '#') continue;
        if (l.front() == '[' && l.back() == ']') {
            current = trim(l.substr(1, l.size() - 2));
            continue;
        }
        const auto eq = l.find('=');
        if (current == section && eq != std::string::npos && trim(l.substr(0, eq)) == key)
            return static_cast<int>(i) + 1;
    }
    return 0;
}

void Config::fail(const std::string& section, const std::string& key, const std::string& what) const {
    const int line = line_of(section, key);
    std::string where = file_.string() + ":";
    if (line > 0) where += std::to_string(line) + ":";
    throw ConfigError(where + " [" + section + "] " + key + ": " + what);
}

bool Config::has(const std::string& section, const std::string& key) const {
    return static_cast<bool>(tree_.get_optional<std::string>(section + "." + key));
}

std::string Config::text(const std::string& section, const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(section + "." + key);
    if (!v) fail(section, key, "required field missing");
    return trim(*v);
}

std::string Config::text(const std::string& section, const std::string& key, const std::string& fallback) const {
    return has(section, key) ? text(section, key) : fallback;
}

double Config::number(const std::string& section, const std::string& key) const {
    double v = 0.0;
    if (!parse_number(text(section, key), v)) fail(section, key, "expected a number");
    return v;
}

double Config::number(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
}

int Config::integer(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    const double v = number(section, key);
    if (v != std::floor(v) || std::abs(v) > 1e9) fail(section, key, "expected an integer");
    return static_cast<int>(v);
}

std::vector<double> Config::numbers(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    for (const auto& tok : split(text(section, key), " \t,")) {
        double v = 0.0;
        if (!parse_number(tok, v)) fail(section, key, "bad number `" + tok + "`");
        out.push_back(v);
    }
    return out;
}

std::vector<double> Config::numbers(const std::string& section, const std::string& key,
                                    std::vector<double> fallback) const {
    return has(section, key) ? numbers(section, key) : fallback;
}

std::vector<std::string> Config::words(const std::string& section, const std::string& key) const {
    return split(text(section, key), " \t,");
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Atom> parse_atoms(const Config& c, const std::string& section) {
    std::vector<Atom> atoms;
    if (!c.has(section, "atoms")) return atoms;
    for (const auto& item : split(c.text(section, "atoms"), ";")) {
        const auto tok = split(item, " \t,");
        double v[3];
        if (tok.size() != 3) c.fail(section, "atoms", "each atom is `x y mass`, separated by `;`");
        for (int i = 0; i < 3; ++i)
            if (!parse_number(tok[i], v[i])) c.fail(section, "atoms", "bad number `" + tok[i] + "`");
        if (!(v[2] > 0.0)) c.fail(section, "atoms", "masses must be positive");
        atoms.push_back({Vec2(v[0], v[1]), v[2]});
    }
    return atoms;
}

double positive(const Config& c, const std::string& s, const std::string& k, double fallback) {
    const double v = c.number(s, k, fallback);
    if (!(v > 0.0)) c.fail(s, k, "must be > 0");
    return v;
}

// -- radial -----------------------------------------------------------------

struct RadialParams {
    double c = 1.0;
    std::vector<int> dims;
    std::vector<double> radii;
};

RadialParams radial_params(const Config& cfg) {
    RadialParams p;
    p.c = cfg.number("radial", "c");
    if (!(p.c >= 0.0)) cfg.fail("radial", "c", "must be >= 0");
    for (double d : cfg.numbers("radial", "dimensions")) {
        if (d != std::floor(d) || d < 2 || d > 64) cfg.fail("radial", "dimensions", "integers >= 2 expected");
        p.dims.push_back(static_cast<int>(d));
    }
    p.radii = cfg.numbers("radial", "radii", {1e-6, 1e-4, 1e-2, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0});
    for (double r : p.radii)
        if (!(r > 0.0)) cfg.fail("radial", "radii", "radii must be > 0");
    return p;
}

std::vector<CheckRecord> run_radial(const Config& cfg, const fs::path& dir) {
    const auto p = radial_params(cfg);
    std::ofstream table(dir / "table.txt");
    table << "# n r u du lambda_r lambda_t\n" << std::setprecision(17);
    std::vector<CheckRecord> out;
    const double r_max = *std::max_element(p.radii.begin(), p.radii.end());
    for (int n : p.dims) {
        const RadialSingularSolution sol(n, p.c);
        for (double r : p.radii) {
            const auto s = radial_hessian_spectrum(sol, r);
            table << n << ' ' << r << ' ' << radial_value(sol, r) << ' ' << sol.profile_derivative(r) << ' '
                  << s.radial << ' ' << s.tangential << '\n';
        }
        RadialMeasure m;
        m.dimension = n;
        m.atom_at_center = p.c * unit_ball_volume(n);
        const auto prof = radial_ode_solve(m, r_max);
        double worst = 0.0;
        for (double r : p.radii) worst = std::max(worst, std::abs(prof.value(r) - radial_value(sol, r)));
        auto rec = make_record("radial-ode", "radial-ode", worst, 0.0, 1e-8, worst < 1e-8);
        rec.inputs = {{"n", n}, {"c", p.c}};
        out.push_back(rec);
        if (p.c > 0.0) {
            const double rl = 1e-6 * radial_hessian_spectrum(sol, 1e-6).tangential;
            const double e = std::pow(p.c, 1.0 / n);
            auto t = make_record("tangential-rate", "hessian-rate", rl, e, 1e-4, std::abs(rl / e - 1.0) < 1e-4);
            t.inputs = {{"n", n}, {"c", p.c}, {"r", 1e-6}};
            out.push_back(t);
        }
    }
    if (p.c == 1.0 && std::find(p.dims.begin(), p.dims.end(), 2) != p.dims.end()) {
        const double v = radial_value(RadialSingularSolution(2, 1.0), 1.0);
        const double e = 0.5 * (std::sqrt(2.0) + std::asinh(1.0));
        out.push_back(make_record("radial-closed-form", "radial-family", v, e, 1e-9, std::abs(v - e) < 1e-9));
    }
    return out;
}

// -- dirichlet --------------------------------------------------------------

struct DirichletParams {
    DirichletProblem problem;
    std::string boundary;
    std::string mesh;
    double h = 0.05, h_min = 0.0, grading = 0.2, h_max = 0.05;
    std::vector<std::string> checks;
    double fit_lo = 0.0, fit_hi = 0.3;
    double radial_c = 0.0;
    int max_newton_steps = 200;
    int max_sweeps = 100000;
};

DirichletParams dirichlet_params(const Config& cfg) {
    const std::string S = "dirichlet";
    DirichletParams p;
    const std::string domain = cfg.text(S, "domain", "ball");
    if (domain == "ball") {
        p.problem.domain = ball_polygon(positive(cfg, S, "radius", 1.0), cfg.integer(S, "sides", 64));
        if (cfg.integer(S, "sides", 64) < 3) cfg.fail(S, "sides", "need >= 3 sides");
    } else if (domain == "square") {
        const double a = positive(cfg, S, "half_width", 1.0);
        p.problem.domain = ConvexPolygon::box(Vec2(-a, -a), Vec2(a, a));
    } else {
        cfg.fail(S, "domain", "expected `ball` or `square`");
    }
    p.problem.atoms = parse_atoms(cfg, S);
    p.problem.density_constant = cfg.number(S, "density", 1.0);
    if (!(p.problem.density_constant >= 0.0)) cfg.fail(S, "density", "must be >= 0");
    p.boundary = cfg.text(S, "boundary");
    if (p.boundary == "radial") {
        if (p.problem.atoms.size() > 1 || (p.problem.atoms.size() == 1 && p.problem.atoms[0].position.norm() != 0.0))
            cfg.fail(S, "boundary", "radial data needs at most one atom, at the origin");
        if (p.problem.density_constant != 1.0) cfg.fail(S, "boundary", "radial data needs density 1");
        p.radial_c = p.problem.atoms.empty() ? 0.0 : p.problem.atoms[0].mass / std::numbers::pi;
        const RadialSingularSolution sol(2, p.radial_c);
        p.problem.boundary_data = [sol](const Vec2& x) { return radial_value(sol, x.norm()); };
    } else if (p.boundary == "paraboloid") {
        const double shift = cfg.number(S, "boundary_shift", 0.0);
        p.problem.boundary_data = [shift](const Vec2& x) { return 0.5 * x.squaredNorm() + shift; };
    } else {
        cfg.fail(S, "boundary", "expected `radial` or `paraboloid`");
    }
    p.mesh = cfg.text(S, "mesh", "uniform");
    if (p.mesh == "uniform") {
        p.h = positive(cfg, S, "h", 0.05);
        p.h_min = p.h;
    } else if (p.mesh == "graded") {
        p.h_min = positive(cfg, S, "h_min", 0.001);
        p.grading = positive(cfg, S, "grading", 0.2);
        p.h_max = positive(cfg, S, "h_max", 0.05);
        p.h = p.h_max;
        if (p.problem.atoms.empty()) cfg.fail(S, "mesh", "graded meshes grade towards the atoms; none given");
    } else {
        cfg.fail(S, "mesh", "expected `uniform` or `graded`");
    }
    p.problem.h = p.h;
    p.checks = cfg.has(S, "checks") ? cfg.words(S, "checks") : std::vector<std::string>{"residual"};
    for (const auto& c : p.checks)
        if (c != "residual" && c != "radial-error" && c != "hessian-growth" && c != "strict-convexity" &&
            c != "comparison")
            cfg.fail(S, "checks", "unknown check `" + c + "`");
    const auto wants = [&](const char* c) { return std::find(p.checks.begin(), p.checks.end(), c) != p.checks.end(); };
    if (wants("radial-error") && p.boundary != "radial") cfg.fail(S, "checks", "radial-error needs radial boundary data");
    // u <= |x|^2/2 needs data below it and a measure above Lebesgue.
    if (wants("comparison") && (p.boundary != "paraboloid" || cfg.number(S, "boundary_shift", 0.0) > 0.0 ||
                                p.problem.density_constant < 1.0))
        cfg.fail(S, "checks", "comparison needs paraboloid data with boundary_shift <= 0 and density >= 1");
    p.max_newton_steps = cfg.integer(S, "max_newton_steps", p.max_newton_steps);
    p.max_sweeps = cfg.integer(S, "max_sweeps", p.max_sweeps);
    if (p.max_newton_steps < 1) cfg.fail(S, "max_newton_steps", "must be >= 1");
    if (p.max_sweeps < 1) cfg.fail(S, "max_sweeps", "must be >= 1");
    p.fit_lo = positive(cfg, S, "fit_lo", 4.0 * p.h_min);
    p.fit_hi = positive(cfg, S, "fit_hi", 0.3);
    return p;
}

std::vector<CheckRecord> run_dirichlet(const Config& cfg, const fs::path& dir, double tol_scale) {
    auto p = dirichlet_params(cfg);
    std::vector<Vec2> gamma;
    for (const auto& a : p.problem.atoms) gamma.push_back(a.position);
    if (p.mesh == "graded")
        p.problem.mesh = graded_mesh(p.problem.domain, point_grading(gamma, p.grading, p.h_min, p.h_max), gamma);
    SolveOptions o;
    o.tol_scale = tol_scale;
    o.max_newton_steps = p.max_newton_steps;
    o.max_sweeps = p.max_sweeps;
    const auto s = solve_dirichlet(p.problem, o);
    {
        std::ofstream f(dir / "solution.txt");
        write_columnar(f, s.u, "nodes " + std::to_string(s.mesh.size()));
        std::ofstream a(dir / "atoms.txt");
        write_atoms(a, s.u, ma_measure(s.u));
    }
    std::vector<CheckRecord> out;
    for (const auto& c : p.checks) {
        if (c == "residual") {
            out.push_back(make_record("residual", "dirichlet-recovery", s.report.max_residual, 0.0, s.report.tolerance,
                                      s.report.max_residual < s.report.tolerance));
        } else if (c == "radial-error") {
            const RadialSingularSolution sol(2, p.radial_c);
            double err = 0.0;
            for (std::size_t i = 0; i < s.mesh.size(); ++i)
                err = std::max(err, std::abs(s.u.value(i) - radial_value(sol, s.mesh.nodes[i].norm())));
            auto r = make_record("radial-error", "dirichlet-recovery", err, 0.0, 5.0 * s.mesh.h, err < 5.0 * s.mesh.h);
            r.inputs = {{"h", s.mesh.h}, {"nodes", s.mesh.size()}};
            out.push_back(r);
        } else if (c == "hessian-growth") {
            const auto fit = hessian_growth_fit(s.u, gamma, p.fit_lo, p.fit_hi);
            {
                std::ofstream f(dir / "hessian_fit.txt");
                f << "# distance hessian_norm\n" << std::setprecision(17);
                for (std::size_t i = 0; i < fit.x.size(); ++i) f << fit.x[i] << ' ' << fit.y[i] << '\n';
            }
            json m = {{"exponent", fit.exponent}, {"constant", fit.constant}, {"residual", fit.residual}};
            auto r = make_record("hessian-growth", "hessian-rate", m, json{-1.1, -0.9}, 0.1,
                                 fit.exponent >= -1.1 && fit.exponent <= -0.9);
            r.inputs = {{"dist_lo", p.fit_lo}, {"dist_hi", p.fit_hi}, {"nodes", s.mesh.size()}};
            out.push_back(r);
        } else if (c == "strict-convexity") {
            const auto map = strict_convexity_region(s.u, SingularSet{gamma, {}}, s.mesh.h);
            const auto bad = map.degenerate_outside.size();
            out.push_back(make_record("strict-convexity", "strict-convexity", bad, 0, 0.0, bad == 0));
        } else if (c == "comparison") {
            double excess = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < s.mesh.size(); ++i)
                excess = std::max(excess, s.u.value(i) - 0.5 * s.mesh.nodes[i].squaredNorm());
            out.push_back(make_record("comparison-principle", "comparison", excess, "<= 0", s.report.tolerance,
                                      excess <= s.report.tolerance));
        }
    }
    return out;
}

// -- global -----------------------------------------------------------------

struct GlobalParams {
    SingularConfiguration cfg;
    std::vector<double> radii;
    GlobalOptions opt;
    Vec2 center = Vec2::Zero();
    double fit_lo = 0.0, fit_hi = 0.0;
    int fit_samples = 9;
    double log_tolerance = 0.1;
};

GlobalParams global_params(const Config& c) {
    const std::string S = "global";
    GlobalParams p;
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> masses;
    for (const auto& a : parse_atoms(c, S)) {
        pts.push_back(Eigen::Vector2d(a.position));
        masses.push_back(a.mass);
    }
    p.cfg = SingularConfiguration::make(2, pts, masses);
    p.radii = c.numbers(S, "radii");
    if (p.radii.empty()) c.fail(S, "radii", "need at least one radius");
    for (std::size_t i = 1; i < p.radii.size(); ++i)
        if (!(p.radii[i] > p.radii[i - 1])) c.fail(S, "radii", "radii must increase");
    p.opt.h_min = positive(c, S, "h_min", p.opt.h_min);
    p.opt.grading = positive(c, S, "grading", p.opt.grading);
    p.opt.h_max_fraction = positive(c, S, "h_max_fraction", p.opt.h_max_fraction);
    p.opt.sides = c.integer(S, "sides", p.opt.sides);
    if (p.opt.sides < 3) c.fail(S, "sides", "need >= 3 sides");
    p.opt.abort_on_violation = false;
    const auto center = c.numbers(S, "fit_center", {0.0, 0.0});
    if (center.size() != 2) c.fail(S, "fit_center", "expected `x y`");
    p.center = Vec2(center[0], center[1]);
    const auto range = c.numbers(S, "fit_range", {p.radii.back() / 8.0, p.radii.back() / 2.0});
    if (range.size() != 2 || !(range[0] > 0.0) || !(range[1] >= 2.0 * range[0]))
        c.fail(S, "fit_range", "expected `lo hi` with hi >= 2 lo > 0");
    p.fit_lo = range[0];
    p.fit_hi = range[1];
    p.fit_samples = c.integer(S, "fit_samples", 9);
    if (p.fit_samples < 8) c.fail(S, "fit_samples", "need >= 8");
    p.log_tolerance = positive(c, S, "log_tolerance", 0.1);
    return p;
}

std::string radius_tag(double r) {
    std::ostringstream s;
    s << r;
    return s.str();
}

std::vector<CheckRecord> run_global(const Config& c, const fs::path& dir, double tol_scale) {
    auto p = global_params(c);
    p.opt.tol_scale = tol_scale;
    const auto res = solve_global(p.cfg, p.radii, p.opt);
    std::vector<CheckRecord> out;
    std::ofstream steps(dir / "steps.txt");
    steps << "# radius nodes h lipschitz sandwich_tolerance violations worst_gap cauchy_oscillation beta_minus "
             "beta_plus\n"
          << std::setprecision(17);
    for (const auto& st : res.steps) {
        steps << st.radius << ' ' << st.solution.mesh.size() << ' ' << st.solution.mesh.h << ' ' << st.lipschitz << ' '
              << st.sandwich_tolerance << ' ' << st.sandwich_violations << ' ' << st.worst_sandwich_gap << ' '
              << st.cauchy_oscillation << ' ' << st.sandwich.beta_minus << ' ' << st.sandwich.beta_plus << '\n';
        std::ofstream f(dir / ("solution_R" + radius_tag(st.radius) + ".txt"));
        write_columnar(f, st.solution.u, "radius " + radius_tag(st.radius));
        auto r = make_record("sandwich", "sandwich", st.sandwich_violations, 0, st.sandwich_tolerance,
                             st.sandwich_violations == 0);
        r.inputs = {{"radius", st.radius}, {"worst_gap", st.worst_sandwich_gap}};
        out.push_back(r);
    }
    const auto fit = log_coefficient_fit(res.limit().u, p.center, p.fit_lo, p.fit_hi, p.fit_samples);
    {
        std::ofstream f(dir / "log_fit.txt");
        f << "# radius ring_mean(u - |x|^2/2)\n" << std::setprecision(17);
        for (std::size_t i = 0; i < fit.radii.size(); ++i) f << fit.radii[i] << ' ' << fit.means[i] << '\n';
    }
    const double e = expected_log_coefficient(p.cfg);
    const double tol = p.log_tolerance * std::max(e, 1.0);
    json m = {{"d", fit.d}, {"intercept", fit.intercept}, {"residual", fit.residual}};
    auto r = make_record("log-coefficient", "log-coefficient", m, e, tol, std::abs(fit.d - e) <= tol);
    r.inputs = {{"radius", p.radii.back()}, {"fit_lo", p.fit_lo}, {"fit_hi", p.fit_hi}};
    out.push_back(r);
    return out;
}

// -- dims -------------------------------------------------------------------

std::pair<int, int> int_range(const Config& c, const std::string& key, int lo_min, std::pair<int, int> fallback) {
    if (!c.has("dims", key)) return fallback;
    const auto v = c.numbers("dims", key);
    if (v.size() != 2 || v[0] != std::floor(v[0]) || v[1] != std::floor(v[1]) || v[0] < lo_min || v[1] < v[0])
        c.fail("dims", key, "expected `lo hi` integers with lo >= " + std::to_string(lo_min));
    return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

std::vector<CheckRecord> run_dims(const Config& c, const fs::path& dir) {
    const auto [n0, n1] = int_range(c, "n", 3, {3, 6});
    const auto [k0, k1] = int_range(c, "k", 2, {2, 8});
    std::ofstream table(dir / "dims.txt");
    table << "# n k d branches counting\n";
    bool agree = true;
    for (int n = n0; n <= n1; ++n)
        for (int k = k0; k <= k1; ++k) {
            const int b = orbifold_dimension_branches(n, k), m = orbifold_dimension_counting(n, k);
            agree = agree && b == m;
            table << n << ' ' << k << ' ' << (b == m ? b : -1) << ' ' << b << ' ' << m << '\n';
        }
    std::vector<CheckRecord> out;
    out.push_back(make_record("dimension-forms-agree", "orbifold-dimension", agree, true, 0.0, agree));
    for (const auto& [n, k, d] : {std::tuple{3, 2, 2}, std::tuple{3, 5, 13}, std::tuple{4, 3, 5}}) {
        if (n < n0 || n > n1 || k < k0 || k > k1) continue;
        const int got = orbifold_dimension(n, k);
        auto r = make_record("dimension-formula", "orbifold-dimension", got, d, 0.0, got == d);
        r.inputs = {{"n", n}, {"k", k}};
        out.push_back(r);
    }
    return out;
}

// -- verify-suite -----------------------------------------------------------

std::vector<const CheckSpec*> suite_checks(const Config& c) {
    const auto words = c.has("verify", "checks") ? c.words("verify", "checks") : std::vector<std::string>{"all"};
    std::vector<const CheckSpec*> out;
    for (const auto& w : words) {
        bool found = false;
        for (const auto& spec : check_catalogue())
            if (w == "all" || spec.name == w || spec.tag == w) {
                if (std::find(out.begin(), out.end(), &spec) == out.end()) out.push_back(&spec);
                found = true;
            }
        if (!found) c.fail("verify", "checks", "unknown check `" + w + "`");
    }
    return out;
}

std::vector<CheckRecord> run_suite(const Config& c, double tol_scale) {
    std::vector<CheckRecord> out;
    CheckContext ctx;
    ctx.tol_scale = tol_scale;
    for (const auto* spec : suite_checks(c))
        for (auto& r : spec->run(ctx)) out.push_back(std::move(r));
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Scenario load_scenario(const fs::path& file) {
    Scenario sc{.name = {}, .mode = {}, .output = {}, .config = Config::load(file)};
    const auto& c = sc.config;
    sc.name = c.text("scenario", "name");
    if (sc.name.empty() || sc.name.find('/') != std::string::npos) c.fail("scenario", "name", "bad scenario name");
    sc.mode = c.text("scenario", "mode");
    sc.output = c.text("scenario", "output", sc.name);
    if (sc.mode == "radial") {
        radial_params(c);
    } else if (sc.mode == "dirichlet") {
        dirichlet_params(c);
    } else if (sc.mode == "global") {
        global_params(c);
    } else if (sc.mode == "dims") {
        int_range(c, "n", 3, {3, 6});
        int_range(c, "k", 2, {2, 8});
    } else if (sc.mode == "verify-suite") {
        suite_checks(c);
    } else {
        c.fail("scenario", "mode", "expected radial, dirichlet, global, dims or verify-suite");
    }
    return sc;
}

bool ScenarioResult::ok() const {
    return error.empty() && std::all_of(records.begin(), records.end(), [](const auto& r) { return r.pass; });
}

ScenarioResult run_scenario(const Scenario& sc, const fs::path& out_dir, double tol_scale) {
    ScenarioResult res;
    res.name = sc.name;
    const fs::path dir = out_dir / sc.output;
    try {
        fs::create_directories(dir);
        if (sc.mode == "radial")
            res.records = run_radial(sc.config, dir);
        else if (sc.mode == "dirichlet")
            res.records = run_dirichlet(sc.config, dir, tol_scale);
        else if (sc.mode == "global")
            res.records = run_global(sc.config, dir, tol_scale);
        else if (sc.mode == "dims")
            res.records = run_dims(sc.config, dir);
        else
            res.records = run_suite(sc.config, tol_scale);
        std::ofstream rec(dir / "checks.jsonl");
        for (const auto& r : res.records) rec << to_json_line(r) << '\n';
        std::ofstream sum(dir / "summary.txt");
        sum << summary_table({res});
    } catch (const ConvergenceError& e) {
        res.error = std::string("solver did not converge: ") + e.what();
    } catch (const std::exception& e) {
        res.error = e.what();
    }
    return res;
}

std::string summary_table(const std::vector<ScenarioResult>& results) {
    struct Row {
        std::string cells[8];
    };
    std::vector<Row> rows{{{"scenario", "check", "tag", "inputs", "measured", "expected", "tolerance", "status"}}};
    for (const auto& res : results) {
        for (const auto& r : res.records)
            rows.push_back({{res.name, r.name, r.tag, r.inputs.empty() ? "-" : dump17(r.inputs), dump17(r.measured),
                             dump17(r.expected), dump17(r.tolerance), r.pass ? "pass" : "FAIL"}});
        if (!res.error.empty()) rows.push_back({{res.name, "-", "-", "-", "-", "-", "-", "ERROR: " + res.error}});
    }
    std::size_t width[8] = {};
    for (const auto& row : rows)
        for (int i = 0; i < 7; ++i) width[i] = std::max(width[i], row.cells[i].size());
    std::ostringstream os;
    for (const auto& row : rows) {
        for (int i = 0; i < 7; ++i) os << std::left << std::setw(static_cast<int>(width[i]) + 2) << row.cells[i];
        os << row.cells[7] << '\n';
    }
    return os.str();
}

}  // namespace alex::cli
