#include "alex/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <queue>
#include <random>
#include <set>

#include <boost/math/quadrature/gauss.hpp>

namespace alex {

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - f.intercept - f.slope * x[i];
        ss += e * e;
    }
    f.rms = std::sqrt(ss / m);
    return f;
}

std::vector<double> geometric(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1)));
    return out;
}

double gamma_distance(const Vec2& x, std::span<const Vec2> gamma) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& g : gamma) d = std::min(d, (x - g).norm());
    return d;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace

double RateFit::decades() const {
    if (x.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return std::log10(*hi / *lo);
}

RateFit fit_power_law(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("sample arrays differ in length");
    RateFit f;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        f.x.push_back(x[i]);
        f.y.push_back(y[i]);
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    if (f.x.size() < 8) throw InsufficientSamples("rate fit needs >= 8 positive samples");
    if (f.decades() < 2.0 - 1e-9) throw InsufficientSamples("rate fit needs samples spanning >= 2 decades");
    const auto line = least_squares_line(lx, ly);
    f.exponent = line.slope;
    f.constant = std::exp(line.intercept);
    f.residual = line.rms;
    return f;
}

RateFit hessian_growth_fit(const RadialSingularSolution& sol, double d_lo, double d_hi, int samples) {
    if (!(d_lo > 0.0) || !(d_hi > d_lo)) throw InsufficientSamples("bad distance range");
    std::vector<double> x = geometric(d_lo, d_hi, samples), y;
    for (double r : x) {
        const auto s = radial_hessian_spectrum(sol, r);
        y.push_back(std::max(s.radial, s.tangential));
    }
    return fit_power_law(std::move(x), std::move(y));
}

std::vector<LocalHessian> local_hessians(const PLConvexFunction& u, std::span<const Vec2> gamma, double d_lo,
                                         double d_hi) {
    const auto& hull = u.hull();
    std::vector<LocalHessian> out;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u.is_boundary(i) || hull.is_redundant(i)) continue;
        const double d = gamma_distance(u.node(i), gamma);
        if (d < d_lo || d > d_hi) continue;
        std::set<int> ring;
        for (int a : hull.link(i)) {
            ring.insert(a);
            for (int b : hull.link(a)) ring.insert(b);
        }
        ring.erase(static_cast<int>(i));
        if (ring.size() < 6) continue;
        double scale = 0.0;
        for (int j : ring) scale = std::max(scale, (u.node(j) - u.node(i)).norm());
        // u(x) ~ c + g.(x - x_i) + (x - x_i)' H (x - x_i) / 2 in units of `scale`.
        Eigen::MatrixXd m(ring.size() + 1, 6);
        Eigen::VectorXd rhs(ring.size() + 1);
        int row = 0;
        const auto put = [&](int j) {
            const Vec2 z = (u.node(j) - u.node(i)) / scale;
            m.row(row) << 1.0, z.x(), z.y(), 0.5 * z.x() * z.x(), z.x() * z.y(), 0.5 * z.y() * z.y();
            rhs[row] = u.value(j);
            ++row;
        };
        put(static_cast<int>(i));
        for (int j : ring) put(j);
        const Eigen::VectorXd c = m.colPivHouseholderQr().solve(rhs);
        LocalHessian lh;
        lh.node = static_cast<int>(i);
        lh.distance = d;
        lh.hessian << c[3], c[4], c[4], c[5];
        lh.hessian /= scale * scale;
        out.push_back(lh);
    }
    return out;
}

RateFit hessian_growth_fit(const PLConvexFunction& u, std::span<const Vec2> gamma, double d_lo, double d_hi,
                           int bins) {
    if (!(d_lo > 0.0) || !(d_hi > d_lo) || bins < 1) throw InsufficientSamples("bad distance range");
    const auto local = local_hessians(u, gamma, d_lo, d_hi);
    std::vector<std::vector<double>> dist(bins), norm(bins);
    const double span = std::log(d_hi / d_lo);
    for (const auto& lh : local) {
        const int b = std::min(bins - 1, static_cast<int>(std::log(lh.distance / d_lo) / span * bins));
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(lh.hessian);
        dist[b].push_back(lh.distance);
        norm[b].push_back(es.eigenvalues().cwiseAbs().maxCoeff());
    }
    std::vector<double> x, y;
    for (int b = 0; b < bins; ++b) {
        if (dist[b].empty()) continue;
        x.push_back(median(dist[b]));
        y.push_back(median(norm[b]));
    }
    return fit_power_law(std::move(x), std::move(y));
}

DecayCheck asymptotic_decay_check(const RadialSingularSolution& sol, double r_lo, double r_hi, int samples) {
    const int n = sol.dimension();
    if (n < 3) throw std::invalid_argument("closed-form decay check needs n >= 3");
    if (!(r_lo >= 1.0) || !(r_hi >= 100.0 * r_lo)) throw InsufficientSamples("radius range too small");
    // offset - (u - r^2/2) is the tail integral; differencing u against r^2/2
    // loses everything to cancellation once r^{2-n} drops below eps r^2.
    std::vector<double> x = geometric(r_lo, r_hi, samples), y;
    for (double r : x) y.push_back(sol.asymptotic_tail(r));
    DecayCheck out;
    out.fit = fit_power_law(x, y);
    out.coefficient = std::pow(x.back(), n - 2) * y.back();
    out.expected = sol.mass_param() / (n * (n - 2.0));
    out.relative_error = out.expected > 0.0 ? std::abs(out.coefficient / out.expected - 1.0) : std::abs(out.coefficient);
    return out;
}

LogFit log_coefficient_fit(const PLConvexFunction& u, const Vec2& center, double r_lo, double r_hi, int samples,
                           int angles) {
    if (samples < 8) throw InsufficientSamples("log fit needs >= 8 radii");
    if (!(r_lo > 0.0) || !(r_hi >= 2.0 * r_lo)) throw InsufficientSamples("radius range too small");
    LogFit f;
    f.radii = geometric(r_lo, r_hi, samples);
    std::vector<double> lx;
    for (double rho : f.radii) {
        double m = 0.0;
        for (int j = 0; j < angles; ++j) {
            const double th = 2.0 * std::numbers::pi * j / angles;
            const Vec2 x = center + rho * Vec2(std::cos(th), std::sin(th));
            m += u.evaluate(x) - 0.5 * x.squaredNorm();
        }
        f.means.push_back(m / angles);
        lx.push_back(std::log(rho));
    }
    const auto line = least_squares_line(lx, f.means);
    f.d = line.slope;
    f.intercept = line.intercept;
    f.residual = line.rms;
    return f;
}

double expected_log_coefficient(const SingularConfiguration& cfg) {
    double s = 0.0;
    for (double a : cfg.masses) s += a;
    return s / (2.0 * std::numbers::pi);
}

// ---------------------------------------------------------------------------

namespace {

void check_dimension_args(int n, int k) {
    if (n < 3 || k < 2) throw std::invalid_argument("orbifold dimension needs n >= 3 and k >= 2");
}

}  // namespace

int orbifold_dimension_branches(int n, int k) {
    check_dimension_args(n, k);
    if (k - 1 <= n) return (k - 1) * (k + 2) / 2;
    return (k - 1) * (n + 1) - n * (n - 1) / 2;
}

int orbifold_dimension_counting(int n, int k) {
    check_dimension_args(n, k);
    // k - 1 free masses plus configurations of k - 1 points modulo O(n).
    const int m = k - 1;
    const int shapes = m <= n ? m * k / 2 : m * n - n * (n - 1) / 2;
    return m + shapes;
}

int orbifold_dimension(int n, int k) {
    const int a = orbifold_dimension_branches(n, k);
    const int b = orbifold_dimension_counting(n, k);
    if (a != b) throw std::logic_error("dimension formulas disagree");
    return a;
}

CanonicalForm canonicalize(const SingularConfiguration& cfg) {
    cfg.validate();
    CanonicalForm out;
    out.cfg = cfg;
    const int n = cfg.dimension;
    out.translation = Eigen::VectorXd::Zero(n);
    if (cfg.size() == 0) return out;
    const Eigen::VectorXd P = cfg.points.back();
    const double s = std::pow(cfg.masses.back(), 1.0 / n);
    const double ak = cfg.masses.back();
    out.scale = s;
    out.translation = P;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        out.cfg.points[i] = (cfg.points[i] - P) / s;
        out.cfg.masses[i] = cfg.masses[i] / ak;
    }
    out.cfg.points.back().setZero();
    out.cfg.masses.back() = 1.0;
    const Eigen::MatrixXd A = cfg.matrix();
    const Eigen::VectorXd b = cfg.shift();
    out.cfg.A = A;
    out.cfg.b = (A * P + b) / s;
    out.cfg.c = (0.5 * P.dot(A * P) + b.dot(P) + cfg.c) / (s * s);
    return out;
}

// ---------------------------------------------------------------------------

double segment_metric_length(const RadialSingularSolution& sol, const Vec2& p, const Vec2& q, int pieces) {
    using boost::math::quadrature::gauss;
    const Vec2 v = q - p;
    const double len = v.norm();
    if (len == 0.0) return 0.0;
    const auto speed = [&](double t) {
        const Vec2 x = p + t * v;
        const double rho = x.norm();
        if (rho == 0.0) return 0.0;
        const auto s = radial_hessian_spectrum(sol, rho);
        const double along = x.dot(v) / rho;
        const double q2 = s.radial * along * along + s.tangential * (len * len - along * along);
        return std::sqrt(std::max(q2, 0.0));
    };
    double total = 0.0;
    for (int k = 0; k < pieces; ++k)
        total += gauss<double, 10>::integrate(speed, static_cast<double>(k) / pieces, static_cast<double>(k + 1) / pieces);
    return total;
}

MetricReport metric_completion_check(const RadialSingularSolution& sol, std::span<const Vec2> probes, int triples,
                                     unsigned seed, const MetricOptions& opt) {
    if (!sol.affine().is_trivial() || sol.center().norm() != 0.0)
        throw std::invalid_argument("metric check needs a centered radial solution");
    if (opt.rings < 1 || opt.spokes < 3) throw std::invalid_argument("graph too coarse");
    for (const auto& p : probes)
        if (p.norm() > 1.0 + 1e-12) throw std::invalid_argument("probe outside the closed unit ball");

    // Polar graph: node 0 is the center, then ring-major (i, j).
    const int R = opt.rings, S = opt.spokes;
    std::vector<Vec2> pts{Vec2::Zero()};
    for (int i = 1; i <= R; ++i)
        for (int j = 0; j < S; ++j) {
            const double r = static_cast<double>(i) / R, th = 2.0 * std::numbers::pi * j / S;
            pts.emplace_back(r * std::cos(th), r * std::sin(th));
        }
    const auto id = [S](int i, int j) { return 1 + (i - 1) * S + ((j % S) + S) % S; };
    std::vector<std::vector<std::pair<int, double>>> adj(pts.size());
    const auto link = [&](int a, int b, double w) {
        adj[a].push_back({b, w});
        adj[b].push_back({a, w});
    };
    std::vector<double> radial(R + 1, 0.0);
    for (int i = 1; i <= R; ++i)
        radial[i] = hessian_metric_length(sol, static_cast<double>(i - 1) / R, static_cast<double>(i) / R);
    for (int j = 0; j < S; ++j) link(0, id(1, j), radial[1]);
    for (int i = 1; i <= R; ++i)
        for (int j = 0; j < S; ++j) {
            link(id(i, j), id(i, j + 1), segment_metric_length(sol, pts[id(i, j)], pts[id(i, j + 1)]));
            if (i < R) {
                link(id(i, j), id(i + 1, j), radial[i + 1]);
                link(id(i, j), id(i + 1, j + 1), segment_metric_length(sol, pts[id(i, j)], pts[id(i + 1, j + 1)]));
                link(id(i, j), id(i + 1, j - 1), segment_metric_length(sol, pts[id(i, j)], pts[id(i + 1, j - 1)]));
            }
        }
    // Probes snap to a graph node when they sit on one, else join the
    // corners of their polar cell and the ring neighbors around them.
    std::vector<int> probe_node;
    for (const auto& p : probes) {
        const double r = p.norm();
        int hit = -1;
        if (r < 1e-12) hit = 0;
        const double fi = r * R;
        double th = std::atan2(p.y(), p.x());
        if (th < 0.0) th += 2.0 * std::numbers::pi;
        const double fj = th / (2.0 * std::numbers::pi) * S;
        if (hit < 0 && std::abs(fi - std::round(fi)) < 1e-9 && std::abs(fj - std::round(fj)) < 1e-9)
            hit = id(static_cast<int>(std::round(fi)), static_cast<int>(std::round(fj)));
        if (hit < 0) {
            hit = static_cast<int>(pts.size());
            pts.push_back(p);
            adj.emplace_back();
            const int i0 = static_cast<int>(std::floor(fi)), j0 = static_cast<int>(std::floor(fj));
            for (int i = i0 - 1; i <= i0 + 2; ++i)
                for (int j = j0 - 1; j <= j0 + 2; ++j) {
                    if (i > R || i < 0) continue;
                    const int other = i == 0 ? 0 : id(i, j);
                    link(hit, other, segment_metric_length(sol, p, pts[other]));
                }
        }
        probe_node.push_back(hit);
    }

    const auto dijkstra = [&](int src) {
        std::vector<double> dist(pts.size(), std::numeric_limits<double>::infinity());
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[src] = 0.0;
        pq.push({0.0, src});
        while (!pq.empty()) {
            const auto [d, a] = pq.top();
            pq.pop();
            if (d > dist[a]) continue;
            for (const auto& [b, w] : adj[a])
                if (d + w < dist[b]) {
                    dist[b] = d + w;
                    pq.push({dist[b], b});
                }
        }
        return dist;
    };

    MetricReport rep;
    rep.tolerance = 1e-9;
    const auto from_center = dijkstra(0);
    for (std::size_t k = 0; k < probes.size(); ++k) {
        rep.radial_distance.push_back(hessian_metric_length(sol, 0.0, probes[k].norm()));
        rep.graph_distance.push_back(from_center[probe_node[k]]);
        if (!std::isfinite(rep.radial_distance.back()) || !std::isfinite(rep.graph_distance.back()))
            rep.finite = false;
    }
    if (probes.size() >= 3 && triples > 0) {
        std::mt19937 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, probes.size() - 1);
        std::vector<std::vector<double>> cache(probes.size());
        const auto dist_from = [&](std::size_t k) -> const std::vector<double>& {
            if (cache[k].empty()) cache[k] = dijkstra(probe_node[k]);
            return cache[k];
        };
        rep.worst_triangle_excess = -std::numeric_limits<double>::infinity();
        for (int t = 0; t < triples; ++t) {
            const std::size_t a = pick(rng), b = pick(rng), c = pick(rng);
            const double ab = dist_from(a)[probe_node[b]];
            const double ac = dist_from(a)[probe_node[c]];
            const double cb = dist_from(c)[probe_node[b]];
            const double excess = ab - ac - cb;
            rep.worst_triangle_excess = std::max(rep.worst_triangle_excess, excess);
            if (excess > rep.tolerance) ++rep.triangle_violations;
            ++rep.triples;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json CheckRecord::to_json() const {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["tag"] = tag;
    j["inputs"] = inputs;
    j["measured"] = measured;
    j["expected"] = expected;
    j["tolerance"] = tolerance;
    j["pass"] = pass;
    return j;
}

namespace {

void write17(const nlohmann::ordered_json& j, std::string& out) {
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += nlohmann::json(it.key()).dump();
                out += ':';
                write17(it.value(), out);
            }
            out += '}';
            break;
        }
        case nlohmann::json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                write17(j[i], out);
            }
            out += ']';
            break;
        }
        case nlohmann::json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                break;
            }
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out += buf;
            break;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

std::string dump17(const nlohmann::ordered_json& j) {
    std::string out;
    write17(j, out);
    return out;
}

std::string to_json_line(const CheckRecord& r) { return dump17(r.to_json()); }

}  // namespace alex
