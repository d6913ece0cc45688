#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "alex/global.hpp"
#include "alex/pl_function.hpp"
#include "alex/radial.hpp"

namespace alex {

class InsufficientSamples : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Least-squares fit of log y = log C + p log x.
struct RateFit {
    std::vector<double> x;
    std::vector<double> y;
    double exponent = 0.0;
    double constant = 0.0;
    double residual = 0.0;  ///< RMS of the log residuals

    double decades() const;
};

/// Needs >= 8 positive samples over >= 2 decades of x (InsufficientSamples).
RateFit fit_power_law(std::vector<double> x, std::vector<double> y);

/// Exact |D^2 u| (largest eigenvalue) at distances geometrically spaced in [d_lo, d_hi].
RateFit hessian_growth_fit(const RadialSingularSolution& sol, double d_lo, double d_hi, int samples = 16);

struct LocalHessian {
    int node = -1;
    double distance = 0.0;
    Eigen::Matrix2d hessian = Eigen::Matrix2d::Zero();
};

/// Quadratic least squares on each interior node's two-ring. Boundary nodes
/// are skipped.
std::vector<LocalHessian> local_hessians(const PLConvexFunction& u, std::span<const Vec2> gamma, double d_lo,
                                         double d_hi);

/// Median |D^2 u| per geometric distance bin, fitted against the bin's
/// median distance. Empty bins are dropped.
RateFit hessian_growth_fit(const PLConvexFunction& u, std::span<const Vec2> gamma, double d_lo, double d_hi,
                           int bins = 12);

struct DecayCheck {
    RateFit fit;               ///< offset - (u - r^2/2), i.e. the tail integral, against r
    double coefficient = 0.0;  ///< r^{n-2} (offset - (u - r^2/2)) at the largest radius
    double expected = 0.0;     ///< c / (n (n - 2))
    double relative_error = 0.0;
};

/// Dimension >= 3 closed form; radii geometric in [r_lo, r_hi].
DecayCheck asymptotic_decay_check(const RadialSingularSolution& sol, double r_lo, double r_hi, int samples = 16);

/// Fit of ring means of u - |x|^2/2 against d log|x - center| + e.
struct LogFit {
    std::vector<double> radii;
    std::vector<double> means;
    double d = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  ///< RMS
};

/// Needs >= 8 radii and r_hi >= 2 r_lo (InsufficientSamples).
LogFit log_coefficient_fit(const PLConvexFunction& u, const Vec2& center, double r_lo, double r_hi,
                           int samples = 12, int angles = 256);

/// (1 / 2 pi) sum a_i.
double expected_log_coefficient(const SingularConfiguration& cfg);

/// Dimension of the moduli of k-point solutions in R^n; needs n >= 3, k >= 2.
/// The branch formula and the mass-plus-configuration count are both
/// evaluated and must agree (std::logic_error otherwise).
int orbifold_dimension(int n, int k);
/// The two forms separately, for cross-checks.
int orbifold_dimension_branches(int n, int k);
int orbifold_dimension_counting(int n, int k);

/// x = scale * y + translation maps canonical coordinates y back.
struct CanonicalForm {
    SingularConfiguration cfg;
    double scale = 1.0;
    Eigen::VectorXd translation;
};

/// Moves the last point to 0 and rescales so its mass is 1:
/// u~(y) = s^{-2} u(s y + P_k) with s = a_k^{1/n}.
CanonicalForm canonicalize(const SingularConfiguration& cfg);

struct MetricOptions {
    int rings = 64;
    int spokes = 128;
};

struct MetricReport {
    std::vector<double> radial_distance;  ///< d_g(P, 0) along the ray, per probe
    std::vector<double> graph_distance;   ///< shortest path to 0 in the graph, per probe
    bool finite = true;
    int triples = 0;
    int triangle_violations = 0;
    double worst_triangle_excess = 0.0;  ///< max d(P,Q) - d(P,R) - d(R,Q)
    double tolerance = 0.0;
};

/// Hessian-metric distances on the closed unit ball of the plane through
/// e_1, e_2 (the first two coordinates of the probes). Edges of a polar graph
/// carry their metric length; radial edges into the center use the profile.
/// Triangle inequalities are checked on `triples` random probe triples.
MetricReport metric_completion_check(const RadialSingularSolution& sol, std::span<const Vec2> probes,
                                     int triples = 100, unsigned seed = 1, const MetricOptions& opt = {});

/// Metric length of the straight segment [p, q] (Gauss-Legendre, `pieces` panels).
double segment_metric_length(const RadialSingularSolution& sol, const Vec2& p, const Vec2& q, int pieces = 8);

/// One line-delimited verification record.
struct CheckRecord {
    std::string name;
    std::string tag;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    nlohmann::ordered_json measured;
    nlohmann::ordered_json expected;
    double tolerance = 0.0;
    bool pass = false;

    nlohmann::ordered_json to_json() const;
};

/// Compact JSON with doubles written to 17 significant digits; non-finite
/// doubles become null.
std::string dump17(const nlohmann::ordered_json& j);
std::string to_json_line(const CheckRecord& r);

}  // namespace alex
