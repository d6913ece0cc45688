#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "alex/radial.hpp"
#include "alex/solver.hpp"

namespace alex {

/// det D^2 u = 1 + sum a_i delta_{P_i} in R^n with u ~ x'Ax/2 + b.x + c.
struct SingularConfiguration {
    int dimension = 2;
    std::vector<Eigen::VectorXd> points;
    std::vector<double> masses;
    Eigen::MatrixXd A;  ///< empty: identity
    Eigen::VectorXd b;  ///< empty: zero
    double c = 0.0;

    static SingularConfiguration make(int n, std::vector<Eigen::VectorXd> points, std::vector<double> masses);

    std::size_t size() const { return points.size(); }
    Eigen::MatrixXd matrix() const;
    Eigen::VectorXd shift() const;
    /// Throws std::invalid_argument: repeated points, masses <= 0, det A != 1.
    void validate() const;
    bool has_standard_asymptotics(double tol = 1e-12) const;
};

/// (1/k) sum u_i, where u_i solves det D^2 u_i = 1 + k^n a_i delta_{P_i} and is
/// tilted to u_i = v_i(x - P_i) + P_i.x - |P_i|^2/2. Values, gradients and
/// Hessians are closed form; singular points are rejected (std::domain_error).
class AveragedSubsolution {
public:
    explicit AveragedSubsolution(const SingularConfiguration& cfg);

    int dimension() const { return n_; }
    std::size_t size() const { return parts_.size(); }
    const RadialSingularSolution& part(std::size_t i) const { return parts_[i]; }

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;
    double hessian_det(const Eigen::VectorXd& x) const;
    /// det(H)^{1/n} - (1/k) sum det(H_i)^{1/n}; nonnegative by Minkowski.
    double minkowski_defect(const Eigen::VectorXd& x) const;

private:
    void reject_singular(const Eigen::VectorXd& x) const;

    int n_;
    std::vector<RadialSingularSolution> parts_;
    std::vector<Eigen::VectorXd> points_;
};

AveragedSubsolution averaged_subsolution(const SingularConfiguration& cfg);

/// v(x) = k (4|x'|^2/r^2 + (x_n - 3/4)^2 - 1/16), k = lambda^{1/n} r^{2-2/n} / (2 4^{(n-1)/n}).
double ellipsoid_barrier(int n, double lambda, double r, const Eigen::VectorXd& x);
/// Constant Hessian of the barrier; its determinant is lambda.
Eigen::MatrixXd ellipsoid_barrier_hessian(int n, double lambda, double r);

struct SandwichOptions {
    /// Radius of the ball problem; infinite for the whole-space bounds
    /// (dimension >= 3 only, the shifts diverge logarithmically in the plane).
    double radius = std::numeric_limits<double>::infinity();
    /// Mesh size for the inner problem when the data is not radial (2D only).
    double inner_h = 0.025;
};

/// Sub- and supersolution pair for the ball problems u_R = |x|^2/2 on dB_R.
/// Profiles live in rescaled coordinates y = x / scale, where the atoms sit in
/// B_{1/3}; `lower_bound` / `upper_bound` map back.
struct SandwichBounds {
    int dimension = 0;
    double scale = 1.0;
    double radius = 0.0;  ///< in y coordinates
    double c0 = 0.0;
    double K1 = 0.0;
    double K2 = 0.0;
    double a = 0.0;  ///< bump mass added to the inner problem
    double beta_minus = 0.0;
    double beta_plus = 0.0;
    double inner_resolution = 0.0;  ///< 0 for the radial (exact) inner part
    bool inner_above_v2 = false;    ///< v_1 >= K1 (r^2 - 1) checked on B_1
    std::shared_ptr<const std::function<double(const Eigen::VectorXd&)>> inner;

    double lower(const Eigen::VectorXd& y) const;
    double upper(const Eigen::VectorXd& y) const;
    /// One-sided radial slopes at r = 1: 2 K1 inside, (1 + K2)^{1/n} outside.
    double inner_slope() const { return 2.0 * K1; }
    double outer_slope() const;
    bool gradient_jump_holds() const { return inner_slope() < outer_slope(); }

    double lower_bound(const Eigen::VectorXd& x) const;
    double upper_bound(const Eigen::VectorXd& x) const;
};

/// Radial data (one atom at the origin or none) in any dimension >= 2, or any
/// planar configuration with a finite radius. The whole-space planar case and
/// non-radial data in dimension >= 3 throw std::invalid_argument.
SandwichBounds build_sandwich(const SingularConfiguration& cfg, const SandwichOptions& opt = {});

/// Outer radial profiles: int_1^r (t^n + K)^{1/n} dt (K = -1 for the upper one).
double sandwich_profile(int n, double K, double r);

struct GlobalOptions {
    int sides = 64;
    /// Graded mesh: clamp(grading * dist(x, atoms), h_min, h_max_fraction * R),
    /// capped by h_max_fraction * R_1 inside the first ball.
    double grading = 0.25;
    double h_min = 0.05;
    double h_max_fraction = 1.0 / 32.0;
    double tol_scale = 1.0;
    bool abort_on_violation = true;
    SandwichOptions sandwich;
};

struct GlobalStep {
    double radius = 0.0;
    DirichletSolution solution;
    SandwichBounds sandwich;
    double lipschitz = 0.0;
    double sandwich_tolerance = 0.0;
    int sandwich_violations = 0;
    double worst_sandwich_gap = 0.0;  ///< most negative slack, <= 0 means a violation
    /// Oscillation of u_R - u_{R_prev} over the nodes in the core B_{R_1}; NaN for the first ball.
    double cauchy_oscillation = 0.0;
};

struct GlobalResult {
    std::vector<GlobalStep> steps;
    const DirichletSolution& limit() const { return steps.back().solution; }
};

class SandwichViolation : public std::runtime_error {
public:
    SandwichViolation(const std::string& what, GlobalStep step)
        : std::runtime_error(what), step_(std::move(step)) {}
    const GlobalStep& step() const { return step_; }

private:
    GlobalStep step_;
};

/// Planar ball problems with data |x|^2/2 on increasing radii.
GlobalResult solve_global(const SingularConfiguration& cfg, const std::vector<double>& radii,
                          const GlobalOptions& opt = {});

/// Largest facet gradient norm.
double lipschitz_constant(const PLConvexFunction& u);

struct ComparisonReport {
    bool ordered = true;           ///< u <= v + tol at every node
    std::vector<int> violations;   ///< nodes with u > v + tol
    double max_excess = 0.0;       ///< max(u - v)
    bool boundary_ordered = true;  ///< precondition: u <= v + tol on the boundary
    bool measure_ordered = true;   ///< precondition: mass(u) >= mass(v) - tol at interior nodes
};

/// Node-wise comparison of two PL functions on the same nodes.
ComparisonReport comparison_check(const PLConvexFunction& u, const PLConvexFunction& v, double tol = 1e-9);

}  // namespace alex
