#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace alex {

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// Unimodular affine normalization u(x) = profile(|A x + b - P|) - l.x.
struct AffineNormalization {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd linear;

    static AffineNormalization identity(int n);
    bool is_trivial(double tol = 0.0) const;
};

/// A member of the radial singular family
///
///     u(x) = int_0^{|x-P|} (t^n + c)^{1/n} dt
///
/// in dimension n >= 2, optionally composed with a unimodular affine map. The
/// subgradient set at the center is the closed ball of radius c^{1/n}, so the
/// Monge-Ampere measure is 1 + omega_n c delta_P. c = 0 is the paraboloid.
///
/// The affine part is stored and applied on demand; `profile*` members always
/// refer to the canonical one-dimensional profile.
class RadialSingularSolution {
public:
    RadialSingularSolution(int dimension, double mass_param);
    RadialSingularSolution(int dimension, double mass_param, Eigen::VectorXd center,
                           AffineNormalization affine);

    int dimension() const { return n_; }
    double mass_param() const { return c_; }
    const Eigen::VectorXd& center() const { return center_; }
    const AffineNormalization& affine() const { return affine_; }

    /// Radius c^{1/n} of the subgradient ball at the center.
    double flat_radius() const;

    double profile(double r) const;
    double profile_derivative(double r) const;
    double profile_second_derivative(double r) const;

    /// Finite limit of profile(r) - r^2/2 as r -> infinity; only exists for n >= 3.
    double asymptotic_offset() const;
    /// int_r^inf ((t^n + c)^{1/n} - t) dt, the decay of profile - r^2/2 - offset (n >= 3).
    double asymptotic_tail(double r) const;

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    /// Throws std::domain_error at the singular point when c > 0.
    Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

private:
    Eigen::VectorXd to_profile_frame(const Eigen::VectorXd& x) const;

    int n_;
    double c_;
    Eigen::VectorXd center_;
    AffineNormalization affine_;
};

struct HessianSpectrum {
    double radial;
    double tangential;  ///< multiplicity n - 1
};

double radial_value(const RadialSingularSolution& sol, double r);

/// Eigenvalues of the profile Hessian at distance r > 0 from the center.
/// r = 0 with c > 0 is rejected with std::domain_error.
HessianSpectrum radial_hessian_spectrum(const RadialSingularSolution& sol, double r);

/// omega_n * c, the Lebesgue measure of the subgradient set at the center.
double subgradient_mass_at_singularity(const RadialSingularSolution& sol);

/// Radially symmetric Monge-Ampere data: a point mass at the origin plus a
/// radial density (constant 1 when `density` is empty).
struct RadialMeasure {
    int dimension = 2;
    double atom_at_center = 0.0;
    std::function<double(double)> density;
    double density_constant = 1.0;  ///< used when `density` is empty

    double density_at(double r) const;
    /// mu(B_r) = a + n omega_n int_0^r f(s) s^{n-1} ds.
    double mass_within(double r) const;
};

/// Radial solution u of det D^2 u = mu with u(0) = 0, u'(r) = (mu(B_r)/omega_n)^{1/n}.
class RadialProfile {
public:
    RadialProfile(RadialMeasure measure, double r_max);

    int dimension() const { return measure_.dimension; }
    double r_max() const { return r_max_; }
    const RadialMeasure& measure() const { return measure_; }

    double enclosed_mass(double r) const;
    double derivative(double r) const;
    double value(double r) const;

private:
    double mass_from_knot(std::size_t knot, double r) const;
    double value_from_knot(std::size_t knot, double r) const;
    std::size_t knot_below(double r) const;

    RadialMeasure measure_;
    double r_max_;
    double omega_;
    bool constant_density_;
    std::vector<double> knots_;
    std::vector<double> knot_mass_;
    std::vector<double> knot_value_;
};

/// Integrates the radial ODE; rejects negative densities and r_max <= 0.
RadialProfile radial_ode_solve(const RadialMeasure& measure, double r_max);

/// Legendre transform of a centered radial solution, itself radial in |y|.
class RadialLegendreDual {
public:
    explicit RadialLegendreDual(RadialSingularSolution sol);

    /// Radius of the flat region {u* = 0}; equals c^{1/n}.
    double flat_radius() const;
    /// u*(y) for |y| = s.
    double value(double s) const;
    /// Radius r with u'(r) = s; this is |grad u*(y)|.
    double gradient_radius(double s) const;
    /// Transform of the dual evaluated at |x| = t, i.e. u**(x).
    double conjugate(double t) const;

private:
    RadialSingularSolution sol_;
};

/// Requires a centered solution with trivial affine part (std::invalid_argument otherwise).
RadialLegendreDual radial_legendre(const RadialSingularSolution& sol);

/// Length of the radial segment [from_r, to_r] in the Hessian metric
/// g = u_ij dx_i dx_j, i.e. int sqrt(u''(r)) dr. Finite down to r = 0.
double hessian_metric_length(const RadialSingularSolution& sol, double from_r, double to_r);

}  // namespace alex
