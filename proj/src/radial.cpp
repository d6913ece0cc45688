#include "alex/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "alex/quadrature.hpp"

namespace alex {

namespace {

constexpr double kProfileTol = 1e-12;
constexpr std::size_t kProfileKnots = 64;

// (t^n + c)^{1/n} - t without cancellation for large t.
double profile_excess(int n, double c, double t) {
    if (t <= 0.0) return std::pow(c, 1.0 / n);
    const double tn = std::pow(t, n);
    if (tn <= c) return std::pow(tn + c, 1.0 / n) - t;
    return t * std::expm1(std::log1p(c / tn) / n);
}

void require_dimension(int n) {
    if (n < 2) throw std::invalid_argument("dimension must be >= 2, got " + std::to_string(n));
}

}  // namespace

double unit_ball_volume(int n) {
    require_dimension(n);
    // Small fixed table; std::tgamma is exact enough but the cache keeps the
    // hot paths (profile derivatives) free of gamma evaluations.
    static const std::vector<double> cache = [] {
        std::vector<double> v(64);
        for (int k = 0; k < 64; ++k)
            v[k] = std::pow(std::numbers::pi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
        return v;
    }();
    if (n < static_cast<int>(cache.size())) return cache[n];
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

AffineNormalization AffineNormalization::identity(int n) {
    return {Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
}

bool AffineNormalization::is_trivial(double tol) const {
    const auto n = A.rows();
    return (A - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= tol &&
           b.cwiseAbs().maxCoeff() <= tol && linear.cwiseAbs().maxCoeff() <= tol;
}

RadialSingularSolution::RadialSingularSolution(int dimension, double mass_param)
    : RadialSingularSolution(dimension, mass_param, Eigen::VectorXd::Zero(std::max(dimension, 2)),
                             AffineNormalization::identity(std::max(dimension, 2))) {}

RadialSingularSolution::RadialSingularSolution(int dimension, double mass_param,
                                               Eigen::VectorXd center, AffineNormalization affine)
    : n_(dimension), c_(mass_param), center_(std::move(center)), affine_(std::move(affine)) {
    require_dimension(n_);
    if (!(c_ >= 0.0) || !std::isfinite(c_))
        throw std::invalid_argument("mass parameter c must be finite and >= 0");
    if (center_.size() != n_ || affine_.A.rows() != n_ || affine_.A.cols() != n_ ||
        affine_.b.size() != n_ || affine_.linear.size() != n_)
        throw std::invalid_argument("center/affine sizes do not match the dimension");
    const double det = affine_.A.determinant();
    if (std::abs(det - 1.0) > 1e-12 * std::max(1.0, affine_.A.norm()))
        throw std::invalid_argument("affine matrix must have determinant 1, got " +
                                    std::to_string(det));
}

double RadialSingularSolution::flat_radius() const { return std::pow(c_, 1.0 / n_); }

double RadialSingularSolution::profile(double r) const {
    if (r < 0.0) throw std::domain_error("profile radius must be >= 0");
    if (c_ == 0.0) return 0.5 * r * r;
    const double excess =
        integrate([this](double t) { return profile_excess(n_, c_, t); }, 0.0, r, kProfileTol);
    return 0.5 * r * r + excess;
}

double RadialSingularSolution::profile_derivative(double r) const {
    if (r < 0.0) throw std::domain_error("profile radius must be >= 0");
    return std::pow(std::pow(r, n_) + c_, 1.0 / n_);
}

double RadialSingularSolution::profile_second_derivative(double r) const {
    if (c_ == 0.0) return 1.0;
    if (r <= 0.0) throw std::domain_error("second derivative is unbounded at the singular point");
    return std::pow(r, n_ - 1) * std::pow(std::pow(r, n_) + c_, (1.0 - n_) / n_);
}

double RadialSingularSolution::asymptotic_offset() const {
    if (n_ < 3) throw std::domain_error("profile - r^2/2 diverges logarithmically for n = 2");
    if (c_ == 0.0) return 0.0;
    auto f = [this](double t) { return profile_excess(n_, c_, t); };
    const double split = std::max(1.0, 4.0 * flat_radius());
    return integrate(f, 0.0, split, kProfileTol) + asymptotic_tail(split);
}

double RadialSingularSolution::asymptotic_tail(double r) const {
    if (n_ < 3) throw std::domain_error("tail integral diverges for n = 2");
    if (c_ == 0.0) return 0.0;
    auto f = [this](double t) { return profile_excess(n_, c_, t); };
    // Substituting t = r / s maps [r, inf) onto (0, 1]; the integrand becomes
    // r/s^2 * excess(r/s) ~ c r^{2-n} s^{n-3} / n, smooth for n >= 3.
    auto g = [&](double s) {
        if (s <= 0.0) return n_ == 3 ? c_ / (3.0 * r) : 0.0;
        const double t = r / s;
        return r / (s * s) * f(t);
    };
    return integrate(g, 0.0, 1.0, 1e-15);
}

Eigen::VectorXd RadialSingularSolution::to_profile_frame(const Eigen::VectorXd& x) const {
    if (x.size() != n_) throw std::invalid_argument("point dimension mismatch");
    return affine_.A * x + affine_.b - center_;
}

double RadialSingularSolution::value(const Eigen::VectorXd& x) const {
    return profile(to_profile_frame(x).norm()) - affine_.linear.dot(x);
}

Eigen::VectorXd RadialSingularSolution::gradient(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd y = to_profile_frame(x);
    const double rho = y.norm();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
    if (rho > 0.0) g = profile_derivative(rho) / rho * y;
    return affine_.A.transpose() * g - affine_.linear;
}

Eigen::MatrixXd RadialSingularSolution::hessian(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd y = to_profile_frame(x);
    const double rho = y.norm();
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n_, n_);
    if (rho > 0.0) {
        const auto spec = radial_hessian_spectrum(*this, rho);
        const Eigen::VectorXd e = y / rho;
        h = spec.tangential * h + (spec.radial - spec.tangential) * (e * e.transpose());
    } else if (c_ > 0.0) {
        throw std::domain_error("Hessian is unbounded at the singular point");
    }
    return affine_.A.transpose() * h * affine_.A;
}

double radial_value(const RadialSingularSolution& sol, double r) { return sol.profile(r); }

HessianSpectrum radial_hessian_spectrum(const RadialSingularSolution& sol, double r) {
    const int n = sol.dimension();
    const double c = sol.mass_param();
    if (c == 0.0 && r >= 0.0) return {1.0, 1.0};
    if (!(r > 0.0)) throw std::domain_error("Hessian spectrum requires r > 0 when c > 0");
    const double rn = std::pow(r, n);
    const double radial = std::pow(r, n - 1) * std::pow(rn + c, (1.0 - n) / n);
    // (r^n + c)^{1/n} / r written to stay accurate for tiny r.
    const double tangential = std::pow(1.0 + c / rn, 1.0 / n);
    return {radial, tangential};
}

double subgradient_mass_at_singularity(const RadialSingularSolution& sol) {
    return unit_ball_volume(sol.dimension()) * sol.mass_param();
}

double RadialMeasure::density_at(double r) const {
    const double f = density ? density(r) : density_constant;
    if (!(f >= 0.0)) throw std::invalid_argument("radial density must be nonnegative");
    return f;
}

double RadialMeasure::mass_within(double r) const {
    const double omega = unit_ball_volume(dimension);
    if (!density) return atom_at_center + omega * density_constant * std::pow(r, dimension);
    const int n = dimension;
    const double body = integrate(
        [&](double s) { return density_at(s) * std::pow(s, n - 1); }, 0.0, r, 1e-14);
    return atom_at_center + n * omega * body;
}

RadialProfile::RadialProfile(RadialMeasure measure, double r_max)
    : measure_(std::move(measure)),
      r_max_(r_max),
      omega_(unit_ball_volume(measure_.dimension)),
      constant_density_(!measure_.density) {
    if (!(r_max_ > 0.0)) throw std::invalid_argument("r_max must be positive");
    if (!(measure_.atom_at_center >= 0.0)) throw std::invalid_argument("atom mass must be >= 0");
    if (constant_density_ && !(measure_.density_constant >= 0.0))
        throw std::invalid_argument("radial density must be nonnegative");
    knots_.resize(kProfileKnots + 1);
    knot_mass_.assign(kProfileKnots + 1, measure_.atom_at_center);
    knot_value_.assign(kProfileKnots + 1, 0.0);
    for (std::size_t j = 0; j <= kProfileKnots; ++j)
        knots_[j] = r_max_ * static_cast<double>(j) / kProfileKnots;
    for (std::size_t j = 1; j <= kProfileKnots; ++j) {
        knot_mass_[j] = mass_from_knot(j - 1, knots_[j]);
        knot_value_[j] = value_from_knot(j - 1, knots_[j]);
    }
}

std::size_t RadialProfile::knot_below(double r) const {
    if (r >= r_max_) return kProfileKnots;
    const auto j = static_cast<std::size_t>(r / r_max_ * kProfileKnots);
    return std::min(j, kProfileKnots);
}

double RadialProfile::mass_from_knot(std::size_t knot, double r) const {
    if (constant_density_) return measure_.mass_within(r);
    const int n = measure_.dimension;
    const double body = integrate(
        [&](double s) { return measure_.density_at(s) * std::pow(s, n - 1); }, knots_[knot], r,
        1e-15);
    return knot_mass_[knot] + n * omega_ * body;
}

double RadialProfile::value_from_knot(std::size_t knot, double r) const {
    const int n = measure_.dimension;
    auto slope = [&](double s) {
        return std::pow(std::max(mass_from_knot(knot, s), 0.0) / omega_, 1.0 / n);
    };
    return knot_value_[knot] + integrate(slope, knots_[knot], r, 1e-13);
}

double RadialProfile::enclosed_mass(double r) const {
    if (r < 0.0) throw std::domain_error("radius must be >= 0");
    return mass_from_knot(knot_below(r), r);
}

double RadialProfile::derivative(double r) const {
    return std::pow(enclosed_mass(r) / omega_, 1.0 / measure_.dimension);
}

double RadialProfile::value(double r) const {
    if (r < 0.0) throw std::domain_error("radius must be >= 0");
    return value_from_knot(knot_below(r), r);
}

RadialProfile radial_ode_solve(const RadialMeasure& measure, double r_max) {
    require_dimension(measure.dimension);
    return RadialProfile(measure, r_max);
}

RadialLegendreDual::RadialLegendreDual(RadialSingularSolution sol) : sol_(std::move(sol)) {}

double RadialLegendreDual::flat_radius() const { return sol_.flat_radius(); }

double RadialLegendreDual::gradient_radius(double s) const {
    if (s < 0.0) throw std::domain_error("dual radius must be >= 0");
    const int n = sol_.dimension();
    const double excess = std::pow(s, n) - sol_.mass_param();
    return excess <= 0.0 ? 0.0 : std::pow(excess, 1.0 / n);
}

double RadialLegendreDual::value(double s) const {
    const double r = gradient_radius(s);
    if (r == 0.0) return 0.0;
    return r * s - sol_.profile(r);
}

double RadialLegendreDual::conjugate(double t) const {
    if (t < 0.0) throw std::domain_error("radius must be >= 0");
    const double s = sol_.profile_derivative(t);
    return s * t - value(s);
}

RadialLegendreDual radial_legendre(const RadialSingularSolution& sol) {
    if (sol.center().cwiseAbs().maxCoeff() != 0.0 || !sol.affine().is_trivial())
        throw std::invalid_argument("radial Legendre transform needs a centered, unnormalized solution");
    return RadialLegendreDual(sol);
}

double hessian_metric_length(const RadialSingularSolution& sol, double from_r, double to_r) {
    if (!(from_r >= 0.0) || !(to_r > from_r))
        throw std::invalid_argument("metric length needs 0 <= from_r < to_r");
    const int n = sol.dimension();
    const double c = sol.mass_param();
    if (c == 0.0) return to_r - from_r;
    // r = t^2 removes the r^{(n-1)/2} endpoint behaviour at the singularity.
    auto f = [&](double t) {
        const double t2n = std::pow(t, 2 * n);
        return 2.0 * std::pow(t, n) * std::pow(t2n + c, (1.0 - n) / (2.0 * n));
    };
    return integrate(f, std::sqrt(from_r), std::sqrt(to_r), 1e-13);
}

}  // namespace alex
