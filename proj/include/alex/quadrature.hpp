#pragma once

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace alex {

/// Adaptive Gauss-Kronrod (31 point) integral of `f` over [a, b].
///
/// `abs_tol` is an absolute error target; the adaptive bisection stops once
/// the Kronrod error estimate falls below it (or the depth limit is hit).
/// Infinite upper limits are supported.
template <typename F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-12,
                 unsigned max_depth = 18) {
    if (a == b) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    double l1 = 0.0;
    double err = 0.0;
    // Boost compares err against tol * L1; a first cheap pass gives the L1
    // scale so the requested absolute tolerance can be converted.
    double first = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &err, &l1);
    // The Kronrod estimate bottoms out near eps |f| on any subinterval, so a
    // target below that only burns the full bisection depth.
    const double width = std::isfinite(b - a) ? std::abs(b - a) : 1.0;
    const double tol = std::max(abs_tol, 64.0 * std::numeric_limits<double>::epsilon() * l1 / std::min(1.0, width));
    if (err <= tol) return first;
    const double rel = l1 > 0.0 ? tol / l1 : tol;
    return gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel, &err, &l1);
}

}  // namespace alex
