#pragma once

#include <cmath>
#include <cstddef>

namespace shotlab {

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // |last refinement step|, absolute
    bool converged = false;
    std::size_t evaluations = 0;
};

// Double-exponential (tanh-sinh) quadrature on (0, 1) after Takahasi and Mori.
// The integrand is called as f(z, 1-z) with both arguments computed stably, so
// algebraic endpoint singularities like z^{rho-1} or (1-z)^beta are absorbed
// by the double-exponential decay of the weights.
//
// Levels halve the step; previously used abscissae are reused. Convergence is
// declared when one halving changes the estimate by at most `tol` (absolute).
template <class F>
QuadResult tanh_sinh_01(F&& f, double tol, int max_level = 12) {
    constexpr double kHalfPi = 1.5707963267948966;
    // sinh argument beyond which the node weight underflows double precision.
    constexpr double kUMax = 6.7;

    QuadResult result;

    // Node at transformed coordinate u (positive side index k, step h):
    //   w = (pi/2) sinh(u); z = 1/(1+exp(-2w)); 1-z = 1/(1+exp(2w))
    //   dz/du = (pi/2) cosh(u) / (2 cosh^2(w))
    auto add_node = [&](double u, double& acc) {
        const double w = kHalfPi * std::sinh(u); // u >= 0, so w >= 0
        const double coshw = std::cosh(w);
        const double weight = kHalfPi * std::cosh(u) / (2.0 * coshw * coshw);
        if (weight == 0.0) return;
        const double em2w = std::exp(-2.0 * w);
        const double z = 1.0 / (1.0 + em2w);
        const double omz = em2w / (1.0 + em2w);
        if (z <= 0.0 || omz <= 0.0) return;
        acc += weight * f(z, omz);
        ++result.evaluations;
        if (u != 0.0) {
            acc += weight * f(omz, z); // node mirrored through 1/2
            ++result.evaluations;
        }
    };

    double h = 1.0;
    double sum = 0.0;
    add_node(0.0, sum);
    for (double u = h; u <= kUMax; u += h) add_node(u, sum);
    double estimate = h * sum;

    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        double add = 0.0;
        for (double u = h; u <= kUMax; u += 2.0 * h) add_node(u, add);
        const double refined = estimate * 0.5 + h * add;
        result.error = std::fabs(refined - estimate);
        estimate = refined;
        if (level >= 3 && result.error <= tol) {
            result.converged = true;
            break;
        }
    }
    result.value = estimate;
    return result;
}

} // namespace shotlab
