#pragma once

// Chi-square CDF from the power series of the lower incomplete gamma
// function, inverted by bisection.

#include <cmath>

namespace oracle {

inline double chi_square_cdf(double x, int dof) {
    if (x <= 0.0) return 0.0;
    const double s = dof / 2.0, t = x / 2.0;
    // P(s, t) = t^s e^-t / Gamma(s + 1) * sum_n t^n / ((s+1)...(s+n))
    double term = 1.0, sum = 1.0;
    for (int n = 1; n < 10000; ++n) {
        term *= t / (s + n);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return std::exp(s * std::log(t) - t - std::lgamma(s + 1.0)) * sum;
}

inline double chi_square_quantile(double p, int dof) {
    double lo = 0.0, hi = 1.0;
    while (chi_square_cdf(hi, dof) < p) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (chi_square_cdf(mid, dof) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace oracle
