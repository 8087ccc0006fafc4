#pragma once

#include <cmath>

// Raw cost-curve math shared by the model, the solver and both kernel
// backends. No validation here; callers own the domain checks.
namespace csim::detail {

inline double cost_raw(double e, double c, double e_max) {
    return c * std::expm1(e) / (e_max - e);
}

// cost'(e) = c*exp(e)/(e_max-e) + c*(exp(e)-1)/(e_max-e)^2
inline double marginal_cost_raw(double e, double c, double e_max) {
    const double d = e_max - e;
    return c * std::exp(e) / d + c * std::expm1(e) / (d * d);
}

inline double marginal_cost_at_zero(double c, double e_max) {
    return c / e_max;
}

// Clamped root of marginal_cost_raw(e) = mr on [0, 1]. The bracket starts
// at [0, 1] and halves to exactly 2^-40: every endpoint is dyadic, so the
// scalar and vector backends walk the same bracket sequence and land within
// one bracket of each other. That agreement is what keeps mixed-path
// utility comparisons (truthful vs sybil-split) inside the 1e-9 band.
inline double best_response_raw(double mr, double c, double e_max) {
    if (mr <= marginal_cost_at_zero(c, e_max)) return 0.0;
    if (mr >= marginal_cost_raw(1.0, c, e_max)) return 1.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 0x1p-40) {
        const double mid = 0.5 * (lo + hi);
        if (marginal_cost_raw(mid, c, e_max) < mr)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace csim::detail
