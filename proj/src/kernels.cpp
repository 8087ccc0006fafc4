#include "csim/kernels.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include "csim/errors.hpp"
#include "math_detail.hpp"

namespace csim::kernels {

namespace {

void scalar_cost_curve(double e0, double step, std::size_t n,
                       double cost_factor, double e_max, double* out) {
    for (std::size_t k = 0; k < n; ++k) {
        const double e = std::fma(static_cast<double>(k), step, e0);
        out[k] = detail::cost_raw(e, cost_factor, e_max);
    }
}

void scalar_best_response_batch(const double* marginal_reward, std::size_t n,
                                double cost_factor, double e_max, double* out) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = detail::best_response_raw(marginal_reward[i], cost_factor, e_max);
}

std::size_t scalar_argmax_affine_minus_cost(double slope, double offset,
                                            double e0, double step,
                                            const double* cost_grid, std::size_t n,
                                            double* best_value) {
    std::size_t best_k = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const double e = std::fma(static_cast<double>(k), step, e0);
        const double v = std::fma(slope, e, offset) - cost_grid[k];
        if (v > best_v) {
            best_v = v;
            best_k = k;
        }
    }
    if (best_value) *best_value = best_v;
    return best_k;
}

constexpr Backend scalar_impl = {
    "scalar",
    &scalar_cost_curve,
    &scalar_best_response_batch,
    &scalar_argmax_affine_minus_cost,
};

std::atomic<const Backend*> active{nullptr};

const Backend* resolve_auto() {
    if (const Backend* simd = simd_backend()) return simd;
    return &scalar_impl;
}

} // namespace

const Backend& scalar_backend() { return scalar_impl; }

#if !defined(CSIM_HAVE_SIMD_TU)
const Backend* simd_backend() { return nullptr; }
#endif

const Backend& active_backend() {
    const Backend* b = active.load(std::memory_order_acquire);
    if (!b) {
        b = resolve_auto();
        active.store(b, std::memory_order_release);
    }
    return *b;
}

void set_backend(const std::string& name) {
    if (name == "scalar") {
        active.store(&scalar_impl, std::memory_order_release);
    } else if (name == "simd") {
        const Backend* simd = simd_backend();
        if (!simd)
            fail(Errc::invalid_argument, "simd kernels unavailable on this CPU/build");
        active.store(simd, std::memory_order_release);
    } else if (name == "auto") {
        active.store(resolve_auto(), std::memory_order_release);
    } else {
        fail(Errc::invalid_argument, "unknown kernel backend '" + name + "'");
    }
}

} // namespace csim::kernels
