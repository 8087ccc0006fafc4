#pragma once

#include <cstddef>
#include <string>

namespace csim::kernels {

// Data-parallel inner loops behind the solver and the grid oracles.
// The scalar backend is the reference implementation (it reuses the exact
// scalar formulas from the model); the SIMD backend is a vectorized
// re-expression selected at runtime when the CPU supports it. Backends are
// interchangeable up to floating-point reassociation; equivalence is pinned
// by tests/unit/test_kernels.cpp.
struct Backend {
    const char* name;

    // out[k] = cost(e0 + k*step) for k in [0, n); caller guarantees the grid
    // stays inside [0, e_max).
    void (*cost_curve)(double e0, double step, std::size_t n,
                       double cost_factor, double e_max, double* out);

    // out[i] = best response to marginal_reward[i], i.e. the clamped root of
    // marginal_cost(e) = mr[i] on [0, 1]. Fixed-iteration bisection, so the
    // result is independent of lane grouping.
    void (*best_response_batch)(const double* marginal_reward, std::size_t n,
                                double cost_factor, double e_max, double* out);

    // argmax over k of  slope*(e0 + k*step) + offset - cost_grid[k].
    // Ties resolve to the lowest index. Returns the index; *best_value gets
    // the attained maximum. fma semantics: value = fma(slope, e_k, offset) -
    // cost_grid[k] in every backend.
    std::size_t (*argmax_affine_minus_cost)(double slope, double offset,
                                            double e0, double step,
                                            const double* cost_grid, std::size_t n,
                                            double* best_value);
};

const Backend& scalar_backend();

// nullptr when the binary has no SIMD translation unit or the CPU lacks the
// required features.
const Backend* simd_backend();

// Backend used by the library. Defaults to "auto" (SIMD when available).
const Backend& active_backend();

// name: "scalar", "simd" (errors if unavailable) or "auto".
void set_backend(const std::string& name);

} // namespace csim::kernels
