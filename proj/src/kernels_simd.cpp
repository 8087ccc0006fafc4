// Vectorized kernel backend. On x86-64 this TU is compiled with
// -mavx2 -mfma and gated at runtime by cpuid; on aarch64 the default ABI
// already carries NEON. Everything here must stay value-compatible with the
// scalar backend: the argmax kernel uses the identical fma expressions (so
// results match bit for bit given the same cost grid), the exp-based curves
// agree within a few ulp and are covered by tolerance tests.
#include "csim/kernels.hpp"

#include <cmath>
#include <cstddef>
#include <limits>

#include <experimental/simd>

#include "math_detail.hpp"

namespace stdx = std::experimental;

namespace csim::kernels {
namespace {

using V = stdx::native_simd<double>;
constexpr std::size_t W = V::size();

V lane_iota() {
    return V([](int i) { return static_cast<double>(i); });
}

void simd_cost_curve(double e0, double step, std::size_t n,
                     double cost_factor, double e_max, double* out) {
    const V iota = lane_iota();
    const V vstep(step), ve0(e0), vc(cost_factor), vmax(e_max);
    std::size_t k = 0;
    for (; k + W <= n; k += W) {
        const V kk = iota + V(static_cast<double>(k));
        const V e = stdx::fma(kk, vstep, ve0);
        const V v = vc * (stdx::exp(e) - 1.0) / (vmax - e);
        v.copy_to(out + k, stdx::element_aligned);
    }
    for (; k < n; ++k) {
        const double e = std::fma(static_cast<double>(k), step, e0);
        out[k] = cost_factor * (std::exp(e) - 1.0) / (e_max - e);
    }
}

// marginal cost, vectorized: c*exp(e)/(d) + c*(exp(e)-1)/d^2, d = e_max - e.
inline V mc_v(const V& e, const V& vc, const V& vmax) {
    const V d = vmax - e;
    const V ex = stdx::exp(e);
    return vc * ex / d + vc * (ex - 1.0) / (d * d);
}

void simd_best_response_batch(const double* marginal_reward, std::size_t n,
                              double cost_factor, double e_max, double* out) {
    const V vc(cost_factor), vmax(e_max);
    const double mc0 = detail::marginal_cost_at_zero(cost_factor, e_max);
    const double mc1 = detail::marginal_cost_raw(1.0, cost_factor, e_max);
    std::size_t i = 0;
    for (; i + W <= n; i += W) {
        V mr;
        mr.copy_from(marginal_reward + i, stdx::element_aligned);
        V lo(0.0), hi(1.0);
        // 40 halvings reach the same 2^-40 bracket as the scalar loop; the
        // fixed count keeps lanes in lockstep.
        for (int it = 0; it < 40; ++it) {
            const V mid = 0.5 * (lo + hi);
            const auto below = mc_v(mid, vc, vmax) < mr;
            stdx::where(below, lo) = mid;
            stdx::where(!below, hi) = mid;
        }
        V e = 0.5 * (lo + hi);
        stdx::where(mr <= V(mc0), e) = V(0.0);
        stdx::where(mr >= V(mc1), e) = V(1.0);
        e.copy_to(out + i, stdx::element_aligned);
    }
    for (; i < n; ++i)
        out[i] = detail::best_response_raw(marginal_reward[i], cost_factor, e_max);
}

std::size_t simd_argmax_affine_minus_cost(double slope, double offset,
                                          double e0, double step,
                                          const double* cost_grid, std::size_t n,
                                          double* best_value) {
    double best_v = -std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    std::size_t k = 0;
    if (n >= W) {
        const V iota = lane_iota();
        const V vslope(slope), voffset(offset), vstep(step), ve0(e0);
        V acc_v(-std::numeric_limits<double>::infinity());
        V acc_k(0.0);
        for (; k + W <= n; k += W) {
            const V kk = iota + V(static_cast<double>(k));
            const V e = stdx::fma(kk, vstep, ve0);
            V g;
            g.copy_from(cost_grid + k, stdx::element_aligned);
            const V v = stdx::fma(vslope, e, voffset) - g;
            const auto better = v > acc_v;
            stdx::where(better, acc_v) = v;
            stdx::where(better, acc_k) = kk;
        }
        for (std::size_t lane = 0; lane < W; ++lane) {
            const double v = acc_v[lane];
            const auto idx = static_cast<std::size_t>(acc_k[lane]);
            if (v > best_v || (v == best_v && idx < best_k)) {
                best_v = v;
                best_k = idx;
            }
        }
    }
    for (; k < n; ++k) {
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

constexpr Backend simd_impl = {
    "simd",
    &simd_cost_curve,
    &simd_best_response_batch,
    &simd_argmax_affine_minus_cost,
};

bool cpu_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return true;
#endif
}

} // namespace

const Backend* simd_backend() {
    static const Backend* probed = cpu_supported() ? &simd_impl : nullptr;
    return probed;
}

} // namespace csim::kernels
