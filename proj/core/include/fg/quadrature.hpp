#pragma once

#include "fg/types.hpp"

#include <Eigen/Dense>
#include <vector>

namespace fg {

// Gauss7/Kronrod15 nodes and weights on [-1,1] (positive half; node 0 first).
namespace gk {
inline constexpr double nodes[8] = {
    0.000000000000000, 0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759, 0.991455371120813};
inline constexpr double wk[8] = {
    0.209482141084728, 0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979, 0.022935322010529};
// Gauss-7 weights aligned with nodes 0,2,4,6 (zero elsewhere).
inline constexpr double wg[8] = {
    0.417959183673469, 0.0, 0.381830050505119, 0.0,
    0.279705391489277, 0.0, 0.129484966168870, 0.0};
} // namespace gk

namespace detail {
inline double qnorm(const cplx& v) { return std::abs(v); }
inline double qnorm(const Eigen::VectorXcd& v) { return v.cwiseAbs().maxCoeff(); }
inline void qzero(cplx& v, int) { v = 0.0; }
inline void qzero(Eigen::VectorXcd& v, int n) { v = Eigen::VectorXcd::Zero(n); }
} // namespace detail

/// Adaptive Gauss–Kronrod integration of a complex- or vector-valued function
/// over the real interval [a,b]. `dim` is used only for vector integrands.
template <class V, class F>
V integrate_gk(F&& f, double a, double b, double abs_tol, int max_depth = 28, int dim = 1) {
    struct Frame { double a, b; int depth; };
    V total;
    detail::qzero(total, dim);
    std::vector<Frame> stack{{a, b, 0}};
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (fr.a + fr.b);
        const double half = 0.5 * (fr.b - fr.a);
        V g7, k15;
        detail::qzero(g7, dim);
        detail::qzero(k15, dim);
        {
            V y0 = f(mid);
            g7 += gk::wg[0] * y0;
            k15 += gk::wk[0] * y0;
        }
        for (int i = 1; i < 8; ++i) {
            const double dx = half * gk::nodes[i];
            V yi = f(mid + dx);
            V ym = f(mid - dx);
            k15 += gk::wk[i] * (yi + ym);
            if (gk::wg[i] != 0.0) g7 += gk::wg[i] * (yi + ym);
        }
        g7 *= half;
        k15 *= half;
        const double err = detail::qnorm(V(g7 - k15));
        if (err * 200.0 * std::sqrt(err * 200.0) < abs_tol || fr.depth >= max_depth) {
            total += k15;
        } else {
            stack.push_back({fr.a, mid, fr.depth + 1});
            stack.push_back({mid, fr.b, fr.depth + 1});
        }
    }
    return total;
}

/// Integrate f(z) dz along the straight segment [z0, z1].
template <class F>
cplx integrate_segment(F&& f, cplx z0, cplx z1, double abs_tol) {
    const cplx dz = z1 - z0;
    return dz * integrate_gk<cplx>([&](double t) { return f(z0 + t * dz); }, 0.0, 1.0, abs_tol);
}

/// Fixed-order 15-point Kronrod rule (no adaptivity); cheap path stepping.
template <class V, class F>
V integrate_fixed15(F&& f, double a, double b, int dim = 1) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    V acc;
    detail::qzero(acc, dim);
    acc += gk::wk[0] * f(mid);
    for (int i = 1; i < 8; ++i) {
        const double dx = half * gk::nodes[i];
        acc += gk::wk[i] * (f(mid + dx) + f(mid - dx));
    }
    acc *= half;
    return acc;
}

} // namespace fg
