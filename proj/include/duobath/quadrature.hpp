#pragma once
// quadrature.hpp — adaptive Gauss-Kronrod integration for real- and
// complex-valued integrands, plus panel builders for integrands with a
// known sharp feature (pole shadow or correlation peak) and slow
// oscillation elsewhere.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "model.hpp"

namespace duobath {

struct QuadResult {
    cplx value{0.0, 0.0};
    double error = 0.0;       // estimated absolute error
    std::size_t evaluations = 0;
    bool converged = true;

    double real() const { return value.real(); }
};

namespace detail {

// 15-point Kronrod nodes/weights (with embedded 7-point Gauss) on [-1,1].
inline constexpr double gk15_nodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898,  0.0,                0.207784955007898,
     0.405845151377397,  0.586087235467691,  0.741531185599394,
     0.864864423359769,  0.949107912342759,  0.991455371120813};
inline constexpr double gk15_wk[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double g7_wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <class F>
inline void gk15(const F& f, double a, double b, cplx& kronrod, double& err) {
    const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
    cplx fk{0.0, 0.0}, fg{0.0, 0.0};
    cplx fv[15];
    for (int i = 0; i < 15; ++i) fv[i] = f(c + hw * gk15_nodes[i]);
    for (int i = 0; i < 15; ++i) fk += gk15_wk[i] * fv[i];
    // Gauss-7 nodes are the odd Kronrod indices 1,3,...,13.
    fg = g7_wg[0] * (fv[1] + fv[13]) + g7_wg[1] * (fv[3] + fv[11])
       + g7_wg[2] * (fv[5] + fv[9]) + g7_wg[3] * fv[7];
    kronrod = hw * fk;
    const double diff = std::abs(hw * (fk - fg));
    err = std::pow(200.0 * diff, 1.5); // standard QUADPACK-style sharpening
    if (!(err < diff)) err = diff;
}

struct Interval {
    double a, b, err;
    cplx val;
    bool operator<(const Interval& o) const { return err < o.err; }
};

} // namespace detail

// Globally adaptive Gauss-Kronrod on the finite interval [a,b].
template <class F>
inline QuadResult integrate_adaptive(const F& f, double a, double b,
                                     double rel_tol = 1e-10,
                                     double abs_tol = 0.0,
                                     std::size_t max_subdivisions = 4000) {
    QuadResult res;
    if (a == b) return res;
    std::priority_queue<detail::Interval> heap;
    cplx v;
    double e;
    detail::gk15(f, a, b, v, e);
    res.evaluations = 15;
    heap.push({a, b, e, v});
    cplx total = v;
    double toterr = e;
    std::size_t splits = 0;
    while (toterr > std::max(abs_tol, rel_tol * std::abs(total)) &&
           splits < max_subdivisions) {
        detail::Interval top = heap.top();
        heap.pop();
        const double m = 0.5 * (top.a + top.b);
        if (m <= top.a || m >= top.b) { // interval at machine resolution
            heap.push({top.a, top.b, 0.0, top.val});
            continue;
        }
        cplx v1, v2;
        double e1, e2;
        detail::gk15(f, top.a, m, v1, e1);
        detail::gk15(f, m, top.b, v2, e2);
        res.evaluations += 30;
        total += v1 + v2 - top.val;
        toterr += e1 + e2 - top.err;
        heap.push({top.a, m, e1, v1});
        heap.push({m, top.b, e2, v2});
        ++splits;
    }
    res.value = total;
    res.error = std::max(toterr, 0.0);
    res.converged = toterr <= std::max(abs_tol, rel_tol * std::abs(total)) * 1.0001
                 || toterr <= abs_tol * 1.0001;
    return res;
}

// Integrate over an explicit panel list: GK15 per panel with one level of
// bisection refinement where the per-panel estimate is poor.
template <class F>
inline QuadResult integrate_panels(const F& f, const std::vector<double>& pts,
                                   double rel_tol = 1e-9, double abs_tol = 0.0) {
    QuadResult res;
    double toterr = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        QuadResult p = integrate_adaptive(f, pts[i], pts[i + 1], rel_tol, abs_tol / std::max<std::size_t>(pts.size(), 1), 60);
        res.value += p.value;
        toterr += p.error;
        res.evaluations += p.evaluations;
    }
    res.error = toterr;
    res.converged = toterr <= std::max(abs_tol, rel_tol * std::abs(res.value)) * 1.01 + 1e-300;
    return res;
}

// Panel breakpoints on [a,b] that (i) bracket a sharp feature at x0 with
// geometrically growing panels of initial half-width w0 and (ii) elsewhere
// keep panels no wider than max_width (e.g. a half period of a slow
// oscillation). Endpoints are always included.
inline std::vector<double> feature_panels(double a, double b, double x0,
                                          double w0, double max_width) {
    std::vector<double> pts;
    pts.push_back(a);
    pts.push_back(b);
    if (!(max_width > 0.0)) max_width = b - a;
    if (w0 > 0.0 && x0 > a - max_width && x0 < b + max_width) {
        for (double w = w0; w < 2.0 * std::max(b - x0, x0 - a); w *= 2.0) {
            if (x0 - w > a) pts.push_back(x0 - w);
            if (x0 + w < b) pts.push_back(x0 + w);
            if (w > max_width) break;
        }
        if (x0 > a && x0 < b) pts.push_back(x0);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    // Fill gaps wider than max_width with uniform subdivision.
    std::vector<double> out;
    out.push_back(pts.front());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double lo = pts[i], hi = pts[i + 1];
        const int nsub = std::max(1, (int)std::ceil((hi - lo) / max_width));
        for (int k = 1; k <= nsub; ++k) out.push_back(lo + (hi - lo) * k / nsub);
    }
    return out;
}

} // namespace duobath
