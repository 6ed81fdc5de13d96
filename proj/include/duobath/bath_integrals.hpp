#pragma once
// bath_integrals.hpp — numerical engine for semi-infinite bath integrals
// int_0^inf J(w) K(w) dw: adaptive quadrature against the exponential-cutoff
// weight, oscillatory kernels at large t (per-period segmentation with
// alternating-series acceleration, Filon crosscheck, contour-rotated tails),
// Cauchy principal values by pole subtraction, and a thread-safe cache.

#include <cstdio>
#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "model.hpp"
#include "quadrature.hpp"

namespace duobath {

struct IntegrationError : std::runtime_error {
    double partial;
    explicit IntegrationError(const std::string& what, double partial_estimate)
        : std::runtime_error(what), partial(partial_estimate) {}
};

enum class BathKernel {
    Unit,            // K = 1
    Power,           // K = w^k
    PolePair,        // K = 1/(w (w + a)); PV at w = -a when a < 0
    ResonantSine,    // K = sin((w+a) t)/(w+a)^2; PV at w = -a when a < 0
    ResonantSineSq,  // K = 2 sin^2((w+a) t/2)/(w+a)^2 (removable everywhere)
    Custom           // K supplied as a function (not cached)
};

struct BathIntegralRequest {
    ReservoirSpec reservoir{};
    BathKernel kernel = BathKernel::Unit;
    double a = 0.0;          // frequency shift / pole parameter
    double t = 0.0;          // oscillation time
    double k = 0.0;          // power exponent
    double tolerance = 1e-10;
    std::optional<double> principal_value_at{};
    std::function<double(double)> custom{};

    void validate() const {
        reservoir.validate();
        if (!(tolerance > 0.0 && tolerance <= 1e-3))
            throw std::invalid_argument("BathIntegralRequest: tolerance must be in (0, 1e-3]");
    }
};

struct BathIntegralResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    std::string method;
    std::string cache_key;
};

namespace detail {

inline double domain_cutoff(const ReservoirSpec& r) {
    // w_max such that the truncated tail of w^s e^{-w/L} is negligible
    // (< 1e-16 relative): s log(w/L) - w/L < -40 is ample for s <= 4.
    return r.lambda * (45.0 + 10.0 * r.s);
}

// d/dw [J(w)] — analytic, used by Taylor fallbacks near subtracted poles.
inline double spectral_density_deriv(double w, const ReservoirSpec& r) {
    return spectral_density(w, r) * (r.s / w - 1.0 / r.lambda);
}

inline double sinc_minus(double x) { // (sin x - x)/x^2, stable near 0
    if (std::abs(x) < 1e-3) return -x / 6.0 + x * x * x / 120.0;
    return (std::sin(x) - x) / (x * x);
}

// Iterated Aitken extrapolation of the limit of a sequence of partial sums.
inline std::pair<double, double> aitken_limit(std::vector<double> s) {
    double prev = s.back();
    while (s.size() >= 3) {
        std::vector<double> nxt;
        for (std::size_t i = 0; i + 2 < s.size(); ++i) {
            const double d1 = s[i + 1] - s[i], d2 = s[i + 2] - 2.0 * s[i + 1] + s[i];
            nxt.push_back(std::abs(d2) > 0.0 ? s[i] - d1 * d1 / d2 : s[i + 2]);
        }
        prev = s.back();
        s.swap(nxt);
    }
    return {s.back(), std::abs(s.back() - prev)};
}

} // namespace detail

// ----- oscillatory building blocks -----

// int_{w1}^{inf} J(w) e^{i (w+a) t} / (w+a)^p dw by rotating the contour to
// w1 + i y (integrand analytic above the real axis, decays like e^{-y t}).
inline cplx rotated_tail(const ReservoirSpec& r, double w1, double a, double t,
                         int p, double tol) {
    const auto f = [&](double y) {
        const cplx w{w1, y};
        const cplx nu = w + a;
        return spectral_density(w, r) * std::exp(iu * nu * t) / std::pow(nu, p);
    };
    const double yspan = 60.0 / t;
    QuadResult q = integrate_adaptive(f, 0.0, yspan, tol, 0.0, 400);
    return iu * q.value;
}

// Per-period segmentation of int_{w1}^{inf} J(w) sin((w+a)t)/(w+a)^2 dw with
// iterated-Aitken acceleration of the alternating segment series.
inline std::pair<double, double> accelerated_sine_tail(const ReservoirSpec& r,
                                                       double w1, double a,
                                                       double t, double tol,
                                                       int nterms = 48) {
    // Segment boundaries at the phase zeros (w+a)t = k*pi above w1.
    const double width = pi / t;
    double x = w1;
    double first = (std::ceil((w1 + a) * t / pi)) * pi / t - a;
    if (first <= w1) first += width;
    std::vector<double> partial;
    double sum = 0.0;
    const auto f = [&](double w) {
        const double nu = w + a;
        return spectral_density(w, r) * std::sin(nu * t) / (nu * nu);
    };
    // leading partial segment
    {
        cplx v; double e;
        detail::gk15(f, x, first, v, e);
        sum += v.real();
    }
    x = first;
    for (int k = 0; k < nterms; ++k) {
        cplx v; double e;
        detail::gk15(f, x, x + width, v, e);
        sum += v.real();
        partial.push_back(sum);
        x += width;
    }
    auto [limit, err] = detail::aitken_limit(partial);
    return {limit, std::max(err, tol * std::abs(limit))};
}

// Filon quadrature: int_a^b g(w) e^{i kappa w} dw with g sampled on a uniform
// grid of n (even) intervals and interpolated by piecewise quadratics.
template <class G>
inline cplx filon_oscillatory(const G& g, double kappa, double a, double b, int n) {
    if (n % 2) ++n;
    const double hstep = (b - a) / n;
    const double th = kappa * hstep;
    // Moments m_j = int_{-h}^{h} x^j e^{i kappa x} dx, j = 0,1,2.
    cplx m0, m1, m2;
    if (std::abs(th) < 1e-2) {
        const double h2 = hstep * hstep;
        m0 = 2.0 * hstep * (1.0 - th * th / 6.0) + iu * 0.0;
        m1 = iu * (2.0 / 3.0 * hstep * hstep * th) * (1.0 - th * th / 10.0);
        m2 = (2.0 / 3.0 * hstep * h2) * (1.0 - 3.0 * th * th / 10.0);
    } else {
        const cplx eip = std::exp(iu * th), eim = std::exp(-iu * th);
        const cplx ik = iu * kappa;
        m0 = (eip - eim) / ik;
        m1 = (hstep * (eip + eim)) / ik - m0 / ik;
        m2 = (hstep * hstep * (eip - eim)) / ik - 2.0 * m1 / ik;
    }
    cplx total{0.0, 0.0};
    for (int j = 0; j + 2 <= n; j += 2) {
        const double x0 = a + j * hstep, x1 = x0 + hstep, x2 = x1 + hstep;
        const double g0 = g(x0), g1 = g(x1), g2 = g(x2);
        // quadratic through (x1 + u, g): g1 + c1 u + c2 u^2
        const double c1 = (g2 - g0) / (2.0 * hstep);
        const double c2 = (g2 - 2.0 * g1 + g0) / (2.0 * hstep * hstep);
        total += std::exp(iu * kappa * x1) * (g1 * m0 + c1 * m1 + c2 * m2);
    }
    return total;
}

// ----- the engine -----

class BathIntegrator {
  public:
    static BathIntegralResult integrate(const BathIntegralRequest& req) {
        req.validate();
        if (req.kernel == BathKernel::Custom)
            return dispatch(req); // custom kernels are not cached
        const std::string key = make_key(req);
        {
            std::shared_lock lk(mutex_());
            auto it = cache_().find(key);
            if (it != cache_().end()) return it->second;
        }
        BathIntegralResult res = dispatch(req);
        res.cache_key = key;
        std::unique_lock lk(mutex_());
        auto [it, inserted] = cache_().emplace(key, res);
        return it->second; // first writer wins: bitwise-stable replays
    }

    static void clear_cache() {
        std::unique_lock lk(mutex_());
        cache_().clear();
    }

  private:
    static std::unordered_map<std::string, BathIntegralResult>& cache_() {
        static std::unordered_map<std::string, BathIntegralResult> c;
        return c;
    }
    static std::shared_mutex& mutex_() {
        static std::shared_mutex m;
        return m;
    }

    static std::string make_key(const BathIntegralRequest& req) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%d|%a|%a|%a|%a|%a|%a|%a|%d",
                      (int)req.kernel, req.reservoir.s, req.reservoir.j,
                      req.reservoir.lambda, req.a, req.t, req.k, req.tolerance,
                      req.principal_value_at ? 1 : 0);
        return buf;
    }

    static BathIntegralResult dispatch(const BathIntegralRequest& req) {
        const ReservoirSpec& r = req.reservoir;
        if (r.j == 0.0) return {0.0, 0.0, "zero-coupling", ""};
        switch (req.kernel) {
            case BathKernel::Unit:
            case BathKernel::Power:
            case BathKernel::Custom:
                return smooth(req);
            case BathKernel::PolePair:
                return pole_pair(req);
            case BathKernel::ResonantSine:
                return resonant_sine(req, false);
            case BathKernel::ResonantSineSq:
                return resonant_sine_sq(req);
        }
        throw std::logic_error("unreachable");
    }

    static BathIntegralResult smooth(const BathIntegralRequest& req) {
        const ReservoirSpec& r = req.reservoir;
        const double wmax = detail::domain_cutoff(r);
        const auto f = [&](double w) -> cplx {
            double kv = 1.0;
            if (req.kernel == BathKernel::Power) kv = std::pow(w, req.k);
            else if (req.kernel == BathKernel::Custom) kv = req.custom(w);
            return spectral_density(w, r) * kv;
        };
        // geometric panels toward w = 0 handle the w^(s-1+k) endpoint behavior
        auto pts = feature_panels(0.0, wmax, 0.0, 1e-8 * r.lambda, wmax);
        QuadResult q = integrate_panels(f, pts, req.tolerance, 0.0);
        if (!q.converged)
            throw IntegrationError("integrate_bath: smooth kernel did not converge", q.real());
        return {q.real(), q.error, "adaptive-gk", ""};
    }

    // K = 1/(w (w+a)); for a < 0 a PV pole sits at w0 = -a.
    static BathIntegralResult pole_pair(const BathIntegralRequest& req) {
        const ReservoirSpec& r = req.reservoir;
        const double a = req.a;
        const double wmax = detail::domain_cutoff(r);
        if (a >= 0.0 || !req.principal_value_at) {
            if (a < 0.0)
                throw std::invalid_argument("pole_pair: a < 0 requires principal_value_at");
            const auto f = [&](double w) -> cplx {
                return spectral_density(w, r) / (w * (w + a));
            };
            auto pts = feature_panels(0.0, wmax, 0.0, 1e-8 * r.lambda, wmax);
            QuadResult q = integrate_panels(f, pts, req.tolerance, 0.0);
            return {q.real(), q.error, "adaptive-gk", ""};
        }
        const double w0 = *req.principal_value_at; // = -a
        if (!(w0 > 0.0 && w0 < wmax))
            throw std::domain_error("integrate_bath_pv: pole outside domain interior");
        // g(w) = J(w)/w; PV int g(w)/(w-w0) = int (g(w)-g(w0))/(w-w0) + g(w0) log((wmax-w0)/w0)
        const double g0 = spectral_density(w0, r) / w0;
        const auto f = [&](double w) -> cplx {
            const double d = w - w0;
            if (std::abs(d) < 1e-6 * std::max(1.0, w0)) {
                // Taylor fallback: (g(w)-g(w0))/(w-w0) ~ g'(w0)
                const double gp = detail::spectral_density_deriv(w0, r) / w0
                                - spectral_density(w0, r) / (w0 * w0);
                return gp;
            }
            return (spectral_density(w, r) / w - g0) / d;
        };
        auto pts = feature_panels(0.0, wmax, w0, 1e-4 * std::max(w0, 1e-6), wmax);
        QuadResult q = integrate_panels(f, pts, req.tolerance, 0.0);
        const double pv_core = g0 * std::log((wmax - w0) / w0);
        if (!q.converged)
            throw IntegrationError("integrate_bath_pv: did not converge", q.real() + pv_core);
        return {q.real() + pv_core, q.error, "pv-subtraction", ""};
    }

    // K = sin((w+a) t)/(w+a)^2.
    static BathIntegralResult resonant_sine(const BathIntegralRequest& req, bool filon) {
        const ReservoirSpec& r = req.reservoir;
        const double a = req.a, t = req.t;
        if (t == 0.0) return {0.0, 0.0, "trivial-t0", ""};
        const double wmax = detail::domain_cutoff(r);
        const double w0 = -a; // PV pole location when a < 0
        const bool has_pole = a < 0.0 && w0 < wmax;

        if (t * wmax < 600.0 * pi) { // few enough periods: direct adaptive
            double pv_core = 0.0;
            std::function<cplx(double)> f;
            if (has_pole) {
                // J sin(nu t)/nu^2 = (J - J(w0)) sin(nu t)/nu^2   [smooth-ish]
                //                  + J(w0) (sin(nu t) - nu t)/nu^2 [removable]
                //                  + J(w0) t / nu                  [PV closed form]
                const double j0 = spectral_density(w0, r);
                f = [&, j0](double w) -> cplx {
                    const double nu = w + a;
                    const double t1 = std::abs(nu) < 1e-9
                        ? detail::spectral_density_deriv(w0, r) * t
                        : (spectral_density(w, r) - j0) * std::sin(nu * t) / (nu * nu);
                    return t1 + j0 * detail::sinc_minus(nu * t) * t * t;
                };
                pv_core = j0 * t * std::log((wmax - w0) / w0);
            } else {
                f = [&](double w) -> cplx {
                    const double nu = w + a; // nu > 0 here (a >= 0, GK nodes interior)
                    return spectral_density(w, r) * std::sin(nu * t) / (nu * nu);
                };
            }
            auto pts = feature_panels(0.0, wmax, has_pole ? w0 : 0.0,
                                      1e-6 * std::max(1.0, std::abs(w0)),
                                      std::min(wmax, 2.0 * pi / std::max(t, 1e-300)));
            QuadResult q = integrate_panels(f, pts, req.tolerance, 0.0);
            return {q.real() + pv_core, q.error, has_pole ? "adaptive-pv" : "adaptive-gk", ""};
        }

        // Large t: resolve the resonance region per period, then rotate or
        // accelerate the tail.
        const double w1 = std::max(has_pole ? 4.0 * w0 : 4.0 * std::abs(a), 64.0 * pi / t);
        double head = 0.0, head_err = 0.0;
        if (filon && !has_pole) {
            // strategy (b): piecewise-quadratic Filon on the envelope, refined
            // by doubling until stationary
            const auto g = [&](double w) {
                const double nu = w + a;
                return spectral_density(w, r) / (nu * nu);
            };
            int n = 256;
            cplx prev = filon_oscillatory(g, t, 0.0, w1, n);
            for (;;) {
                n *= 2;
                const cplx cur = filon_oscillatory(g, t, 0.0, w1, n);
                const double change = std::abs(cur - prev);
                prev = cur;
                if (change < req.tolerance * std::max(1.0, std::abs(cur)) || n >= 1 << 16) {
                    head_err = change;
                    break;
                }
            }
            // filon integrated g(w) e^{i w t}; restore the constant phase shift
            head = (std::exp(iu * a * t) * prev).imag();
        } else {
            // [0, w1] in half-period panels; PV handled by odd-symmetry of the
            // pole term: J(w0) sin(nu t)/nu^2 has PV contribution only from the
            // asymmetric remainder, so subtract it explicitly as above.
            double pv_core = 0.0;
            std::function<cplx(double)> f;
            if (has_pole) {
                const double j0 = spectral_density(w0, r);
                f = [&, j0](double w) -> cplx {
                    const double nu = w + a;
                    const double jdiff = spectral_density(w, r) - j0;
                    const double t1 = std::abs(nu) < 1e-9
                        ? detail::spectral_density_deriv(w0, r) * t
                        : jdiff * std::sin(nu * t) / (nu * nu);
                    return t1 + j0 * detail::sinc_minus(nu * t) * t * t;
                };
                pv_core = j0 * t * std::log((w1 - w0) / w0);
            } else {
                f = [&](double w) -> cplx {
                    const double nu = w + a;
                    return spectral_density(w, r) * std::sin(nu * t) / (nu * nu);
                };
            }
            auto pts = feature_panels(0.0, w1, has_pole ? w0 : -1.0,
                                      0.25 * pi / t, pi / t);
            QuadResult q = integrate_panels(f, pts, req.tolerance, 0.0);
            head = q.real() + pv_core;
            head_err = q.error;
        }
        double tail, tail_err;
        if (!filon) {
            auto [v, e] = accelerated_sine_tail(r, w1, a, t, req.tolerance);
            tail = v;
            tail_err = e;
        } else {
            tail = rotated_tail(r, w1, a, t, 2, req.tolerance).imag();
            tail_err = req.tolerance * std::abs(tail);
        }
        return {head + tail, head_err + tail_err,
                filon ? "periodic+rotated" : "periodic+accelerated", ""};
    }

    // K = 2 sin^2((w+a) t/2)/(w+a)^2 = (1 - cos((w+a)t))/(w+a)^2: removable
    // double pole; written as smooth 1/(w+a)^2 share minus oscillatory share.
    static BathIntegralResult resonant_sine_sq(const BathIntegralRequest& req) {
        const ReservoirSpec& r = req.reservoir;
        const double a = req.a, t = req.t;
        if (t == 0.0) return {0.0, 0.0, "trivial-t0", ""};
        const double wmax = detail::domain_cutoff(r);
        const double w0 = -a;
        const bool near_res = a < 0.0 && w0 > 0.0 && w0 < wmax;

        const auto ffull = [&](double w) -> cplx {
            const double nu = w + a;
            const double x = nu * t;
            if (std::abs(x) < 1e-5) return spectral_density(w, r) * t * t * 0.5;
            const double sh = std::sin(0.5 * x);
            return spectral_density(w, r) * 2.0 * sh * sh / (nu * nu);
        };

        if (t * wmax < 600.0 * pi) {
            auto pts = feature_panels(0.0, wmax, near_res ? w0 : 0.0,
                                      std::min(1.0, pi / std::max(t, 1e-300)) * 0.25,
                                      std::min(wmax, 2.0 * pi / std::max(t, 1e-300)));
            QuadResult q = integrate_panels(ffull, pts, req.tolerance, 0.0);
            return {q.real(), q.error, "adaptive-gk", ""};
        }

        // Large t: direct per-period panels across the (removable) resonance,
        // smooth 1/(w+a)^2 + rotated cosine tail elsewhere.
        const double w1 = std::max(near_res ? 2.0 * w0 : 4.0 * std::abs(a), 64.0 * pi / t);
        auto pts = feature_panels(0.0, std::min(w1, wmax), near_res ? w0 : -1.0,
                                  0.25 * pi / t, pi / t);
        QuadResult head = integrate_panels(ffull, pts, req.tolerance, 0.0);
        double tail = 0.0, tail_err = 0.0;
        if (w1 < wmax) {
            const auto fsm = [&](double w) -> cplx {
                const double nu = w + a;
                return spectral_density(w, r) / (nu * nu);
            };
            QuadResult sm = integrate_adaptive(fsm, w1, wmax, req.tolerance, 0.0, 800);
            const cplx rc = rotated_tail(r, w1, a, t, 2, req.tolerance);
            tail = sm.real() - rc.real();
            tail_err = sm.error + req.tolerance * std::abs(rc);
        }
        return {head.real() + tail, head.error + tail_err, "periodic+rotated", ""};
    }

    friend struct OscillatoryCrosscheck;
};

// ----- public operation wrappers -----

inline BathIntegralResult integrate_bath(const BathIntegralRequest& req) {
    return BathIntegrator::integrate(req);
}

inline BathIntegralResult integrate_bath_pv(BathIntegralRequest req) {
    if (!req.principal_value_at)
        throw std::invalid_argument("integrate_bath_pv: pole location required");
    return BathIntegrator::integrate(req);
}

// Double bath integral int int J_A(w) J_B(w') K2(w, w') dw dw' by
// tensor-product adaptive quadrature. Serves bounded two-frequency kernels;
// production two-boson overlaps use the analytic time-domain reduction.
inline BathIntegralResult integrate_bath2(const ReservoirSpec& ra,
                                          const ReservoirSpec& rb,
                                          const std::function<cplx(double, double)>& kernel2,
                                          double tolerance = 1e-8) {
    const double wa_max = detail::domain_cutoff(ra);
    const double wb_max = detail::domain_cutoff(rb);
    const auto outer = [&](double wa) -> cplx {
        const auto inner = [&](double wb) -> cplx {
            return spectral_density(wb, rb) * kernel2(wa, wb);
        };
        auto ptsb = feature_panels(0.0, wb_max, 0.0, 1e-8 * rb.lambda, wb_max);
        QuadResult qi = integrate_panels(inner, ptsb, tolerance * 0.25, 0.0);
        return spectral_density(wa, ra) * qi.value;
    };
    auto ptsa = feature_panels(0.0, wa_max, 0.0, 1e-8 * ra.lambda, wa_max);
    QuadResult q = integrate_panels(outer, ptsa, tolerance, 0.0);
    if (!q.converged)
        throw IntegrationError("integrate_bath2: did not converge", std::abs(q.value));
    return {q.real(), q.error, "tensor-adaptive", ""};
}

struct CrosscheckReport {
    double value_a = 0.0;      // per-period segmentation + acceleration
    double value_b = 0.0;      // Filon / contour-rotation phase-aware path
    double discrepancy = 0.0;
    double combined_tolerance = 0.0;
    bool agreed = true;
};

struct OscillatoryCrosscheck {
    static CrosscheckReport run(const BathIntegralRequest& req) {
        CrosscheckReport rep;
        if (req.kernel != BathKernel::ResonantSine) {
            // degenerate (non-oscillatory) kernels: both strategies collapse
            // to the adaptive engine
            BathIntegralResult r1 = integrate_bath(req);
            rep.value_a = rep.value_b = r1.value;
            rep.combined_tolerance = 2.0 * r1.abs_error_estimate;
            return rep;
        }
        BathIntegralResult ra = BathIntegrator::resonant_sine(req, false);
        BathIntegralResult rb = BathIntegrator::resonant_sine(req, true);
        rep.value_a = ra.value;
        rep.value_b = rb.value;
        rep.discrepancy = std::abs(ra.value - rb.value);
        rep.combined_tolerance = ra.abs_error_estimate + rb.abs_error_estimate
                               + req.tolerance * (std::abs(ra.value) + std::abs(rb.value));
        rep.agreed = rep.discrepancy <= 10.0 * std::max(rep.combined_tolerance, 1e-15);
        return rep;
    }
};

inline CrosscheckReport oscillatory_strategy_crosscheck(const BathIntegralRequest& req) {
    return OscillatoryCrosscheck::run(req);
}

} // namespace duobath
