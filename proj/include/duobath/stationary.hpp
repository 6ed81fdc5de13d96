#pragma once
// stationary.hpp — stationary second-order perturbation theory: first-order
// and full energy shifts per reservoir, golden-rule decay rates, and the
// kinematic (stationary-phase) state assembled from them.

#include <array>
#include <cmath>

#include "bath_integrals.hpp"
#include "model.hpp"

namespace duobath {

// First-order shift: dE1 = (x12^2/pi) * int J(w)/w dw, the same for both
// eigenstates (the quadratic coupling term is x12^2 * identity).
inline double first_order_shift(int n, const ReservoirSpec& r, const TwoLevelSystem& tls) {
    if (n != 1 && n != 2) throw std::invalid_argument("first_order_shift: n in {1,2}");
    return tls.x2() / pi * cutoff_moment(-1.0, r);
}

// Full second-order shift: dE_n = (x12^2/pi) * W_n * int J/(w (w + W_n)) dw
// with W_1 = +delta (plain) and W_2 = -delta (principal value at w = delta).
inline double energy_shift(int n, const ReservoirSpec& r, const TwoLevelSystem& tls,
                           double tolerance = 1e-10) {
    if (n != 1 && n != 2) throw std::invalid_argument("energy_shift: n in {1,2}");
    const double W = (n == 1) ? tls.sys.delta : -tls.sys.delta;
    BathIntegralRequest req;
    req.reservoir = r;
    req.kernel = BathKernel::PolePair;
    req.a = W;
    req.tolerance = tolerance;
    if (W < 0.0) req.principal_value_at = -W;
    return tls.x2() / pi * W * integrate_bath(req).value;
}

// Golden-rule decay rates: Gamma_1 = 0, Gamma_2 = (2/h) x12^2 J(delta).
inline double decay_rate(int n, const ReservoirSpec& r, const TwoLevelSystem& tls) {
    if (n == 1) return 0.0;
    if (n != 2) throw std::invalid_argument("decay_rate: n in {1,2}");
    return 2.0 / tls.sys.h * tls.x2() * spectral_density(tls.sys.delta, r);
}

struct StationaryPT {
    TwoLevelSystem tls{};
    std::array<ReservoirSpec, 2> reservoirs{};        // A, B
    std::array<double, 2> dE1_first{}, dE2_first{};   // first-order shifts per reservoir
    std::array<double, 2> dE1{}, dE2{};               // full shifts per reservoir
    std::array<double, 2> gamma2{};                   // decay rate per reservoir (Gamma_1 = 0)

    static StationaryPT compute(const TwoLevelSystem& tls,
                                const ReservoirSpec& ra, const ReservoirSpec& rb,
                                double tolerance = 1e-10) {
        tls.validate();
        ra.validate();
        rb.validate();
        StationaryPT pt;
        pt.tls = tls;
        pt.reservoirs = {ra, rb};
        for (int i = 0; i < 2; ++i) {
            const ReservoirSpec& r = pt.reservoirs[i];
            pt.dE1_first[i] = first_order_shift(1, r, tls);
            pt.dE2_first[i] = first_order_shift(2, r, tls);
            pt.dE1[i] = pt.dE1_first[i] + energy_shift(1, r, tls, tolerance);
            pt.dE2[i] = pt.dE2_first[i] + energy_shift(2, r, tls, tolerance);
            pt.gamma2[i] = decay_rate(2, r, tls);
        }
        return pt;
    }

    // Additivity at this level is structural: totals are plain sums.
    double dE1_total() const { return dE1[0] + dE1[1]; }
    double dE2_total() const { return dE2[0] + dE2[1]; }
    double gamma_total() const { return gamma2[0] + gamma2[1]; }

    // Shift-renormalized tunneling frequency (E2 - E1 + dE2 - dE1)/h.
    double delta_eff() const {
        return tls.sys.delta + (dE2_total() - dE1_total()) / tls.sys.h;
    }
};

// Kinematic state amplitudes on |1>, |2> at time t (norm-preserving form):
// c1 = (1 - e^{-G t}/2)^{1/2} e^{-i(E1 + dE1)t/h},
// c2 = -(1/sqrt2) e^{-G t/2} e^{-i(E2 + dE2)t/h},  G = Gamma_2A + Gamma_2B.
inline std::pair<cplx, cplx> stationary_state(double t, const StationaryPT& pt) {
    if (t < 0.0) throw std::domain_error("stationary_state: t >= 0 required");
    const double h = pt.tls.sys.h, G = pt.gamma_total();
    const double e1 = pt.tls.sys.e1() + pt.dE1_total();
    const double e2 = pt.tls.sys.e2() + pt.dE2_total();
    const cplx c1 = std::sqrt(1.0 - 0.5 * std::exp(-G * t)) * std::exp(-iu * e1 * t / h);
    const cplx c2 = -std::exp(-0.5 * G * t) / std::numbers::sqrt2 * std::exp(-iu * e2 * t / h);
    return {c1, c2};
}

// Right-well probability of the kinematic state: |<R|psi>|^2 with
// <R| = (<1| + <2|)/sqrt2.
inline double stationary_p_right(double t, const StationaryPT& pt) {
    auto [c1, c2] = stationary_state(t, pt);
    const cplx amp = (c1 + c2) / std::numbers::sqrt2;
    return std::norm(amp);
}

} // namespace duobath
