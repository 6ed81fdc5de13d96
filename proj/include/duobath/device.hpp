// device.hpp — flux-qubit double-well parameters and instanton tunneling estimate
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "duobath/model.hpp"

namespace duobath {

// CODATA 2018 exact values.
inline constexpr double elementary_charge = 1.602176634e-19; // C
inline constexpr double hbar_si = 1.054571817e-34;           // J s

struct JunctionParams {
    double gamma = 0.9; // inductance ratio, double-well regime requires 0 < gamma < 1
    double h0 = 0.00949; // junction quantum scale (dimensionless)

    void validate() const {
        if (!(gamma > 0.0) || !(gamma < 1.0))
            throw std::domain_error("JunctionParams: gamma must lie in (0, 1)");
        if (!(h0 > 0.0)) throw std::domain_error("JunctionParams: h0 must be positive");
    }

    // SI path: capacitance in farads, critical current in amperes.
    // h0 = 2 sqrt( (e^2/C) / (I_c * Phi_q / (2 pi)) ) with Phi_q = pi hbar / e.
    static JunctionParams from_si(double gamma, double capacitance, double critical_current) {
        if (!(capacitance > 0.0) || !(critical_current > 0.0))
            throw std::domain_error("JunctionParams: C and I_c must be positive");
        const double phi_q = pi * hbar_si / elementary_charge;
        const double charging = elementary_charge * elementary_charge / capacitance;
        const double josephson = critical_current * phi_q / (2.0 * pi);
        JunctionParams j;
        j.gamma = gamma;
        j.h0 = 2.0 * std::sqrt(charging / josephson);
        j.validate();
        return j;
    }
};

// Well separation and barrier height of the quartic double well:
// theta0 = sqrt(6 (1 - gamma)), U0 = (3/2) (1 - gamma)^2.
inline std::pair<double, double> well_geometry(const JunctionParams& j) {
    j.validate();
    const double d = 1.0 - j.gamma;
    return {std::sqrt(6.0 * d), 1.5 * d * d};
}

// Macroscopicity parameter h = h0 / (3 (1 - gamma)^{3/2}); algebraically
// identical to h0 / (theta0 sqrt(U0)).
inline double macroscopicity(const JunctionParams& j) {
    j.validate();
    return j.h0 / (3.0 * std::pow(1.0 - j.gamma, 1.5));
}

// Semiclassical (instanton) tunneling strength for the symmetric double well:
// Delta = (Omega/pi) sqrt(4 pi Omega e^{2 xi} / h) e^{-I/h},
// with action I = 2 Omega / 3 and fluctuation exponent xi = log 2.
//
// Caveat: at h = 0.1, Omega = 2 sqrt(2) this evaluates to ~2e-7, three to four
// orders below the 1e-3 tunneling strength the simulator defaults to. The
// simulator therefore treats Delta as an independent input; this estimator is
// reported for reference only.
inline double instanton_tunneling(double h, double omega) {
    if (!(h > 0.0) || !(omega > 0.0))
        throw std::domain_error("instanton_tunneling: h > 0 and omega > 0 required");
    const double xi = std::log(2.0);
    const double action = 2.0 * omega / 3.0;
    return omega / pi * std::sqrt(4.0 * pi * omega * std::exp(2.0 * xi) / h)
           * std::exp(-action / h);
}

} // namespace duobath
