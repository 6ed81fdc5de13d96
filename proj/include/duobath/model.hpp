#pragma once
// model.hpp — two-level system in a double-well potential coupled to two
// independent bosonic vacuum reservoirs: parameter structs, spectral
// densities, closed-form moments and the isolated tunneling law.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace duobath {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi_v<double>;
inline constexpr cplx iu{0.0, 1.0};

// ----- system parameters -----

struct SystemParams {
    double h = 0.1;                   // dimensionless quantum of action
    double delta = 1.0e-3;            // tunneling splitting (frequency units)
    double omega0 = 2.0 * std::numbers::sqrt2; // small-oscillation frequency in each well

    void validate() const {
        if (!(h > 0.0)) throw std::invalid_argument("SystemParams: h must be > 0");
        if (!(delta > 0.0)) throw std::invalid_argument("SystemParams: delta must be > 0");
        if (!(omega0 > 0.0)) throw std::invalid_argument("SystemParams: omega0 must be > 0");
        if (!(delta < omega0)) throw std::invalid_argument("SystemParams: delta must be < omega0 (two-level truncation)");
    }

    // Energy origin at the well midpoint: E1 = -h*delta/2, E2 = +h*delta/2.
    double e1() const { return -0.5 * h * delta; }
    double e2() const { return +0.5 * h * delta; }
};

struct TwoLevelSystem {
    SystemParams sys{};
    double x12 = 1.0;                 // coordinate matrix element between the energy doublet states

    void validate() const {
        sys.validate();
        if (!(x12 > 0.0)) throw std::invalid_argument("TwoLevelSystem: x12 must be > 0");
    }

    double x2() const { return x12 * x12; } // x^2 is x12^2 * identity in the doublet space

    // Well states |L>,|R> as combinations of the energy doublet |1>,|2>:
    // |L> = (|1> - |2>)/sqrt(2), |R> = (|1> + |2>)/sqrt(2).
    static double braket_left(int n) {  // <n|L>
        if (n == 1) return 1.0 / std::numbers::sqrt2;
        if (n == 2) return -1.0 / std::numbers::sqrt2;
        throw std::invalid_argument("braket_left: n must be 1 or 2");
    }
    static double braket_right(int n) { // <n|R>
        if (n == 1 || n == 2) return 1.0 / std::numbers::sqrt2;
        throw std::invalid_argument("braket_right: n must be 1 or 2");
    }
};

// ----- reservoirs -----

struct ReservoirSpec {
    double s = 1.0;        // spectral exponent (1 = ohmic)
    double j = 1.0e-4;     // dimensionless coupling strength
    double lambda = 10.0;  // exponential cutoff frequency

    void validate() const {
        if (!(s > 0.0)) throw std::invalid_argument("ReservoirSpec: s must be > 0");
        if (!(j >= 0.0)) throw std::invalid_argument("ReservoirSpec: j must be >= 0");
        if (!(lambda > 0.0)) throw std::invalid_argument("ReservoirSpec: lambda must be > 0");
    }

    static ReservoirSpec ohmic(double j = 1.0e-4, double lambda = 10.0) {
        return ReservoirSpec{1.0, j, lambda};
    }
};

// J(w) = j * w * (w/lambda)^(s-1) * exp(-w/lambda), w >= 0.
inline double spectral_density(double w, const ReservoirSpec& r) {
    if (w < 0.0) throw std::domain_error("spectral_density: omega must be >= 0");
    if (w == 0.0) return 0.0; // J ~ w^s vanishes at the origin for every s > 0
    return r.j * w * std::pow(w / r.lambda, r.s - 1.0) * std::exp(-w / r.lambda);
}

// Analytic continuation J(z) for complex z off the negative real axis
// (principal branch of z^s); used by contour-rotated integrals.
inline cplx spectral_density(cplx z, const ReservoirSpec& r) {
    return r.j * std::pow(r.lambda, 1.0 - r.s) * std::pow(z, r.s) * std::exp(-z / r.lambda);
}

// int_0^inf J(w) w^k dw = j * lambda^(k+2) * Gamma(s + k + 1), k > -s - 1
// (J carries w^s * lambda^(1-s), so the substitution u = w/lambda leaves
// lambda^(k+2)).
inline double cutoff_moment(double k, const ReservoirSpec& r) {
    if (!(r.s + k + 1.0 > 0.0)) throw std::invalid_argument("cutoff_moment: requires s + k + 1 > 0");
    return r.j * std::pow(r.lambda, k + 2.0) * std::tgamma(r.s + k + 1.0);
}

// Half-line Fourier transform of the spectral density (vacuum bath
// correlation up to the 2/pi contraction factor):
//   corr_plus(tau) = int_0^inf J(w) e^{i w tau} dw
//                  = j * lambda^2 * Gamma(s+1) / (1 - i*lambda*tau)^(s+1).
inline cplx corr_plus(double tau, const ReservoirSpec& r) {
    return r.j * r.lambda * r.lambda * std::tgamma(r.s + 1.0)
         / std::pow(cplx{1.0, -r.lambda * tau}, r.s + 1.0);
}

// Mode-sum -> integral contraction: sum_k g_k^2 w_k^3 F(w_k) -> (2/pi) int J(w) F(w) dw.
inline constexpr double contraction_factor = 2.0 / pi;

// ----- isolated dynamics -----

// Right-well occupation of the closed two-level system prepared in |L>:
// P_R(t) = sin^2(delta * t / 2).
inline double isolated_probability(double t, const SystemParams& sys) {
    const double s = std::sin(0.5 * sys.delta * t);
    return s * s;
}

} // namespace duobath
