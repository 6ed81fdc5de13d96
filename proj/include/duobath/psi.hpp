#pragma once
// psi.hpp — pole-weighted spectral Fourier transforms
//   Psi(theta) = int_0^inf J(w) e^{i w theta} / prod_j (i w + c_j) dw
// with complex factors c_j (simple poles at w_j = i c_j, strictly off the
// contour). Small |theta| is integrated directly with pole-aware panels;
// large |theta| uses contour rotation to the imaginary axis plus explicit
// residues of the poles swept by the rotation. Production callers read from
// precomputed tables (direct region: uniform grid; rotated smooth part:
// log-spaced grid; residue terms added in closed form).

#include <algorithm>
#include <map>
#include <memory>
#include <vector>

#include "model.hpp"
#include "quadrature.hpp"

namespace duobath {

namespace detail {

// Catmull-Rom cubic interpolation on a uniform grid of complex samples.
inline cplx interp_uniform(const std::vector<cplx>& y, double x0, double dx, double x) {
    const double u = (x - x0) / dx;
    const auto n = (long)y.size();
    long i = (long)std::floor(u);
    i = std::clamp(i, 1l, n - 3);
    const double f = u - i;
    const cplx &ym = y[i - 1], &y0 = y[i], &y1 = y[i + 1], &y2 = y[i + 2];
    return y0 + 0.5 * f * (y1 - ym + f * (2.0 * ym - 5.0 * y0 + 4.0 * y1 - y2
                                          + f * (3.0 * (y0 - y1) + y2 - ym)));
}

} // namespace detail

class SpectralFourier {
  public:
    SpectralFourier(ReservoirSpec r, std::vector<cplx> factors, double theta_max)
        : r_(r), c_(std::move(factors)), theta_max_(std::max(theta_max, 10.0 / r.lambda)) {
        for (std::size_t i = 0; i < c_.size(); ++i) {
            const cplx wp = iu * c_[i];
            if (std::abs(wp.real()) < 1e-300 && wp.imag() > 0.0)
                throw std::invalid_argument("SpectralFourier: pole on the rotation contour");
            for (std::size_t k = 0; k < i; ++k)
                if (std::abs(c_[i] - c_[k]) < 1e-14 * (1.0 + std::abs(c_[i])))
                    throw std::invalid_argument("SpectralFourier: repeated factor (double pole) unsupported");
        }
        build_tables();
    }

    cplx operator()(double theta) const {
        if (std::abs(theta) <= theta_sw_)
            return detail::interp_uniform(direct_, -theta_sw_, direct_dx_, theta);
        const bool pos = theta > 0.0;
        const double aθ = std::min(std::abs(theta), theta_max_);
        const double lx = std::log(aθ);
        cplx smooth = detail::interp_uniform(pos ? rot_pos_ : rot_neg_, log_lo_, log_dx_, lx);
        if (std::abs(theta) > theta_max_) // power-law continuation of the smooth part
            smooth *= std::pow(std::abs(theta) / theta_max_, -(r_.s + 1.0));
        cplx res{0.0, 0.0};
        for (const auto& [wp, coef] : (pos ? res_pos_ : res_neg_))
            res += coef * std::exp(iu * wp * theta);
        return smooth + res;
    }

    // Reference evaluations (used by tests and table construction).
    cplx eval_direct(double theta, double tol = 1e-10) const {
        const double wmax = r_.lambda * (45.0 + 10.0 * r_.s);
        const auto f = [&](double w) -> cplx {
            return spectral_density(w, r_) * std::exp(iu * w * theta) / denom(cplx(w, 0.0));
        };
        std::vector<double> pts = {0.0, wmax};
        for (const cplx& c : c_) {
            const cplx wp = iu * c;
            if (wp.real() > 0.0 && wp.real() < wmax) {
                auto sub = feature_panels(0.0, wmax, wp.real(),
                                          std::max(std::abs(wp.imag()), 1e-12) * 0.5, wmax);
                pts.insert(pts.end(), sub.begin(), sub.end());
            }
        }
        const double maxw = std::abs(theta) > 0.0
            ? std::min(wmax, 0.5 * pi / std::abs(theta)) : wmax;
        auto base = feature_panels(0.0, wmax, 0.0, 1e-8 * r_.lambda, maxw);
        pts.insert(pts.end(), base.begin(), base.end());
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        return integrate_panels(f, pts, tol, 0.0).value;
    }

    cplx eval_rotated(double theta, double tol = 1e-10) const {
        return rotated_smooth(theta, tol) + residue_sum(theta);
    }

    // Rotated integral along the imaginary axis, without residue terms.
    cplx rotated_smooth(double theta, double tol = 1e-10) const {
        const double at = std::abs(theta);
        if (at <= 0.0) throw std::domain_error("rotated_smooth: theta != 0 required");
        const double sgn = theta > 0.0 ? 1.0 : -1.0;
        const auto f = [&](double y) -> cplx {
            const cplx w = cplx(0.0, sgn) * y; // +iy or -iy
            return spectral_density(w, r_) * std::exp(-y * at) / denom(w);
        };
        const double yspan = (80.0 + 10.0 * r_.s) / at;
        // features: oscillation e^{-i sgn y / lambda} (period 2 pi lambda) and
        // pole shadows at y = |w_p| for poles near the imaginary axis
        std::vector<double> pts = feature_panels(0.0, yspan, 0.0, 1e-6 * std::min(yspan, 1.0),
                                                 std::min(yspan, 0.5 * pi * r_.lambda));
        for (const cplx& c : c_) {
            const cplx wp = iu * c;
            const double dist = std::abs(wp.real());
            if (std::abs(wp.imag()) < yspan && dist < 0.1 * yspan) {
                auto sub = feature_panels(0.0, yspan, std::abs(wp.imag()),
                                          std::max(dist, 1e-12) * 0.5, yspan);
                pts.insert(pts.end(), sub.begin(), sub.end());
            }
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        QuadResult q = integrate_panels(f, pts, tol, 0.0);
        return cplx(0.0, sgn) * q.value;
    }

    cplx residue_sum(double theta) const {
        cplx out{0.0, 0.0};
        for (const auto& [wp, coef] : (theta > 0.0 ? res_pos_ : res_neg_))
            out += coef * std::exp(iu * wp * theta);
        return out;
    }

    double theta_switch() const { return theta_sw_; }

  private:
    cplx denom(cplx w) const {
        cplx d{1.0, 0.0};
        for (const cplx& c : c_) d *= iu * w + c;
        return d;
    }

    void build_tables() {
        // residues: 2 pi i * J(w_p) e^{i w_p theta} / (i * prod_{k!=j}(i w_p + c_k)),
        // + for poles in the first quadrant (theta > 0), - for the fourth (theta < 0)
        for (std::size_t j = 0; j < c_.size(); ++j) {
            const cplx wp = iu * c_[j];
            cplx rest{1.0, 0.0};
            for (std::size_t k = 0; k < c_.size(); ++k)
                if (k != j) rest *= iu * wp + c_[k];
            const cplx coef = 2.0 * pi * iu * spectral_density(wp, r_) / (iu * rest);
            if (wp.real() > 0.0 && wp.imag() > 0.0) res_pos_.emplace_back(wp, coef);
            if (wp.real() > 0.0 && wp.imag() < 0.0) res_neg_.emplace_back(wp, -coef);
        }
        theta_sw_ = 2.0 / r_.lambda;
        const int nd = 384;
        direct_dx_ = 2.0 * theta_sw_ / (nd - 1);
        direct_.resize(nd);
        for (int i = 0; i < nd; ++i)
            direct_[i] = eval_direct(-theta_sw_ + i * direct_dx_, 1e-9);
        const int nr = 480;
        log_lo_ = std::log(theta_sw_ * 0.98);
        log_dx_ = (std::log(theta_max_ * 1.02) - log_lo_) / (nr - 1);
        rot_pos_.resize(nr);
        rot_neg_.resize(nr);
        for (int i = 0; i < nr; ++i) {
            const double th = std::exp(log_lo_ + i * log_dx_);
            rot_pos_[i] = rotated_smooth(+th, 1e-9);
            rot_neg_[i] = rotated_smooth(-th, 1e-9);
        }
    }

    ReservoirSpec r_;
    std::vector<cplx> c_;
    double theta_max_;
    double theta_sw_ = 0.0, direct_dx_ = 0.0, log_lo_ = 0.0, log_dx_ = 0.0;
    std::vector<cplx> direct_, rot_pos_, rot_neg_;
    std::vector<std::pair<cplx, cplx>> res_pos_, res_neg_;
};

// Keyed cache of SpectralFourier tables (per reservoir + factor multiset).
class SpectralFourierCache {
  public:
    explicit SpectralFourierCache(double theta_max) : theta_max_(theta_max) {}

    const SpectralFourier& get(const ReservoirSpec& r, std::vector<cplx> factors) {
        std::sort(factors.begin(), factors.end(), [](const cplx& a, const cplx& b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        });
        std::string key = make_key(r, factors);
        auto it = tables_.find(key);
        if (it == tables_.end())
            it = tables_.emplace(std::move(key),
                                 std::make_unique<SpectralFourier>(r, factors, theta_max_)).first;
        return *it->second;
    }

  private:
    static std::string make_key(const ReservoirSpec& r, const std::vector<cplx>& f) {
        char buf[96];
        std::string key;
        std::snprintf(buf, sizeof buf, "%a|%a|%a", r.s, r.j, r.lambda);
        key = buf;
        for (const cplx& c : f) {
            std::snprintf(buf, sizeof buf, "|%a,%a", c.real(), c.imag());
            key += buf;
        }
        return key;
    }

    double theta_max_;
    std::map<std::string, std::unique_ptr<SpectralFourier>> tables_;
};

} // namespace duobath
