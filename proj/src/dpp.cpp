#include "colpp/dpp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "colpp/errors.hpp"

namespace colpp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// fixed-order four-lane dot product; the lane split lets the compiler
// vectorize while keeping results deterministic
double dot4(const double* a, const double* b, std::size_t n) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    std::size_t l = 0;
    for (; l + 4 <= n; l += 4) {
        s0 += a[l] * b[l];
        s1 += a[l + 1] * b[l + 1];
        s2 += a[l + 2] * b[l + 2];
        s3 += a[l + 3] * b[l + 3];
    }
    for (; l < n; ++l) s0 += a[l] * b[l];
    return (s0 + s1) + (s2 + s3);
}

// modes with |k1| <= K1 and (k1/L1)^2 + (k2/L2)^2 <= rho^2, optionally truncated
std::size_t count_modes(double rho, double l1, double l2, int trunc, std::vector<int>* rows,
                        int* k1_max_out) {
    int k1_cap = static_cast<int>(std::floor(rho * l1));
    if (trunc > 0) k1_cap = std::min(k1_cap, trunc);
    std::size_t m = 0;
    if (rows) rows->assign(static_cast<std::size_t>(k1_cap) + 1, 0);
    for (int k1 = 0; k1 <= k1_cap; ++k1) {
        double rem = rho * rho - (k1 / l1) * (k1 / l1);
        int mk = rem <= 0.0 ? 0 : static_cast<int>(std::floor(l2 * std::sqrt(rem)));
        if (trunc > 0) mk = std::min(mk, trunc);
        if (rows) (*rows)[k1] = mk;
        m += static_cast<std::size_t>(2 * mk + 1) * (k1 == 0 ? 1 : 2);
    }
    if (k1_max_out) *k1_max_out = k1_cap;
    return m;
}

} // namespace

double DppSpectralConfig::margin_for(double kappa) const {
    if (extension_margin >= 0.0) return extension_margin;
    return 2.0 / std::sqrt(kappa);
}

double jinc_kernel(double kappa, double r) {
    double alpha = 2.0 * std::sqrt(kPi * kappa);
    double x = alpha * r;
    if (x < 1e-8) {
        // J1(x)/x -> 1/2 - x^2/16
        return kappa * (1.0 - x * x / 8.0);
    }
    return std::sqrt(kappa / kPi) * std::cyl_bessel_j(1.0, x) / r;
}

JincDppSampler::JincDppSampler(double kappa, const Rect& target, const DppSpectralConfig& cfg)
    : kappa_(kappa) {
    if (!(kappa > 0.0)) throw error(errc::invalid_config, "jinc DPP: kappa must be positive");
    target.validate();
    double margin = cfg.margin_for(kappa);
    double base1 = target.x.length() + 2.0 * margin;
    double base2 = target.y.length() + 2.0 * margin;
    double rho = std::sqrt(kappa / kPi);

    // Nudge the rectangle sides until the lattice mode count matches
    // kappa * |R| closely, so the realized intensity is kappa to < 0.1%.
    double best_l1 = base1, best_l2 = base2, best_err = 1e18;
    const double err_exit = 1e-4 * std::max(kappa * base1 * base2, 1.0);
    for (int s1 = 0; s1 <= 7 && best_err > err_exit; ++s1) {
        double l1 = base1 + 0.5 * s1;
        for (int s2 = 0; s2 <= 800; ++s2) {
            double l2 = base2 + 0.005 * s2;
            double m = static_cast<double>(count_modes(rho, l1, l2, cfg.truncation, nullptr, nullptr));
            double err = std::fabs(m - kappa * l1 * l2);
            if (err < best_err) {
                best_err = err;
                best_l1 = l1;
                best_l2 = l2;
                if (err < err_exit) break;
            }
        }
    }
    l1_ = best_l1;
    l2_ = best_l2;
    rect_ = Rect{{target.x.lo - margin, target.x.lo - margin + l1_},
                 {target.y.lo - margin, target.y.lo - margin + l2_}};
    m_ = count_modes(rho, l1_, l2_, cfg.truncation, &m_of_k1_, &k1_max_);
    c0_ = static_cast<double>(m_) / (l1_ * l2_);

    if (cfg.truncation > 0) {
        double full = static_cast<double>(count_modes(rho, l1_, l2_, 0, nullptr, nullptr));
        if (static_cast<double>(m_) < 0.99 * full) {
            int needed = static_cast<int>(std::ceil(rho * std::max(l1_, l2_)));
            throw error(errc::invalid_config,
                        "jinc DPP: spectral truncation too small, need at least index " +
                            std::to_string(needed) + " per axis");
        }
    }
    if (m_ == 0) throw error(errc::invalid_config, "jinc DPP: no spectral mass (window too small)");
}

double JincDppSampler::kernel(double dx, double dy) const {
    double a = kTwoPi * dx / l1_;
    double b = kTwoPi * dy / l2_;
    double sh = std::sin(0.5 * b);
    double acc;
    if (std::fabs(sh) < 1e-9) {
        acc = 2.0 * m_of_k1_[0] + 1.0;
        for (int k1 = 1; k1 <= k1_max_; ++k1)
            acc += 2.0 * std::cos(k1 * a) * (2.0 * m_of_k1_[k1] + 1.0);
    } else {
        acc = std::sin((m_of_k1_[0] + 0.5) * b);
        for (int k1 = 1; k1 <= k1_max_; ++k1)
            acc += 2.0 * std::cos(k1 * a) * std::sin((m_of_k1_[k1] + 0.5) * b);
        acc /= sh;
    }
    return acc / (l1_ * l2_);
}

std::vector<Vec2> JincDppSampler::sample(RngStream& rng) const {
    const std::size_t n = m_;
    const int kk = k1_max_;
    const double inv_area = 1.0 / (l1_ * l2_);

    std::vector<Vec2> pts;
    pts.reserve(n);
    // growing lower-triangular Cholesky factor of the kernel matrix
    std::vector<double> chol(n * n, 0.0);
    std::vector<double> y(n, 0.0);

    // cached per-point trigonometric state: cos/sin(k1 * ax), sin/cos of the
    // Dirichlet angles (m_k + 1/2) * by, and the half-angle pair of by
    const std::size_t stride = static_cast<std::size_t>(4 * (kk + 1) + 2);
    std::vector<double> cache(n * stride, 0.0);
    std::vector<double> prop(stride, 0.0);

    auto fill_trig = [&](double px, double py, double* dst) {
        double ax = kTwoPi * (px - rect_.x.lo) / l1_;
        double by = kTwoPi * (py - rect_.y.lo) / l2_;
        double ca = std::cos(ax), sa = std::sin(ax);
        double* cx = dst;
        double* sx = dst + (kk + 1);
        double* sA = dst + 2 * (kk + 1);
        double* cA = dst + 3 * (kk + 1);
        cx[0] = 1.0;
        sx[0] = 0.0;
        for (int k = 1; k <= kk; ++k) { // angle addition recurrence
            cx[k] = cx[k - 1] * ca - sx[k - 1] * sa;
            sx[k] = sx[k - 1] * ca + cx[k - 1] * sa;
        }
        for (int k = 0; k <= kk; ++k) {
            double ang = (m_of_k1_[k] + 0.5) * by;
            sA[k] = std::sin(ang);
            cA[k] = std::cos(ang);
        }
        dst[stride - 2] = std::sin(0.5 * by);
        dst[stride - 1] = std::cos(0.5 * by);
    };

    // periodic kernel between the proposal and cached point j
    auto kernel_cached = [&](const double* a, const double* b) -> double {
        const double* acx = a;
        const double* asx = a + (kk + 1);
        const double* asA = a + 2 * (kk + 1);
        const double* acA = a + 3 * (kk + 1);
        const double* bcx = b;
        const double* bsx = b + (kk + 1);
        const double* bsA = b + 2 * (kk + 1);
        const double* bcA = b + 3 * (kk + 1);
        double denom = a[stride - 2] * b[stride - 1] - a[stride - 1] * b[stride - 2];
        if (std::fabs(denom) < 1e-9) {
            double acc = 2.0 * m_of_k1_[0] + 1.0;
            for (int k = 1; k <= kk; ++k) {
                double cosx = acx[k] * bcx[k] + asx[k] * bsx[k];
                acc += 2.0 * cosx * (2.0 * m_of_k1_[k] + 1.0);
            }
            return acc * inv_area;
        }
        double acc = asA[0] * bcA[0] - acA[0] * bsA[0];
        for (int k = 1; k <= kk; ++k) {
            double cosx = acx[k] * bcx[k] + asx[k] * bsx[k];
            double sinA = asA[k] * bcA[k] - acA[k] * bsA[k];
            acc += 2.0 * cosx * sinA;
        }
        return acc * inv_area / denom;
    };

    for (std::size_t t = 0; t < n; ++t) {
        for (;;) {
            double px = rng.uniform(rect_.x.lo, rect_.x.hi);
            double py = rng.uniform(rect_.y.lo, rect_.y.hi);
            fill_trig(px, py, prop.data());
            // accept iff u < schur/c0, i.e. ||y||^2 < c0 (1 - u); drawing u up
            // front lets the forward solve stop as soon as rejection is certain
            double budget = c0_ * (1.0 - rng.u01());
            double y2 = 0.0;
            bool rejected = false;
            for (std::size_t j = 0; j < t; ++j) {
                double cj = kernel_cached(prop.data(), &cache[j * stride]);
                double s = cj - dot4(&chol[j * n], y.data(), j);
                y[j] = s / chol[j * n + j];
                y2 += y[j] * y[j];
                if (y2 >= budget) {
                    rejected = true;
                    break;
                }
            }
            if (rejected) continue;
            double schur = c0_ - y2;
            if (schur < 1e-12 * c0_) continue; // numerically exhausted direction
            // accept: extend the Cholesky factor
            double* row = &chol[t * n];
            for (std::size_t l = 0; l < t; ++l) row[l] = y[l];
            row[t] = std::sqrt(schur);
            std::copy(prop.begin(), prop.end(), cache.begin() + t * stride);
            pts.push_back(Vec2{px, py});
            break;
        }
    }
    return pts;
}

} // namespace colpp
