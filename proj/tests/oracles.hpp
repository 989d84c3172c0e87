// Independent reference implementations used only by the tests: literal
// double-loop estimators, brute-force geometry checks, quadrature, and the
// classical-test helpers. Nothing here shares code with the library paths it
// verifies.
#ifndef COLPP_TEST_ORACLES_HPP
#define COLPP_TEST_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "colpp/mrf.hpp"
#include "colpp/point_pattern.hpp"

namespace oracles {

constexpr double kPi = std::numbers::pi;

// Fixture windows used throughout the tests (box side lengths in micrometres).
inline colpp::Window3 window_L3() {
    return colpp::Window3{{0.0, 492.70}, {0.0, 132.03}, {0.0, 407.70}};
}
inline colpp::Window3 window_L5() {
    return colpp::Window3{{0.0, 488.40}, {0.0, 138.33}, {0.0, 495.40}};
}

// cluster-model parameter fixtures (kappa, alpha_a, sigma)
struct ClusterFixture {
    double kappa, sigma, alpha_a;
};
inline ClusterFixture thomas_L3() { return {0.027, 2.86, 0.36}; }
inline ClusterFixture thomas_L5() { return {0.0085, 4.58, 0.95}; }
inline ClusterFixture dtpp_L3() { return {0.0040, 5.45, 2.42}; }
inline ClusterFixture dtpp_L5() { return {0.0021, 6.53, 3.87}; }

// conditional-model fixture (gamma1, gamma2, h, r1, t1, r2, t2)
struct MrfFixture {
    double gamma1, gamma2, h, r1, t1, r2, t2;
};
inline MrfFixture mrf_L3() { return {0.41, 1.78, 6.25, 20.0, 11.5, 11.0, 35.5}; }
inline MrfFixture mrf_L5() { return {0.51, 1.68, 6.77, 24.25, 15.5, 14.75, 37.25}; }

inline double translation_weight(const colpp::PointPattern& p, double dx, double dy, double dz) {
    const auto& w = p.window3();
    double denom = (w.x.length() - std::fabs(dx)) * (w.y.length() - std::fabs(dy));
    if (p.dim() == 3) denom *= (w.z.length() - std::fabs(dz));
    return p.window_measure() / denom;
}

// literal ordered-pair sum for the K estimator
inline double naive_k(const colpp::PointPattern& p, double r) {
    const auto& pts = p.points();
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i == j) continue;
            double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
            double dz = p.dim() == 2 ? 0.0 : pts[i].z - pts[j].z;
            double d = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (d <= r) acc += translation_weight(p, dx, dy, dz);
        }
    double n = static_cast<double>(pts.size());
    return p.window_measure() / (n * n) * acc;
}

inline double naive_cylk(const colpp::PointPattern& p, double r, double t) {
    const auto& pts = p.points();
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i == j) continue;
            double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y, dz = pts[i].z - pts[j].z;
            if (std::hypot(dx, dy) <= r && std::fabs(dz) <= t)
                acc += translation_weight(p, dx, dy, dz);
        }
    double n = static_cast<double>(pts.size());
    return p.window_measure() / (n * n) * acc;
}

inline double naive_pcf(const colpp::PointPattern& p, double r, double b) {
    const auto& pts = p.points();
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i == j) continue;
            double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
            double dz = p.dim() == 2 ? 0.0 : pts[i].z - pts[j].z;
            double d = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (d <= 0.0 || std::fabs(r - d) >= b) continue;
            double u = (r - d) / b;
            double kern = 0.75 * (1.0 - u * u) / b;
            double shell = p.dim() == 2 ? 2.0 * kPi * d : 4.0 * kPi * d * d;
            acc += translation_weight(p, dx, dy, dz) * kern / shell;
        }
    double n = static_cast<double>(pts.size());
    return p.window_measure() / (n * n) * acc;
}

inline double border_distance(const colpp::Vec3& q, const colpp::Window3& w, int dim) {
    double b = std::min(q.x - w.x.lo, w.x.hi - q.x);
    b = std::min(b, std::min(q.y - w.y.lo, w.y.hi - q.y));
    if (dim == 3) b = std::min(b, std::min(q.z - w.z.lo, w.z.hi - q.z));
    return b;
}

// brute-force reduced-sample G
inline double naive_g(const colpp::PointPattern& p, double r) {
    const auto& pts = p.points();
    long num = 0, den = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (border_distance(pts[i], p.window3(), p.dim()) < r) continue;
        ++den;
        double nn = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i == j) continue;
            nn = std::min(nn, colpp::dist3d(pts[i], pts[j]));
        }
        if (nn <= r) ++num;
    }
    return den == 0 ? -1.0 : static_cast<double>(num) / static_cast<double>(den);
}

// brute-force reduced-sample F over given test sites
inline double naive_f(const colpp::PointPattern& p, const std::vector<colpp::Vec3>& sites,
                      double r) {
    const auto& pts = p.points();
    long num = 0, den = 0;
    for (const auto& s : sites) {
        if (border_distance(s, p.window3(), p.dim()) < r) continue;
        ++den;
        double nn = std::numeric_limits<double>::infinity();
        for (const auto& q : pts) nn = std::min(nn, colpp::dist3d(s, q));
        if (nn <= r) ++num;
    }
    return den == 0 ? -1.0 : static_cast<double>(num) / static_cast<double>(den);
}

// one-sample Kolmogorov-Smirnov statistic against U(lo,hi)
inline double ks_uniform(std::vector<double> v, double lo, double hi) {
    std::sort(v.begin(), v.end());
    double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double cdf = (v[i] - lo) / (hi - lo);
        d = std::max(d, std::fabs(cdf - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - cdf));
    }
    return d;
}
// asymptotic KS critical values
inline double ks_critical_5pct(std::size_t n) { return 1.358 / std::sqrt(static_cast<double>(n)); }
inline double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

// adaptive Simpson with deep bisection; handles piecewise-constant integrands
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double abs_tol, int depth = 60) {
    struct Rec {
        const std::function<double(double)>& f;
        double operator()(double a2, double m, double b2, double fa, double fm, double fb,
                          double whole, double tol, int d) const {
            double lm = 0.5 * (a2 + m), rm = 0.5 * (m + b2);
            double flm = f(lm), frm = f(rm);
            double left = (m - a2) / 6.0 * (fa + 4.0 * flm + fm);
            double right = (b2 - m) / 6.0 * (fm + 4.0 * frm + fb);
            if (d <= 0) return left + right;
            if (std::fabs(left + right - whole) <= 15.0 * tol)
                return left + right + (left + right - whole) / 15.0;
            return operator()(a2, lm, m, fa, flm, fm, left, 0.5 * tol, d - 1) +
                   operator()(m, rm, b2, fm, frm, fb, right, 0.5 * tol, d - 1);
        }
    } rec{f};
    double m = 0.5 * (a + b), fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return rec(a, m, b, fa, fm, fb, whole, abs_tol, depth);
}

// central finite difference
inline double fd_derivative(const std::function<double(double)>& f, double x, double step) {
    return (f(x + step) - f(x - step)) / (2.0 * step);
}

// ---------------------------------------------------------------------------
// numerical Hankel transform of the jinc kernel:
// phi(rho) = 2 pi int_0^inf C(r) J0(2 pi rho r) r dr, evaluated by half-period
// Gauss-Kronrod panels over a long head plus the analytic tail of the leading
// Bessel-product asymptotics (sine/cosine integrals)
// ---------------------------------------------------------------------------
inline double si_pi2_minus(double x) { // pi/2 - Si(x) for large x
    double x2 = x * x;
    double f = (1.0 - 2.0 / x2 + 24.0 / (x2 * x2)) / x;
    double g = (1.0 - 6.0 / x2 + 120.0 / (x2 * x2)) / x2;
    return f * std::cos(x) + g * std::sin(x);
}
inline double ci_large(double x) {
    double x2 = x * x;
    double f = (1.0 - 2.0 / x2 + 24.0 / (x2 * x2)) / x;
    double g = (1.0 - 6.0 / x2 + 120.0 / (x2 * x2)) / x2;
    return f * std::sin(x) - g * std::cos(x);
}

inline double hankel_of_jinc(double kappa, double rho) {
    const double alpha = 2.0 * std::sqrt(kPi * kappa);
    const double beta = 2.0 * kPi * rho;
    const double pref = 2.0 * kPi * std::sqrt(kappa / kPi);
    auto integrand = [&](double r) {
        if (r < 1e-12) return 0.5 * alpha * r; // J1(x) ~ x/2
        return std::cyl_bessel_j(1.0, alpha * r) * std::cyl_bessel_j(0.0, beta * r);
    };
    double omega = std::fabs(alpha - beta);
    double cut = std::max(1000.0 / std::max(omega, 1e-6), 10000.0 / alpha);
    double panel = kPi / (alpha + beta);
    std::size_t n_panels = static_cast<std::size_t>(std::ceil(cut / panel));
    if (n_panels > 400000) n_panels = 400000;
    panel = cut / static_cast<double>(n_panels);
    static const double gx[7] = {-0.949107912342759, -0.741531185599394, -0.405845151377397, 0.0,
                                 0.405845151377397,  0.741531185599394,  0.949107912342759};
    static const double gw[7] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                                 0.417959183673469, 0.381830050505119, 0.279705391489277,
                                 0.129484966168870};
    double head = 0.0;
    for (std::size_t p = 0; p < n_panels; ++p) {
        double a = static_cast<double>(p) * panel, half = 0.5 * panel, mid = a + half;
        double acc = 0.0;
        for (int i = 0; i < 7; ++i) acc += gw[i] * integrand(mid + half * gx[i]);
        head += acc * half;
    }
    double tail = (si_pi2_minus(omega * cut) * (alpha > beta ? 1.0 : -1.0) *
                       (omega > 1e-12 ? 1.0 : 0.0) +
                   ci_large((alpha + beta) * cut)) /
                  (kPi * std::sqrt(alpha * beta));
    return pref * (head + tail);
}

// ---------------------------------------------------------------------------
// full-conditional quadrature oracle: the indicator of each neighbour pair
// changes only at z-values with closed forms per shape, so quadrature over
// panels cut at those values cannot miss a narrow feature
// ---------------------------------------------------------------------------
inline double mrf_integrand(const std::vector<colpp::Vec2>& xy, const std::vector<double>& z,
                            const colpp::MrfModelSpec& spec, std::size_t i, double zc) {
    double lg = 0.0;
    for (std::size_t j = 0; j < xy.size(); ++j) {
        if (j == i) continue;
        double d = colpp::dist2d(xy[i], xy[j]);
        double dz = std::fabs(z[j] - zc);
        if (spec.h > 0 && d * d + dz * dz < spec.h * spec.h) return 0.0;
        if (spec.has_region1() && spec.region1().contains(d, 0.0, dz)) lg += std::log(spec.gamma1);
        if (spec.has_region2() && spec.region2().contains(d, 0.0, dz)) lg += std::log(spec.gamma2);
    }
    return std::exp(lg);
}

inline std::vector<double> mrf_panels(const std::vector<colpp::Vec2>& xy,
                                      const std::vector<double>& z,
                                      const colpp::MrfModelSpec& spec, std::size_t i,
                                      const colpp::Interval& wz) {
    std::vector<double> cuts = {wz.lo, wz.hi};
    auto push = [&](double v) {
        if (v > wz.lo && v < wz.hi) cuts.push_back(v);
    };
    for (std::size_t j = 0; j < xy.size(); ++j) {
        if (j == i) continue;
        double d = colpp::dist2d(xy[i], xy[j]);
        if (spec.h > 0 && d < spec.h) {
            double w = std::sqrt(spec.h * spec.h - d * d);
            push(z[j] - w);
            push(z[j] + w);
        }
        switch (spec.model_id) {
        case 2:
            if (d <= spec.r1) {
                double w = std::sqrt(spec.r1 * spec.r1 - d * d);
                push(z[j] - w);
                push(z[j] + w);
            }
            break;
        case 3:
            if (d <= spec.r1) {
                push(z[j] - spec.t1);
                push(z[j] + spec.t1);
            }
            break;
        case 4:
            if (d <= spec.r1 && d > 0) {
                double w = spec.t1 * d / spec.r1;
                push(z[j] - w);
                push(z[j] + w);
            }
            break;
        case 5:
            if (d <= spec.r1) {
                push(z[j] - spec.t1);
                push(z[j] + spec.t1);
            }
            if (d <= spec.r2) {
                push(z[j] - spec.t2);
                push(z[j] - spec.t1);
                push(z[j] + spec.t1);
                push(z[j] + spec.t2);
            }
            break;
        default: break;
        }
    }
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

inline double panel_quadrature(const std::function<double(double)>& f,
                               const std::vector<double>& cuts, double tol_per_panel) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (cuts[k + 1] - cuts[k] < 1e-14) continue;
        total += adaptive_simpson(f, cuts[k], cuts[k + 1], tol_per_panel);
    }
    return total;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double stderr_of_mean(const std::vector<double>& v) {
    double m = mean(v);
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    s2 /= static_cast<double>(v.size() - 1);
    return std::sqrt(s2 / static_cast<double>(v.size()));
}

} // namespace oracles

#endif
