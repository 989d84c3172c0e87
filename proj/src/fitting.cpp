#include "colpp/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "colpp/point_pattern.hpp"
#include "colpp/threading.hpp"

namespace colpp {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
} // namespace

double thomas_k_theory(double kappa, double sigma, double r) {
    if (!(kappa > 0) || !(sigma > 0))
        throw error(errc::invalid_config, "thomas_k_theory: parameters must be positive");
    if (r < 0) throw error(errc::invalid_config, "thomas_k_theory: r must be nonnegative");
    return kPi * r * r + (1.0 - std::exp(-r * r / (4.0 * sigma * sigma))) / kappa;
}

double gauss_self_convolution(double sigma, double r) {
    return std::exp(-r * r / (4.0 * sigma * sigma)) / (4.0 * kPi * sigma * sigma);
}

double thomas_pcf_theory(double kappa, double sigma, double r) {
    if (!(kappa > 0) || !(sigma > 0))
        throw error(errc::invalid_config, "thomas_pcf_theory: parameters must be positive");
    return 1.0 + gauss_self_convolution(sigma, r) / kappa;
}

double jinc_dpp_pcf_theory(double kappa, double r) {
    if (!(kappa > 0)) throw error(errc::invalid_config, "jinc_dpp_pcf_theory: kappa > 0 required");
    double alpha = 2.0 * std::sqrt(kPi * kappa);
    double x = alpha * r;
    double ratio; // C(r)/kappa = 2 J1(x)/x, with C(0) = kappa
    if (x < 1e-8) {
        ratio = 1.0 - x * x / 8.0;
    } else {
        ratio = 2.0 * std::cyl_bessel_j(1.0, x) / x;
    }
    return 1.0 - ratio * ratio;
}

namespace {

// area of the intersection of two discs of radius P at centre distance rho
double disc_autocorrelation(double P, double rho) {
    if (rho >= 2.0 * P) return 0.0;
    double q = rho / (2.0 * P);
    return 2.0 * P * P * std::acos(q) - 0.5 * rho * std::sqrt(4.0 * P * P - rho * rho);
}

// spectral factor of (h_sigma * C^2): disc autocorrelation times the Gaussian
double conv_spectral_factor(double P, double sigma, double rho) {
    return disc_autocorrelation(P, rho) * std::exp(-4.0 * kPi * kPi * sigma * sigma * rho * rho);
}

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1]
constexpr double kGK_nodes[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
constexpr double kGK_wk[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
constexpr double kGK_wg[7] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                              0.417959183673469, 0.381830050505119, 0.279705391489277,
                              0.129484966168870};

template <class F>
double adaptive_gk(const F& f, double a, double b, double rel_tol, int max_depth) {
    struct Seg {
        double a, b, value, err;
        int depth;
    };
    auto eval = [&](double lo, double hi) -> std::pair<double, double> {
        double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double k = 0.0, g = 0.0;
        for (int i = 0; i < 15; ++i) {
            double fx = f(mid + half * kGK_nodes[i]);
            k += kGK_wk[i] * fx;
            if (i % 2 == 1) g += kGK_wg[i / 2] * fx;
        }
        return {k * half, std::fabs(k - g) * half};
    };
    std::vector<Seg> stack;
    auto [v0, e0] = eval(a, b);
    stack.push_back({a, b, v0, e0, 0});
    double total = v0, total_err = e0;
    double scale = std::max(std::fabs(total), 1e-300);
    int guard = 0;
    while (total_err > rel_tol * scale && ++guard < 20000) {
        // split the worst segment
        std::size_t worst = 0;
        for (std::size_t s = 1; s < stack.size(); ++s)
            if (stack[s].err > stack[worst].err) worst = s;
        Seg seg = stack[worst];
        if (seg.depth >= max_depth) break;
        stack.erase(stack.begin() + static_cast<std::ptrdiff_t>(worst));
        double mid = 0.5 * (seg.a + seg.b);
        auto [v1, e1] = eval(seg.a, mid);
        auto [v2, e2] = eval(mid, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.err;
        stack.push_back({seg.a, mid, v1, e1, seg.depth + 1});
        stack.push_back({mid, seg.b, v2, e2, seg.depth + 1});
        scale = std::max(std::fabs(total), 1e-300);
    }
    return total;
}

// Legendre nodes/weights on [0,1] by Newton iteration
void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[i] = 0.5 * (1.0 - x); // descending roots -> ascending on [0,1]
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

} // namespace

double dtpp_pcf_theory(double kappa, double sigma, double r, const QuadConfig& quad) {
    if (!(kappa > 0) || !(sigma > 0))
        throw error(errc::invalid_config, "dtpp_pcf_theory: parameters must be positive");
    double P = std::sqrt(kappa / kPi);
    auto f = [&](double rho) {
        return conv_spectral_factor(P, sigma, rho) * std::cyl_bessel_j(0.0, 2.0 * kPi * rho * r) *
               rho;
    };
    double conv = 2.0 * kPi * adaptive_gk(f, 0.0, 2.0 * P, quad.rel_tol, quad.max_depth);
    if (!std::isfinite(conv))
        throw error(errc::numerical_failure, "dtpp_pcf_theory: quadrature failed");
    return 1.0 + gauss_self_convolution(sigma, r) / kappa - conv / (kappa * kappa);
}

std::vector<double> dtpp_pcf_curve(double kappa, double sigma, const std::vector<double>& r) {
    if (!(kappa > 0) || !(sigma > 0))
        throw error(errc::invalid_config, "dtpp_pcf_curve: parameters must be positive");
    static thread_local std::vector<double> nodes, weights;
    constexpr std::size_t kNodes = 96;
    if (nodes.size() != kNodes) gauss_legendre(kNodes, nodes, weights);
    double P = std::sqrt(kappa / kPi);
    double span = 2.0 * P;
    std::vector<double> factor(kNodes);
    for (std::size_t i = 0; i < kNodes; ++i) {
        double rho = span * nodes[i];
        factor[i] = weights[i] * span * conv_spectral_factor(P, sigma, rho) * rho;
    }
    std::vector<double> out(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) {
        double conv = 0.0;
        for (std::size_t i = 0; i < kNodes; ++i)
            conv += factor[i] * std::cyl_bessel_j(0.0, 2.0 * kPi * span * nodes[i] * r[j]);
        conv *= 2.0 * kPi;
        out[j] = 1.0 + gauss_self_convolution(sigma, r[j]) / kappa - conv / (kappa * kappa);
    }
    return out;
}

namespace {

// discretized contrast: trapezoid over the grid restricted to [r_min, r_max]
struct ContrastObjective {
    const SummaryFunction1D& t_hat;
    ContrastFamily family;
    ContrastConfig cfg;
    std::vector<double> weights;
    std::vector<double> t_hat_q;
    std::vector<double> r_used;
    mutable int evals = 0;

    ContrastObjective(const SummaryFunction1D& th, ContrastFamily fam, const ContrastConfig& c)
        : t_hat(th), family(fam), cfg(c) {
        double r_hi = cfg.r_max > 0 ? cfg.r_max : th.args.back();
        for (std::size_t i = 0; i < th.args.size(); ++i) {
            if (th.args[i] < cfg.r_min || th.args[i] > r_hi) continue;
            r_used.push_back(th.args[i]);
            t_hat_q.push_back(std::pow(std::max(th.values[i], 0.0), cfg.q));
        }
        if (r_used.size() < 3)
            throw error(errc::invalid_config, "min_contrast: too few grid points in range");
        weights.assign(r_used.size(), 0.0);
        for (std::size_t i = 0; i + 1 < r_used.size(); ++i) {
            double hseg = 0.5 * (r_used[i + 1] - r_used[i]);
            weights[i] += hseg;
            weights[i + 1] += hseg;
        }
    }

    double operator()(double kappa, double sigma) const {
        ++evals;
        double acc = 0.0;
        if (family == ContrastFamily::thomas_K) {
            for (std::size_t i = 0; i < r_used.size(); ++i) {
                double tq = std::pow(thomas_k_theory(kappa, sigma, r_used[i]), cfg.q);
                acc += weights[i] * std::pow(std::fabs(tq - t_hat_q[i]), cfg.p);
            }
        } else {
            std::vector<double> curve = dtpp_pcf_curve(kappa, sigma, r_used);
            for (std::size_t i = 0; i < r_used.size(); ++i) {
                double tq = std::pow(std::max(curve[i], 0.0), cfg.q);
                acc += weights[i] * std::pow(std::fabs(tq - t_hat_q[i]), cfg.p);
            }
        }
        return acc;
    }
};

// bounded Nelder-Mead in 2D (log-parameter space, +inf outside the box)
struct NmResult {
    double x[2];
    double value = std::numeric_limits<double>::infinity();
};

template <class F>
NmResult nelder_mead_2d(const F& f, const double start[2], const double lo[2], const double hi[2],
                        int max_iter, double tol) {
    auto eval = [&](const double* x) {
        if (x[0] < lo[0] || x[0] > hi[0] || x[1] < lo[1] || x[1] > hi[1])
            return std::numeric_limits<double>::infinity();
        return f(x);
    };
    double pts[3][2] = {{start[0], start[1]},
                        {std::min(start[0] + 0.35, hi[0]), start[1]},
                        {start[0], std::min(start[1] + 0.35, hi[1])}};
    double val[3];
    for (int i = 0; i < 3; ++i) val[i] = eval(pts[i]);
    for (int it = 0; it < max_iter; ++it) {
        int order[3] = {0, 1, 2};
        std::sort(order, order + 3, [&](int a, int b) { return val[a] < val[b]; });
        int b = order[0], m = order[1], w = order[2];
        double spread = std::max(std::fabs(pts[b][0] - pts[w][0]), std::fabs(pts[b][1] - pts[w][1]));
        if (spread < tol && std::isfinite(val[w])) break;
        double cen[2] = {0.5 * (pts[b][0] + pts[m][0]), 0.5 * (pts[b][1] + pts[m][1])};
        double refl[2] = {2.0 * cen[0] - pts[w][0], 2.0 * cen[1] - pts[w][1]};
        double fr = eval(refl);
        if (fr < val[b]) {
            double exp2[2] = {cen[0] + 2.0 * (refl[0] - cen[0]), cen[1] + 2.0 * (refl[1] - cen[1])};
            double fe = eval(exp2);
            if (fe < fr) {
                pts[w][0] = exp2[0];
                pts[w][1] = exp2[1];
                val[w] = fe;
            } else {
                pts[w][0] = refl[0];
                pts[w][1] = refl[1];
                val[w] = fr;
            }
        } else if (fr < val[m]) {
            pts[w][0] = refl[0];
            pts[w][1] = refl[1];
            val[w] = fr;
        } else {
            double con[2] = {cen[0] + 0.5 * (pts[w][0] - cen[0]), cen[1] + 0.5 * (pts[w][1] - cen[1])};
            double fc = eval(con);
            if (fc < val[w]) {
                pts[w][0] = con[0];
                pts[w][1] = con[1];
                val[w] = fc;
            } else { // shrink toward best
                for (int i = 0; i < 3; ++i) {
                    if (i == b) continue;
                    pts[i][0] = pts[b][0] + 0.5 * (pts[i][0] - pts[b][0]);
                    pts[i][1] = pts[b][1] + 0.5 * (pts[i][1] - pts[b][1]);
                    val[i] = eval(pts[i]);
                }
            }
        }
    }
    NmResult out;
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (val[i] < val[best]) best = i;
    out.x[0] = pts[best][0];
    out.x[1] = pts[best][1];
    out.value = val[best];
    return out;
}

// first 8 points of a 2D Sobol-style low-discrepancy sequence
constexpr double kStarts[8][2] = {{0.5, 0.5},     {0.75, 0.25},    {0.25, 0.75},
                                  {0.375, 0.375}, {0.875, 0.875},  {0.625, 0.125},
                                  {0.125, 0.625}, {0.1875, 0.3125}};

} // namespace

MinContrastResult min_contrast_fit(const SummaryFunction1D& T_hat, ContrastFamily family,
                                   const ContrastConfig& cfg, const ParamBounds& bounds,
                                   double lambda_hat) {
    if (!(lambda_hat > 0))
        throw error(errc::invalid_config, "min_contrast: lambda_hat must be positive");
    ContrastObjective obj(T_hat, family, cfg);
    const double lo[2] = {std::log(bounds.kappa_lo), std::log(bounds.sigma_lo)};
    const double hi[2] = {std::log(bounds.kappa_hi), std::log(bounds.sigma_hi)};
    auto f = [&](const double* x) { return obj(std::exp(x[0]), std::exp(x[1])); };

    NmResult best;
    for (int s = 0; s < 8; ++s) {
        double start[2] = {lo[0] + kStarts[s][0] * (hi[0] - lo[0]),
                           lo[1] + kStarts[s][1] * (hi[1] - lo[1])};
        NmResult r = nelder_mead_2d(f, start, lo, hi, 400, 1e-9);
        if (r.value < best.value) best = r;
    }
    if (!std::isfinite(best.value))
        throw error(errc::numerical_failure, "min_contrast: objective not finite anywhere");

    MinContrastResult out;
    out.kappa = std::exp(best.x[0]);
    out.sigma = std::exp(best.x[1]);
    out.alpha_a = lambda_hat / out.kappa;
    out.contrast = best.value;
    out.n_eval = obj.evals;
    double tol_b = 1e-4;
    out.at_bound = best.x[0] < lo[0] + tol_b || best.x[0] > hi[0] - tol_b ||
                   best.x[1] < lo[1] + tol_b || best.x[1] > hi[1] - tol_b;
    return out;
}

// ---------------------------------------------------------------------------
// maximum pseudo-likelihood
// ---------------------------------------------------------------------------

namespace {

// neighbour cache shared across theta cells: per site, all sites within the
// largest planar reach the grid can request
struct PairCache {
    std::vector<std::size_t> start;
    std::vector<std::uint32_t> index;
    std::vector<double> dist;
    std::vector<double> zval; // z of the neighbour, aligned with index

    PairCache(const std::vector<Vec2>& xy, const std::vector<double>& z, double reach) {
        const std::size_t n = xy.size();
        std::vector<std::vector<std::uint32_t>> adj(n);
        std::vector<std::vector<double>> dst(n);
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double d = dist2d(xy[i], xy[j]);
                if (d <= reach) {
                    adj[i].push_back(static_cast<std::uint32_t>(j));
                    dst[i].push_back(d);
                    adj[j].push_back(static_cast<std::uint32_t>(i));
                    dst[j].push_back(d);
                }
            }
        start.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) start[i + 1] = start[i] + adj[i].size();
        index.resize(start[n]);
        dist.resize(start[n]);
        zval.resize(start[n]);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < adj[i].size(); ++k) {
                index[start[i] + k] = adj[i][k];
                dist[start[i] + k] = dst[i][k];
                zval[start[i] + k] = z[adj[i][k]];
            }
        }
    }
};

struct SiteData {
    int s1 = 0, s2 = 0;
    NormalizerPieces pieces;
};

// per-site counts and normalizer pieces for one theta cell
bool build_site_data(const PairCache& cache, const std::vector<double>& z, const Interval& wz,
                     const MrfModelSpec& spec, std::vector<SiteData>& sites) {
    const std::size_t n = z.size();
    sites.resize(n);
    bool any_s1 = false, any_s2 = false;
    for (std::size_t i = 0; i < n; ++i) {
        const double* d = cache.dist.data() + cache.start[i];
        const double* zs = cache.zval.data() + cache.start[i];
        std::size_t cnt = cache.start[i + 1] - cache.start[i];
        auto [s1, s2] = site_counts_from(spec, z[i], d, zs, cnt);
        sites[i].s1 = s1;
        sites[i].s2 = s2;
        if (s1 > 0) any_s1 = true;
        if (s2 > 0) any_s2 = true;
        sites[i].pieces = build_normalizer_pieces(spec, wz, d, zs, cnt);
        if (sites[i].pieces.len.empty()) return false; // degenerate normalizer
    }
    if (spec.has_region1() && !any_s1) return false; // MPLE does not exist
    if (spec.has_region2() && !any_s2) return false;
    return true;
}

struct LpEval {
    double lp = kNegInf;
    double grad[2] = {0, 0};
    double hess[3] = {0, 0, 0}; // [g11, g12, g22]
};

// LP and derivatives in (log gamma1, log gamma2); long double power tables keep
// the per-piece weights finite across the admissible gamma box
LpEval evaluate_lp(const std::vector<SiteData>& sites, double lg1, double lg2, bool two_par) {
    int kmax = 0, lmax = 0;
    for (const auto& s : sites) {
        for (int k : s.pieces.k) kmax = std::max(kmax, k);
        for (int l : s.pieces.l) lmax = std::max(lmax, l);
    }
    std::vector<long double> pw1(static_cast<std::size_t>(kmax) + 1),
        pw2(static_cast<std::size_t>(lmax) + 1);
    const long double u = std::exp(static_cast<long double>(lg1));
    const long double v = std::exp(static_cast<long double>(lg2));
    pw1[0] = 1.0L;
    for (int k = 1; k <= kmax; ++k) pw1[k] = pw1[k - 1] * u;
    pw2[0] = 1.0L;
    for (int l = 1; l <= lmax; ++l) pw2[l] = pw2[l - 1] * v;

    LpEval out;
    out.lp = 0.0;
    for (const auto& s : sites) {
        long double s0 = 0, sk = 0, sl = 0, skk = 0, skl = 0, sll = 0;
        const std::size_t np = s.pieces.len.size();
        for (std::size_t p = 0; p < np; ++p) {
            long double w = pw1[s.pieces.k[p]] * pw2[s.pieces.l[p]] *
                            static_cast<long double>(s.pieces.len[p]);
            long double k = s.pieces.k[p], l = s.pieces.l[p];
            s0 += w;
            sk += w * k;
            skk += w * k * k;
            if (two_par) {
                sl += w * l;
                skl += w * k * l;
                sll += w * l * l;
            }
        }
        double ek = static_cast<double>(sk / s0);
        out.lp += s.s1 * lg1 + s.s2 * lg2 - static_cast<double>(std::log(s0));
        out.grad[0] += s.s1 - ek;
        out.hess[0] -= static_cast<double>(skk / s0) - ek * ek;
        if (two_par) {
            double el = static_cast<double>(sl / s0);
            out.grad[1] += s.s2 - el;
            out.hess[1] -= static_cast<double>(skl / s0) - ek * el;
            out.hess[2] -= static_cast<double>(sll / s0) - el * el;
        }
    }
    return out;
}

struct NewtonOut {
    double lg1 = 0, lg2 = 0, lp = kNegInf;
    int iterations = 0;
    bool converged = false;
};

// safeguarded Newton ascent on the strictly concave LP
NewtonOut newton_gamma(const std::vector<SiteData>& sites, bool two_par, double lg_lo,
                       double lg_hi, double tol) {
    NewtonOut st;
    LpEval cur = evaluate_lp(sites, st.lg1, st.lg2, two_par);
    st.lp = cur.lp;
    const double n_scale = static_cast<double>(sites.size()) + 1.0;
    for (int it = 0; it < 100; ++it) {
        ++st.iterations;
        double step1 = 0, step2 = 0;
        if (!two_par) {
            double hess = cur.hess[0];
            step1 = hess < -1e-14 ? -cur.grad[0] / hess : (cur.grad[0] > 0 ? 1.0 : -1.0);
        } else {
            double det = cur.hess[0] * cur.hess[2] - cur.hess[1] * cur.hess[1];
            if (det > 1e-14) {
                step1 = -(cur.hess[2] * cur.grad[0] - cur.hess[1] * cur.grad[1]) / det;
                step2 = -(-cur.hess[1] * cur.grad[0] + cur.hess[0] * cur.grad[1]) / det;
            } else { // near-flat direction: gradient ascent
                step1 = cur.grad[0];
                step2 = cur.grad[1];
            }
        }
        double norm = std::max(std::fabs(step1), std::fabs(step2));
        if (norm > 2.0) {
            step1 *= 2.0 / norm;
            step2 *= 2.0 / norm;
        }
        double scale = 1.0;
        LpEval nxt;
        double n1 = st.lg1, n2 = st.lg2;
        for (int bt = 0; bt < 40; ++bt) {
            n1 = std::clamp(st.lg1 + scale * step1, lg_lo, lg_hi);
            n2 = two_par ? std::clamp(st.lg2 + scale * step2, lg_lo, lg_hi) : 0.0;
            nxt = evaluate_lp(sites, n1, n2, two_par);
            if (nxt.lp >= st.lp - 1e-13) break;
            scale *= 0.5;
        }
        double moved = std::max(std::fabs(n1 - st.lg1), std::fabs(n2 - st.lg2));
        st.lg1 = n1;
        st.lg2 = n2;
        st.lp = nxt.lp;
        cur = nxt;
        double gnorm = std::max(std::fabs(cur.grad[0]), two_par ? std::fabs(cur.grad[1]) : 0.0);
        if (gnorm < tol * n_scale || moved < 1e-13) {
            st.converged = true;
            break;
        }
    }
    return st;
}

std::vector<double> default_r_grid(double h, double step, double r_top) {
    std::vector<double> g;
    for (double r = h + step; r <= r_top + 1e-9; r += step) g.push_back(r);
    return g;
}
std::vector<double> default_t_grid(double lo, double step, double t_top) {
    std::vector<double> g;
    for (double t = lo; t <= t_top + 1e-9; t += step) g.push_back(t);
    return g;
}

struct Cell {
    double r1 = 0, t1 = 0, r2 = 0, t2 = 0;
};

struct CellResult {
    bool feasible = false;
    double lp = kNegInf;
    double lg1 = 0, lg2 = 0;
    int iterations = 0;
};

CellResult evaluate_cell(const PairCache& cache, const std::vector<double>& z, const Interval& wz,
                         int model_id, double h, const Cell& c, double lg_lo, double lg_hi,
                         double tol) {
    CellResult out;
    MrfModelSpec spec;
    spec.model_id = model_id;
    spec.h = h;
    spec.r1 = c.r1;
    spec.t1 = c.t1;
    spec.r2 = c.r2;
    spec.t2 = c.t2;
    try {
        spec.validate(wz.length());
    } catch (const error&) {
        return out; // cell violates the model constraints
    }
    std::vector<SiteData> sites;
    if (!build_site_data(cache, z, wz, spec, sites)) return out;
    NewtonOut nt = newton_gamma(sites, model_id == 5, lg_lo, lg_hi, tol);
    out.feasible = true;
    out.lp = nt.lp;
    out.lg1 = nt.lg1;
    out.lg2 = nt.lg2;
    out.iterations = nt.iterations;
    return out;
}

} // namespace

double log_pseudo_likelihood(const ConditionalState& state) {
    double lp = 0.0;
    const double lg1 = std::log(state.spec().gamma1);
    const double lg2 = std::log(state.spec().gamma2);
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (!state.hard_core_ok(i, state.z(i))) return kNegInf;
        auto [s1, s2] = state.site_counts(i, state.z(i));
        NormalizerPieces pieces = conditional_pieces(state, i);
        if (pieces.len.empty())
            throw error(errc::degenerate_conditional, "log_pseudo_likelihood: degenerate site");
        lp += s1 * lg1 + s2 * lg2 - lognorm_from_pieces(pieces, lg1, lg2);
    }
    return lp;
}

void lp_derivatives(const ConditionalState& state, double grad[2], double hess[3]) {
    std::vector<SiteData> sites(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) {
        auto [s1, s2] = state.site_counts(i, state.z(i));
        sites[i].s1 = s1;
        sites[i].s2 = s2;
        sites[i].pieces = conditional_pieces(state, i);
    }
    LpEval ev = evaluate_lp(sites, std::log(state.spec().gamma1), std::log(state.spec().gamma2),
                            state.spec().model_id == 5);
    grad[0] = ev.grad[0];
    grad[1] = ev.grad[1];
    hess[0] = ev.hess[0];
    hess[1] = ev.hess[1];
    hess[2] = ev.hess[2];
}

MpleResult mple_fit_fixed_theta(const std::vector<Vec2>& xy, const std::vector<double>& z,
                                const Interval& wz, const MrfModelSpec& theta,
                                const MpleFitConfig& cfg) {
    if (xy.size() != z.size() || xy.size() < 2)
        throw error(errc::insufficient_points, "mple_fit: need matching xy/z with >= 2 points");
    double h_hat = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < xy.size(); ++i)
        for (std::size_t j = i + 1; j < xy.size(); ++j) {
            double dx = xy[i].x - xy[j].x, dy = xy[i].y - xy[j].y, dz = z[i] - z[j];
            h_hat = std::min(h_hat, std::sqrt(dx * dx + dy * dy + dz * dz));
        }
    MrfModelSpec probe = theta;
    probe.h = h_hat;
    probe.gamma1 = 1.0;
    probe.gamma2 = probe.model_id == 5 ? 1.0 : 1.0;
    double reach = std::max(h_hat, std::max(probe.r1, probe.r2));
    PairCache cache(xy, z, reach);
    Cell cell{theta.r1, theta.t1, theta.r2, theta.t2};
    CellResult res = evaluate_cell(cache, z, wz, theta.model_id, h_hat, cell, cfg.lg_lo, cfg.lg_hi,
                                   cfg.tol);
    MpleResult out;
    out.spec = probe;
    out.spec.gamma1 = std::exp(res.lg1);
    out.spec.gamma2 = theta.model_id == 5 ? std::exp(res.lg2) : 1.0;
    out.lp = res.lp;
    out.feasible = res.feasible;
    out.cells_evaluated = 1;
    out.newton_iterations = res.iterations;
    if (!res.feasible)
        throw error(errc::infeasible_model, "mple_fit_fixed_theta: MPLE does not exist here");
    return out;
}

MpleResult mple_fit(const std::vector<Vec2>& xy, const std::vector<double>& z, const Interval& wz,
                    int model_id, const MpleFitConfig& cfg) {
    if (model_id < 1 || model_id > 5)
        throw error(errc::invalid_config, "mple_fit: model id must be 1..5");
    if (xy.size() != z.size() || xy.size() < 2)
        throw error(errc::insufficient_points, "mple_fit: need matching xy/z with >= 2 points");

    // h-hat: exact minimum pairwise distance in the data
    double h_hat = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < xy.size(); ++i)
        for (std::size_t j = i + 1; j < xy.size(); ++j) {
            double dx = xy[i].x - xy[j].x, dy = xy[i].y - xy[j].y, dz = z[i] - z[j];
            double d = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (d < h_hat) h_hat = d;
        }

    MpleResult out;
    out.spec.model_id = model_id;
    out.spec.h = h_hat;

    if (model_id == 1) {
        ConditionalState state(xy, z, wz, out.spec);
        out.lp = log_pseudo_likelihood(state);
        out.feasible = true;
        out.cells_evaluated = 1;
        return out;
    }

    const double r_top = 30.0, t_top = 50.0;
    std::vector<double> r_grid = cfg.r_grid.empty() ? default_r_grid(h_hat, 0.25, r_top) : cfg.r_grid;
    std::vector<double> t_grid = cfg.t_grid.empty() ? default_t_grid(0.5, 0.5, t_top) : cfg.t_grid;
    if (r_grid.empty()) throw error(errc::invalid_config, "mple_fit: empty r grid");

    double reach = std::max(h_hat, *std::max_element(r_grid.begin(), r_grid.end()));
    PairCache cache(xy, z, reach);

    auto run_cells = [&](const std::vector<Cell>& cells, MpleResult& res) {
        std::vector<CellResult> results(cells.size());
        unsigned threads = cfg.threads == 0 ? default_threads() : cfg.threads;
        parallel_for(cells.size(), threads, [&](std::size_t c) {
            results[c] =
                evaluate_cell(cache, z, wz, model_id, h_hat, cells[c], cfg.lg_lo, cfg.lg_hi, cfg.tol);
        });
        for (std::size_t c = 0; c < cells.size(); ++c) {
            ++res.cells_evaluated;
            if (!results[c].feasible) {
                ++res.cells_infeasible;
                continue;
            }
            res.newton_iterations += results[c].iterations;
            bool better = false;
            if (!res.feasible || results[c].lp > res.lp + 1e-12) {
                better = true;
            } else if (std::fabs(results[c].lp - res.lp) <= 1e-12) {
                // lexicographic tie-break on theta
                const Cell& a = cells[c];
                Cell b{res.spec.r1, res.spec.t1, res.spec.r2, res.spec.t2};
                better = std::tie(a.r1, a.t1, a.r2, a.t2) < std::tie(b.r1, b.t1, b.r2, b.t2);
            }
            if (better) {
                res.feasible = true;
                res.lp = results[c].lp;
                res.spec.r1 = cells[c].r1;
                res.spec.t1 = cells[c].t1;
                res.spec.r2 = cells[c].r2;
                res.spec.t2 = cells[c].t2;
                res.spec.gamma1 = std::exp(results[c].lg1);
                res.spec.gamma2 = model_id == 5 ? std::exp(results[c].lg2) : 1.0;
            }
        }
    };

    std::vector<Cell> cells;
    if (model_id == 2) {
        for (double r : r_grid)
            if (r > h_hat) cells.push_back({r, 0, 0, 0});
    } else if (model_id == 3 || model_id == 4) {
        for (double r : r_grid)
            for (double t : t_grid) cells.push_back({r, t, 0, 0});
    } else {
        // model 5: a full product at the fine default steps is astronomically
        // large, so the default search is coarse-to-fine unless explicit grids
        // were supplied
        bool custom = !cfg.r_grid.empty() || !cfg.t_grid.empty();
        std::vector<double> rc = custom ? r_grid : default_r_grid(h_hat, 2.5, r_top);
        std::vector<double> tc = custom ? t_grid : default_t_grid(2.0, 4.0, t_top);
        for (double r1 : rc)
            for (double r2 : rc) {
                if (r2 > r1) continue;
                for (double t1 : tc)
                    for (double t2 : tc) {
                        if (t2 <= t1) continue;
                        cells.push_back({r1, t1, r2, t2});
                    }
            }
        run_cells(cells, out);
        if (!custom && cfg.refine_model5 && out.feasible) {
            const double steps[2][2] = {{0.75, 1.0}, {0.25, 0.5}}; // r-step, t-step per round
            const double spans[2][2] = {{2.5, 4.0}, {0.75, 1.0}};
            for (int round = 0; round < 2; ++round) {
                std::vector<Cell> refine;
                auto around = [&](double centre, double span, double step, double lo) {
                    std::vector<double> v;
                    for (double x = centre - span; x <= centre + span + 1e-9; x += step)
                        if (x > lo) v.push_back(x);
                    return v;
                };
                auto r1s = around(out.spec.r1, spans[round][0], steps[round][0], h_hat);
                auto r2s = around(out.spec.r2, spans[round][0], steps[round][0], 0.0);
                auto t1s = around(out.spec.t1, spans[round][1], steps[round][1], 0.0);
                auto t2s = around(out.spec.t2, spans[round][1], steps[round][1], 0.0);
                for (double r1 : r1s)
                    for (double r2 : r2s) {
                        if (r2 > r1) continue;
                        for (double t1 : t1s)
                            for (double t2 : t2s) {
                                if (t2 <= t1) continue;
                                refine.push_back({r1, t1, r2, t2});
                            }
                    }
                run_cells(refine, out);
            }
        }
        if (!out.feasible)
            throw error(errc::infeasible_model,
                        "mple_fit: no grid cell admits an MPLE (s1 or s2 identically zero)");
        return out;
    }

    run_cells(cells, out);
    if (!out.feasible)
        throw error(errc::infeasible_model,
                    "mple_fit: no grid cell admits an MPLE (s1 identically zero)");
    return out;
}

} // namespace colpp
