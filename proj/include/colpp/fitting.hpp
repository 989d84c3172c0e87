#ifndef COLPP_FITTING_HPP
#define COLPP_FITTING_HPP

#include <vector>

#include "colpp/mrf.hpp"
#include "colpp/summaries.hpp"

namespace colpp {

// Closed-form planar K of the Thomas process.
double thomas_k_theory(double kappa, double sigma, double r);

// Pair correlation of the Thomas process.
double thomas_pcf_theory(double kappa, double sigma, double r);

// Gaussian self-convolution h_sigma(r) = exp(-r^2/(4 sigma^2)) / (4 pi sigma^2).
double gauss_self_convolution(double sigma, double r);

// Pair correlation of the jinc-like DPP: g(r) = 1 - (C(r)/kappa)^2.
double jinc_dpp_pcf_theory(double kappa, double r);

struct QuadConfig {
    double rel_tol = 1e-8;
    int max_depth = 14;
};

// Pair correlation of the determinantal Thomas process,
//   g(r) = 1 + h_sigma(r)/kappa - (h_sigma * C^2)(r) / kappa^2,
// with the planar convolution evaluated by a radial Hankel-type quadrature
// (the spectral factor of C^2 is the disc autocorrelation, so the transform
// integral has compact support).
double dtpp_pcf_theory(double kappa, double sigma, double r, const QuadConfig& quad = {});

// fast path for whole curves: one fixed-node tabulation of the spectral factor
std::vector<double> dtpp_pcf_curve(double kappa, double sigma, const std::vector<double>& r);

enum class ContrastFamily { thomas_K, dtpp_pcf };

struct ContrastConfig {
    double q = 0.25;
    double p = 2.0;
    double r_min = 0.0;
    double r_max = -1.0; // <0: the grid's last argument
    std::size_t grid_n = 128; // default estimation grid size used by callers
};

struct ParamBounds {
    double kappa_lo = 1e-6, kappa_hi = 1.0;
    double sigma_lo = 0.05, sigma_hi = 100.0;
};

struct MinContrastResult {
    double kappa = 0, sigma = 0, alpha_a = 0;
    double contrast = 0;
    bool at_bound = false;
    int n_eval = 0;
};

// Minimum contrast over (kappa, sigma): discretized integral of
// |T(theta,r)^q - T_hat(r)^q|^p on T_hat's grid, multi-start Nelder-Mead in
// log-parameters. alpha_a recovered from lambda_hat / kappa_hat.
MinContrastResult min_contrast_fit(const SummaryFunction1D& T_hat, ContrastFamily family,
                                   const ContrastConfig& cfg, const ParamBounds& bounds,
                                   double lambda_hat);

struct MpleFitConfig {
    // theta grid resolutions; empty = defaults (r: h..30 step 0.25, t: 0.5..50
    // step 0.5; model 5 runs a coarse product pass plus local refinement)
    std::vector<double> r_grid;
    std::vector<double> t_grid;
    double lg_lo = -9.21, lg_hi = 9.21; // bounds for log gamma
    double tol = 1e-10;
    bool refine_model5 = true;
    unsigned threads = 0;
};

struct MpleResult {
    MrfModelSpec spec;
    double lp = 0;
    bool feasible = false;
    std::size_t cells_evaluated = 0;
    std::size_t cells_infeasible = 0;
    int newton_iterations = 0;
};

// Maximum pseudo-likelihood fit of a conditional z-model: h-hat is the exact
// minimum pairwise distance, theta by grid search, gammas by safeguarded
// Newton on the strictly concave log pseudo-likelihood.
MpleResult mple_fit(const std::vector<Vec2>& xy, const std::vector<double>& z, const Interval& wz,
                    int model_id, const MpleFitConfig& cfg = {});

// Newton on the gammas at a single fixed theta cell (h-hat still from the
// data); used by recovery studies with known interaction geometry.
MpleResult mple_fit_fixed_theta(const std::vector<Vec2>& xy, const std::vector<double>& z,
                                const Interval& wz, const MrfModelSpec& theta,
                                const MpleFitConfig& cfg = {});

// log pseudo-likelihood of a fully specified model on the data
double log_pseudo_likelihood(const ConditionalState& state);

// gradient and Hessian of LP in (log gamma1, log gamma2) at the state's spec
void lp_derivatives(const ConditionalState& state, double grad[2], double hess[3]);

} // namespace colpp

#endif
