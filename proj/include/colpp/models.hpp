#ifndef COLPP_MODELS_HPP
#define COLPP_MODELS_HPP

#include "colpp/dpp.hpp"
#include "colpp/point_pattern.hpp"
#include "colpp/rng.hpp"

namespace colpp {

enum class CentreKind { poisson, jinc_dpp };

// Projected-cluster model: centres with intensity kappa, Poisson(alpha_a)
// offspring per centre, isotropic Gaussian displacements with sd sigma.
struct ClusterModelParams {
    double kappa = 0;
    double alpha_a = 0;
    double sigma = 0;
    CentreKind centre_kind = CentreKind::poisson;

    void validate() const {
        if (!(kappa > 0) || !(alpha_a > 0) || !(sigma > 0))
            throw error(errc::invalid_config,
                        "cluster parameters kappa, alpha_a, sigma must be positive");
    }
    double intensity() const { return kappa * alpha_a; }
};

// Parent-process extension margin that keeps boundary effects negligible.
inline double cluster_margin(double sigma) { return 6.0 * sigma; }

PointPattern simulate_csr(const Window3& window, double lambda, RngStream& rng);
PointPattern simulate_csr_planar(const Rect& wxy, double lambda, RngStream& rng);

std::vector<double> simulate_binomial_z(std::size_t n, const Interval& wz, RngStream& rng);

PointPattern simulate_thomas(const Rect& wxy, const ClusterModelParams& params, RngStream& rng);
// explicit parent margin, used by the clip-consistency checks
PointPattern simulate_thomas_with_margin(const Rect& wxy, const ClusterModelParams& params,
                                         double margin, RngStream& rng);

PointPattern simulate_jinc_dpp(const Rect& wxy, double kappa, const DppSpectralConfig& cfg,
                               RngStream& rng);

PointPattern simulate_dtpp(const Rect& wxy, const ClusterModelParams& params,
                           const DppSpectralConfig& cfg, RngStream& rng);

// 3D line-cluster processes: planar cluster pattern plus independent uniform z.
PointPattern simulate_plcpp(const Window3& window, const ClusterModelParams& params,
                            RngStream& rng);
PointPattern simulate_dlcpp(const Window3& window, const ClusterModelParams& params,
                            const DppSpectralConfig& cfg, RngStream& rng);

// shared offspring step: Poisson(alpha_a) points per parent, Gaussian(sigma)
// displacements, clipped to the target rectangle
std::vector<Vec3> scatter_offspring(const std::vector<Vec2>& parents, const Rect& wxy,
                                    double alpha_a, double sigma, RngStream& rng);

PointPattern attach_uniform_z(const PointPattern& planar, const Window3& window, RngStream& rng);

} // namespace colpp

#endif
