#include "colpp/models.hpp"

namespace colpp {

PointPattern simulate_csr(const Window3& window, double lambda, RngStream& rng) {
    window.validate();
    if (!(lambda > 0)) throw error(errc::invalid_config, "simulate_csr: lambda must be positive");
    long n = rng.poisson(lambda * window.volume());
    std::vector<Vec3> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) {
        p.x = rng.uniform(window.x.lo, window.x.hi);
        p.y = rng.uniform(window.y.lo, window.y.hi);
        p.z = rng.uniform(window.z.lo, window.z.hi);
    }
    return PointPattern::spatial(std::move(pts), window);
}

PointPattern simulate_csr_planar(const Rect& wxy, double lambda, RngStream& rng) {
    wxy.validate();
    if (!(lambda > 0)) throw error(errc::invalid_config, "simulate_csr: lambda must be positive");
    long n = rng.poisson(lambda * wxy.area());
    std::vector<Vec3> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) {
        p.x = rng.uniform(wxy.x.lo, wxy.x.hi);
        p.y = rng.uniform(wxy.y.lo, wxy.y.hi);
        p.z = 0.0;
    }
    return PointPattern::planar(std::move(pts), wxy);
}

std::vector<double> simulate_binomial_z(std::size_t n, const Interval& wz, RngStream& rng) {
    wz.validate("W_z");
    std::vector<double> z(n);
    for (auto& v : z) v = rng.uniform(wz.lo, wz.hi);
    return z;
}

std::vector<Vec3> scatter_offspring(const std::vector<Vec2>& parents, const Rect& wxy,
                                    double alpha_a, double sigma, RngStream& rng) {
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(parents.size() * alpha_a * 1.2) + 8);
    for (const auto& c : parents) {
        long k = rng.poisson(alpha_a);
        for (long o = 0; o < k; ++o) {
            double px = c.x + sigma * rng.normal();
            double py = c.y + sigma * rng.normal();
            if (wxy.contains(px, py)) pts.push_back(Vec3{px, py, 0.0});
        }
    }
    return pts;
}

PointPattern simulate_thomas_with_margin(const Rect& wxy, const ClusterModelParams& params,
                                         double margin, RngStream& rng) {
    wxy.validate();
    params.validate();
    Rect parent_rect = wxy.extended(margin);
    long n_parents = rng.poisson(params.kappa * parent_rect.area());
    std::vector<Vec2> parents(static_cast<std::size_t>(n_parents));
    for (auto& c : parents) {
        c.x = rng.uniform(parent_rect.x.lo, parent_rect.x.hi);
        c.y = rng.uniform(parent_rect.y.lo, parent_rect.y.hi);
    }
    return PointPattern::planar(scatter_offspring(parents, wxy, params.alpha_a, params.sigma, rng),
                                wxy);
}

PointPattern simulate_thomas(const Rect& wxy, const ClusterModelParams& params, RngStream& rng) {
    return simulate_thomas_with_margin(wxy, params, cluster_margin(params.sigma), rng);
}

PointPattern simulate_jinc_dpp(const Rect& wxy, double kappa, const DppSpectralConfig& cfg,
                               RngStream& rng) {
    JincDppSampler sampler(kappa, wxy, cfg);
    std::vector<Vec2> all = sampler.sample(rng);
    std::vector<Vec3> pts;
    pts.reserve(all.size());
    for (const auto& p : all)
        if (wxy.contains(p.x, p.y)) pts.push_back(Vec3{p.x, p.y, 0.0});
    return PointPattern::planar(std::move(pts), wxy);
}

PointPattern simulate_dtpp(const Rect& wxy, const ClusterModelParams& params,
                           const DppSpectralConfig& cfg, RngStream& rng) {
    wxy.validate();
    params.validate();
    Rect parent_rect = wxy.extended(cluster_margin(params.sigma));
    PointPattern parent_pattern = simulate_jinc_dpp(parent_rect, params.kappa, cfg, rng);
    std::vector<Vec2> parents = parent_pattern.xy_coords();
    return PointPattern::planar(scatter_offspring(parents, wxy, params.alpha_a, params.sigma, rng),
                                wxy);
}

PointPattern attach_uniform_z(const PointPattern& planar, const Window3& window, RngStream& rng) {
    std::vector<Vec3> pts = planar.points();
    for (auto& p : pts) p.z = rng.uniform(window.z.lo, window.z.hi);
    return PointPattern::spatial(std::move(pts), window);
}

PointPattern simulate_plcpp(const Window3& window, const ClusterModelParams& params,
                            RngStream& rng) {
    window.validate();
    PointPattern xy = simulate_thomas(window.face_xy(), params, rng);
    return attach_uniform_z(xy, window, rng);
}

PointPattern simulate_dlcpp(const Window3& window, const ClusterModelParams& params,
                            const DppSpectralConfig& cfg, RngStream& rng) {
    window.validate();
    PointPattern xy = simulate_dtpp(window.face_xy(), params, cfg, rng);
    return attach_uniform_z(xy, window, rng);
}

} // namespace colpp
