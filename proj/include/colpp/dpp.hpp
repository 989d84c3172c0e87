#ifndef COLPP_DPP_HPP
#define COLPP_DPP_HPP

#include <cstdint>
#include <vector>

#include "colpp/geometry.hpp"
#include "colpp/rng.hpp"

namespace colpp {

// Spectral sampler configuration. The simulation rectangle is the target
// window extended by `extension_margin` per side (negative = automatic,
// 2 / sqrt(kappa)); `truncation` caps the Fourier index per axis (<= 0 =
// automatic, which always covers the full spectral disc).
struct DppSpectralConfig {
    double extension_margin = -1.0;
    int truncation = 0;

    double margin_for(double kappa) const;
};

// Planar DPP with the jinc-like kernel
//     C(u, v) = sqrt(kappa/pi) * J1(2 sqrt(pi kappa) ||u-v||) / ||u-v||,
// whose spectral density is the indicator of the disc of radius sqrt(kappa/pi)
// in frequency space. Simulation uses the Fourier eigenbasis on a periodic
// rectangle: the binary spectrum keeps exactly the modes inside the disc, and
// the resulting projection process is drawn by sequential conditional sampling
// with a growing Cholesky factor of the kernel matrix.
class JincDppSampler {
public:
    JincDppSampler(double kappa, const Rect& target, const DppSpectralConfig& cfg = {});

    const Rect& rectangle() const { return rect_; }
    std::size_t mode_count() const { return m_; }
    double realized_intensity() const { return static_cast<double>(m_) / rect_.area(); }
    double kappa() const { return kappa_; }

    // periodic kernel on the simulation rectangle, as a function of displacement
    double kernel(double dx, double dy) const;

    // one realization: exactly mode_count() points on the rectangle
    std::vector<Vec2> sample(RngStream& rng) const;

private:
    double kappa_;
    Rect rect_;
    double l1_, l2_;
    int k1_max_;
    std::vector<int> m_of_k1_; // per |k1| max k2 index
    std::size_t m_;
    double c0_; // kernel at zero displacement = m / |R|
};

// exact planar kernel C(r) of the jinc DPP; C(0) = kappa
double jinc_kernel(double kappa, double r);

} // namespace colpp

#endif
