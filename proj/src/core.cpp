#include "colpp/point_pattern.hpp"
#include "colpp/region.hpp"

#include <limits>
#include <numbers>

namespace colpp {

double pairwise_min_distance(const PointPattern& pattern) {
    const auto& pts = pattern.points();
    if (pts.size() < 2)
        throw error(errc::insufficient_points,
                    "pairwise_min_distance: need at least two points");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            double d = dist3d(pts[i], pts[j]);
            if (d < best) best = d;
        }
    }
    return best;
}

double InteractionRegion::volume() const {
    constexpr double pi = std::numbers::pi;
    switch (shape) {
    case RegionShape::ball:
        return 4.0 / 3.0 * pi * r1 * r1 * r1;
    case RegionShape::cylinder:
        return 2.0 * pi * r1 * r1 * t1;
    case RegionShape::cylinder_minus_double_cone:
        // cylinder minus the two cones of height t and base radius r
        return 2.0 * pi * r1 * r1 * t1 - 2.0 / 3.0 * pi * r1 * r1 * t1;
    case RegionShape::cylinder_shell:
        return 2.0 * pi * r2 * r2 * (t2 - t1);
    }
    return 0.0;
}

} // namespace colpp
