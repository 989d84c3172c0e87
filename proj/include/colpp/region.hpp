#ifndef COLPP_REGION_HPP
#define COLPP_REGION_HPP

#include <cmath>

#include "colpp/errors.hpp"

namespace colpp {

enum class RegionShape {
    ball,                       // b(r): ||d|| <= r
    cylinder,                   // c(r,t): ||dxy|| <= r, |dz| <= t
    cylinder_minus_double_cone, // c(r,t) \ d(r,t), hourglass cone pair
    cylinder_shell,             // c(r_out,t_out) \ c(r_in,t_in): ||dxy|| <= r_out, t_in < |dz| <= t_out
};

// Translation-invariant symmetric interaction region around a point. Membership
// depends only on the displacement, so u in B(v) iff v in B(u) for all shapes.
struct InteractionRegion {
    RegionShape shape = RegionShape::ball;
    double r1 = 0, t1 = 0; // primary radius / half-height (inner pair for the shell)
    double r2 = 0, t2 = 0; // outer pair, shell only

    static InteractionRegion ball(double r) {
        require_positive(r, "ball radius");
        return {RegionShape::ball, r, 0, 0, 0};
    }
    static InteractionRegion cylinder(double r, double t) {
        require_positive(r, "cylinder radius");
        require_positive(t, "cylinder half-height");
        return {RegionShape::cylinder, r, t, 0, 0};
    }
    static InteractionRegion cylinder_minus_double_cone(double r, double t) {
        require_positive(r, "region radius");
        require_positive(t, "region half-height");
        return {RegionShape::cylinder_minus_double_cone, r, t, 0, 0};
    }
    static InteractionRegion cylinder_shell(double r_in, double t_in, double r_out, double t_out) {
        require_positive(r_in, "inner radius");
        require_positive(t_in, "inner half-height");
        require_positive(r_out, "outer radius");
        require_positive(t_out, "outer half-height");
        if (!(t_out > t_in))
            throw error(errc::invalid_region, "cylinder_shell: outer half-height must exceed inner");
        return {RegionShape::cylinder_shell, r_in, t_in, r_out, t_out};
    }

    bool contains(double dx, double dy, double dz) const {
        double pl = std::hypot(dx, dy);
        double az = std::fabs(dz);
        switch (shape) {
        case RegionShape::ball:
            return pl * pl + dz * dz <= r1 * r1;
        case RegionShape::cylinder:
            return pl <= r1 && az <= t1;
        case RegionShape::cylinder_minus_double_cone:
            // double cone: apexes meet at the centre, bases of radius r at dz = +-t
            return pl <= r1 && az <= t1 && pl * t1 > r1 * az;
        case RegionShape::cylinder_shell:
            return pl <= r2 && az > t1 && az <= t2;
        }
        return false;
    }

    // largest planar displacement with nonempty z-section
    double planar_reach() const {
        return shape == RegionShape::cylinder_shell ? r2 : r1;
    }
    // largest |dz| with nonempty membership
    double z_reach() const {
        switch (shape) {
        case RegionShape::ball: return r1;
        case RegionShape::cylinder: return t1;
        case RegionShape::cylinder_minus_double_cone: return t1;
        case RegionShape::cylinder_shell: return t2;
        }
        return 0;
    }

    double volume() const; // analytic, used by the Monte Carlo cross-checks

private:
    static void require_positive(double v, const char* what) {
        if (!(v > 0.0))
            throw error(errc::invalid_region, std::string(what) + " must be positive");
    }
};

inline bool region_contains(const InteractionRegion& region, double dx, double dy, double dz) {
    return region.contains(dx, dy, dz);
}

} // namespace colpp

#endif
