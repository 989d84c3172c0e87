#ifndef COLPP_GEOMETRY_HPP
#define COLPP_GEOMETRY_HPP

#include <array>
#include <cmath>

#include "colpp/errors.hpp"

namespace colpp {

struct Vec2 {
    double x = 0, y = 0;
};

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

inline double dist2d(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}
inline double dist3d(const Vec3& a, const Vec3& b) {
    double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Closed real interval with strictly positive length.
struct Interval {
    double lo = 0, hi = 0;

    double length() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }

    void validate(const char* what = "interval") const {
        if (!(hi > lo))
            throw error(errc::invalid_config,
                        std::string(what) + ": interval must have positive length");
    }
};

// Axis-aligned rectangle in the xy-plane.
struct Rect {
    Interval x, y;

    double area() const { return x.length() * y.length(); }
    bool contains(double px, double py) const { return x.contains(px) && y.contains(py); }
    double shortest_side() const { return std::min(x.length(), y.length()); }

    Rect extended(double margin) const {
        return Rect{{x.lo - margin, x.hi + margin}, {y.lo - margin, y.hi + margin}};
    }
    void validate() const {
        x.validate("x");
        y.validate("y");
    }
};

// 3D box window, a product space: the planar face times the z interval.
struct Window3 {
    Interval x, y, z;

    double volume() const { return x.length() * y.length() * z.length(); }
    Rect face_xy() const { return Rect{x, y}; }
    Interval range_z() const { return z; }
    double depth() const { return z.length(); } // a, the length of W_z
    bool contains(double px, double py, double pz) const {
        return x.contains(px) && y.contains(py) && z.contains(pz);
    }
    double shortest_side() const {
        return std::min(std::min(x.length(), y.length()), z.length());
    }
    void validate() const {
        x.validate("x");
        y.validate("y");
        z.validate("z");
    }
};

} // namespace colpp

#endif
