#ifndef COLPP_POINT_PATTERN_HPP
#define COLPP_POINT_PATTERN_HPP

#include <utility>
#include <vector>

#include "colpp/geometry.hpp"

namespace colpp {

// A finite ordered point set in a box window, planar (dim 2) or spatial (dim 3).
// Immutable after construction; every point lies inside the window (closed).
class PointPattern {
public:
    static PointPattern planar(std::vector<Vec3> pts, Rect wxy) {
        for (auto& p : pts) p.z = 0.0;
        return PointPattern(2, std::move(pts), Window3{wxy.x, wxy.y, {0.0, 1.0}});
    }
    static PointPattern spatial(std::vector<Vec3> pts, Window3 w) {
        return PointPattern(3, std::move(pts), w);
    }

    int dim() const { return dim_; }
    std::size_t size() const { return pts_.size(); }
    const std::vector<Vec3>& points() const { return pts_; }
    const Vec3& operator[](std::size_t i) const { return pts_[i]; }

    const Window3& window3() const { return window_; }
    Rect window_xy() const { return window_.face_xy(); }
    Interval window_z() const { return window_.z; }

    double window_measure() const {
        return dim_ == 2 ? window_.face_xy().area() : window_.volume();
    }

    // observed intensity n / |W|
    double intensity_hat() const {
        return static_cast<double>(pts_.size()) / window_measure();
    }

    PointPattern project_xy() const {
        std::vector<Vec3> q = pts_;
        for (auto& p : q) p.z = 0.0;
        return PointPattern(2, std::move(q), Window3{window_.x, window_.y, {0.0, 1.0}});
    }

    std::vector<double> z_coords() const {
        std::vector<double> out(pts_.size());
        for (std::size_t i = 0; i < pts_.size(); ++i) out[i] = pts_[i].z;
        return out;
    }

    std::vector<Vec2> xy_coords() const {
        std::vector<Vec2> out(pts_.size());
        for (std::size_t i = 0; i < pts_.size(); ++i) out[i] = Vec2{pts_[i].x, pts_[i].y};
        return out;
    }

private:
    PointPattern(int dim, std::vector<Vec3> pts, Window3 w)
        : dim_(dim), pts_(std::move(pts)), window_(w) {
        window_.validate();
        for (const auto& p : pts_) {
            bool ok = dim_ == 2 ? window_.face_xy().contains(p.x, p.y)
                                : window_.contains(p.x, p.y, p.z);
            if (!ok)
                throw error(errc::invalid_config, "point pattern: point outside the window");
        }
    }

    int dim_;
    std::vector<Vec3> pts_;
    Window3 window_;
};

// Minimum over unordered distinct pairs of Euclidean distance (exact scan).
double pairwise_min_distance(const PointPattern& pattern);

} // namespace colpp

#endif
