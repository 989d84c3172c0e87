#include "colpp/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "colpp/rng.hpp"

namespace colpp {

namespace {

constexpr double kPi = std::numbers::pi;

void check_grid(const std::vector<double>& grid, const char* what) {
    if (grid.empty()) throw error(errc::invalid_config, std::string(what) + ": empty grid");
    if (!(grid.front() > 0.0))
        throw error(errc::invalid_config, std::string(what) + ": grid must start above 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw error(errc::invalid_config, std::string(what) + ": grid must be strictly increasing");
}

// |W| / |W cap (W + delta)| for a box window; valid while every |delta_d| < L_d.
struct TranslationWeight {
    double lx, ly, lz;
    int dim;
    double measure;

    explicit TranslationWeight(const PointPattern& p) {
        const auto& w = p.window3();
        lx = w.x.length();
        ly = w.y.length();
        lz = w.z.length();
        dim = p.dim();
        measure = p.window_measure();
    }
    double operator()(double dx, double dy, double dz) const {
        double denom = (lx - std::fabs(dx)) * (ly - std::fabs(dy));
        if (dim == 3) denom *= (lz - std::fabs(dz));
        return measure / denom;
    }
};

double ball_volume(int dim, double r) {
    return dim == 2 ? kPi * r * r : 4.0 / 3.0 * kPi * r * r * r;
}
double unit_ball_volume(int dim) { return ball_volume(dim, 1.0); }

// Uniform-cell spatial index for nearest-neighbour queries.
class CellIndex {
public:
    CellIndex(const std::vector<Vec3>& pts, const Window3& box, int dim) : pts_(pts), dim_(dim) {
        ox_ = box.x.lo;
        oy_ = box.y.lo;
        oz_ = box.z.lo;
        double vol = dim == 2 ? box.face_xy().area() : box.volume();
        double per_cell = vol / std::max<std::size_t>(pts.size(), 1);
        double cw = std::pow(per_cell, 1.0 / dim);
        cw = std::max(cw, 1e-9);
        nx_ = std::max(1, static_cast<int>(box.x.length() / cw));
        ny_ = std::max(1, static_cast<int>(box.y.length() / cw));
        nz_ = dim == 2 ? 1 : std::max(1, static_cast<int>(box.z.length() / cw));
        cwx_ = box.x.length() / nx_;
        cwy_ = box.y.length() / ny_;
        cwz_ = dim == 2 ? 1.0 : box.z.length() / nz_;
        std::vector<int> count(static_cast<std::size_t>(nx_) * ny_ * nz_ + 1, 0);
        std::vector<int> cell_of(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cell_of[i] = cell(pts[i]);
            ++count[cell_of[i] + 1];
        }
        for (std::size_t c = 1; c < count.size(); ++c) count[c] += count[c - 1];
        start_ = count;
        items_.resize(pts.size());
        std::vector<int> cursor(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < pts.size(); ++i) items_[cursor[cell_of[i]]++] = static_cast<int>(i);
    }

    // distance to the nearest stored point, optionally excluding one index
    double nn_dist(const Vec3& q, int exclude = -1) const {
        if (pts_.empty()) return std::numeric_limits<double>::infinity();
        int cx = clampi(static_cast<int>((q.x - ox_) / cwx_), nx_);
        int cy = clampi(static_cast<int>((q.y - oy_) / cwy_), ny_);
        int cz = dim_ == 2 ? 0 : clampi(static_cast<int>((q.z - oz_) / cwz_), nz_);
        double best = std::numeric_limits<double>::infinity();
        double min_cw = std::min(cwx_, dim_ == 2 ? cwy_ : std::min(cwy_, cwz_));
        int max_ring = std::max(std::max(nx_, ny_), nz_);
        for (int ring = 0; ring <= max_ring; ++ring) {
            // once a neighbour is known, stop when the ring cannot beat it
            if (best < std::numeric_limits<double>::infinity() &&
                static_cast<double>(ring - 1) * min_cw > best)
                break;
            bool any_cell = false;
            for (int ix = cx - ring; ix <= cx + ring; ++ix) {
                if (ix < 0 || ix >= nx_) continue;
                for (int iy = cy - ring; iy <= cy + ring; ++iy) {
                    if (iy < 0 || iy >= ny_) continue;
                    for (int iz = cz - ring; iz <= cz + ring; ++iz) {
                        if (iz < 0 || iz >= nz_) continue;
                        int dr = std::max(std::abs(ix - cx), std::max(std::abs(iy - cy), std::abs(iz - cz)));
                        if (dr != ring) continue; // shell only
                        any_cell = true;
                        int c = (ix * ny_ + iy) * nz_ + iz;
                        for (int k = start_[c]; k < start_[c + 1]; ++k) {
                            int j = items_[k];
                            if (j == exclude) continue;
                            double dx = q.x - pts_[j].x, dy = q.y - pts_[j].y;
                            double dz = dim_ == 2 ? 0.0 : q.z - pts_[j].z;
                            double d = std::sqrt(dx * dx + dy * dy + dz * dz);
                            if (d < best) best = d;
                        }
                    }
                }
            }
            if (!any_cell && ring > 0 && best < std::numeric_limits<double>::infinity()) break;
        }
        return best;
    }

private:
    static int clampi(int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); }
    int cell(const Vec3& p) const {
        int cx = clampi(static_cast<int>((p.x - ox_) / cwx_), nx_);
        int cy = clampi(static_cast<int>((p.y - oy_) / cwy_), ny_);
        int cz = dim_ == 2 ? 0 : clampi(static_cast<int>((p.z - oz_) / cwz_), nz_);
        return (cx * ny_ + cy) * nz_ + cz;
    }

    const std::vector<Vec3>& pts_;
    int dim_;
    double ox_, oy_, oz_, cwx_, cwy_, cwz_;
    int nx_, ny_, nz_;
    std::vector<int> start_, items_;
};

double border_distance(const Vec3& p, const Window3& w, int dim) {
    double b = std::min(p.x - w.x.lo, w.x.hi - p.x);
    b = std::min(b, std::min(p.y - w.y.lo, w.y.hi - p.y));
    if (dim == 3) b = std::min(b, std::min(p.z - w.z.lo, w.z.hi - p.z));
    return b;
}

// Reduced-sample ratio on a grid from per-item (nn distance, border distance).
SummaryFunction1D reduced_sample(const std::vector<double>& grid, const std::vector<double>& nn,
                                 const std::vector<double>& border, const std::string& name) {
    const std::size_t m = grid.size();
    std::vector<long> denom_diff(m + 1, 0), numer_diff(m + 1, 0);
    for (std::size_t i = 0; i < nn.size(); ++i) {
        // contributes to denominators for grid values <= border[i]
        auto ub = std::upper_bound(grid.begin(), grid.end(), border[i]) - grid.begin();
        if (ub > 0) {
            ++denom_diff[0];
            --denom_diff[ub];
        }
        // and to numerators where additionally grid value >= nn[i]
        auto lb = std::lower_bound(grid.begin(), grid.end(), nn[i]) - grid.begin();
        if (lb < ub) {
            ++numer_diff[lb];
            --numer_diff[ub];
        }
    }
    SummaryFunction1D out;
    out.name = name;
    out.args = grid;
    out.values.assign(m, 0.0);
    out.defined.assign(m, 1);
    long denom = 0, numer = 0;
    for (std::size_t k = 0; k < m; ++k) {
        denom += denom_diff[k];
        numer += numer_diff[k];
        if (denom > 0) {
            out.values[k] = static_cast<double>(numer) / static_cast<double>(denom);
        } else {
            out.values[k] = 0.0;
            out.defined[k] = 0;
        }
    }
    out.estimator = "reduced-sample";
    out.edge_correction = "border";
    return out;
}

} // namespace

double default_r_max(const PointPattern& pattern) {
    if (pattern.dim() == 2) return pattern.window_xy().shortest_side() / 4.0;
    return pattern.window3().shortest_side() / 4.0;
}
double default_cyl_r_max(const PointPattern& pattern) {
    return pattern.window_xy().shortest_side() / 4.0;
}
double default_cyl_t_max(const PointPattern& pattern) {
    return pattern.window_z().length() / 4.0;
}

std::vector<double> linspace_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = hi;
        return g;
    }
    double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
    g.back() = hi;
    return g;
}

SummaryFunction1D k_est(const PointPattern& pattern, const std::vector<double>& r_grid) {
    check_grid(r_grid, "k_est");
    const auto& pts = pattern.points();
    const std::size_t n = pts.size();
    if (n < 2) throw error(errc::insufficient_points, "k_est: need at least two points");
    const auto& w = pattern.window3();
    double side_cap = pattern.dim() == 2 ? pattern.window_xy().shortest_side() : w.shortest_side();
    if (!(r_grid.back() < side_cap))
        throw error(errc::out_of_range,
                    "k_est: r beyond translation-correction validity (shortest window side)");

    TranslationWeight weight(pattern);
    const std::size_t m = r_grid.size();
    std::vector<double> bin(m, 0.0);
    const double r_max = r_grid.back();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = pts[i].x - pts[j].x;
            double dy = pts[i].y - pts[j].y;
            double dz = pattern.dim() == 2 ? 0.0 : pts[i].z - pts[j].z;
            double d = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (d > r_max) continue;
            auto idx = std::lower_bound(r_grid.begin(), r_grid.end(), d) - r_grid.begin();
            bin[idx] += 2.0 * weight(dx, dy, dz); // both ordered pairs
        }
    }
    SummaryFunction1D out;
    out.name = "K";
    out.args = r_grid;
    out.values.assign(m, 0.0);
    out.defined.assign(m, 1);
    double scale = pattern.window_measure() / (static_cast<double>(n) * static_cast<double>(n));
    double acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        acc += bin[k];
        out.values[k] = scale * acc;
    }
    out.estimator = "pair-sum";
    out.edge_correction = "translation";
    return out;
}

SummaryFunction1D l_from_k(const SummaryFunction1D& k, int dim, bool centred) {
    SummaryFunction1D out = k;
    out.name = centred ? "Lcentred" : "L";
    double omega = unit_ball_volume(dim);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        double l = std::pow(k.values[i] / omega, 1.0 / dim);
        out.values[i] = centred ? l - k.args[i] : l;
    }
    return out;
}

SummaryFunction1D l_est(const PointPattern& pattern, const std::vector<double>& r_grid,
                        bool centred) {
    return l_from_k(k_est(pattern, r_grid), pattern.dim(), centred);
}

double pcf_default_bandwidth(const PointPattern& pattern) {
    return 0.15 / std::sqrt(pattern.intensity_hat());
}

SummaryFunction1D pcf_est(const PointPattern& pattern, const std::vector<double>& r_grid,
                          double bandwidth) {
    check_grid(r_grid, "pcf_est");
    const auto& pts = pattern.points();
    const std::size_t n = pts.size();
    if (n < 2) throw error(errc::insufficient_points, "pcf_est: need at least two points");
    double b = bandwidth > 0.0 ? bandwidth : pcf_default_bandwidth(pattern);
    const auto& w = pattern.window3();
    double side_cap = pattern.dim() == 2 ? pattern.window_xy().shortest_side() : w.shortest_side();
    if (!(r_grid.back() + b < side_cap))
        throw error(errc::out_of_range, "pcf_est: grid plus bandwidth beyond window side");

    TranslationWeight weight(pattern);
    const int dim = pattern.dim();
    const std::size_t m = r_grid.size();
    std::vector<double> acc(m, 0.0);
    const double d_cap = r_grid.back() + b;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = pts[i].x - pts[j].x;
            double dy = pts[i].y - pts[j].y;
            double dz = dim == 2 ? 0.0 : pts[i].z - pts[j].z;
            double d = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (d > d_cap || d <= 0.0) continue;
            double shell = dim == 2 ? 2.0 * kPi * d : 4.0 * kPi * d * d;
            double contrib = 2.0 * weight(dx, dy, dz) / shell;
            auto lo = std::lower_bound(r_grid.begin(), r_grid.end(), d - b) - r_grid.begin();
            for (std::size_t k = lo; k < m && r_grid[k] < d + b; ++k) {
                double u = (r_grid[k] - d) / b;
                acc[k] += contrib * 0.75 * (1.0 - u * u) / b; // Epanechnikov
            }
        }
    }
    SummaryFunction1D out;
    out.name = "pcf";
    out.args = r_grid;
    out.values.assign(m, 0.0);
    out.defined.assign(m, 1);
    double scale = pattern.window_measure() / (static_cast<double>(n) * static_cast<double>(n));
    for (std::size_t k = 0; k < m; ++k) out.values[k] = scale * acc[k];
    out.estimator = "epanechnikov b=" + std::to_string(b);
    out.edge_correction = "translation";
    return out;
}

SummaryFunction2D cylk_est(const PointPattern& pattern, const std::vector<double>& r_grid,
                           const std::vector<double>& t_grid) {
    check_grid(r_grid, "cylk_est r");
    check_grid(t_grid, "cylk_est t");
    if (pattern.dim() != 3)
        throw error(errc::invalid_config, "cylk_est: requires a 3D pattern");
    const auto& pts = pattern.points();
    const std::size_t n = pts.size();
    if (n < 2) throw error(errc::insufficient_points, "cylk_est: need at least two points");
    const auto& w = pattern.window3();
    if (!(r_grid.back() < pattern.window_xy().shortest_side()))
        throw error(errc::out_of_range, "cylk_est: r beyond shortest xy side");
    if (!(t_grid.back() < w.z.length()))
        throw error(errc::out_of_range, "cylk_est: t beyond window depth");

    TranslationWeight weight(pattern);
    const std::size_t mr = r_grid.size(), mt = t_grid.size();
    std::vector<double> bin(mr * mt, 0.0);
    const double r_cap = r_grid.back(), t_cap = t_grid.back();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = pts[i].x - pts[j].x;
            double dy = pts[i].y - pts[j].y;
            double dz = pts[i].z - pts[j].z;
            double pl = std::hypot(dx, dy);
            double az = std::fabs(dz);
            if (pl > r_cap || az > t_cap) continue;
            auto ir = std::lower_bound(r_grid.begin(), r_grid.end(), pl) - r_grid.begin();
            auto it = std::lower_bound(t_grid.begin(), t_grid.end(), az) - t_grid.begin();
            bin[ir * mt + it] += 2.0 * weight(dx, dy, dz);
        }
    }
    // cumulative in both arguments
    for (std::size_t ir = 0; ir < mr; ++ir)
        for (std::size_t it = 1; it < mt; ++it) bin[ir * mt + it] += bin[ir * mt + it - 1];
    for (std::size_t ir = 1; ir < mr; ++ir)
        for (std::size_t it = 0; it < mt; ++it) bin[ir * mt + it] += bin[(ir - 1) * mt + it];

    SummaryFunction2D out;
    out.name = "cylK";
    out.r_args = r_grid;
    out.t_args = t_grid;
    out.values.assign(mr * mt, 0.0);
    double scale = pattern.window_measure() / (static_cast<double>(n) * static_cast<double>(n));
    for (std::size_t k = 0; k < mr * mt; ++k) out.values[k] = scale * bin[k];
    out.estimator = "pair-sum";
    out.edge_correction = "translation";
    return out;
}

SummaryFunction1D g_nn_est(const PointPattern& pattern, const std::vector<double>& r_grid) {
    check_grid(r_grid, "g_nn_est");
    const auto& pts = pattern.points();
    if (pts.empty()) throw error(errc::insufficient_points, "g_nn_est: empty pattern");
    SummaryFunction1D out;
    if (pts.size() == 1) {
        out.name = "G";
        out.args = r_grid;
        out.values.assign(r_grid.size(), 0.0);
        out.defined.assign(r_grid.size(), 0);
        out.estimator = "reduced-sample";
        out.edge_correction = "border";
        return out;
    }
    CellIndex index(pts, pattern.window3(), pattern.dim());
    std::vector<double> nn(pts.size()), border(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        nn[i] = index.nn_dist(pts[i], static_cast<int>(i));
        border[i] = border_distance(pts[i], pattern.window3(), pattern.dim());
    }
    out = reduced_sample(r_grid, nn, border, "G");
    return out;
}

SummaryFunction1D f_est_at_sites(const PointPattern& pattern, const std::vector<double>& r_grid,
                                 const std::vector<Vec3>& sites) {
    check_grid(r_grid, "f_est");
    const auto& pts = pattern.points();
    if (pts.empty()) throw error(errc::insufficient_points, "f_est: empty pattern");
    CellIndex index(pts, pattern.window3(), pattern.dim());
    std::vector<double> nn(sites.size()), border(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) {
        nn[i] = index.nn_dist(sites[i]);
        border[i] = border_distance(sites[i], pattern.window3(), pattern.dim());
    }
    return reduced_sample(r_grid, nn, border, "F");
}

SummaryFunction1D f_est(const PointPattern& pattern, const std::vector<double>& r_grid) {
    check_grid(r_grid, "f_est");
    const auto& pts = pattern.points();
    if (pts.empty()) throw error(errc::insufficient_points, "f_est: empty pattern");
    const auto& w = pattern.window3();
    const int dim = pattern.dim();

    // deterministic stratified lattice of test locations, at least 8x the
    // pattern cardinality, one jittered point per cell with a fixed seed
    std::size_t target = 8 * pts.size();
    double measure = pattern.window_measure();
    double c = std::pow(static_cast<double>(target) / measure, 1.0 / dim);
    int nx = std::max<int>(1, static_cast<int>(std::ceil(w.x.length() * c)));
    int ny = std::max<int>(1, static_cast<int>(std::ceil(w.y.length() * c)));
    int nz = dim == 2 ? 1 : std::max<int>(1, static_cast<int>(std::ceil(w.z.length() * c)));
    RngStream jitter(0x600DF00Du, 0);
    std::vector<Vec3> sites;
    sites.reserve(static_cast<std::size_t>(nx) * ny * nz);
    double sx = w.x.length() / nx, sy = w.y.length() / ny;
    double sz = dim == 2 ? 0.0 : w.z.length() / nz;
    for (int ix = 0; ix < nx; ++ix)
        for (int iy = 0; iy < ny; ++iy)
            for (int iz = 0; iz < nz; ++iz) {
                Vec3 p;
                p.x = w.x.lo + (ix + jitter.u01()) * sx;
                p.y = w.y.lo + (iy + jitter.u01()) * sy;
                p.z = dim == 2 ? 0.0 : w.z.lo + (iz + jitter.u01()) * sz;
                sites.push_back(p);
            }
    return f_est_at_sites(pattern, r_grid, sites);
}

SummaryFunction1D j_from_fg(const SummaryFunction1D& f, const SummaryFunction1D& g) {
    SummaryFunction1D out;
    out.name = "J";
    out.args = f.args;
    out.values.assign(f.args.size(), 0.0);
    out.defined.assign(f.args.size(), 1);
    for (std::size_t k = 0; k < f.args.size(); ++k) {
        bool ok = f.defined[k] && g.defined[k] && f.values[k] < 1.0;
        if (ok) {
            out.values[k] = (1.0 - g.values[k]) / (1.0 - f.values[k]);
        } else {
            out.values[k] = 0.0;
            out.defined[k] = 0; // undefined where F-hat = 1
        }
    }
    out.estimator = "ratio";
    out.edge_correction = "border";
    return out;
}

SummaryFunction1D j_est(const PointPattern& pattern, const std::vector<double>& r_grid) {
    return j_from_fg(f_est(pattern, r_grid), g_nn_est(pattern, r_grid));
}

std::size_t ConcatenatedSummary::segment_of(std::size_t flat_index) const {
    for (std::size_t s = 0; s + 1 < segment_offset.size(); ++s)
        if (flat_index < segment_offset[s + 1]) return s;
    return segment_names.size();
}

ConcatenatedSummary concat_for_gerl(const PointPattern& pattern, const GerlGrids& grids) {
    if (pattern.dim() != 3)
        throw error(errc::invalid_config, "concat_for_gerl: requires a 3D pattern");
    double r_max = grids.r_max > 0 ? grids.r_max : default_r_max(pattern);
    double cr_max = grids.cyl_r_max > 0 ? grids.cyl_r_max : default_cyl_r_max(pattern);
    double ct_max = grids.cyl_t_max > 0 ? grids.cyl_t_max : default_cyl_t_max(pattern);
    std::vector<double> r1d = linspace_grid(r_max / static_cast<double>(grids.n1d), r_max, grids.n1d);
    std::vector<double> rc = linspace_grid(cr_max / static_cast<double>(grids.n2d), cr_max, grids.n2d);
    std::vector<double> tc = linspace_grid(ct_max / static_cast<double>(grids.n2d), ct_max, grids.n2d);

    SummaryFunction1D l = l_est(pattern, r1d, /*centred=*/true);
    SummaryFunction1D g = g_nn_est(pattern, r1d);
    SummaryFunction1D f = f_est(pattern, r1d);
    SummaryFunction1D j = j_from_fg(f, g);
    SummaryFunction2D ck = cylk_est(pattern, rc, tc);

    ConcatenatedSummary out;
    out.segment_names = {"Lcentred", "G", "F", "J", "cylK"};
    out.grid_1d = r1d;
    out.grid_cyl_r = rc;
    out.grid_cyl_t = tc;
    out.values.reserve(4 * grids.n1d + grids.n2d * grids.n2d);
    out.defined.reserve(out.values.capacity());
    out.segment_offset.push_back(0);
    auto push1d = [&](const SummaryFunction1D& s) {
        out.values.insert(out.values.end(), s.values.begin(), s.values.end());
        out.defined.insert(out.defined.end(), s.defined.begin(), s.defined.end());
        out.segment_offset.push_back(out.values.size());
    };
    push1d(l);
    push1d(g);
    push1d(f);
    push1d(j);
    out.values.insert(out.values.end(), ck.values.begin(), ck.values.end());
    out.defined.insert(out.defined.end(), ck.values.size(), 1);
    out.segment_offset.push_back(out.values.size());
    return out;
}

} // namespace colpp
