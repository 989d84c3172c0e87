#ifndef COLPP_SUMMARIES_HPP
#define COLPP_SUMMARIES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "colpp/point_pattern.hpp"

namespace colpp {

// Discretized functional summary on an ascending argument grid. Arguments where
// the estimator is undefined (J where F-hat = 1, G without points, ...) carry a
// cleared `defined` flag instead of a numeric placeholder.
struct SummaryFunction1D {
    std::string name; // K, L, Lcentred, pcf, F, G, J
    std::vector<double> args;
    std::vector<double> values;
    std::vector<std::uint8_t> defined;
    std::string estimator;
    std::string edge_correction;
};

struct SummaryFunction2D {
    std::string name; // cylK
    std::vector<double> r_args;
    std::vector<double> t_args;
    std::vector<double> values; // row-major: values[ir * t_args.size() + it]
    std::string estimator;
    std::string edge_correction;

    double at(std::size_t ir, std::size_t it) const { return values[ir * t_args.size() + it]; }
};

// Default grid caps: one quarter of the shortest window side for the 1D
// summaries; for the cylindrical K, one quarter of the shortest xy-side and
// one quarter of the z-length.
double default_r_max(const PointPattern& pattern);
double default_cyl_r_max(const PointPattern& pattern);
double default_cyl_t_max(const PointPattern& pattern);

std::vector<double> linspace_grid(double lo, double hi, std::size_t n); // n points, lo..hi

// Ripley K, translation edge correction, dims 2 and 3.
SummaryFunction1D k_est(const PointPattern& pattern, const std::vector<double>& r_grid);

// L(r) = (K(r)/omega_d)^(1/d); `centred` subtracts r.
SummaryFunction1D l_est(const PointPattern& pattern, const std::vector<double>& r_grid,
                        bool centred = false);
SummaryFunction1D l_from_k(const SummaryFunction1D& k, int dim, bool centred = false);

// Pair correlation, Epanechnikov kernel, translation correction.
// bandwidth <= 0 selects the 0.15 / sqrt(lambda-hat) rule of thumb.
SummaryFunction1D pcf_est(const PointPattern& pattern, const std::vector<double>& r_grid,
                          double bandwidth = 0.0);
double pcf_default_bandwidth(const PointPattern& pattern);

// Cylindrical K for z-axis cylinders of base radius r and height 2t (3D only).
SummaryFunction2D cylk_est(const PointPattern& pattern, const std::vector<double>& r_grid,
                           const std::vector<double>& t_grid);

// Empty-space / nearest-neighbour / J, border (reduced-sample) correction.
SummaryFunction1D f_est(const PointPattern& pattern, const std::vector<double>& r_grid);
// same estimator over caller-supplied test locations
SummaryFunction1D f_est_at_sites(const PointPattern& pattern, const std::vector<double>& r_grid,
                                 const std::vector<Vec3>& sites);
SummaryFunction1D g_nn_est(const PointPattern& pattern, const std::vector<double>& r_grid);
SummaryFunction1D j_est(const PointPattern& pattern, const std::vector<double>& r_grid);
SummaryFunction1D j_from_fg(const SummaryFunction1D& f, const SummaryFunction1D& g);

// Concatenation used by the GERL envelope test: centred L, G, F, J on n1d-point
// r-grids and the cylindrical K on an n2d x n2d grid, flattened in this fixed
// order. Every segment contributes the same number of arguments.
struct GerlGrids {
    std::size_t n1d = 4096;
    std::size_t n2d = 64;
    double r_max = 0.0;     // 0 = default cap
    double cyl_r_max = 0.0; // 0 = default cap
    double cyl_t_max = 0.0; // 0 = default cap
};

struct ConcatenatedSummary {
    std::vector<double> values;
    std::vector<std::uint8_t> defined;
    std::vector<std::string> segment_names;  // [L, G, F, J, cylK]
    std::vector<std::size_t> segment_offset; // start index per segment, plus end
    std::vector<double> grid_1d;             // shared r-grid of the 1D segments
    std::vector<double> grid_cyl_r;
    std::vector<double> grid_cyl_t;

    std::size_t segments() const { return segment_names.size(); }
    std::size_t segment_of(std::size_t flat_index) const;
};

ConcatenatedSummary concat_for_gerl(const PointPattern& pattern, const GerlGrids& grids = {});

} // namespace colpp

#endif
