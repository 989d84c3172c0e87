#ifndef COLPP_ENVELOPES_HPP
#define COLPP_ENVELOPES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "colpp/models.hpp"
#include "colpp/mrf.hpp"
#include "colpp/summaries.hpp"

namespace colpp {

// Data curve plus s simulated curves on identical grids, with the joint
// defined-mask: a column is usable only when every curve defines it, so the
// rank computation sees a rectangular value matrix.
struct CurveSet {
    std::vector<std::vector<double>> curves; // curves[0] = data
    std::vector<std::uint8_t> usable;        // joint mask over columns
    std::vector<std::string> segment_names;
    std::vector<std::size_t> segment_offset;
    std::vector<double> grid_1d, grid_cyl_r, grid_cyl_t;

    std::size_t n_sim() const { return curves.size() - 1; }
    std::size_t length() const { return curves.empty() ? 0 : curves[0].size(); }

    static CurveSet assemble(const ConcatenatedSummary& data,
                             const std::vector<ConcatenatedSummary>& sims);
};

// Extreme-rank-length ordering key: the curve's two-sided pointwise ranks
// sorted ascending; lexicographically smaller = more extreme. Ties share the
// minimal applicable rank.
using ErlKey = std::vector<std::uint16_t>;
std::vector<ErlKey> erl_measure(const CurveSet& curves);

struct EnvelopeResult {
    std::vector<double> lower, upper; // masked columns carry NaN
    std::vector<std::int8_t> flag;    // -1 data below, +1 above, 0 inside/masked
    double p_value = 1.0;
    double alpha = 0.05;
    std::size_t n_curves = 0;
    std::size_t n_discarded = 0;

    bool rejected() const { return p_value <= alpha; }
};

// Global envelope: p-value from the ERL ordering, bounds as pointwise min/max
// after discarding the floor(alpha (s+1)) most extreme curves. Curves whose
// inclusive key-rank ties across the cut are retained, which keeps the exit
// guarantee exact: data outside the envelope anywhere implies p <= alpha.
EnvelopeResult gerl_test(const CurveSet& curves, double alpha);

// Generative models the envelope driver can re-simulate.
enum class ModelType { csr, plcpp, dlcpp, mrf };

struct ModelHandle {
    ModelType type = ModelType::csr;
    double lambda = 0.0;         // csr
    ClusterModelParams cluster;  // plcpp / dlcpp / mrf planar part
    bool planar_dpp = false;     // mrf: true = DPP centres, false = Poisson
    DppSpectralConfig dpp;
    MrfModelSpec mrf;
    int mh_sweeps = 100;
};

PointPattern simulate_model(const ModelHandle& handle, const Window3& window, RngStream& rng);

struct EnvelopeRun {
    EnvelopeResult result;
    CurveSet curves;
};

// Full driver: s replicates from the fitted model (stream_id = replicate
// index), concatenated summaries for data and replicates, GERL test.
EnvelopeRun run_envelope_pipeline(const PointPattern& data, const ModelHandle& handle,
                                  std::size_t s, double alpha, std::uint64_t seed,
                                  unsigned threads = 0, const GerlGrids& grids = {});

} // namespace colpp

#endif
