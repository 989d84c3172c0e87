#ifndef COLPP_PIPELINE_HPP
#define COLPP_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "colpp/envelopes.hpp"
#include "colpp/fitting.hpp"

namespace colpp {

// End-to-end workflow configuration: homogeneous-Poisson baseline, Poisson
// line-cluster fit, determinantal line-cluster fit, then the conditional
// z-models; every stage writes its fit and envelope artifacts under out_dir
// and a manifest ties each file to its stage, seed, and config hash.
struct PipelineConfig {
    std::string data_csv;
    std::string window_json;
    std::string out_dir;
    std::uint64_t master_seed = 1;
    std::size_t envelope_sims = 499;
    double alpha = 0.05;
    std::vector<int> mrf_models = {1, 2, 3, 4, 5};
    ContrastConfig contrast;
    MpleFitConfig mple;
    GerlGrids grids;
    double dpp_margin = 0.0; // extra spectral margin beyond the cluster margin
    int mh_sweeps = 100;
    unsigned threads = 0;
};

struct StageOutcome {
    std::string name;
    double p_value = 1.0;
    bool rejected = false;
};

struct PipelineOutcome {
    std::vector<StageOutcome> stages;
    int best_mrf_model = 0;
    double best_mrf_lp = 0;
    double final_p = 1.0;
    bool final_rejected = false;
};

PipelineOutcome cmd_pipeline(const PipelineConfig& config);

// summary bundle for one pattern: K, L, pcf, F, G, J (and cylK when 3D)
std::vector<std::string> cmd_summaries(const PointPattern& data, const std::string& out_dir,
                                       std::size_t grid_n = 128);

} // namespace colpp

#endif
