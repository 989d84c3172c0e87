#ifndef COLPP_MRF_HPP
#define COLPP_MRF_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "colpp/geometry.hpp"
#include "colpp/region.hpp"
#include "colpp/rng.hpp"

namespace colpp {

// Geometry selector plus parameters of the conditional pairwise-interaction
// model for the z-coordinates given the xy-sites:
//   model 1: hard core only
//   model 2: ball B1 = b(r1)
//   model 3: cylinder B1 = c(r1, t1)
//   model 4: B1 = c(r1, t1) minus the double cone d(r1, t1)
//   model 5: B1 = c(r1, t1), B2 = c(r2, t2) \ c(r1, t1), with r1 >= r2, t2 > t1
struct MrfModelSpec {
    int model_id = 1;
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double h = 0.0;
    double r1 = 0.0, t1 = 0.0; // theta1
    double r2 = 0.0, t2 = 0.0; // theta2 (model 5)

    bool has_region1() const { return model_id >= 2; }
    bool has_region2() const { return model_id == 5; }
    InteractionRegion region1() const;
    InteractionRegion region2() const;

    // sites further apart than this in the plane can never interact
    double planar_reach() const;

    void validate(double wz_length) const;
};

// Fixed xy-sites, a current z-vector, and the cached neighbour structure.
// Neighbour lists keep exactly the pairs that can interact for some z-values:
// planar distance <= max(region reach, h).
class ConditionalState {
public:
    ConditionalState(std::vector<Vec2> xy, std::vector<double> z, Interval wz, MrfModelSpec spec);

    std::size_t size() const { return xy_.size(); }
    const MrfModelSpec& spec() const { return spec_; }
    const Interval& window_z() const { return wz_; }
    const std::vector<Vec2>& xy() const { return xy_; }
    const std::vector<double>& z() const { return z_; }
    double z(std::size_t i) const { return z_[i]; }
    void set_z(std::size_t i, double v) { z_[i] = v; }
    void set_z(std::vector<double> v);

    std::size_t neighbour_count(std::size_t i) const { return nbr_start_[i + 1] - nbr_start_[i]; }
    // neighbour index list and cached planar distances for site i
    std::pair<const std::uint32_t*, const double*> neighbours(std::size_t i) const {
        return {nbr_index_.data() + nbr_start_[i], nbr_dist_.data() + nbr_start_[i]};
    }

    // per-site counts s_{1,i}, s_{2,i} at a candidate z for site i
    std::pair<int, int> site_counts(std::size_t i, double z_candidate) const;
    // hard core satisfied for site i at candidate z (violation at distance < h)
    bool hard_core_ok(std::size_t i, double z_candidate) const;

private:
    std::vector<Vec2> xy_;
    std::vector<double> z_;
    Interval wz_;
    MrfModelSpec spec_;
    std::vector<std::size_t> nbr_start_;
    std::vector<std::uint32_t> nbr_index_;
    std::vector<double> nbr_dist_;
};

// total pair counts (s1, s2); s2 = 0 for models 1-4
std::pair<long, long> pair_counts(const ConditionalState& state);

// s1 log(gamma1) + s2 log(gamma2) when the hard core holds, else -infinity
double unnorm_logdensity(const ConditionalState& state);

// Gamma-independent decomposition of the normalizer integral over W_z:
// maximal open pieces on which the integrand gamma1^k gamma2^l is constant
// (len = 0-length pieces merged away; hard-core-forbidden pieces dropped).
struct NormalizerPieces {
    std::vector<int> k, l;
    std::vector<double> len;
    double free_length = 0.0; // total feasible length
};
NormalizerPieces conditional_pieces(const ConditionalState& state, std::size_t i);
double lognorm_from_pieces(const NormalizerPieces& pieces, double lg1, double lg2);

// Piece decomposition from raw neighbour data (planar distances and current z
// values); the grid-search fitter shares one neighbour cache across cells.
NormalizerPieces build_normalizer_pieces(const MrfModelSpec& spec, const Interval& wz,
                                         const double* dists, const double* zs,
                                         std::size_t count);
// per-site counts from raw neighbour data
std::pair<int, int> site_counts_from(const MrfModelSpec& spec, double zc, const double* dists,
                                     const double* zs, std::size_t count);

// log of the exact full-conditional normalizer c_i
double full_conditional_lognorm(const ConditionalState& state, std::size_t i);

// log full-conditional density of z_i at a candidate value (-inf if forbidden)
double full_conditional_logdensity(const ConditionalState& state, std::size_t i,
                                   double z_candidate);

struct MhOptions {
    int sweeps = 100;    // systematic scans over all sites
    int thin = 0;        // record the state every `thin` sweeps (0 = final only)
    int init_attempts = 10000;
};

struct MhResult {
    std::vector<double> z;
    std::vector<std::vector<double>> trace;
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
};

// Systematic-scan Metropolis-Hastings for the z-vector given xy: uniform
// proposals on W_z, Hastings ratio from the local terms of the density.
MhResult mh_sample_z(const std::vector<Vec2>& xy, const MrfModelSpec& spec, const Interval& wz,
                     const MhOptions& options, RngStream& rng,
                     const std::vector<double>* init = nullptr);

// feasible initial z-vector: i.i.d. uniform retries, then sequential placement
std::vector<double> feasible_initial_z(const std::vector<Vec2>& xy, const MrfModelSpec& spec,
                                       const Interval& wz, int attempts, RngStream& rng);

} // namespace colpp

#endif
