#include "colpp/mrf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "colpp/errors.hpp"

namespace colpp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kBreakMergeTol = 1e-12; // coincident breakpoints merged below this
} // namespace

InteractionRegion MrfModelSpec::region1() const {
    switch (model_id) {
    case 2: return InteractionRegion::ball(r1);
    case 3: return InteractionRegion::cylinder(r1, t1);
    case 4: return InteractionRegion::cylinder_minus_double_cone(r1, t1);
    case 5: return InteractionRegion::cylinder(r1, t1);
    default:
        throw error(errc::invalid_config, "model 1 has no interaction region");
    }
}

InteractionRegion MrfModelSpec::region2() const {
    if (model_id != 5)
        throw error(errc::invalid_config, "only model 5 has a second interaction region");
    return InteractionRegion::cylinder_shell(r1, t1, r2, t2);
}

double MrfModelSpec::planar_reach() const {
    double reach = h;
    if (has_region1()) reach = std::max(reach, region1().planar_reach());
    if (has_region2()) reach = std::max(reach, region2().planar_reach());
    return reach;
}

void MrfModelSpec::validate(double wz_length) const {
    if (model_id < 1 || model_id > 5)
        throw error(errc::invalid_config, "mrf model id must be 1..5");
    if (!(h >= 0.0)) throw error(errc::invalid_config, "hard core h must be >= 0");
    if (!(h < wz_length))
        throw error(errc::invalid_config, "hard core h must be smaller than the z-window length");
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0))
        throw error(errc::invalid_config, "interaction parameters must be positive");
    if (model_id == 1 && (gamma1 != 1.0 || gamma2 != 1.0))
        throw error(errc::invalid_config, "model 1 fixes gamma1 = gamma2 = 1");
    if (model_id >= 2 && model_id <= 4 && gamma2 != 1.0)
        throw error(errc::invalid_config, "models 2-4 fix gamma2 = 1");
    switch (model_id) {
    case 1: break;
    case 2:
        if (!(r1 > h)) throw error(errc::invalid_config, "model 2 requires r > h");
        break;
    case 3:
    case 4:
        if (!(r1 > 0) || !(t1 > 0))
            throw error(errc::invalid_config, "models 3-4 require r, t > 0");
        if (!(std::sqrt(r1 * r1 + t1 * t1) > h))
            throw error(errc::invalid_config, "interaction region must not fit in the hard core");
        break;
    case 5:
        if (!(r2 > 0) || !(r1 >= r2))
            throw error(errc::invalid_config, "model 5 requires r1 >= r2 > 0");
        if (!(t1 > 0) || !(t2 > t1))
            throw error(errc::invalid_config, "model 5 requires t2 > t1 > 0");
        if (!(std::sqrt(r1 * r1 + t1 * t1) > h) || !(std::sqrt(r2 * r2 + t2 * t2) > h))
            throw error(errc::invalid_config, "interaction regions must not fit in the hard core");
        break;
    }
}

ConditionalState::ConditionalState(std::vector<Vec2> xy, std::vector<double> z, Interval wz,
                                   MrfModelSpec spec)
    : xy_(std::move(xy)), z_(std::move(z)), wz_(wz), spec_(spec) {
    wz_.validate("W_z");
    spec_.validate(wz_.length());
    if (xy_.size() != z_.size())
        throw error(errc::invalid_config, "xy and z must have equal length");
    for (double v : z_)
        if (!wz_.contains(v))
            throw error(errc::invalid_config, "z coordinate outside W_z");

    const std::size_t n = xy_.size();
    const double reach = spec_.planar_reach();
    std::vector<std::vector<std::uint32_t>> adj(n);
    std::vector<std::vector<double>> dst(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = dist2d(xy_[i], xy_[j]);
            if (d <= reach) {
                adj[i].push_back(static_cast<std::uint32_t>(j));
                dst[i].push_back(d);
                adj[j].push_back(static_cast<std::uint32_t>(i));
                dst[j].push_back(d);
            }
        }
    }
    nbr_start_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) nbr_start_[i + 1] = nbr_start_[i] + adj[i].size();
    nbr_index_.resize(nbr_start_[n]);
    nbr_dist_.resize(nbr_start_[n]);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy(adj[i].begin(), adj[i].end(), nbr_index_.begin() + nbr_start_[i]);
        std::copy(dst[i].begin(), dst[i].end(), nbr_dist_.begin() + nbr_start_[i]);
    }
}

void ConditionalState::set_z(std::vector<double> v) {
    if (v.size() != z_.size()) throw error(errc::invalid_config, "z length mismatch");
    z_ = std::move(v);
}

std::pair<int, int> ConditionalState::site_counts(std::size_t i, double zc) const {
    auto [idx, dist] = neighbours(i);
    std::size_t cnt = neighbour_count(i);
    double local[64];
    std::vector<double> heap;
    double* zs = local;
    if (cnt > 64) {
        heap.resize(cnt);
        zs = heap.data();
    }
    for (std::size_t k = 0; k < cnt; ++k) zs[k] = z_[idx[k]];
    return site_counts_from(spec_, zc, dist, zs, cnt);
}

bool ConditionalState::hard_core_ok(std::size_t i, double zc) const {
    const double h = spec_.h;
    if (h <= 0.0) return true;
    auto [idx, dist] = neighbours(i);
    std::size_t cnt = neighbour_count(i);
    for (std::size_t k = 0; k < cnt; ++k) {
        double d = dist[k];
        if (d >= h) continue;
        double dz = z_[idx[k]] - zc;
        if (d * d + dz * dz < h * h) return false; // violation strictly inside
    }
    return true;
}

std::pair<long, long> pair_counts(const ConditionalState& state) {
    long s1 = 0, s2 = 0;
    const auto& spec = state.spec();
    for (std::size_t i = 0; i < state.size(); ++i) {
        auto [idx, dist] = state.neighbours(i);
        std::size_t cnt = state.neighbour_count(i);
        for (std::size_t k = 0; k < cnt; ++k) {
            if (idx[k] <= i) continue; // each unordered pair once
            double dz = std::fabs(state.z(idx[k]) - state.z(i));
            double d = dist[k];
            if (spec.has_region1()) {
                switch (spec.model_id) {
                case 2:
                    if (d * d + dz * dz <= spec.r1 * spec.r1) ++s1;
                    break;
                case 3:
                case 5:
                    if (d <= spec.r1 && dz <= spec.t1) ++s1;
                    break;
                case 4:
                    if (d <= spec.r1 && dz <= spec.t1 && d * spec.t1 > spec.r1 * dz) ++s1;
                    break;
                }
            }
            if (spec.has_region2() && d <= spec.r2 && dz > spec.t1 && dz <= spec.t2) ++s2;
        }
    }
    return {s1, s2};
}

double unnorm_logdensity(const ConditionalState& state) {
    const auto& spec = state.spec();
    if (spec.h > 0.0) {
        const double h2 = spec.h * spec.h;
        for (std::size_t i = 0; i < state.size(); ++i) {
            auto [idx, dist] = state.neighbours(i);
            std::size_t cnt = state.neighbour_count(i);
            for (std::size_t k = 0; k < cnt; ++k) {
                if (idx[k] <= i) continue;
                double d = dist[k];
                if (d >= spec.h) continue;
                double dz = state.z(idx[k]) - state.z(i);
                if (d * d + dz * dz < h2) return kNegInf;
            }
        }
    }
    auto [s1, s2] = pair_counts(state);
    return static_cast<double>(s1) * std::log(spec.gamma1) +
           static_cast<double>(s2) * std::log(spec.gamma2);
}

namespace {

// sweep event: +1/-1 of one indicator type at a z breakpoint
struct Event {
    double z;
    int type; // 0 = hard core, 1 = B1, 2 = B2
    int delta;
};

// z-intervals (relative to the neighbour's z) on which the displacement lies
// in the model's regions; closed forms per shape
void append_events(const MrfModelSpec& spec, double d, double zj, const Interval& wz,
                   std::vector<Event>& ev) {
    auto add = [&](double lo, double hi, int type) {
        lo = std::max(lo, wz.lo);
        hi = std::min(hi, wz.hi);
        if (hi - lo > 0.0) {
            ev.push_back({lo, type, +1});
            ev.push_back({hi, type, -1});
        }
    };
    if (spec.h > 0.0 && d < spec.h) {
        double w = std::sqrt(spec.h * spec.h - d * d);
        add(zj - w, zj + w, 0);
    }
    if (spec.has_region1()) {
        switch (spec.model_id) {
        case 2:
            if (d <= spec.r1) {
                double w = std::sqrt(spec.r1 * spec.r1 - d * d);
                add(zj - w, zj + w, 1);
            }
            break;
        case 3:
        case 5:
            if (d <= spec.r1) add(zj - spec.t1, zj + spec.t1, 1);
            break;
        case 4:
            if (d <= spec.r1 && d > 0.0) {
                double w = spec.t1 * d / spec.r1;
                add(zj - w, zj + w, 1);
            }
            break;
        }
    }
    if (spec.has_region2() && d <= spec.r2) {
        add(zj - spec.t2, zj - spec.t1, 2);
        add(zj + spec.t1, zj + spec.t2, 2);
    }
}

} // namespace

NormalizerPieces build_normalizer_pieces(const MrfModelSpec& spec, const Interval& wz,
                                         const double* dists, const double* zs,
                                         std::size_t count) {
    std::vector<Event> ev;
    ev.reserve(2 * count + 4);
    for (std::size_t k = 0; k < count; ++k) append_events(spec, dists[k], zs[k], wz, ev);
    std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.z < b.z; });

    NormalizerPieces out;
    out.k.reserve(ev.size() + 1);
    out.l.reserve(ev.size() + 1);
    out.len.reserve(ev.size() + 1);
    double cursor = wz.lo;
    int hc = 0, b1 = 0, b2 = 0;
    std::size_t e = 0;
    auto emit = [&](double upto) {
        double len = upto - cursor;
        if (len > kBreakMergeTol && hc == 0) {
            // merge with the previous piece when the counts repeat
            if (!out.k.empty() && out.k.back() == b1 && out.l.back() == b2) {
                out.len.back() += len;
            } else {
                out.k.push_back(b1);
                out.l.push_back(b2);
                out.len.push_back(len);
            }
            out.free_length += len;
        }
        cursor = upto;
    };
    while (e < ev.size()) {
        double zb = ev[e].z;
        if (zb > cursor) emit(zb);
        while (e < ev.size() && ev[e].z <= cursor + kBreakMergeTol) {
            switch (ev[e].type) {
            case 0: hc += ev[e].delta; break;
            case 1: b1 += ev[e].delta; break;
            default: b2 += ev[e].delta; break;
            }
            ++e;
        }
    }
    if (wz.hi > cursor) emit(wz.hi);
    return out;
}

NormalizerPieces conditional_pieces(const ConditionalState& state, std::size_t i) {
    auto [idx, dist] = state.neighbours(i);
    std::size_t cnt = state.neighbour_count(i);
    std::vector<double> zs(cnt);
    for (std::size_t k = 0; k < cnt; ++k) zs[k] = state.z(idx[k]);
    return build_normalizer_pieces(state.spec(), state.window_z(), dist, zs.data(), cnt);
}

std::pair<int, int> site_counts_from(const MrfModelSpec& spec, double zc, const double* dists,
                                     const double* zs, std::size_t count) {
    int s1 = 0, s2 = 0;
    const bool has1 = spec.has_region1(), has2 = spec.has_region2();
    for (std::size_t k = 0; k < count; ++k) {
        double dz = std::fabs(zs[k] - zc);
        double d = dists[k];
        if (has1) {
            switch (spec.model_id) {
            case 2:
                if (d * d + dz * dz <= spec.r1 * spec.r1) ++s1;
                break;
            case 3:
            case 5:
                if (d <= spec.r1 && dz <= spec.t1) ++s1;
                break;
            case 4:
                if (d <= spec.r1 && dz <= spec.t1 && d * spec.t1 > spec.r1 * dz) ++s1;
                break;
            }
        }
        if (has2 && d <= spec.r2 && dz > spec.t1 && dz <= spec.t2) ++s2;
    }
    return {s1, s2};
}

double lognorm_from_pieces(const NormalizerPieces& pieces, double lg1, double lg2) {
    if (pieces.len.empty()) return kNegInf;
    // log-sum-exp over the pieces
    double emax = kNegInf;
    for (std::size_t p = 0; p < pieces.len.size(); ++p) {
        double ex = pieces.k[p] * lg1 + pieces.l[p] * lg2;
        if (ex > emax) emax = ex;
    }
    double acc = 0.0;
    for (std::size_t p = 0; p < pieces.len.size(); ++p) {
        double ex = pieces.k[p] * lg1 + pieces.l[p] * lg2;
        acc += std::exp(ex - emax) * pieces.len[p];
    }
    return emax + std::log(acc);
}

double full_conditional_lognorm(const ConditionalState& state, std::size_t i) {
    NormalizerPieces pieces = conditional_pieces(state, i);
    if (pieces.len.empty())
        throw error(errc::degenerate_conditional,
                    "full conditional: entire z-window forbidden for site " + std::to_string(i));
    return lognorm_from_pieces(pieces, std::log(state.spec().gamma1),
                               std::log(state.spec().gamma2));
}

double full_conditional_logdensity(const ConditionalState& state, std::size_t i,
                                   double z_candidate) {
    if (!state.window_z().contains(z_candidate)) return kNegInf;
    if (!state.hard_core_ok(i, z_candidate)) return kNegInf;
    auto [s1, s2] = state.site_counts(i, z_candidate);
    double lognorm = full_conditional_lognorm(state, i);
    return s1 * std::log(state.spec().gamma1) + s2 * std::log(state.spec().gamma2) - lognorm;
}

std::vector<double> feasible_initial_z(const std::vector<Vec2>& xy, const MrfModelSpec& spec,
                                       const Interval& wz, int attempts, RngStream& rng) {
    const std::size_t n = xy.size();
    std::vector<double> z(n);
    if (spec.h <= 0.0) {
        for (auto& v : z) v = rng.uniform(wz.lo, wz.hi);
        return z;
    }
    // pairs that can ever violate the hard core
    std::vector<std::pair<std::uint32_t, std::uint32_t>> close;
    std::vector<double> close_d;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = dist2d(xy[i], xy[j]);
            if (d < spec.h) {
                close.emplace_back(i, j);
                close_d.push_back(d);
            }
        }
    const double h2 = spec.h * spec.h;
    for (int a = 0; a < attempts; ++a) {
        for (auto& v : z) v = rng.uniform(wz.lo, wz.hi);
        bool ok = true;
        for (std::size_t p = 0; p < close.size() && ok; ++p) {
            double dz = z[close[p].first] - z[close[p].second];
            if (close_d[p] * close_d[p] + dz * dz < h2) ok = false;
        }
        if (ok) return z;
    }
    // sequential placement with per-point rejection
    std::vector<std::vector<std::pair<std::uint32_t, double>>> earlier(n);
    for (std::size_t p = 0; p < close.size(); ++p)
        earlier[close[p].second].emplace_back(close[p].first, close_d[p]);
    for (int pass = 0; pass < 100; ++pass) {
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            bool placed = false;
            for (int t = 0; t < 1000 && !placed; ++t) {
                double v = rng.uniform(wz.lo, wz.hi);
                placed = true;
                for (const auto& [j, d] : earlier[i]) {
                    double dz = z[j] - v;
                    if (d * d + dz * dz < h2) {
                        placed = false;
                        break;
                    }
                }
                if (placed) z[i] = v;
            }
            if (!placed) ok = false;
        }
        if (ok) return z;
    }
    throw error(errc::initialization_failure,
                "mh_sample_z: no feasible initial z-vector found (hard core too dense)");
}

MhResult mh_sample_z(const std::vector<Vec2>& xy, const MrfModelSpec& spec, const Interval& wz,
                     const MhOptions& options, RngStream& rng, const std::vector<double>* init) {
    if (options.sweeps < 1) throw error(errc::invalid_config, "mh_sample_z: sweeps must be >= 1");
    std::vector<double> z0 =
        init ? *init : feasible_initial_z(xy, spec, wz, options.init_attempts, rng);
    ConditionalState state(xy, std::move(z0), wz, spec);
    if (init && unnorm_logdensity(state) == kNegInf)
        throw error(errc::initialization_failure, "mh_sample_z: provided initial state violates the hard core");

    const double lg1 = std::log(spec.gamma1);
    const double lg2 = std::log(spec.gamma2);
    const std::size_t n = state.size();
    MhResult out;
    for (int sweep = 0; sweep < options.sweeps; ++sweep) {
        for (std::size_t i = 0; i < n; ++i) {
            double zp = rng.uniform(wz.lo, wz.hi);
            ++out.proposals;
            if (!state.hard_core_ok(i, zp)) continue;
            auto [s1_new, s2_new] = state.site_counts(i, zp);
            auto [s1_old, s2_old] = state.site_counts(i, state.z(i));
            double delta = (s1_new - s1_old) * lg1 + (s2_new - s2_old) * lg2;
            if (delta >= 0.0 || rng.u01() < std::exp(delta)) {
                state.set_z(i, zp);
                ++out.accepted;
            }
        }
        if (options.thin > 0 && (sweep + 1) % options.thin == 0) out.trace.push_back(state.z());
    }
    out.z = state.z();
    return out;
}

} // namespace colpp
