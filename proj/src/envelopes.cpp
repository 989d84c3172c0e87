#include "colpp/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "colpp/threading.hpp"

namespace colpp {

CurveSet CurveSet::assemble(const ConcatenatedSummary& data,
                            const std::vector<ConcatenatedSummary>& sims) {
    CurveSet out;
    out.segment_names = data.segment_names;
    out.segment_offset = data.segment_offset;
    out.grid_1d = data.grid_1d;
    out.grid_cyl_r = data.grid_cyl_r;
    out.grid_cyl_t = data.grid_cyl_t;
    out.usable.assign(data.values.size(), 1);
    for (std::size_t j = 0; j < data.values.size(); ++j)
        if (!data.defined[j]) out.usable[j] = 0;
    for (const auto& s : sims) {
        if (s.values.size() != data.values.size())
            throw error(errc::invalid_config, "curve set: mismatched curve lengths");
        for (std::size_t j = 0; j < s.values.size(); ++j)
            if (!s.defined[j]) out.usable[j] = 0;
    }
    out.curves.reserve(sims.size() + 1);
    out.curves.push_back(data.values);
    for (const auto& s : sims) out.curves.push_back(s.values);
    return out;
}

std::vector<ErlKey> erl_measure(const CurveSet& curves) {
    const std::size_t nc = curves.curves.size();
    if (nc < 2) throw error(errc::invalid_config, "erl_measure: need data plus simulations");
    const std::size_t len = curves.length();
    if (curves.usable.size() != len)
        throw error(errc::invalid_config, "erl_measure: mask length mismatch");
    for (const auto& c : curves.curves)
        if (c.size() != len) throw error(errc::invalid_config, "erl_measure: curve length mismatch");
    if (nc > 65000) throw error(errc::invalid_config, "erl_measure: too many curves for rank type");

    std::vector<ErlKey> keys(nc);
    std::size_t n_usable = 0;
    for (std::size_t j = 0; j < len; ++j)
        if (curves.usable[j]) ++n_usable;
    for (auto& k : keys) k.reserve(n_usable);

    std::vector<std::uint32_t> order(nc);
    std::vector<double> column(nc);
    for (std::size_t j = 0; j < len; ++j) {
        if (!curves.usable[j]) continue;
        for (std::size_t c = 0; c < nc; ++c) column[c] = curves.curves[c][j];
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(),
                  [&](std::uint32_t a, std::uint32_t b) { return column[a] < column[b]; });
        // tie groups share the minimal applicable one-sided ranks
        std::size_t a = 0;
        while (a < nc) {
            std::size_t b = a;
            while (b + 1 < nc && column[order[b + 1]] == column[order[a]]) ++b;
            std::uint16_t from_below = static_cast<std::uint16_t>(a + 1);
            std::uint16_t from_above = static_cast<std::uint16_t>(nc - b);
            std::uint16_t rank = std::min(from_below, from_above);
            for (std::size_t q = a; q <= b; ++q) keys[order[q]].push_back(rank);
            a = b + 1;
        }
    }
    for (auto& k : keys) std::sort(k.begin(), k.end());
    return keys;
}

EnvelopeResult gerl_test(const CurveSet& curves, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw error(errc::invalid_config, "gerl_test: alpha must be in (0,1)");
    std::vector<ErlKey> keys = erl_measure(curves);
    const std::size_t nc = keys.size();

    // inclusive key-rank of every curve: #{c' : key_c' <= key_c}
    std::vector<std::uint32_t> sorted(nc);
    std::iota(sorted.begin(), sorted.end(), 0u);
    std::sort(sorted.begin(), sorted.end(),
              [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });
    std::vector<std::size_t> inclusive_rank(nc, 0);
    std::size_t a = 0;
    while (a < nc) {
        std::size_t b = a;
        while (b + 1 < nc && keys[sorted[b + 1]] == keys[sorted[a]]) ++b;
        for (std::size_t q = a; q <= b; ++q) inclusive_rank[sorted[q]] = b + 1;
        a = b + 1;
    }

    EnvelopeResult out;
    out.alpha = alpha;
    out.n_curves = nc;
    out.p_value = static_cast<double>(inclusive_rank[0]) / static_cast<double>(nc);

    const std::size_t k_star = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(nc)));
    std::vector<std::uint8_t> retained(nc, 1);
    for (std::size_t c = 0; c < nc; ++c)
        if (inclusive_rank[c] <= k_star) retained[c] = 0;
    out.n_discarded = 0;
    for (std::size_t c = 0; c < nc; ++c)
        if (!retained[c]) ++out.n_discarded;

    const std::size_t len = curves.length();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.lower.assign(len, nan);
    out.upper.assign(len, nan);
    out.flag.assign(len, 0);
    for (std::size_t j = 0; j < len; ++j) {
        if (!curves.usable[j]) continue;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < nc; ++c) {
            if (!retained[c]) continue;
            double v = curves.curves[c][j];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out.lower[j] = lo;
        out.upper[j] = hi;
        double dv = curves.curves[0][j];
        if (dv < lo) out.flag[j] = -1;
        else if (dv > hi) out.flag[j] = 1;
    }
    return out;
}

PointPattern simulate_model(const ModelHandle& handle, const Window3& window, RngStream& rng) {
    switch (handle.type) {
    case ModelType::csr:
        return simulate_csr(window, handle.lambda, rng);
    case ModelType::plcpp:
        return simulate_plcpp(window, handle.cluster, rng);
    case ModelType::dlcpp:
        return simulate_dlcpp(window, handle.cluster, handle.dpp, rng);
    case ModelType::mrf: {
        PointPattern xy = handle.planar_dpp
                              ? simulate_dtpp(window.face_xy(), handle.cluster, handle.dpp, rng)
                              : simulate_thomas(window.face_xy(), handle.cluster, rng);
        MhOptions opt;
        opt.sweeps = handle.mh_sweeps;
        MhResult mh = mh_sample_z(xy.xy_coords(), handle.mrf, window.z, opt, rng);
        std::vector<Vec3> pts = xy.points();
        for (std::size_t i = 0; i < pts.size(); ++i) pts[i].z = mh.z[i];
        return PointPattern::spatial(std::move(pts), window);
    }
    }
    throw error(errc::invalid_config, "simulate_model: unknown model type");
}

EnvelopeRun run_envelope_pipeline(const PointPattern& data, const ModelHandle& handle,
                                  std::size_t s, double alpha, std::uint64_t seed,
                                  unsigned threads, const GerlGrids& grids) {
    if (s < 1) throw error(errc::invalid_config, "envelope: need at least one simulation");
    if (static_cast<double>(s) + 1.0 < 1.0 / alpha)
        throw error(errc::invalid_config, "envelope: s too small for the requested level");
    ConcatenatedSummary data_sum = concat_for_gerl(data, grids);
    std::vector<ConcatenatedSummary> sims(s);
    const Window3 window = data.window3();
    unsigned workers = threads == 0 ? default_threads() : threads;
    parallel_for(s, workers, [&](std::size_t rep) {
        RngStream rng(seed, rep);
        try {
            PointPattern sim = simulate_model(handle, window, rng);
            sims[rep] = concat_for_gerl(sim, grids);
        } catch (const error& e) {
            throw error(e.kind(), "envelope replicate " + std::to_string(rep) + " (seed " +
                                      std::to_string(seed) + "): " + e.what());
        }
    });
    EnvelopeRun out;
    out.curves = CurveSet::assemble(data_sum, sims);
    out.result = gerl_test(out.curves, alpha);
    return out;
}

} // namespace colpp
