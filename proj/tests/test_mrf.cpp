#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "colpp/mrf.hpp"
#include "colpp/models.hpp"
#include "colpp/summaries.hpp"
#include "colpp/threading.hpp"
#include "oracles.hpp"

using namespace colpp;

namespace {

MrfModelSpec spec_model5_L3() {
    auto fx = oracles::mrf_L3();
    MrfModelSpec s;
    s.model_id = 5;
    s.gamma1 = fx.gamma1;
    s.gamma2 = fx.gamma2;
    s.h = fx.h;
    s.r1 = fx.r1;
    s.t1 = fx.t1;
    s.r2 = fx.r2;
    s.t2 = fx.t2;
    return s;
}

// clustered xy sites so that neighbourhoods are non-trivial
std::vector<Vec2> clustered_sites(std::size_t n, double side, std::uint64_t seed) {
    RngStream rng(seed, 0);
    std::vector<Vec2> xy;
    while (xy.size() < n) {
        Vec2 centre{rng.uniform(0, side), rng.uniform(0, side)};
        int k = 1 + static_cast<int>(rng.below(4));
        for (int i = 0; i < k && xy.size() < n; ++i)
            xy.push_back({std::clamp(centre.x + 4.0 * rng.normal(), 0.0, side),
                          std::clamp(centre.y + 4.0 * rng.normal(), 0.0, side)});
    }
    return xy;
}

} // namespace

TEST_CASE("spec validation enforces the table constraints") {
    double a = 407.7;
    MrfModelSpec ok = spec_model5_L3();
    CHECK_NOTHROW(ok.validate(a));
    MrfModelSpec bad = ok;
    bad.r2 = bad.r1 + 1.0; // needs r1 >= r2
    CHECK_THROWS_AS(bad.validate(a), error);
    bad = ok;
    bad.t2 = bad.t1; // needs t2 > t1
    CHECK_THROWS_AS(bad.validate(a), error);
    bad = ok;
    bad.h = 500.0; // h must stay below the window depth
    CHECK_THROWS_AS(bad.validate(a), error);
    MrfModelSpec m2;
    m2.model_id = 2;
    m2.gamma1 = 0.5;
    m2.h = 5.0;
    m2.r1 = 4.0; // ball must not fit inside the hard core
    CHECK_THROWS_AS(m2.validate(a), error);
    m2.r1 = 6.0;
    CHECK_NOTHROW(m2.validate(a));
    MrfModelSpec m3;
    m3.model_id = 3;
    m3.gamma1 = 0.5;
    m3.gamma2 = 2.0; // models 2-4 fix gamma2 = 1
    m3.r1 = 3.0;
    m3.t1 = 4.0;
    CHECK_THROWS_AS(m3.validate(a), error);
}

TEST_CASE("pair_counts single-pair indicators") {
    Interval wz{0.0, 100.0};
    // model 3 cylinder r=10, t=5; planar distance 3
    MrfModelSpec m3;
    m3.model_id = 3;
    m3.gamma1 = 0.5;
    m3.r1 = 10.0;
    m3.t1 = 5.0;
    {
        ConditionalState st({{0, 0}, {3, 0}}, {10.0, 14.0}, wz, m3); // dz = 4
        CHECK(pair_counts(st).first == 1);
    }
    {
        ConditionalState st({{0, 0}, {3, 0}}, {10.0, 16.0}, wz, m3); // dz = 6
        CHECK(pair_counts(st).first == 0);
    }
    // model 5 fixture regions: dxy = 5, dz = 20 sits in the shell
    MrfModelSpec m5 = spec_model5_L3();
    ConditionalState st({{0, 0}, {5, 0}}, {30.0, 50.0}, wz, m5);
    auto [s1, s2] = pair_counts(st);
    CHECK(s1 == 0);
    CHECK(s2 == 1);
}

TEST_CASE("pair_counts equals a brute-force double loop") {
    Interval wz{0.0, 120.0};
    auto xy = clustered_sites(30, 80.0, 99);
    RngStream rng(100, 0);
    std::vector<double> z(xy.size());
    for (auto& v : z) v = rng.uniform(0, 120);
    for (int model : {2, 3, 4, 5}) {
        MrfModelSpec spec;
        spec.model_id = model;
        spec.gamma1 = 0.6;
        spec.gamma2 = model == 5 ? 1.9 : 1.0;
        spec.h = 1.0;
        spec.r1 = model == 2 ? 9.0 : 12.0;
        spec.t1 = 7.0;
        spec.r2 = 8.0;
        spec.t2 = 25.0;
        ConditionalState st(xy, z, wz, spec);
        long s1 = 0, s2 = 0;
        for (std::size_t i = 0; i + 1 < xy.size(); ++i)
            for (std::size_t j = i + 1; j < xy.size(); ++j) {
                double d = dist2d(xy[i], xy[j]);
                double dz = z[i] - z[j];
                if (spec.has_region1() && spec.region1().contains(d, 0.0, dz)) ++s1;
                if (spec.has_region2() && spec.region2().contains(d, 0.0, dz)) ++s2;
            }
        auto got = pair_counts(st);
        CHECK(got.first == s1);
        CHECK(got.second == s2);
        // swapping two indices leaves the counts unchanged
        auto xy2 = xy;
        auto z2 = z;
        std::swap(xy2[3], xy2[11]);
        std::swap(z2[3], z2[11]);
        auto got2 = pair_counts(ConditionalState(xy2, z2, wz, spec));
        CHECK(got2 == got);
    }
}

TEST_CASE("unnorm_logdensity values and hard-core wall") {
    Interval wz{0.0, 100.0};
    // binomial special case: gamma = 1, h = 0 gives log-density zero
    MrfModelSpec flat;
    flat.model_id = 1;
    RngStream rng(7, 0);
    for (int rep = 0; rep < 5; ++rep) {
        auto xy = clustered_sites(15, 60.0, 200 + rep);
        std::vector<double> z(xy.size());
        for (auto& v : z) v = rng.uniform(0, 100);
        CHECK(unnorm_logdensity(ConditionalState(xy, z, wz, flat)) == 0.0);
    }
    // a pair closer than h is forbidden
    MrfModelSpec hc;
    hc.model_id = 1;
    hc.h = 5.0;
    ConditionalState bad({{0, 0}, {1, 0}}, {10.0, 12.0}, wz, hc);
    CHECK(unnorm_logdensity(bad) == -std::numeric_limits<double>::infinity());
    // boundary pair at exactly h is allowed
    ConditionalState edge({{0, 0}, {3, 0}}, {10.0, 14.0}, wz, hc);
    CHECK(unnorm_logdensity(edge) == 0.0);

    // fixture value: s1 = 1 and s2 = 1 gives log(0.41) + log(1.78)
    MrfModelSpec m5 = spec_model5_L3();
    std::vector<Vec2> xy = {{0, 0}, {5, 0}, {5, 3}};
    std::vector<double> z = {30.0, 36.0, 60.0};
    // pair (0,1): dxy 5, dz 6 -> inside B1; pair (1,2): dxy 3, dz 24 -> shell;
    // pair (0,2): dxy ~5.8, dz 30 -> shell too; adjust to keep exactly one
    z[2] = 66.0; // pair(0,2): dz 36 > t2; pair(1,2): dz 30 in (11.5, 35.5]
    ConditionalState st(xy, z, wz, m5);
    auto [s1, s2] = pair_counts(st);
    REQUIRE(s1 == 1);
    REQUIRE(s2 == 1);
    CHECK(unnorm_logdensity(st) ==
          doctest::Approx(std::log(0.41) + std::log(1.78)).epsilon(1e-14));
}

TEST_CASE("z-translation invariance of the unnormalised density") {
    Interval wz{0.0, 150.0};
    MrfModelSpec m5 = spec_model5_L3();
    auto xy = clustered_sites(25, 70.0, 321);
    RngStream rng(55, 0);
    std::vector<double> z(xy.size());
    for (auto& v : z) v = rng.uniform(10, 80);
    ConditionalState st(xy, z, wz, m5);
    double base = unnorm_logdensity(st);
    for (double shift : {5.0, 31.7, 69.9}) {
        std::vector<double> zs = z;
        for (auto& v : zs) v += shift;
        ConditionalState st2(xy, zs, wz, m5);
        CHECK(unnorm_logdensity(st2) == base); // counts are integers, exactly equal
    }
}

TEST_CASE("full_conditional_lognorm: no neighbours and single-cylinder overlap") {
    Interval wz{0.0, 100.0};
    MrfModelSpec m3;
    m3.model_id = 3;
    m3.gamma1 = 0.5;
    m3.r1 = 10.0;
    m3.t1 = 5.0;
    // lone site: log of the window length
    ConditionalState lone({{0, 0}, {50, 0}}, {20.0, 80.0}, wz, m3);
    CHECK(full_conditional_lognorm(lone, 0) == doctest::Approx(std::log(100.0)).epsilon(1e-14));
    // one neighbour, overlap length ell = 2 t1 inside the window:
    // c_i = gamma ell + (a - ell)
    ConditionalState two({{0, 0}, {3, 0}}, {50.0, 50.0}, wz, m3);
    double expect = 0.5 * 10.0 + 90.0;
    CHECK(full_conditional_lognorm(two, 0) == doctest::Approx(std::log(expect)).epsilon(1e-12));
}

TEST_CASE("full_conditional_lognorm matches the adaptive quadrature oracle") {
    Interval wz{0.0, 120.0};
    RngStream rng(404, 0);
    int checked = 0;
    for (int rep = 0; rep < 40; ++rep) {
        int model = 2 + static_cast<int>(rng.below(4));
        MrfModelSpec spec;
        spec.model_id = model;
        spec.gamma1 = std::exp(rng.uniform(-1.2, 1.2));
        spec.gamma2 = model == 5 ? std::exp(rng.uniform(-1.2, 1.2)) : 1.0;
        spec.h = rng.uniform(0.0, 6.0);
        spec.r1 = spec.h + rng.uniform(1.0, 14.0);
        spec.t1 = rng.uniform(2.0, 10.0);
        if (model == 5) {
            spec.r2 = rng.uniform(0.5, spec.r1);
            spec.t2 = spec.t1 + rng.uniform(2.0, 20.0);
        }
        auto xy = clustered_sites(20, 50.0, 1000 + rep);
        std::vector<double> z(xy.size());
        for (auto& v : z) v = rng.uniform(0, 120);
        ConditionalState st(xy, z, wz, spec);
        for (std::size_t i = 0; i < 5; ++i) {
            double got = full_conditional_lognorm(st, i);
            std::function<double(double)> f = [&](double zc) {
                return oracles::mrf_integrand(xy, z, spec, i, zc);
            };
            double ref = oracles::panel_quadrature(f, oracles::mrf_panels(xy, z, spec, i, wz), 1e-12);
            CHECK(got == doctest::Approx(std::log(ref)).epsilon(1e-9));
            ++checked;
        }
    }
    CHECK(checked == 200);
}

TEST_CASE("full conditional density integrates to one and respects walls") {
    Interval wz{0.0, 90.0};
    MrfModelSpec m5 = spec_model5_L3();
    auto xy = clustered_sites(18, 40.0, 77);
    RngStream rng(31, 0);
    std::vector<double> z(xy.size());
    // build a feasible state
    z = feasible_initial_z(xy, m5, wz, 10000, rng);
    ConditionalState st(xy, z, wz, m5);
    for (std::size_t i = 0; i < 4; ++i) {
        std::function<double(double)> f = [&](double zc) {
            double ld = full_conditional_logdensity(st, i, zc);
            return std::isfinite(ld) ? std::exp(ld) : 0.0;
        };
        double total = oracles::panel_quadrature(f, oracles::mrf_panels(xy, z, m5, i, wz), 1e-13);
        CHECK(std::fabs(total - 1.0) < 1e-8);
    }
    // uniform special case: density is 1/a everywhere
    MrfModelSpec flat;
    flat.model_id = 1;
    ConditionalState uf(xy, z, wz, flat);
    CHECK(full_conditional_logdensity(uf, 0, 45.0) ==
          doctest::Approx(std::log(1.0 / 90.0)).epsilon(1e-14));
    // hard-core violation gives -inf
    MrfModelSpec hc = m5;
    ConditionalState hcst(xy, z, wz, hc);
    // find a candidate violating the hard core against some neighbour
    bool found = false;
    for (std::size_t i = 0; i < xy.size() && !found; ++i) {
        auto [idx, dist] = hcst.neighbours(i);
        for (std::size_t k = 0; k < hcst.neighbour_count(i); ++k) {
            if (dist[k] < hc.h * 0.7) {
                CHECK(full_conditional_logdensity(hcst, i, hcst.z(idx[k])) ==
                      -std::numeric_limits<double>::infinity());
                found = true;
                break;
            }
        }
    }
    CHECK(found);
}

TEST_CASE("normalizer is continuous in the region parameters away from coincidences") {
    Interval wz{0.0, 120.0};
    auto xy = clustered_sites(20, 50.0, 904);
    RngStream rng(21, 0);
    std::vector<double> z(xy.size());
    for (auto& v : z) v = rng.uniform(0, 120);
    MrfModelSpec spec;
    spec.model_id = 3;
    spec.gamma1 = 0.6;
    spec.r1 = 12.341; // away from any pair distance
    spec.t1 = 7.177;
    double base = 0.0, up = 0.0, down = 0.0;
    for (std::size_t i = 0; i < xy.size(); ++i) {
        base += full_conditional_lognorm(ConditionalState(xy, z, wz, spec), i);
        MrfModelSpec s2 = spec;
        s2.t1 += 1e-7;
        up += full_conditional_lognorm(ConditionalState(xy, z, wz, s2), i);
        s2.t1 = spec.t1 - 1e-7;
        down += full_conditional_lognorm(ConditionalState(xy, z, wz, s2), i);
    }
    CHECK(std::fabs(up - base) < 1e-4);
    CHECK(std::fabs(down - base) < 1e-4);
}

TEST_CASE("degenerate conditional raises the documented error") {
    Interval wz{0.0, 10.0};
    MrfModelSpec hc;
    hc.model_id = 1;
    hc.h = 9.0;
    // site 0 is planar-close to a z-centred neighbour: every z is forbidden
    ConditionalState st({{0, 0}, {0.5, 0}}, {5.0, 5.0}, wz, hc);
    // z in [0,10], neighbour at z=5 with w = sqrt(81 - 0.25) ~ 8.99 covers all
    CHECK_THROWS_AS(full_conditional_lognorm(st, 0), error);
}

TEST_CASE("mh acceptance ratio equals the global density ratio") {
    Interval wz{0.0, 100.0};
    MrfModelSpec m5 = spec_model5_L3();
    auto xy = clustered_sites(20, 45.0, 808);
    RngStream rng(66, 0);
    std::vector<double> z = feasible_initial_z(xy, m5, wz, 10000, rng);
    ConditionalState st(xy, z, wz, m5);
    const double lg1 = std::log(m5.gamma1), lg2 = std::log(m5.gamma2);
    int compared = 0;
    for (int trial = 0; trial < 400; ++trial) {
        std::size_t i = rng.below(xy.size());
        double zp = rng.uniform(wz.lo, wz.hi);
        double global_before = unnorm_logdensity(st);
        if (!st.hard_core_ok(i, zp)) {
            // global ratio must also be -inf
            std::vector<double> z2 = st.z();
            z2[i] = zp;
            CHECK(unnorm_logdensity(ConditionalState(xy, z2, wz, m5)) ==
                  -std::numeric_limits<double>::infinity());
            continue;
        }
        auto [n1, n2] = st.site_counts(i, zp);
        auto [o1, o2] = st.site_counts(i, st.z(i));
        double local = (n1 - o1) * lg1 + (n2 - o2) * lg2;
        std::vector<double> z2 = st.z();
        z2[i] = zp;
        double global_after = unnorm_logdensity(ConditionalState(xy, z2, wz, m5));
        CHECK(local == doctest::Approx(global_after - global_before).epsilon(1e-12));
        ++compared;
    }
    CHECK(compared > 200);
}

TEST_CASE("mh with flat density accepts everything and mixes to uniform") {
    Interval wz{0.0, 407.7};
    MrfModelSpec flat;
    flat.model_id = 1;
    auto xy = clustered_sites(200, 300.0, 4242);
    MhOptions opt;
    opt.sweeps = 50;
    opt.thin = 1;
    RngStream rng(2718, 0);
    MhResult res = mh_sample_z(xy, flat, wz, opt, rng);
    CHECK(res.accepted == res.proposals);
    std::vector<double> pooled;
    for (const auto& tr : res.trace) pooled.insert(pooled.end(), tr.begin(), tr.end());
    CHECK(oracles::ks_uniform(pooled, wz.lo, wz.hi) < oracles::ks_critical_1pct(pooled.size()));
}

TEST_CASE("mh in the forbidden-pair limit empties the B1 region") {
    Interval wz{0.0, 120.0};
    MrfModelSpec spec;
    spec.model_id = 3;
    spec.gamma1 = 1e-12; // gamma -> 0 forbids pairs inside the cylinder
    spec.r1 = 40.0;
    spec.t1 = 10.0;
    // few enough points that mutual z-separation above t1 is attainable
    auto xy = clustered_sites(8, 25.0, 515);
    MhOptions opt;
    opt.sweeps = 400;
    RngStream rng(13, 0);
    MhResult res = mh_sample_z(xy, spec, wz, opt, rng);
    ConditionalState st(xy, res.z, wz, spec);
    CHECK(pair_counts(st).first == 0);
}

TEST_CASE("mh at the final-model parameters reshapes the cylindrical K") {
    // against uniform z, the fitted conditional model moves mass from stunted
    // cylinders (short-range repulsion) into elongated ones (shell attraction)
    Window3 w = oracles::window_L3();
    MrfModelSpec m5 = spec_model5_L3();
    ClusterModelParams params{0.0040, 2.42, 5.45, CentreKind::jinc_dpp};
    DppSpectralConfig cfg;
    cfg.extension_margin = 0.0;
    const int reps = 60;
    // cylK at (r=15, t=10) inside the repulsive cylinder and (r=11, t=35)
    // spanning the attractive shell
    std::vector<double> rg = {11.0, 15.0};
    std::vector<double> tg = {10.0, 35.0};
    std::vector<double> mrf_short(reps), mrf_long(reps), unif_short(reps), unif_long(reps);
    parallel_for(reps, default_threads(), [&](std::size_t rep) {
        RngStream rng(9300, rep);
        PointPattern xy = simulate_dtpp(w.face_xy(), params, cfg, rng);
        MhOptions opt;
        opt.sweeps = 100;
        MhResult mh = mh_sample_z(xy.xy_coords(), m5, w.z, opt, rng);
        std::vector<Vec3> pts = xy.points();
        for (std::size_t i = 0; i < pts.size(); ++i) pts[i].z = mh.z[i];
        auto ck = cylk_est(PointPattern::spatial(pts, w), rg, tg);
        mrf_short[rep] = ck.at(1, 0);
        mrf_long[rep] = ck.at(0, 1);
        // same planar pattern with independent uniform z
        RngStream zr(9301, rep);
        auto cu = cylk_est(attach_uniform_z(xy, w, zr), rg, tg);
        unif_short[rep] = cu.at(1, 0);
        unif_long[rep] = cu.at(0, 1);
    });
    double d_short = oracles::mean(mrf_short) - oracles::mean(unif_short);
    double d_long = oracles::mean(mrf_long) - oracles::mean(unif_long);
    CHECK(d_short < 0.0); // fewer pairs in stunted cylinders
    CHECK(d_long > 0.0);  // more pairs in elongated ones
}

TEST_CASE("mh determinism and initialization failure") {
    Interval wz{0.0, 100.0};
    MrfModelSpec m5 = spec_model5_L3();
    auto xy = clustered_sites(30, 60.0, 616);
    MhOptions opt;
    opt.sweeps = 20;
    RngStream a(99, 0), b(99, 0);
    MhResult ra = mh_sample_z(xy, m5, wz, opt, a);
    MhResult rb = mh_sample_z(xy, m5, wz, opt, b);
    CHECK(ra.z == rb.z);

    // impossible hard core: sites stacked planarly, h close to the window depth
    MrfModelSpec dense;
    dense.model_id = 1;
    dense.h = 90.0;
    std::vector<Vec2> stack = {{0, 0}, {0.1, 0}, {0.2, 0}, {0.3, 0}};
    RngStream c(1, 0);
    CHECK_THROWS_AS(mh_sample_z(stack, dense, wz, MhOptions{}, c), error);
}
