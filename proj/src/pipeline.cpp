#include "colpp/pipeline.hpp"

#include <filesystem>

#include "json.hpp"

#include "colpp/io.hpp"

namespace colpp {

using nlohmann::json;

namespace {

struct Manifest {
    json entries = json::array();
    std::string root;

    void record(const std::string& stage, const std::string& path) {
        json e;
        e["stage"] = stage;
        e["path"] = std::filesystem::relative(path, root).string();
        char buf[20];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(fnv1a_file(path)));
        e["fnv1a64"] = buf;
        entries.push_back(e);
    }
};

std::uint64_t config_hash(const json& j) {
    std::string s = j.dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

void write_envelope_stage(const EnvelopeRun& run, const std::string& stage_dir, Manifest& man,
                          const std::string& stage) {
    write_envelope_outputs(run, stage_dir);
    man.record(stage, stage_dir + "/envelope.json");
    for (const auto& name : run.curves.segment_names)
        man.record(stage, stage_dir + "/" + name + ".csv");
}

} // namespace

PipelineOutcome cmd_pipeline(const PipelineConfig& config) {
    namespace fs = std::filesystem;
    if (config.data_csv.empty() || config.window_json.empty() || config.out_dir.empty())
        throw error(errc::invalid_config, "pipeline: data, window and output paths are required");
    PointPattern data = read_pattern(config.data_csv, config.window_json);
    if (data.dim() != 3) throw error(errc::invalid_config, "pipeline: needs a 3D pattern");
    if (data.size() < 2) throw error(errc::insufficient_points, "pipeline: empty or trivial input");
    fs::create_directories(config.out_dir);

    Manifest manifest;
    manifest.root = config.out_dir;
    PipelineOutcome outcome;

    json config_echo;
    config_echo["master_seed"] = config.master_seed;
    config_echo["envelope_sims"] = config.envelope_sims;
    config_echo["alpha"] = config.alpha;
    config_echo["mrf_models"] = config.mrf_models;
    config_echo["dpp_margin"] = config.dpp_margin;
    config_echo["mh_sweeps"] = config.mh_sweeps;

    auto run_stage = [&](const std::string& stage, auto&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            write_text_file(config.out_dir + "/" + stage + ".FAILED", std::string(e.what()) + "\n");
            json partial;
            partial["config"] = config_echo;
            partial["config_hash"] = config_hash(config_echo);
            partial["stages"] = manifest.entries;
            partial["failed_stage"] = stage;
            write_text_file(config.out_dir + "/manifest.json", partial.dump(2) + "\n");
            throw;
        }
    };

    PointPattern xy = data.project_xy();
    const double lambda3 = data.intensity_hat();
    const double lambda_xy = xy.intensity_hat();
    MinContrastResult thomas_fit{}, dtpp_fit{};

    // stage 1: homogeneous Poisson baseline
    run_stage("csr", [&] {
        ModelHandle handle;
        handle.type = ModelType::csr;
        handle.lambda = lambda3;
        EnvelopeRun run =
            run_envelope_pipeline(data, handle, config.envelope_sims, config.alpha,
                                  derive_seed(config.master_seed, "stage:csr"), config.threads,
                                  config.grids);
        json fit;
        fit["method"] = "intensity";
        fit["lambda"] = lambda3;
        fit["model"] = model_handle_to_json(handle);
        write_text_file(config.out_dir + "/csr/fit.json", fit.dump(2) + "\n");
        manifest.record("csr", config.out_dir + "/csr/fit.json");
        write_envelope_stage(run, config.out_dir + "/csr", manifest, "csr");
        outcome.stages.push_back({"csr", run.result.p_value, run.result.rejected()});
    });

    // stage 2: Poisson line-cluster model, K-contrast fit of the projection
    run_stage("plcpp", [&] {
        ContrastConfig cc = config.contrast;
        if (cc.r_max <= 0) cc.r_max = xy.window_xy().shortest_side() / 4.0;
        std::vector<double> grid =
            linspace_grid(cc.r_max / static_cast<double>(cc.grid_n), cc.r_max, cc.grid_n);
        SummaryFunction1D k_hat = k_est(xy, grid);
        thomas_fit = min_contrast_fit(k_hat, ContrastFamily::thomas_K, cc, ParamBounds{}, lambda_xy);

        ModelHandle handle;
        handle.type = ModelType::plcpp;
        handle.cluster = {thomas_fit.kappa, thomas_fit.alpha_a, thomas_fit.sigma,
                          CentreKind::poisson};
        json fit;
        fit["method"] = "mincon";
        fit["family"] = "thomas_K";
        fit["estimates"] = {{"kappa", thomas_fit.kappa},
                            {"sigma", thomas_fit.sigma},
                            {"alpha_a", thomas_fit.alpha_a}};
        fit["objective"] = thomas_fit.contrast;
        fit["at_bound"] = thomas_fit.at_bound;
        fit["model"] = model_handle_to_json(handle);
        write_text_file(config.out_dir + "/plcpp/fit.json", fit.dump(2) + "\n");
        manifest.record("plcpp", config.out_dir + "/plcpp/fit.json");

        EnvelopeRun run =
            run_envelope_pipeline(data, handle, config.envelope_sims, config.alpha,
                                  derive_seed(config.master_seed, "stage:plcpp"), config.threads,
                                  config.grids);
        write_envelope_stage(run, config.out_dir + "/plcpp", manifest, "plcpp");
        outcome.stages.push_back({"plcpp", run.result.p_value, run.result.rejected()});
    });

    // stage 3: determinantal line-cluster model, pcf-contrast fit
    run_stage("dlcpp", [&] {
        ContrastConfig cc = config.contrast;
        if (cc.r_max <= 0) cc.r_max = xy.window_xy().shortest_side() / 4.0;
        std::vector<double> grid =
            linspace_grid(cc.r_max / static_cast<double>(cc.grid_n), cc.r_max, cc.grid_n);
        SummaryFunction1D g_hat = pcf_est(xy, grid);
        dtpp_fit = min_contrast_fit(g_hat, ContrastFamily::dtpp_pcf, cc, ParamBounds{}, lambda_xy);

        ModelHandle handle;
        handle.type = ModelType::dlcpp;
        handle.cluster = {dtpp_fit.kappa, dtpp_fit.alpha_a, dtpp_fit.sigma, CentreKind::jinc_dpp};
        handle.dpp.extension_margin = config.dpp_margin;
        json fit;
        fit["method"] = "mincon";
        fit["family"] = "dtpp_pcf";
        fit["estimates"] = {{"kappa", dtpp_fit.kappa},
                            {"sigma", dtpp_fit.sigma},
                            {"alpha_a", dtpp_fit.alpha_a}};
        fit["objective"] = dtpp_fit.contrast;
        fit["at_bound"] = dtpp_fit.at_bound;
        fit["model"] = model_handle_to_json(handle);
        write_text_file(config.out_dir + "/dlcpp/fit.json", fit.dump(2) + "\n");
        manifest.record("dlcpp", config.out_dir + "/dlcpp/fit.json");

        EnvelopeRun run =
            run_envelope_pipeline(data, handle, config.envelope_sims, config.alpha,
                                  derive_seed(config.master_seed, "stage:dlcpp"), config.threads,
                                  config.grids);
        write_envelope_stage(run, config.out_dir + "/dlcpp", manifest, "dlcpp");
        outcome.stages.push_back({"dlcpp", run.result.p_value, run.result.rejected()});
    });

    // stage 4: conditional z-models by pseudo-likelihood, envelope for the best
    run_stage("mrf", [&] {
        std::vector<Vec2> sites = data.xy_coords();
        std::vector<double> zc = data.z_coords();
        json fits = json::array();
        MpleResult best{};
        bool have_best = false;
        for (int model : config.mrf_models) {
            MpleFitConfig mc = config.mple;
            mc.threads = config.threads;
            json entry;
            entry["model_id"] = model;
            try {
                MpleResult res = mple_fit(sites, zc, data.window_z(), model, mc);
                entry["lp"] = res.lp;
                entry["spec"] = mrf_spec_to_json(res.spec);
                entry["cells"] = res.cells_evaluated;
                entry["cells_infeasible"] = res.cells_infeasible;
                if (!have_best || res.lp > best.lp) {
                    best = res;
                    have_best = true;
                }
            } catch (const error& e) {
                entry["error"] = e.what();
            }
            fits.push_back(entry);
        }
        if (!have_best)
            throw error(errc::infeasible_model, "pipeline: no conditional model admits an MPLE");
        outcome.best_mrf_model = best.spec.model_id;
        outcome.best_mrf_lp = best.lp;

        ModelHandle handle;
        handle.type = ModelType::mrf;
        handle.planar_dpp = true;
        handle.cluster = {dtpp_fit.kappa, dtpp_fit.alpha_a, dtpp_fit.sigma, CentreKind::jinc_dpp};
        handle.dpp.extension_margin = config.dpp_margin;
        handle.mrf = best.spec;
        handle.mh_sweeps = config.mh_sweeps;

        json fit;
        fit["method"] = "mple";
        fit["candidates"] = fits;
        fit["best_model_id"] = best.spec.model_id;
        fit["best_lp"] = best.lp;
        fit["model"] = model_handle_to_json(handle);
        write_text_file(config.out_dir + "/mrf/fit.json", fit.dump(2) + "\n");
        manifest.record("mrf", config.out_dir + "/mrf/fit.json");

        EnvelopeRun run =
            run_envelope_pipeline(data, handle, config.envelope_sims, config.alpha,
                                  derive_seed(config.master_seed, "stage:mrf"), config.threads,
                                  config.grids);
        write_envelope_stage(run, config.out_dir + "/mrf", manifest, "mrf");
        outcome.stages.push_back({"mrf", run.result.p_value, run.result.rejected()});
        outcome.final_p = run.result.p_value;
        outcome.final_rejected = run.result.rejected();
    });

    json man;
    man["config"] = config_echo;
    man["config_hash"] = config_hash(config_echo);
    json stages = json::array();
    for (const auto& s : outcome.stages) {
        json e;
        e["name"] = s.name;
        e["p_value"] = s.p_value;
        e["rejected"] = s.rejected;
        e["seed"] = derive_seed(config.master_seed, ("stage:" + s.name).c_str());
        stages.push_back(e);
    }
    man["stages"] = stages;
    man["best_mrf_model"] = outcome.best_mrf_model;
    man["files"] = manifest.entries;
    write_text_file(config.out_dir + "/manifest.json", man.dump(2) + "\n");
    return outcome;
}

std::vector<std::string> cmd_summaries(const PointPattern& data, const std::string& out_dir,
                                       std::size_t grid_n) {
    std::filesystem::create_directories(out_dir);
    double r_max = default_r_max(data);
    std::vector<double> grid = linspace_grid(r_max / static_cast<double>(grid_n), r_max, grid_n);
    std::vector<std::string> files;
    auto emit = [&](const SummaryFunction1D& s, const std::string& name) {
        std::string path = out_dir + "/" + name + ".csv";
        write_summary_csv(s, path);
        files.push_back(path);
    };
    SummaryFunction1D k = k_est(data, grid);
    emit(k, "K");
    emit(l_from_k(k, data.dim(), false), "L");
    emit(l_from_k(k, data.dim(), true), "Lcentred");
    emit(pcf_est(data, grid), "pcf");
    SummaryFunction1D f = f_est(data, grid);
    SummaryFunction1D g = g_nn_est(data, grid);
    emit(f, "F");
    emit(g, "G");
    emit(j_from_fg(f, g), "J");
    if (data.dim() == 3) {
        double cr = default_cyl_r_max(data), ct = default_cyl_t_max(data);
        std::size_t n2 = 64;
        SummaryFunction2D ck = cylk_est(data, linspace_grid(cr / n2, cr, n2),
                                        linspace_grid(ct / n2, ct, n2));
        std::string path = out_dir + "/cylK.csv";
        write_summary_csv(ck, path);
        files.push_back(path);
    }
    return files;
}

} // namespace colpp
