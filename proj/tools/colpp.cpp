// Command line front end: simulate, summaries, fit, mrf-sample, envelope,
// pipeline. Exit codes: 0 success, 2 configuration error, 3 numerical
// failure, 4 envelope rejection (pipeline with --fail-on-reject).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "colpp/io.hpp"
#include "colpp/pipeline.hpp"

using namespace colpp;
using nlohmann::json;

namespace {

int exit_code_for(const error& e) {
    switch (e.kind()) {
    case errc::numerical_failure:
    case errc::degenerate_conditional:
    case errc::initialization_failure:
        return 3;
    default:
        return 2;
    }
}

json load_json_arg(const std::string& arg) {
    // accepts a path or inline JSON
    if (!arg.empty() && (arg.front() == '{' || arg.front() == '[')) return json::parse(arg);
    return read_json_file(arg);
}

ClusterModelParams cluster_from_json(const json& p, CentreKind kind) {
    ClusterModelParams c;
    c.kappa = p.at("kappa").get<double>();
    c.alpha_a = p.at("alpha_a").get<double>();
    c.sigma = p.at("sigma").get<double>();
    c.centre_kind = kind;
    c.validate();
    return c;
}

DppSpectralConfig dpp_from_json(const json& p) {
    DppSpectralConfig cfg;
    if (p.contains("extension_margin")) cfg.extension_margin = p["extension_margin"].get<double>();
    if (p.contains("truncation")) cfg.truncation = p["truncation"].get<int>();
    return cfg;
}

int cmd_simulate(const std::string& model, const std::string& params_arg,
                 const std::string& window_arg, std::uint64_t seed, const std::string& out) {
    json params = load_json_arg(params_arg);
    int dim = 0;
    Window3 window = window_from_json(load_json_arg(window_arg), &dim);
    RngStream rng(seed, 0);
    PointPattern pattern = [&] {
        if (model == "csr") {
            if (dim == 2) return simulate_csr_planar(window.face_xy(), params.at("lambda"), rng);
            return simulate_csr(window, params.at("lambda").get<double>(), rng);
        }
        if (model == "thomas")
            return simulate_thomas(window.face_xy(),
                                   cluster_from_json(params, CentreKind::poisson), rng);
        if (model == "jinc-dpp")
            return simulate_jinc_dpp(window.face_xy(), params.at("kappa").get<double>(),
                                     dpp_from_json(params), rng);
        if (model == "dtpp")
            return simulate_dtpp(window.face_xy(), cluster_from_json(params, CentreKind::jinc_dpp),
                                 dpp_from_json(params), rng);
        if (model == "plcpp")
            return simulate_plcpp(window, cluster_from_json(params, CentreKind::poisson), rng);
        if (model == "dlcpp")
            return simulate_dlcpp(window, cluster_from_json(params, CentreKind::jinc_dpp),
                                  dpp_from_json(params), rng);
        throw error(errc::invalid_config, "unknown model '" + model + "'");
    }();
    write_pattern_csv(pattern, out);
    std::string wout = out + ".window.json";
    write_window_json(pattern, wout);
    std::cout << "wrote " << pattern.size() << " points to " << out << " (window " << wout << ")\n";
    return 0;
}

int cmd_fit(const std::string& method, const std::string& model, const std::string& data_csv,
            const std::string& window_arg, const std::string& config_arg, const std::string& out) {
    PointPattern data = read_pattern(data_csv, window_arg);
    json cfg = config_arg.empty() ? json::object() : load_json_arg(config_arg);
    json result;
    if (method == "mincon") {
        PointPattern xy = data.dim() == 3 ? data.project_xy() : data;
        ContrastConfig cc;
        cc.q = cfg.value("q", cc.q);
        cc.p = cfg.value("p", cc.p);
        cc.r_min = cfg.value("r_min", cc.r_min);
        cc.r_max = cfg.value("r_max", xy.window_xy().shortest_side() / 4.0);
        cc.grid_n = cfg.value("grid_n", cc.grid_n);
        ParamBounds bounds;
        bounds.kappa_lo = cfg.value("kappa_lo", bounds.kappa_lo);
        bounds.kappa_hi = cfg.value("kappa_hi", bounds.kappa_hi);
        bounds.sigma_lo = cfg.value("sigma_lo", bounds.sigma_lo);
        bounds.sigma_hi = cfg.value("sigma_hi", bounds.sigma_hi);
        std::vector<double> grid =
            linspace_grid(cc.r_max / static_cast<double>(cc.grid_n), cc.r_max, cc.grid_n);
        bool thomas = model == "thomas";
        if (!thomas && model != "dtpp")
            throw error(errc::invalid_config, "mincon model must be thomas or dtpp");
        SummaryFunction1D t_hat = thomas ? k_est(xy, grid) : pcf_est(xy, grid);
        MinContrastResult fit =
            min_contrast_fit(t_hat, thomas ? ContrastFamily::thomas_K : ContrastFamily::dtpp_pcf,
                             cc, bounds, xy.intensity_hat());
        result["method"] = "mincon";
        result["family"] = thomas ? "thomas_K" : "dtpp_pcf";
        result["estimates"] = {{"kappa", fit.kappa}, {"sigma", fit.sigma}, {"alpha_a", fit.alpha_a}};
        result["objective"] = fit.contrast;
        result["diagnostics"] = {{"at_bound", fit.at_bound}, {"n_eval", fit.n_eval}};
        ModelHandle handle;
        handle.type = thomas ? ModelType::plcpp : ModelType::dlcpp;
        handle.cluster = {fit.kappa, fit.alpha_a, fit.sigma,
                          thomas ? CentreKind::poisson : CentreKind::jinc_dpp};
        if (!thomas && cfg.contains("dpp_margin"))
            handle.dpp.extension_margin = cfg["dpp_margin"].get<double>();
        result["model"] = model_handle_to_json(handle);
    } else if (method == "mple") {
        if (data.dim() != 3) throw error(errc::invalid_config, "mple needs a 3D pattern");
        int model_id = std::stoi(model);
        MpleFitConfig mc;
        if (cfg.contains("r_grid")) mc.r_grid = cfg["r_grid"].get<std::vector<double>>();
        if (cfg.contains("t_grid")) mc.t_grid = cfg["t_grid"].get<std::vector<double>>();
        mc.refine_model5 = cfg.value("refine_model5", true);
        mc.lg_lo = cfg.value("lg_lo", mc.lg_lo);
        mc.lg_hi = cfg.value("lg_hi", mc.lg_hi);
        mc.tol = cfg.value("tol", mc.tol);
        MpleResult fit = mple_fit(data.xy_coords(), data.z_coords(), data.window_z(), model_id, mc);
        result["method"] = "mple";
        result["model_id"] = model_id;
        result["estimates"] = mrf_spec_to_json(fit.spec);
        result["lp"] = fit.lp;
        result["diagnostics"] = {{"cells", fit.cells_evaluated},
                                 {"cells_infeasible", fit.cells_infeasible}};
        ModelHandle handle;
        handle.type = ModelType::mrf;
        handle.mrf = fit.spec;
        result["model"] = model_handle_to_json(handle); // planar part added by the caller
    } else {
        throw error(errc::invalid_config, "method must be mincon or mple");
    }
    result["config"] = cfg;
    write_text_file(out, result.dump(2) + "\n");
    std::cout << "wrote " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"columnar point process toolkit"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate a point process model");
    std::string sim_model, sim_params, sim_window, sim_out;
    std::uint64_t sim_seed = 1;
    sim->add_option("--model", sim_model, "csr|thomas|jinc-dpp|dtpp|plcpp|dlcpp")->required();
    sim->add_option("--params", sim_params, "parameter JSON (inline or path)")->required();
    sim->add_option("--window", sim_window, "window JSON (inline or path)")->required();
    sim->add_option("--seed", sim_seed, "random seed");
    sim->add_option("--out", sim_out, "output CSV path")->required();

    // summaries
    auto* summ = app.add_subcommand("summaries", "compute functional summaries");
    std::string summ_data, summ_window, summ_out;
    std::size_t summ_grid = 128;
    summ->add_option("--data", summ_data, "pattern CSV")->required();
    summ->add_option("--window", summ_window, "window JSON path")->required();
    summ->add_option("--out", summ_out, "output directory")->required();
    summ->add_option("--grids", summ_grid, "1D grid size");

    // fit
    auto* fit = app.add_subcommand("fit", "fit a model");
    std::string fit_method, fit_model, fit_data, fit_window, fit_config, fit_out;
    fit->add_option("--method", fit_method, "mincon|mple")->required();
    fit->add_option("--model", fit_model, "thomas|dtpp (mincon) or 1..5 (mple)")->required();
    fit->add_option("--data", fit_data, "pattern CSV")->required();
    fit->add_option("--window", fit_window, "window JSON path")->required();
    fit->add_option("--config", fit_config, "config JSON (inline or path)");
    fit->add_option("--out", fit_out, "output JSON path")->required();

    // mrf-sample
    auto* mrf = app.add_subcommand("mrf-sample", "sample z-coordinates given xy sites");
    std::string mrf_xy, mrf_window, mrf_spec, mrf_out;
    int mrf_sweeps = 100;
    std::uint64_t mrf_seed = 1;
    mrf->add_option("--xy", mrf_xy, "planar pattern CSV")->required();
    mrf->add_option("--window", mrf_window, "3D window JSON path")->required();
    mrf->add_option("--spec", mrf_spec, "model spec JSON (inline or path)")->required();
    mrf->add_option("--sweeps", mrf_sweeps, "systematic sweeps");
    mrf->add_option("--seed", mrf_seed, "random seed");
    mrf->add_option("--out", mrf_out, "output CSV path (x,y,z)")->required();

    // envelope
    auto* env = app.add_subcommand("envelope", "global envelope test for a fitted model");
    std::string env_data, env_window, env_model, env_out;
    std::size_t env_sims = 499;
    double env_alpha = 0.05;
    std::uint64_t env_seed = 1;
    unsigned env_threads = 0;
    env->add_option("--data", env_data, "pattern CSV")->required();
    env->add_option("--window", env_window, "window JSON path")->required();
    env->add_option("--model", env_model, "model handle JSON from fit (inline or path)")->required();
    env->add_option("--sims", env_sims,
                    "simulations s (memory is about (s+1) x 20480 doubles)");
    env->add_option("--alpha", env_alpha, "envelope level");
    env->add_option("--seed", env_seed, "random seed");
    env->add_option("--threads", env_threads, "worker threads (0 = auto)");
    env->add_option("--out", env_out, "output directory")->required();

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "full model workflow on one dataset");
    PipelineConfig pc;
    bool fail_on_reject = false;
    pipe->add_option("--data", pc.data_csv, "pattern CSV")->required();
    pipe->add_option("--window", pc.window_json, "window JSON path")->required();
    pipe->add_option("--out", pc.out_dir, "output directory")->required();
    pipe->add_option("--seed", pc.master_seed, "master seed");
    pipe->add_option("--sims", pc.envelope_sims, "envelope simulations per stage");
    pipe->add_option("--alpha", pc.alpha, "envelope level");
    pipe->add_option("--threads", pc.threads, "worker threads (0 = auto)");
    pipe->add_option("--dpp-margin", pc.dpp_margin, "extra spectral margin (micrometres)");
    pipe->add_option("--mh-sweeps", pc.mh_sweeps, "MH sweeps per replicate");
    pipe->add_flag("--fail-on-reject", fail_on_reject, "exit 4 when the final envelope rejects");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_model, sim_params, sim_window, sim_seed, sim_out);
        if (summ->parsed()) {
            PointPattern data = read_pattern(summ_data, summ_window);
            auto files = cmd_summaries(data, summ_out, summ_grid);
            std::cout << "wrote " << files.size() << " summary files to " << summ_out << "\n";
            return 0;
        }
        if (fit->parsed())
            return cmd_fit(fit_method, fit_model, fit_data, fit_window, fit_config, fit_out);
        if (mrf->parsed()) {
            PointPattern xy = read_pattern(mrf_xy, mrf_window);
            int dim = 0;
            Window3 window = window_from_json(read_json_file(mrf_window), &dim);
            if (dim != 3)
                throw error(errc::invalid_config, "mrf-sample: the window JSON must carry z");
            MrfModelSpec spec = mrf_spec_from_json(load_json_arg(mrf_spec));
            MhOptions opt;
            opt.sweeps = mrf_sweeps;
            RngStream rng(mrf_seed, 0);
            MhResult res = mh_sample_z(xy.xy_coords(), spec, window.z, opt, rng);
            std::vector<Vec3> pts = xy.points();
            for (std::size_t i = 0; i < pts.size(); ++i) pts[i].z = res.z[i];
            write_pattern_csv(PointPattern::spatial(std::move(pts), window), mrf_out);
            std::cout << "acceptance rate "
                      << static_cast<double>(res.accepted) / static_cast<double>(res.proposals)
                      << ", wrote " << mrf_out << "\n";
            return 0;
        }
        if (env->parsed()) {
            PointPattern data = read_pattern(env_data, env_window);
            ModelHandle handle = model_handle_from_json(load_json_arg(env_model));
            EnvelopeRun run = run_envelope_pipeline(data, handle, env_sims, env_alpha, env_seed,
                                                    env_threads);
            write_envelope_outputs(run, env_out);
            std::cout << "p-value " << run.result.p_value << (run.result.rejected() ? " (reject)" : "")
                      << ", outputs in " << env_out << "\n";
            return 0;
        }
        if (pipe->parsed()) {
            PipelineOutcome out = cmd_pipeline(pc);
            for (const auto& s : out.stages)
                std::cout << "stage " << s.name << ": p = " << s.p_value
                          << (s.rejected ? " (reject)" : "") << "\n";
            std::cout << "best conditional model: " << out.best_mrf_model << "\n";
            if (fail_on_reject && out.final_rejected) return 4;
            return 0;
        }
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
