#include "colpp/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace colpp {

using nlohmann::json;

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(errc::io_failure, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::io_failure, "cannot write " + path);
    out << content;
}

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw error(errc::io_failure, path + ": " + e.what());
    }
}

void write_pattern_csv(const PointPattern& pattern, const std::string& path) {
    std::ostringstream out;
    out << (pattern.dim() == 2 ? "x,y\n" : "x,y,z\n");
    for (const auto& p : pattern.points()) {
        out << format_g17(p.x) << ',' << format_g17(p.y);
        if (pattern.dim() == 3) out << ',' << format_g17(p.z);
        out << '\n';
    }
    write_text_file(path, out.str());
}

json window_to_json(const Window3& w, int dim) {
    json j;
    j["x"] = {w.x.lo, w.x.hi};
    j["y"] = {w.y.lo, w.y.hi};
    if (dim == 3) j["z"] = {w.z.lo, w.z.hi};
    return j;
}

Window3 window_from_json(const json& j, int* dim_out) {
    auto get = [&](const char* key) -> Interval {
        if (!j.contains(key) || !j[key].is_array() || j[key].size() != 2)
            throw error(errc::io_failure, std::string("window JSON: bad interval '") + key + "'");
        return Interval{j[key][0].get<double>(), j[key][1].get<double>()};
    };
    Window3 w;
    w.x = get("x");
    w.y = get("y");
    if (j.contains("z")) {
        w.z = get("z");
        if (dim_out) *dim_out = 3;
    } else {
        w.z = Interval{0.0, 1.0};
        if (dim_out) *dim_out = 2;
    }
    return w;
}

void write_window_json(const PointPattern& pattern, const std::string& path) {
    write_text_file(path, window_to_json(pattern.window3(), pattern.dim()).dump(2) + "\n");
}

PointPattern read_pattern(const std::string& csv_path, const std::string& window_json_path) {
    int dim = 0;
    Window3 w = window_from_json(read_json_file(window_json_path), &dim);

    std::string text = read_text_file(csv_path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw error(errc::io_failure, csv_path + ": empty file");
    // header decides the column count; tolerate \r endings
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    int cols;
    if (line == "x,y,z") cols = 3;
    else if (line == "x,y") cols = 2;
    else throw error(errc::io_failure, csv_path + ": expected header 'x,y' or 'x,y,z'");
    if (cols != dim)
        throw error(errc::io_failure, csv_path + ": column count disagrees with the window file");

    std::vector<Vec3> pts;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        Vec3 p;
        char extra;
        int got = cols == 3 ? std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &p.x, &p.y, &p.z, &extra)
                            : std::sscanf(line.c_str(), "%lf,%lf%c", &p.x, &p.y, &extra);
        if (got != cols)
            throw error(errc::io_failure,
                        csv_path + ": parse error at line " + std::to_string(lineno));
        pts.push_back(p);
    }
    return dim == 2 ? PointPattern::planar(std::move(pts), w.face_xy())
                    : PointPattern::spatial(std::move(pts), w);
}

void write_summary_csv(const SummaryFunction1D& s, const std::string& path) {
    std::ostringstream out;
    out << "name,r,value,defined\n";
    for (std::size_t i = 0; i < s.args.size(); ++i)
        out << s.name << ',' << format_g17(s.args[i]) << ',' << format_g17(s.values[i]) << ','
            << (s.defined.empty() || s.defined[i] ? 1 : 0) << '\n';
    write_text_file(path, out.str());
}

void write_summary_csv(const SummaryFunction2D& s, const std::string& path) {
    std::ostringstream out;
    out << "name,r,t,value\n";
    for (std::size_t ir = 0; ir < s.r_args.size(); ++ir)
        for (std::size_t it = 0; it < s.t_args.size(); ++it)
            out << s.name << ',' << format_g17(s.r_args[ir]) << ',' << format_g17(s.t_args[it])
                << ',' << format_g17(s.at(ir, it)) << '\n';
    write_text_file(path, out.str());
}

json mrf_spec_to_json(const MrfModelSpec& spec) {
    json j;
    j["model_id"] = spec.model_id;
    j["gamma1"] = spec.gamma1;
    j["gamma2"] = spec.gamma2;
    j["h"] = spec.h;
    if (spec.model_id >= 2) {
        json t1;
        t1["r"] = spec.r1;
        if (spec.model_id >= 3) t1["t"] = spec.t1;
        j["theta1"] = t1;
    }
    if (spec.model_id == 5) j["theta2"] = {{"r", spec.r2}, {"t", spec.t2}};
    return j;
}

MrfModelSpec mrf_spec_from_json(const json& j) {
    MrfModelSpec spec;
    spec.model_id = j.at("model_id").get<int>();
    spec.gamma1 = j.value("gamma1", 1.0);
    spec.gamma2 = j.value("gamma2", 1.0);
    spec.h = j.value("h", 0.0);
    if (j.contains("theta1")) {
        spec.r1 = j["theta1"].value("r", 0.0);
        spec.t1 = j["theta1"].value("t", 0.0);
    }
    if (j.contains("theta2")) {
        spec.r2 = j["theta2"].value("r", 0.0);
        spec.t2 = j["theta2"].value("t", 0.0);
    }
    return spec;
}

json model_handle_to_json(const ModelHandle& handle) {
    json j;
    switch (handle.type) {
    case ModelType::csr:
        j["type"] = "csr";
        j["lambda"] = handle.lambda;
        break;
    case ModelType::plcpp:
        j["type"] = "plcpp";
        break;
    case ModelType::dlcpp:
        j["type"] = "dlcpp";
        break;
    case ModelType::mrf:
        j["type"] = "mrf";
        j["planar"] = handle.planar_dpp ? "dpp" : "poisson";
        j["mrf"] = mrf_spec_to_json(handle.mrf);
        j["mh_sweeps"] = handle.mh_sweeps;
        break;
    }
    if (handle.type != ModelType::csr) {
        j["kappa"] = handle.cluster.kappa;
        j["sigma"] = handle.cluster.sigma;
        j["alpha_a"] = handle.cluster.alpha_a;
    }
    if (handle.type == ModelType::dlcpp || (handle.type == ModelType::mrf && handle.planar_dpp)) {
        j["dpp_margin"] = handle.dpp.extension_margin;
        if (handle.dpp.truncation > 0) j["dpp_truncation"] = handle.dpp.truncation;
    }
    return j;
}

ModelHandle model_handle_from_json(const json& j) {
    ModelHandle h;
    // accept either a bare handle or a fit-output JSON carrying "model"
    const json& m = j.contains("model") && j["model"].is_object() ? j["model"] : j;
    std::string type = m.at("type").get<std::string>();
    if (type == "csr") {
        h.type = ModelType::csr;
        h.lambda = m.at("lambda").get<double>();
        return h;
    }
    h.cluster.kappa = m.at("kappa").get<double>();
    h.cluster.sigma = m.at("sigma").get<double>();
    h.cluster.alpha_a = m.at("alpha_a").get<double>();
    if (type == "plcpp") {
        h.type = ModelType::plcpp;
        h.cluster.centre_kind = CentreKind::poisson;
    } else if (type == "dlcpp") {
        h.type = ModelType::dlcpp;
        h.cluster.centre_kind = CentreKind::jinc_dpp;
    } else if (type == "mrf") {
        h.type = ModelType::mrf;
        h.planar_dpp = m.value("planar", "dpp") == "dpp";
        h.mrf = mrf_spec_from_json(m.at("mrf"));
        h.mh_sweeps = m.value("mh_sweeps", 100);
    } else {
        throw error(errc::io_failure, "model handle: unknown type '" + type + "'");
    }
    if (m.contains("dpp_margin")) h.dpp.extension_margin = m["dpp_margin"].get<double>();
    if (m.contains("dpp_truncation")) h.dpp.truncation = m["dpp_truncation"].get<int>();
    return h;
}

void write_envelope_outputs(const EnvelopeRun& run, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const CurveSet& cs = run.curves;
    const EnvelopeResult& res = run.result;

    json j;
    j["p_value"] = res.p_value;
    j["alpha"] = res.alpha;
    j["n_curves"] = res.n_curves;
    j["n_discarded"] = res.n_discarded;
    j["rejected"] = res.rejected();
    json segs = json::array();
    for (std::size_t s = 0; s + 1 < cs.segment_offset.size(); ++s) {
        json seg;
        seg["name"] = cs.segment_names[s];
        std::size_t above = 0, below = 0;
        for (std::size_t k = cs.segment_offset[s]; k < cs.segment_offset[s + 1]; ++k) {
            if (res.flag[k] > 0) ++above;
            if (res.flag[k] < 0) ++below;
        }
        seg["args_above"] = above;
        seg["args_below"] = below;
        segs.push_back(seg);
    }
    j["segments"] = segs;
    write_text_file(dir + "/envelope.json", j.dump(2) + "\n");

    for (std::size_t s = 0; s + 1 < cs.segment_offset.size(); ++s) {
        std::ostringstream out;
        bool is2d = cs.segment_names[s] == "cylK";
        out << (is2d ? "r,t,data,lower,upper,flag\n" : "r,data,lower,upper,flag\n");
        for (std::size_t k = cs.segment_offset[s]; k < cs.segment_offset[s + 1]; ++k) {
            std::size_t local = k - cs.segment_offset[s];
            if (is2d) {
                std::size_t nt = cs.grid_cyl_t.size();
                out << format_g17(cs.grid_cyl_r[local / nt]) << ','
                    << format_g17(cs.grid_cyl_t[local % nt]);
            } else {
                out << format_g17(cs.grid_1d[local]);
            }
            out << ',' << format_g17(cs.curves[0][k]) << ',' << format_g17(res.lower[k]) << ','
                << format_g17(res.upper[k]) << ',' << static_cast<int>(res.flag[k]) << '\n';
        }
        write_text_file(dir + "/" + cs.segment_names[s] + ".csv", out.str());
    }
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::string data = read_text_file(path);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace colpp
