#ifndef COLPP_IO_HPP
#define COLPP_IO_HPP

#include <cstdint>
#include <string>

#include "json.hpp"

#include "colpp/envelopes.hpp"
#include "colpp/point_pattern.hpp"
#include "colpp/summaries.hpp"

namespace colpp {

// Point patterns travel as CSV with header x,y[,z], one point per row, written
// with 17 significant digits so a round trip is exact; the window rides in a
// sidecar JSON {"x":[lo,hi],"y":[lo,hi],"z":[lo,hi]} (no "z" for planar).
void write_pattern_csv(const PointPattern& pattern, const std::string& path);
void write_window_json(const PointPattern& pattern, const std::string& path);
PointPattern read_pattern(const std::string& csv_path, const std::string& window_json_path);

Window3 window_from_json(const nlohmann::json& j, int* dim_out);
nlohmann::json window_to_json(const Window3& w, int dim);

// summaries: 1D rows (name, r, value, defined), 2D rows (name, r, t, value)
void write_summary_csv(const SummaryFunction1D& s, const std::string& path);
void write_summary_csv(const SummaryFunction2D& s, const std::string& path);

// model handles exchanged between `fit` and `envelope`
nlohmann::json model_handle_to_json(const ModelHandle& handle);
ModelHandle model_handle_from_json(const nlohmann::json& j);

nlohmann::json mrf_spec_to_json(const MrfModelSpec& spec);
MrfModelSpec mrf_spec_from_json(const nlohmann::json& j);

// envelope output bundle: result JSON plus per-segment CSVs ready for plotting
void write_envelope_outputs(const EnvelopeRun& run, const std::string& dir);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
nlohmann::json read_json_file(const std::string& path);

// FNV-1a content hash used by the pipeline manifest
std::uint64_t fnv1a_file(const std::string& path);

std::string format_g17(double v);

} // namespace colpp

#endif
