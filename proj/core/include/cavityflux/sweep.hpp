#pragma once
/// @file sweep.hpp
/// @brief Multi-method sweeps over absorption and source position, serialized as CSV.
///
/// sweep.csv layout (fixed; consumed by the plotting scripts):
///
///   # cavityflux sweep <ISO-8601 timestamp>
///   scene,method,alpha,source,port,power,defect,runtime_ms,resolution
///
/// `port` is an opening id, `wall:<cavity>` for wall absorption, `residual`
/// for ray tracing energy left at cutoff, or `error` for a failed run (power
/// and defect are then `nan` and the message is in `resolution`). Floating
/// values are written in shortest round-trip form. `resolution` holds `key=value` pairs
/// separated by `;`. Only the first line and `runtime_ms` vary between reruns.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cavityflux/dea.hpp"
#include "cavityflux/raytrace.hpp"
#include "cavityflux/source.hpp"

namespace cavityflux::harness {

enum class Method { Pwb, Rt, Dea };

const char* to_string(Method m);
Method parse_method(const std::string& text);
std::vector<Method> parse_methods(const std::string& csv_list);

struct SweepSource {
  std::string label;  ///< "port:P1", "point:x;y" or "table1:N"
  Source source;
};

/// Accepts port:ID, point:x,y (or x;y), table1:N and table1:all.
std::vector<SweepSource> parse_source(const std::string& text);

/// {0, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1}
std::vector<double> default_alpha_grid();
/// "default" or a comma separated list.
std::vector<double> parse_alphas(const std::string& text);

struct SweepSpec {
  std::string scene;  ///< preset name or JSON path
  std::vector<Method> methods;
  std::vector<double> alphas;
  std::vector<SweepSource> sources;
  rt::RtConfig rt{};
  std::optional<double> element_length;  ///< default_element_length() when unset
  int n_dir{64};
  dea::Quadrature quadrature{};
  std::size_t source_rays{std::size_t{1} << 20};
  bool heatmaps{false};
  double heatmap_cells_per_unit{100.0};
  std::filesystem::path out_dir;
  unsigned threads{0};
};

/// Throws ValidationError for empty methods/alphas/sources or alpha outside [0,1].
void validate(const SweepSpec& spec);

struct ComparisonRow {
  std::string scene;
  std::string method;
  double alpha{0.0};
  std::string source;
  std::string port;
  double power{0.0};
  double defect{0.0};
  double runtime_ms{0.0};
  std::string resolution;
};

inline constexpr const char* kCsvHeader = "scene,method,alpha,source,port,power,defect,runtime_ms,resolution";

struct SweepResult {
  std::vector<ComparisonRow> rows;
  std::filesystem::path csv_path;
  std::vector<std::filesystem::path> heatmaps;
};

/// Runs every (method, source, alpha) job and writes out_dir/sweep.csv plus
/// optional heatmaps. A failing job yields an `error` row; the sweep goes on.
SweepResult run_sweep(const SweepSpec& spec);

/// Row computation without any file output.
std::vector<ComparisonRow> compute_rows(const SweepSpec& spec);

std::string format_row(const ComparisonRow& row);
void write_csv(std::ostream& os, const std::vector<ComparisonRow>& rows, const std::string& timestamp);
/// Skips `#` lines; throws ValidationError on a malformed header or row.
std::vector<ComparisonRow> read_csv(std::istream& is);
std::vector<ComparisonRow> read_csv(const std::filesystem::path& path);

}  // namespace cavityflux::harness
