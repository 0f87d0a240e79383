#pragma once
/// @file compare.hpp
/// @brief Cross-method and cross-run comparison of sweep CSVs against tolerance bands.
///
/// A series is the rows of one method in one CSV, addressed as `<file>:<method>`
/// with `<file>` the 1-based position on the command line, or just `<method>`
/// for its first occurrence. Rows are matched on (scene, alpha, source, port)
/// and compared by |a - b| / max(|a|, |b|).
///
/// Band file:
///
///   {"bands": [{"name": "rt-vs-dea", "a": "rt", "b": "dea",
///               "alpha_min": 0.001, "alpha_max": 0.1, "ports": ["P1", "P2"],
///               "rel_tol": 0.05, "expect": "pass"}]}
///
/// `ports` defaults to the exterior ports (no `wall:*`, `residual`); `["*"]`
/// selects every port column. `expect: "fail"` marks a known discrepancy: it
/// is reported but does not affect the exit status.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cavityflux/sweep.hpp"

namespace cavityflux::harness {

struct Band {
  std::string name;
  std::string a;
  std::string b;
  double alpha_min{0.0};
  double alpha_max{1.0};
  std::optional<std::vector<std::string>> ports;
  double rel_tol{0.05};
  bool expect_pass{true};
  /// Default bands that match no rows are skipped instead of failing.
  bool optional{false};
};

std::vector<Band> parse_bands(const std::string& json_text);
std::vector<Band> load_bands(const std::filesystem::path& path);

struct LoadedCsv {
  std::string name;
  std::vector<ComparisonRow> rows;
};

/// Same method across files at 1e-12, rt vs dea at 5% for 1e-3 <= alpha <= 0.1,
/// pwb vs rt/dea at 10% for 0.01 <= alpha <= 0.1, and pwb vs rt at alpha = 1
/// as an expected failure.
std::vector<Band> default_bands(const std::vector<LoadedCsv>& files);

struct AlphaDeviation {
  double alpha;
  double max_rel;
  double mean_rel;
  std::size_t count;
};

struct BandResult {
  Band band;
  std::size_t compared{0};
  double max_rel{0.0};
  double mean_rel{0.0};
  std::string worst_key;
  std::vector<AlphaDeviation> per_alpha;
  std::vector<std::string> missing;  ///< "<series>: <key>" lines
  bool skipped{false};
  bool passed{false};
  std::string status;  ///< PASS, FAIL, XFAIL, XPASS, SKIP
};

struct CompareReport {
  std::vector<BandResult> bands;
  bool ok{true};
};

CompareReport compare(const std::vector<LoadedCsv>& files, const std::vector<Band>& bands);
/// Loads the CSVs and uses default_bands() when `bands` is empty.
CompareReport compare_files(const std::vector<std::filesystem::path>& csvs, const std::vector<Band>& bands);

void print_report(std::ostream& os, const CompareReport& report);

}  // namespace cavityflux::harness
