#include "cavityflux/compare.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cavityflux/errors.hpp"

namespace cavityflux::harness {

namespace {

using Key = std::tuple<std::string, double, std::string, std::string>;  // scene, alpha, source, port

std::string key_text(const Key& k) {
  return fmt::format("scene={} alpha={} source={} port={}", std::get<0>(k), std::get<1>(k), std::get<2>(k),
                     std::get<3>(k));
}

struct Series {
  std::string label;
  std::map<Key, double> values;
};

bool has_method(const LoadedCsv& f, const std::string& method) {
  return std::any_of(f.rows.begin(), f.rows.end(), [&](const auto& r) { return r.method == method; });
}

std::optional<Series> resolve(const std::vector<LoadedCsv>& files, const std::string& selector) {
  std::size_t file = 0;
  std::string method = selector;
  const auto colon = selector.find(':');
  if (colon != std::string::npos) {
    try {
      file = std::stoul(selector.substr(0, colon));
    } catch (const std::exception&) {
      throw ValidationError("bad series selector '" + selector + "'");
    }
    method = selector.substr(colon + 1);
    if (file < 1 || file > files.size()) return std::nullopt;
  } else {
    for (std::size_t i = 0; i < files.size() && file == 0; ++i)
      if (has_method(files[i], method)) file = i + 1;
    if (file == 0) return std::nullopt;
  }
  Series s;
  s.label = fmt::format("{}:{}", file, method);
  for (const auto& r : files[file - 1].rows)
    if (r.method == method) s.values[{r.scene, r.alpha, r.source, r.port}] = r.power;
  if (s.values.empty()) return std::nullopt;
  return s;
}

bool port_selected(const Band& b, const std::string& port) {
  if (port == "error") return true;  // failures always surface as missing keys
  if (!b.ports) return port != "residual" && port.rfind("wall:", 0) != 0;
  for (const auto& p : *b.ports)
    if (p == "*" || p == port) return true;
  return false;
}

bool in_band(const Band& b, const Key& k) {
  const double a = std::get<1>(k);
  return a >= b.alpha_min && a <= b.alpha_max && port_selected(b, std::get<3>(k));
}

double relative_difference(double a, double b) {
  if (a == b) return 0.0;
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) / scale;
}

BandResult evaluate(const std::vector<LoadedCsv>& files, const Band& band) {
  BandResult res;
  res.band = band;
  const auto sa = resolve(files, band.a);
  const auto sb = resolve(files, band.b);
  if (!sa || !sb) {
    res.skipped = band.optional;
    if (!sa) res.missing.push_back("series '" + band.a + "' not found");
    if (!sb) res.missing.push_back("series '" + band.b + "' not found");
  } else {
    std::map<double, std::vector<double>> by_alpha;
    for (const auto& [k, va] : sa->values) {
      if (!in_band(band, k)) continue;
      const auto it = sb->values.find(k);
      if (it == sb->values.end() || std::get<3>(k) == "error") {
        res.missing.push_back(sb->label + " lacks " + key_text(k));
        continue;
      }
      const double d = relative_difference(va, it->second);
      if (!(d <= res.max_rel)) {
        res.max_rel = std::isnan(d) ? std::numeric_limits<double>::infinity() : d;
        res.worst_key = key_text(k);
      }
      by_alpha[std::get<1>(k)].push_back(d);
      ++res.compared;
    }
    for (const auto& [k, vb] : sb->values)
      if (in_band(band, k) && !sa->values.count(k)) res.missing.push_back(sa->label + " lacks " + key_text(k));
    double total = 0.0;
    for (const auto& [alpha, ds] : by_alpha) {
      double mx = 0.0;
      double sum = 0.0;
      for (const double d : ds) {
        mx = std::max(mx, d);
        sum += d;
      }
      total += sum;
      res.per_alpha.push_back({alpha, mx, sum / static_cast<double>(ds.size()), ds.size()});
    }
    if (res.compared > 0) res.mean_rel = total / static_cast<double>(res.compared);
    res.skipped = band.optional && res.compared == 0 && res.missing.empty();
  }
  res.passed = !res.skipped && res.compared > 0 && res.missing.empty() && res.max_rel <= band.rel_tol;
  if (res.skipped)
    res.status = "SKIP";
  else if (band.expect_pass)
    res.status = res.passed ? "PASS" : "FAIL";
  else
    res.status = res.passed ? "XPASS" : "XFAIL";
  return res;
}

}  // namespace

std::vector<Band> parse_bands(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("band file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("bands") || !j["bands"].is_array())
    throw ValidationError("band file needs a top-level \"bands\" array");
  std::vector<Band> out;
  for (std::size_t i = 0; i < j["bands"].size(); ++i) {
    const auto& e = j["bands"][i];
    const std::string where = fmt::format("bands[{}]", i);
    auto need = [&](const char* field) -> const nlohmann::json& {
      if (!e.contains(field)) throw ValidationError(where + "." + field + " is required");
      return e[field];
    };
    try {
      Band b;
      b.a = need("a").get<std::string>();
      b.b = need("b").get<std::string>();
      b.rel_tol = need("rel_tol").get<double>();
      b.name = e.value("name", b.a + "-vs-" + b.b);
      b.alpha_min = e.value("alpha_min", 0.0);
      b.alpha_max = e.value("alpha_max", 1.0);
      if (e.contains("ports")) b.ports = e["ports"].get<std::vector<std::string>>();
      const std::string expect = e.value("expect", std::string("pass"));
      if (expect != "pass" && expect != "fail") throw ValidationError(where + ".expect must be \"pass\" or \"fail\"");
      b.expect_pass = expect == "pass";
      if (!(b.rel_tol >= 0.0)) throw ValidationError(where + ".rel_tol must be non-negative");
      if (b.alpha_min > b.alpha_max) throw ValidationError(where + ": alpha_min exceeds alpha_max");
      out.push_back(std::move(b));
    } catch (const nlohmann::json::exception& ex) {
      throw ValidationError(where + ": " + ex.what());
    }
  }
  return out;
}

std::vector<Band> load_bands(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open band file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_bands(ss.str());
}

std::vector<Band> default_bands(const std::vector<LoadedCsv>& files) {
  std::vector<Band> out;
  for (const char* m : {"pwb", "rt", "dea"}) {
    std::size_t first = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (!has_method(files[i], m)) continue;
      if (first == 0) {
        first = i + 1;
        continue;
      }
      Band b;
      b.name = fmt::format("{}-run{}-vs-run{}", m, first, i + 1);
      b.a = fmt::format("{}:{}", first, m);
      b.b = fmt::format("{}:{}", i + 1, m);
      b.ports = std::vector<std::string>{"*"};
      b.rel_tol = 1e-12;
      out.push_back(b);
    }
  }
  auto cross = [&](const char* name, const char* a, const char* b, double lo, double hi, double tol, bool expect) {
    Band band;
    band.name = name;
    band.a = a;
    band.b = b;
    band.alpha_min = lo;
    band.alpha_max = hi;
    band.rel_tol = tol;
    band.expect_pass = expect;
    band.optional = true;
    out.push_back(band);
  };
  cross("rt-vs-dea-low-loss", "rt", "dea", 1e-3, 0.1, 0.05, true);
  cross("pwb-vs-rt-low-loss", "pwb", "rt", 1e-2, 0.1, 0.10, true);
  cross("pwb-vs-dea-low-loss", "pwb", "dea", 1e-2, 0.1, 0.10, true);
  cross("pwb-vs-rt-high-loss", "pwb", "rt", 1.0, 1.0, 0.10, false);
  return out;
}

CompareReport compare(const std::vector<LoadedCsv>& files, const std::vector<Band>& bands) {
  CompareReport report;
  for (const auto& b : bands) {
    report.bands.push_back(evaluate(files, b));
    const auto& r = report.bands.back();
    if (b.expect_pass && !r.skipped && !r.passed) report.ok = false;
  }
  return report;
}

CompareReport compare_files(const std::vector<std::filesystem::path>& csvs, const std::vector<Band>& bands) {
  if (csvs.empty()) throw ValidationError("compare needs at least one CSV");
  std::vector<LoadedCsv> files;
  for (const auto& p : csvs) files.push_back({p.string(), read_csv(p)});
  return compare(files, bands.empty() ? default_bands(files) : bands);
}

void print_report(std::ostream& os, const CompareReport& report) {
  for (const auto& r : report.bands) {
    os << fmt::format("{:<5} {} ({} vs {}, alpha in [{}, {}], tol {}): {} keys, max {:.3e}, mean {:.3e}\n", r.status,
                      r.band.name, r.band.a, r.band.b, r.band.alpha_min, r.band.alpha_max, r.band.rel_tol, r.compared,
                      r.max_rel, r.mean_rel);
    for (const auto& d : r.per_alpha)
      os << fmt::format("        alpha={:<8} n={:<4} max={:.3e} mean={:.3e}\n", d.alpha, d.count, d.max_rel,
                        d.mean_rel);
    if (!r.worst_key.empty() && r.max_rel > 0.0) os << "        worst: " << r.worst_key << '\n';
    for (const auto& m : r.missing) os << "        missing: " << m << '\n';
  }
  os << (report.ok ? "compare: OK\n" : "compare: FAILED\n");
}

}  // namespace cavityflux::harness
