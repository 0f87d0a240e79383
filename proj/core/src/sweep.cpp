#include "cavityflux/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include <fmt/format.h>

#include "cavityflux/errors.hpp"
#include "cavityflux/pwb.hpp"
#include "cavityflux/scene_io.hpp"

namespace cavityflux::harness {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse " + what + " '" + text + "'");
  }
}

/// Keeps free text inside one CSV field.
std::string field_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string file_tag(const std::string& text) {
  std::string s = text;
  for (char& c : s)
    if (c == ':' || c == ';' || c == '/' || c == ' ') c = '_';
  return s;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int source_room(const Scene& scene, const Source& src) {
  if (src.kind == Source::Kind::PortNormal) return scene.opening_cavities(scene.opening_index(src.port)).first;
  return *scene.locate(src.point);
}

ComparisonRow make_row(const Scene& scene, Method m, double alpha, const SweepSource& src,
                       std::string port, double power, double defect, double ms, std::string resolution) {
  return {scene.name(), to_string(m), alpha, src.label, std::move(port), power, defect, ms, std::move(resolution)};
}

ComparisonRow error_row(const Scene& scene, Method m, double alpha, const SweepSource& src, double ms,
                        const std::string& resolution, const std::exception& e) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {scene.name(), to_string(m),  alpha, src.label, "error",
          nan,          nan,          ms,    resolution + ";error=" + field_safe(e.what())};
}

class HeatmapWriter {
 public:
  HeatmapWriter(const SweepSpec& spec, std::vector<std::filesystem::path>* sink) : spec_(spec), sink_(sink) {}
  bool enabled() const { return spec_.heatmaps && sink_ != nullptr; }

  void write(const std::string& method, const std::string& tag, const DensityGrid& grid,
             std::vector<std::pair<std::string, std::string>> meta) {
    const auto base = spec_.out_dir / ("heatmap_" + method + "_" + tag);
    const auto csv = std::filesystem::path(base.string() + ".csv");
    const auto side = std::filesystem::path(base.string() + ".meta");
    std::ofstream c(csv);
    grid.write_csv(c);
    std::ofstream m(side);
    meta.insert(meta.begin(), {"method", method});
    grid.write_meta(m, meta);
    if (!c || !m) throw std::runtime_error("cannot write heatmap " + base.string());
    sink_->push_back(csv);
  }

 private:
  const SweepSpec& spec_;
  std::vector<std::filesystem::path>* sink_;
};

void run_pwb(const SweepSpec& spec, const Scene& base, std::vector<ComparisonRow>& out) {
  const std::string res = "closed-form";
  for (const auto& src : spec.sources) {
    for (const double a : spec.alphas) {
      const auto t0 = Clock::now();
      try {
        const Scene scene = base.with_alpha(a);
        const pwb::NetworkResult r = pwb::solve(pwb::network_from_scene(scene, source_room(scene, src.source), 1.0));
        const double ms = elapsed_ms(t0);
        double total = 0.0;
        for (const auto& [id, p] : r.p_port) total += p;
        for (const double w : r.p_wall) total += w;
        const double defect = std::abs(1.0 - total);
        for (const auto& op : scene.openings())
          if (op.kind == OpeningKind::Port)
            out.push_back(make_row(scene, Method::Pwb, a, src, op.id, r.p_port.at(op.id), defect, ms, res));
        for (std::size_t i = 0; i < scene.cavities().size(); ++i)
          out.push_back(make_row(scene, Method::Pwb, a, src, "wall:" + scene.cavities()[i].id, r.p_wall[i],
                                 defect, ms, res));
      } catch (const std::exception& e) {
        out.push_back(error_row(base, Method::Pwb, a, src, elapsed_ms(t0), res, e));
      }
    }
  }
}

void run_rt(const SweepSpec& spec, const Scene& base, std::vector<ComparisonRow>& out, HeatmapWriter& maps) {
  rt::RtConfig cfg = spec.rt;
  cfg.threads = spec.threads;
  if (maps.enabled()) cfg.grid_resolution = spec.heatmap_cells_per_unit;
  const std::string res = fmt::format("rays={};seed={};max_bounces={};cutoff={}", cfg.n_rays, cfg.rng_seed,
                                      cfg.max_bounces, cfg.energy_cutoff);
  for (const auto& src : spec.sources) {
    for (const double a : spec.alphas) {
      const auto t0 = Clock::now();
      try {
        const Scene scene = base.with_alpha(a);
        const rt::PowerReport r = rt::simulate(scene, src.source, cfg);
        const double ms = elapsed_ms(t0);
        for (const auto& op : scene.openings())
          if (op.kind == OpeningKind::Port)
            out.push_back(make_row(scene, Method::Rt, a, src, op.id, r.p_port.at(op.id), r.defect, ms, res));
        for (const auto& cav : scene.cavities())
          out.push_back(
              make_row(scene, Method::Rt, a, src, "wall:" + cav.id, r.p_wall.at(cav.id), r.defect, ms, res));
        out.push_back(make_row(scene, Method::Rt, a, src, "residual", r.p_residual, r.defect, ms, res));
        if (maps.enabled() && r.density) {
          maps.write("rt", fmt::format("a{}_{}", a, file_tag(src.label)), *r.density,
                     {{"kind", "energy-density"}, {"alpha", fmt::format("{}", a)}, {"source", src.label}});
        }
      } catch (const std::exception& e) {
        out.push_back(error_row(base, Method::Rt, a, src, elapsed_ms(t0), res, e));
      }
    }
  }
}

void run_dea(const SweepSpec& spec, const Scene& base, std::vector<ComparisonRow>& out, HeatmapWriter& maps) {
  dea::DeaConfig cfg;
  cfg.element_length = spec.element_length.value_or(dea::default_element_length(base));
  cfg.n_dir = spec.n_dir;
  cfg.quadrature = spec.quadrature;
  cfg.source_rays = spec.source_rays;
  cfg.threads = spec.threads;
  std::string res = fmt::format("elem_len={};n_dir={};quad={}x{};source_rays={}", cfg.element_length, cfg.n_dir,
                                cfg.quadrature.positions, cfg.quadrature.directions, cfg.source_rays);

  std::unique_ptr<dea::Model> model;
  try {
    model = std::make_unique<dea::Model>(base, cfg);
    res += fmt::format(";dim={}", model->basis().dim());
  } catch (const std::exception& e) {
    for (const auto& src : spec.sources)
      for (const double a : spec.alphas) out.push_back(error_row(base, Method::Dea, a, src, 0.0, res, e));
    return;
  }

  std::vector<std::optional<dea::SourceImage>> images(spec.sources.size());
  // slots[source][alpha] keeps the output order source-major while the operator is built once per alpha.
  std::vector<std::vector<std::vector<ComparisonRow>>> slots(spec.sources.size(),
                                                             std::vector<std::vector<ComparisonRow>>(spec.alphas.size()));
  for (std::size_t ia = 0; ia < spec.alphas.size(); ++ia) {
    const double a = spec.alphas[ia];
    std::optional<dea::TransferMatrix> op;
    try {
      op = model->transfer_at(a);
    } catch (const std::exception& e) {
      for (std::size_t is = 0; is < spec.sources.size(); ++is)
        slots[is][ia].push_back(error_row(base, Method::Dea, a, spec.sources[is], 0.0, res, e));
      continue;
    }
    const Scene scene = base.with_alpha(a);
    for (std::size_t is = 0; is < spec.sources.size(); ++is) {
      const auto& src = spec.sources[is];
      auto& rows = slots[is][ia];
      const auto t0 = Clock::now();
      try {
        if (!images[is]) images[is] = dea::source_image(base, model->basis(), src.source, cfg.source_rays);
        const dea::DeaResult r = model->run(*images[is], *op, a);
        const double ms = elapsed_ms(t0);
        for (const auto& o : scene.openings())
          if (o.kind == OpeningKind::Port)
            rows.push_back(make_row(scene, Method::Dea, a, src, o.id, r.p_port.at(o.id), r.defect, ms, res));
        for (const auto& cav : scene.cavities())
          rows.push_back(
              make_row(scene, Method::Dea, a, src, "wall:" + cav.id, r.p_wall.at(cav.id), r.defect, ms, res));
        if (maps.enabled()) {
          const DensityGrid g = dea::spatial_map(base, model->basis(), r.rho, dea::MapWeighting::Flux,
                                                 spec.heatmap_cells_per_unit, cfg.quadrature, &src.source, 1.0);
          maps.write("dea", fmt::format("a{}_{}", a, file_tag(src.label)), g,
                     {{"kind", "energy-density"}, {"alpha", fmt::format("{}", a)}, {"source", src.label}});
        }
      } catch (const std::exception& e) {
        rows.clear();
        rows.push_back(error_row(base, Method::Dea, a, src, elapsed_ms(t0), res, e));
      }
    }
    if (maps.enabled()) {
      for (const auto& o : scene.openings()) {
        if (o.kind != OpeningKind::Port) continue;
        try {
          const dea::Density mu = dea::adjoint(*op, dea::indicator(base, model->basis(), o.id));
          const DensityGrid g = dea::spatial_map(base, model->basis(), mu, dea::MapWeighting::Coupling,
                                                 spec.heatmap_cells_per_unit, cfg.quadrature);
          maps.write("dea", fmt::format("adjoint-{}_a{}", file_tag(o.id), a), g,
                     {{"kind", "adjoint-coupling"}, {"alpha", fmt::format("{}", a)}, {"port", o.id}});
        } catch (const std::exception&) {
          // The forward rows already carry the failure.
        }
      }
    }
  }
  for (auto& per_source : slots)
    for (auto& rows : per_source) std::move(rows.begin(), rows.end(), std::back_inserter(out));
}

std::vector<ComparisonRow> compute(const SweepSpec& spec, std::vector<std::filesystem::path>* heatmaps) {
  validate(spec);
  const Scene base = Scene::build(load_scene_description(spec.scene));
  for (const auto& s : spec.sources) validate_source(base, s.source);

  std::vector<Method> methods = spec.methods;
  std::sort(methods.begin(), methods.end());
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());

  HeatmapWriter maps(spec, heatmaps);
  std::vector<ComparisonRow> rows;
  for (const Method m : methods) {
    switch (m) {
      case Method::Pwb:
        run_pwb(spec, base, rows);
        break;
      case Method::Rt:
        run_rt(spec, base, rows, maps);
        break;
      case Method::Dea:
        run_dea(spec, base, rows, maps);
        break;
    }
  }
  return rows;
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::Pwb:
      return "pwb";
    case Method::Rt:
      return "rt";
    case Method::Dea:
      return "dea";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  const std::string t = trim(text);
  if (t == "pwb") return Method::Pwb;
  if (t == "rt") return Method::Rt;
  if (t == "dea") return Method::Dea;
  throw ValidationError("unknown method '" + t + "' (expected pwb, rt or dea)");
}

std::vector<Method> parse_methods(const std::string& csv_list) {
  std::vector<Method> out;
  for (const auto& item : split(csv_list, ',')) out.push_back(parse_method(item));
  return out;
}

std::vector<SweepSource> parse_source(const std::string& text) {
  const std::string t = trim(text);
  const auto colon = t.find(':');
  if (colon == std::string::npos) throw ValidationError("source '" + t + "' must look like port:ID, point:x,y or table1:N");
  const std::string kind = t.substr(0, colon);
  const std::string arg = t.substr(colon + 1);
  if (kind == "port") {
    if (arg.empty()) throw ValidationError("port source needs an opening id");
    return {{"port:" + arg, Source::port_normal(arg)}};
  }
  if (kind == "point") {
    auto parts = split(arg, arg.find(';') != std::string::npos ? ';' : ',');
    if (parts.size() != 2) throw ValidationError("point source needs two coordinates, got '" + arg + "'");
    const Point2 p{parse_double(trim(parts[0]), "point x"), parse_double(trim(parts[1]), "point y")};
    const Source s = Source::point_isotropic(p);
    return {{s.label(), s}};
  }
  if (kind == "table1") {
    std::vector<int> ids;
    if (arg == "all") {
      for (int i = 1; i <= kTable1Count; ++i) ids.push_back(i);
    } else {
      const double v = parse_double(arg, "Table I index");
      if (v != std::floor(v) || v < 1 || v > kTable1Count)
        throw ValidationError(fmt::format("Table I index must be 1..{}, got '{}'", kTable1Count, arg));
      ids.push_back(static_cast<int>(v));
    }
    std::vector<SweepSource> out;
    for (const int i : ids) out.push_back({fmt::format("table1:{}", i), Source::point_isotropic(table1_source(i))});
    return out;
  }
  throw ValidationError("unknown source kind '" + kind + "'");
}

std::vector<double> default_alpha_grid() { return {0.0, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0}; }

std::vector<double> parse_alphas(const std::string& text) {
  if (trim(text) == "default") return default_alpha_grid();
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    const double a = parse_double(trim(item), "alpha");
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError(fmt::format("alpha {} outside [0, 1]", a));
    out.push_back(a);
  }
  return out;
}

void validate(const SweepSpec& spec) {
  if (spec.methods.empty()) throw ValidationError("sweep needs at least one method");
  if (spec.alphas.empty()) throw ValidationError("sweep needs at least one alpha value");
  if (spec.sources.empty()) throw ValidationError("sweep needs at least one source");
  for (const double a : spec.alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError(fmt::format("alpha {} outside [0, 1]", a));
  if (spec.n_dir < 1) throw ValidationError("n_dir must be at least 1");
  if (spec.element_length && !(*spec.element_length > 0.0)) throw ValidationError("element length must be positive");
  if (spec.heatmaps && !(spec.heatmap_cells_per_unit > 0.0))
    throw ValidationError("heatmap resolution must be positive");
}

std::vector<ComparisonRow> compute_rows(const SweepSpec& spec) { return compute(spec, nullptr); }

SweepResult run_sweep(const SweepSpec& spec) {
  validate(spec);
  std::filesystem::create_directories(spec.out_dir);
  SweepResult result;
  result.rows = compute(spec, &result.heatmaps);
  result.csv_path = spec.out_dir / "sweep.csv";
  std::ofstream os(result.csv_path);
  write_csv(os, result.rows, utc_timestamp());
  if (!os) throw std::runtime_error("cannot write " + result.csv_path.string());
  return result;
}

std::string format_row(const ComparisonRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{:.3f},{}", r.scene, r.method, r.alpha, r.source, r.port, r.power, r.defect,
                     r.runtime_ms, r.resolution);
}

void write_csv(std::ostream& os, const std::vector<ComparisonRow>& rows, const std::string& timestamp) {
  os << "# cavityflux sweep " << timestamp << '\n' << kCsvHeader << '\n';
  for (const auto& r : rows) os << format_row(r) << '\n';
}

std::vector<ComparisonRow> read_csv(std::istream& is) {
  std::vector<ComparisonRow> rows;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != kCsvHeader) throw ValidationError("unexpected CSV header '" + line + "'");
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 9) throw ValidationError(fmt::format("line {}: expected 9 fields, got {}", line_no, f.size()));
    const std::string where = fmt::format("line {}", line_no);
    rows.push_back({f[0], f[1], parse_double(f[2], where + " alpha"), f[3], f[4], parse_double(f[5], where + " power"),
                    parse_double(f[6], where + " defect"), parse_double(f[7], where + " runtime_ms"), f[8]});
  }
  if (!header) throw ValidationError("CSV has no header line");
  return rows;
}

std::vector<ComparisonRow> read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open " + path.string());
  return read_csv(is);
}

}  // namespace cavityflux::harness
