#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "cavityflux/compare.hpp"
#include "cavityflux/errors.hpp"
#include "cavityflux/scene_io.hpp"
#include "cavityflux/sweep.hpp"

using namespace cavityflux;

namespace {

int cmd_run(const std::string& scene, const std::string& methods, const std::string& alphas,
            const std::vector<std::string>& sources, const std::string& out, std::size_t rays, std::uint64_t seed,
            int n_dir, double elem_len, const std::string& quad, bool heatmaps, double heatmap_res, std::size_t source_rays, unsigned threads) {
  harness::SweepSpec spec;
  spec.scene = scene;
  spec.methods = harness::parse_methods(methods);
  spec.alphas = harness::parse_alphas(alphas);
  for (const auto& s : sources)
    for (auto& parsed : harness::parse_source(s)) spec.sources.push_back(std::move(parsed));
  spec.out_dir = out;
  spec.rt.n_rays = rays;
  spec.rt.rng_seed = seed;
  spec.n_dir = n_dir;
  if (elem_len > 0.0) spec.element_length = elem_len;
  const auto x = quad.find('x');
  if (x == std::string::npos) throw ValidationError("--quad must look like 4x4");
  spec.quadrature = {std::stoi(quad.substr(0, x)), std::stoi(quad.substr(x + 1))};
  spec.heatmaps = heatmaps;
  spec.heatmap_cells_per_unit = heatmap_res;
  spec.source_rays = source_rays;
  spec.threads = threads;

  const auto result = harness::run_sweep(spec);
  std::size_t errors = 0;
  for (const auto& r : result.rows)
    if (r.port == "error") ++errors;
  std::cout << "wrote " << result.rows.size() << " rows to " << result.csv_path.string();
  if (!result.heatmaps.empty()) std::cout << " and " << result.heatmaps.size() << " heatmaps";
  std::cout << '\n';
  if (errors) {
    std::cerr << errors << " job(s) failed; see rows with port=error\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cavityflux: power balance, ray tracing and transfer-operator flux in coupled cavities"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Sweep absorption and sources for one scene");
  std::string scene;
  std::string methods = "pwb,rt,dea";
  std::string alphas = "default";
  std::vector<std::string> sources;
  std::string out = ".";
  std::size_t rays = 8002;
  std::uint64_t seed = 1;
  int n_dir = 64;
  double elem_len = 0.0;
  std::string quad = "4x4";
  bool heatmaps = false;
  double heatmap_res = 100.0;
  std::size_t source_rays = std::size_t{1} << 20;
  unsigned threads = 0;
  run->add_option("--scene", scene, "Preset name or scene JSON file")->required();
  run->add_option("--methods", methods, "Comma separated subset of pwb,rt,dea")->capture_default_str();
  run->add_option("--alphas", alphas, "Comma separated alpha values or 'default'")->capture_default_str();
  run->add_option("--source", sources, "port:ID | point:x,y | table1:N | table1:all (repeatable)")->required();
  run->add_option("--out", out, "Output directory")->capture_default_str();
  run->add_option("--rays", rays, "Ray tracing ensemble size")->capture_default_str();
  run->add_option("--seed", seed, "Ray tracing seed")->capture_default_str();
  run->add_option("--n-dir", n_dir, "Direction bins of the transfer operator")->capture_default_str();
  run->add_option("--elem-len", elem_len, "Boundary element length (default: from the narrowest opening)");
  run->add_option("--quad", quad, "Quadrature per cell as <positions>x<directions>")->capture_default_str();
  run->add_flag("--heatmaps", heatmaps, "Write interior density and adjoint coupling grids");
  run->add_option("--heatmap-res", heatmap_res, "Heatmap cells per unit length")->capture_default_str();
  run->add_option("--source-rays", source_rays, "Rays in the fan that builds the initial density")
      ->capture_default_str();
  run->add_option("--threads", threads, "Worker threads (0: hardware concurrency)")->capture_default_str();

  auto* cmp = app.add_subcommand("compare", "Compare sweep CSVs against tolerance bands");
  std::vector<std::string> csvs;
  std::string bands_path;
  cmp->add_option("csv", csvs, "sweep.csv files")->required()->check(CLI::ExistingFile);
  cmp->add_option("--bands", bands_path, "Band definition JSON (default bands when omitted)")
      ->check(CLI::ExistingFile);

  auto* sc = app.add_subcommand("scene", "Scene utilities");
  sc->require_subcommand(1);
  auto* validate = sc->add_subcommand("validate", "Check a scene JSON file");
  std::string scene_file;
  validate->add_option("file", scene_file, "Scene JSON file or preset name")->required();
  auto* dump = sc->add_subcommand("dump", "Print a preset as scene JSON");
  std::string preset;
  dump->add_option("preset", preset, "Preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return cmd_run(scene, methods, alphas, sources, out, rays, seed, n_dir, elem_len, quad, heatmaps, heatmap_res,
                     source_rays, threads);
    }
    if (*cmp) {
      std::vector<std::filesystem::path> paths(csvs.begin(), csvs.end());
      const auto bands = bands_path.empty() ? std::vector<harness::Band>{} : harness::load_bands(bands_path);
      const auto report = harness::compare_files(paths, bands);
      harness::print_report(std::cout, report);
      return report.ok ? 0 : 1;
    }
    if (*validate) {
      const Scene s = Scene::build(load_scene_description(scene_file));
      std::cout << "ok: scene '" << s.name() << "' with " << s.cavities().size() << " cavities, " << s.discs().size()
                << " discs, " << s.openings().size() << " openings\n";
      return 0;
    }
    if (*dump) {
      std::cout << to_json(preset_description(preset)) << '\n';
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
