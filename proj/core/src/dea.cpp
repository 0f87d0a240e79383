#include "cavityflux/dea.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include <fmt/format.h>

#include "cavityflux/errors.hpp"

namespace cavityflux::dea {

namespace {

constexpr double kResidualContract = 1e-10;

struct Emission {
  int cavity;
  Point2 origin;
  Vec2 direction;
};

Emission emit(const Scene& scene, const PhaseSpaceBasis& basis, std::size_t cell, int a, int b, Quadrature q) {
  const int e = basis.element_of(cell);
  const int m = basis.bin_of_cell(cell);
  const double u = (a + 0.5) / q.positions;
  const double p = basis.bin_lower(m) + (b + 0.5) / q.directions * basis.bin_width();
  const Vec2 n = basis.mesh().normal_at(scene, e, u);
  const Vec2 d = n * std::sqrt(1.0 - p * p) + tangent_of(n) * p;
  const Point2 origin = basis.mesh().point_at(scene, e, u) + d * kRayEpsilon;
  return {basis.mesh()[static_cast<std::size_t>(e)].cavity, origin, d};
}

/// Cell receiving a ray that starts in `cavity` at `origin` heading along `d`.
std::uint32_t land(const Scene& scene, const PhaseSpaceBasis& basis, const Hit& hit, const Vec2& d) {
  const Surface& surf = scene.surfaces()[static_cast<std::size_t>(hit.surface)];
  int element = basis.mesh().element_at(hit.surface, hit.arc_position);
  double p = 0.0;
  switch (surf.kind) {
    case SurfaceKind::Aperture:
      element = basis.mesh()[static_cast<std::size_t>(element)].twin;
      p = dot(d, tangent_of(-hit.surface_normal));
      break;
    case SurfaceKind::Port:
      p = dot(d, tangent_of(hit.surface_normal));
      break;
    default:
      p = dot(hit.outgoing_direction, tangent_of(hit.surface_normal));
      break;
  }
  return static_cast<std::uint32_t>(basis.cell(element, basis.bin_of(p)));
}

bool emits(const BoundaryElement& e) { return e.behavior != ElementBehavior::Port; }

void merge_duplicates(std::vector<FlightMap::Arrival>& v) {
  std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.cell < y.cell; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (out > 0 && v[out - 1].cell == v[i].cell)
      v[out - 1].weight += v[i].weight;
    else
      v[out++] = v[i];
  }
  v.resize(out);
}

template <class Fn>
void parallel_chunks(std::size_t n_chunks, unsigned threads, Fn&& fn) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t c = w; c < n_chunks; c += workers) fn(c);
    });
}

SparseMatrix identity_minus(const SparseMatrix& L) {
  SparseMatrix id(L.rows(), L.cols());
  id.setIdentity();
  SparseMatrix a = id - L;
  a.makeCompressed();
  return a;
}

template <class Solver>
Density refine_loop(const Solver& solver, const SparseMatrix& a, const Density& b, const SolveOptions& opts,
                    SolveStats& st) {
  Density x = solver.solve(b);
  const double bn = b.norm();
  Density r = b - a * x;
  st.relative_residual = r.norm() / bn;
  for (int k = 0; k < opts.max_refinements && st.relative_residual > opts.tolerance; ++k) {
    const Density dx = solver.solve(r);
    if (!dx.allFinite()) break;
    x += dx;
    r = b - a * x;
    const double next = r.norm() / bn;
    if (!(next < st.relative_residual)) {
      st.relative_residual = next;
      break;
    }
    st.relative_residual = next;
  }
  return x;
}

Density solve_system(const SparseMatrix& L, const SparseMatrix& a, const Density& b, const SolveOptions& opts,
                     SolveStats* stats) {
  SolveStats st;
  if (b.size() != a.rows()) throw std::invalid_argument("right-hand side has the wrong dimension");
  if (b.norm() == 0.0) {
    if (stats) *stats = st;
    return Density::Zero(b.size());
  }

  // Without a reachable cell that leaks, I - L is singular whatever the right-hand side.
  const Eigen::RowVectorXd col_sums = Eigen::RowVectorXd::Ones(L.rows()) * L;
  const Density row_sums = L * Density::Ones(L.cols());
  bool any_loss = false;
  for (Eigen::Index c = 0; c < col_sums.size() && !any_loss; ++c)
    any_loss = (row_sums(c) > 0.0 || b(c) != 0.0) && col_sums(c) < 1.0 - 1e-12;
  if (L.nonZeros() > 0 && !any_loss) {
    const double rho = spectral_radius(L);
    throw SolveError(fmt::format("transfer operator has no loss channel (closed lossless scene); spectral radius "
                                 "estimate {:.6f}",
                                 rho),
                     rho);
  }

  Density x;
  if (static_cast<std::size_t>(a.rows()) <= opts.direct_limit) {
    st.direct = true;
    const Eigen::MatrixXd dense(a);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
    x = refine_loop(lu, a, b, opts, st);
  } else {
    Eigen::BiCGSTAB<SparseMatrix> solver;
    solver.setTolerance(opts.tolerance * 0.1);
    solver.setMaxIterations(std::max<Eigen::Index>(20000, a.rows() / 4));
    solver.compute(a);
    x = refine_loop(solver, a, b, opts, st);
    st.iterations = solver.iterations();
  }
  if (!x.allFinite() || !(st.relative_residual < kResidualContract)) {
    const double rho = spectral_radius(L);
    throw SolveError(fmt::format("transfer system not solved: relative residual {:.3e}, spectral radius estimate "
                                 "{:.9f}",
                                 st.relative_residual, rho),
                     rho);
  }
  if (stats) *stats = st;
  return x;
}

int find_opening(const Scene& scene, const std::string& id) {
  const int k = scene.opening_index(id);
  if (k < 0) throw ValidationError("unknown opening '" + id + "'");
  return k;
}

}  // namespace

PhaseSpaceBasis::PhaseSpaceBasis(const Scene& scene, double element_length, int n_dir)
    : mesh_(scene, element_length), n_dir_(n_dir) {
  if (n_dir < 1) throw ValidationError("n_dir must be at least 1");
}

int PhaseSpaceBasis::bin_of(double p) const {
  return std::clamp(static_cast<int>(std::floor((p + 1.0) * 0.5 * n_dir_)), 0, n_dir_ - 1);
}

double PhaseSpaceBasis::cell_measure(std::size_t cell) const {
  return mesh_[static_cast<std::size_t>(element_of(cell))].arc_length * bin_width();
}

FlightMap::FlightMap(const Scene& scene, const PhaseSpaceBasis& basis, Quadrature quad, unsigned threads)
    : basis_(&basis), quad_(quad) {
  if (quad.positions < 1 || quad.directions < 1) throw ValidationError("quadrature needs at least one sample");
  const std::size_t dim = basis.dim();
  const double w = 1.0 / quad.samples();
  constexpr std::size_t kCellsPerChunk = 512;
  const std::size_t n_chunks = (dim + kCellsPerChunk - 1) / kCellsPerChunk;
  std::vector<std::vector<Arrival>> per_chunk(n_chunks);
  std::vector<std::size_t> counts(dim, 0);

  parallel_chunks(n_chunks, threads, [&](std::size_t chunk) {
    auto& out = per_chunk[chunk];
    std::vector<Arrival> col;
    for (std::size_t c = chunk * kCellsPerChunk; c < std::min(dim, (chunk + 1) * kCellsPerChunk); ++c) {
      if (!emits(basis.mesh()[static_cast<std::size_t>(basis.element_of(c))])) continue;
      col.clear();
      for (int a = 0; a < quad.positions; ++a) {
        for (int b = 0; b < quad.directions; ++b) {
          const Emission em = emit(scene, basis, c, a, b, quad);
          const Hit hit = first_hit_in(scene, em.cavity, em.origin, em.direction);
          col.push_back({land(scene, basis, hit, em.direction), w});
        }
      }
      merge_duplicates(col);
      counts[c] = col.size();
      out.insert(out.end(), col.begin(), col.end());
    }
  });

  offsets_.assign(dim + 1, 0);
  for (std::size_t c = 0; c < dim; ++c) offsets_[c + 1] = offsets_[c] + counts[c];
  arrivals_.reserve(offsets_[dim]);
  for (auto& chunk : per_chunk) arrivals_.insert(arrivals_.end(), chunk.begin(), chunk.end());
}

std::vector<double> uniform_alpha(const BoundaryMesh& mesh, double alpha) {
  std::vector<double> a(mesh.size(), 0.0);
  for (std::size_t i = 0; i < mesh.size(); ++i)
    if (!mesh[i].is_open()) a[i] = alpha;
  return a;
}

TransferMatrix transfer_matrix(const FlightMap& flights, std::span<const double> element_alpha, std::size_t n_rooms) {
  const PhaseSpaceBasis& basis = flights.basis();
  const auto dim = static_cast<Eigen::Index>(basis.dim());
  std::vector<Eigen::Triplet<double>> lt;
  std::vector<Eigen::Triplet<double>> at;
  lt.reserve(flights.nonzeros());
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (const auto& arr : flights.column(static_cast<std::size_t>(c))) {
      const auto e = static_cast<std::size_t>(basis.element_of(arr.cell));
      const BoundaryElement& el = basis.mesh()[e];
      if (el.is_open()) {
        lt.emplace_back(static_cast<Eigen::Index>(arr.cell), c, arr.weight);
        continue;
      }
      const double alpha = element_alpha[e];
      if (alpha < 1.0) lt.emplace_back(static_cast<Eigen::Index>(arr.cell), c, arr.weight * (1.0 - alpha));
      if (alpha > 0.0) at.emplace_back(el.cavity, c, arr.weight * alpha);
    }
  }
  TransferMatrix op;
  op.L.resize(dim, dim);
  op.L.setFromTriplets(lt.begin(), lt.end());
  op.L.makeCompressed();
  op.absorption.resize(static_cast<Eigen::Index>(n_rooms), dim);
  op.absorption.setFromTriplets(at.begin(), at.end());
  op.absorption.makeCompressed();
  return op;
}

TransferMatrix assemble(const Scene& scene, const PhaseSpaceBasis& basis, Quadrature quad) {
  const FlightMap flights(scene, basis, quad);
  return transfer_matrix(flights, uniform_alpha(basis.mesh(), scene.alpha()), scene.cavities().size());
}

SourceImage source_image(const Scene& scene, const PhaseSpaceBasis& basis, const Source& source, std::size_t rays) {
  validate_source(scene, source);
  if (rays < 1) throw ValidationError("source fan needs at least one ray");
  SourceImage img;
  img.rays = rays;
  const double w = 1.0 / static_cast<double>(rays);
  img.arrivals.reserve(4096);
  std::vector<FlightMap::Arrival> batch;
  for (std::size_t k = 0; k < rays; ++k) {
    const LaunchRay ray = launch_ray(scene, source, (static_cast<double>(k) + 0.5) / static_cast<double>(rays));
    const Hit hit = first_hit_in(scene, ray.cavity, ray.origin, ray.direction);
    batch.push_back({land(scene, basis, hit, ray.direction), w});
    if (batch.size() >= 65536) {
      merge_duplicates(batch);
      img.arrivals.insert(img.arrivals.end(), batch.begin(), batch.end());
      batch.clear();
    }
  }
  img.arrivals.insert(img.arrivals.end(), batch.begin(), batch.end());
  merge_duplicates(img.arrivals);
  return img;
}

SourceVector source_vector(const SourceImage& image, const PhaseSpaceBasis& basis,
                           std::span<const double> element_alpha, std::size_t n_rooms) {
  SourceVector sv;
  sv.rho0 = Density::Zero(static_cast<Eigen::Index>(basis.dim()));
  sv.absorbed.assign(n_rooms, 0.0);
  for (const auto& arr : image.arrivals) {
    const auto e = static_cast<std::size_t>(basis.element_of(arr.cell));
    const BoundaryElement& el = basis.mesh()[e];
    const double alpha = el.is_open() ? 0.0 : element_alpha[e];
    sv.rho0(static_cast<Eigen::Index>(arr.cell)) += arr.weight * (1.0 - alpha);
    sv.absorbed[static_cast<std::size_t>(el.cavity)] += arr.weight * alpha;
  }
  return sv;
}

SourceVector source_vector(const Scene& scene, const PhaseSpaceBasis& basis, const Source& source, std::size_t rays) {
  return source_vector(source_image(scene, basis, source, rays), basis, uniform_alpha(basis.mesh(), scene.alpha()),
                       scene.cavities().size());
}

Density solve(const TransferMatrix& op, const Density& rho0, const SolveOptions& opts, SolveStats* stats) {
  return solve_system(op.L, identity_minus(op.L), rho0, opts, stats);
}

Density adjoint(const TransferMatrix& op, const Density& chi, const SolveOptions& opts, SolveStats* stats) {
  const SparseMatrix lt = op.L.transpose();
  return solve_system(lt, identity_minus(lt), chi, opts, stats);
}

double spectral_radius(const SparseMatrix& L, int iterations) {
  if (L.rows() == 0) return 0.0;
  Density x = Density::Ones(L.cols()) / static_cast<double>(L.cols());
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    const Density y = L * x;
    const double s = y.cwiseAbs().sum();
    if (s == 0.0) return 0.0;
    lambda = s / x.cwiseAbs().sum();
    x = y / s;
  }
  return lambda;
}

Density indicator(const Scene& scene, const PhaseSpaceBasis& basis, const std::string& opening_id) {
  const int k = find_opening(scene, opening_id);
  Density chi = Density::Zero(static_cast<Eigen::Index>(basis.dim()));
  for (const int e : basis.mesh().opening_elements(k))
    for (int m = 0; m < basis.n_dir(); ++m) chi(static_cast<Eigen::Index>(basis.cell(e, m))) = 1.0;
  return chi;
}

Density indicator_into(const Scene& scene, const PhaseSpaceBasis& basis, const std::string& opening_id,
                       const std::string& into) {
  const int k = find_opening(scene, opening_id);
  const int room = scene.cavity_index(into);
  if (room < 0) throw ValidationError("unknown cavity '" + into + "'");
  Density chi = Density::Zero(static_cast<Eigen::Index>(basis.dim()));
  for (const int e : basis.mesh().opening_elements(k)) {
    if (basis.mesh()[static_cast<std::size_t>(e)].cavity != room) continue;
    for (int m = 0; m < basis.n_dir(); ++m) chi(static_cast<Eigen::Index>(basis.cell(e, m))) = 1.0;
  }
  return chi;
}

double port_flux(const Scene& scene, const PhaseSpaceBasis& basis, const Density& rho, const std::string& opening_id) {
  return rho.dot(indicator(scene, basis, opening_id));
}

DensityGrid spatial_map(const Scene& scene, const PhaseSpaceBasis& basis, const Density& values,
                        MapWeighting weighting, double cells_per_unit, Quadrature quad, const Source* direct_source,
                        double direct_power, std::size_t direct_rays) {
  const auto [lo, hi] = scene.bounding_box();
  DensityGrid grid(lo, hi, cells_per_unit);
  const double inv_q = 1.0 / quad.samples();
  for (std::size_t c = 0; c < basis.dim(); ++c) {
    const double v = values(static_cast<Eigen::Index>(c));
    if (v == 0.0) continue;
    if (!emits(basis.mesh()[static_cast<std::size_t>(basis.element_of(c))])) continue;
    const double w = weighting == MapWeighting::Flux ? v * inv_q : v * basis.cell_measure(c) * inv_q;
    for (int a = 0; a < quad.positions; ++a) {
      for (int b = 0; b < quad.directions; ++b) {
        const Emission em = emit(scene, basis, c, a, b, quad);
        const Hit hit = first_hit_in(scene, em.cavity, em.origin, em.direction);
        grid.deposit_segment(em.origin, hit.point, w);
      }
    }
  }
  if (direct_source && weighting == MapWeighting::Flux) {
    const double w = direct_power / static_cast<double>(direct_rays);
    for (std::size_t k = 0; k < direct_rays; ++k) {
      const LaunchRay ray =
          launch_ray(scene, *direct_source, (static_cast<double>(k) + 0.5) / static_cast<double>(direct_rays));
      const Hit hit = first_hit_in(scene, ray.cavity, ray.origin, ray.direction);
      grid.deposit_segment(ray.origin, hit.point, w);
    }
  }
  const double area = grid.cell_size() * grid.cell_size();
  grid.scale(weighting == MapWeighting::Flux ? 1.0 / area : 1.0 / (2.0 * std::numbers::pi * area));
  return grid;
}

double default_element_length(const Scene& scene) {
  double narrowest = std::numeric_limits<double>::infinity();
  for (const auto& op : scene.openings()) narrowest = std::min(narrowest, op.width);
  double len = 0.02;
  while (len > narrowest / 3.0) len *= 0.5;
  return len;
}

Model::Model(const Scene& scene, const DeaConfig& cfg)
    : scene_(scene), cfg_(cfg), basis_(scene_, cfg.element_length, cfg.n_dir), flights_(scene_, basis_, cfg.quadrature, cfg.threads) {}

TransferMatrix Model::transfer_at(double alpha) const {
  return transfer_matrix(flights_, uniform_alpha(basis_.mesh(), alpha), scene_.cavities().size());
}

DeaResult Model::run(const Source& source, double alpha) const {
  return run(source_image(scene_, basis_, source, cfg_.source_rays), transfer_at(alpha), alpha);
}

DeaResult Model::run(const SourceImage& image, const TransferMatrix& op, double alpha) const {
  DeaResult r;
  const std::size_t n_rooms = scene_.cavities().size();
  SourceVector sv = source_vector(image, basis_, uniform_alpha(basis_.mesh(), alpha), n_rooms);
  r.rho0 = std::move(sv.rho0);
  r.rho = solve(op, r.rho0, {}, &r.stats);
  double total = 0.0;
  for (const auto& op_spec : scene_.openings()) {
    if (op_spec.kind != OpeningKind::Port) continue;
    const double p = port_flux(scene_, basis_, r.rho, op_spec.id);
    r.p_port[op_spec.id] = p;
    total += p;
  }
  const Density absorbed = op.absorption * r.rho;
  for (std::size_t i = 0; i < n_rooms; ++i) {
    const double w = absorbed(static_cast<Eigen::Index>(i)) + sv.absorbed[i];
    r.p_wall[scene_.cavities()[i].id] = w;
    total += w;
  }
  r.defect = std::abs(1.0 - total);
  return r;
}

}  // namespace cavityflux::dea
