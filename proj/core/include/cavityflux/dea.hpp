#pragma once
/// @file dea.hpp
/// @brief Dynamical energy analysis on the boundary phase space.
///
/// Phase space on the boundary is (element, p) with p = sin(theta) in (-1, 1)
/// and theta the angle between a ray and the element's inward normal. The
/// Liouville measure is ds dp, so equal-width p bins carry equal measure. A
/// coefficient of a density is the *power* held by its cell:
///
///   - reflecting cells: power leaving the element after reflection,
///   - port cells: power arriving at (and leaving through) the port,
///   - aperture cells: power entering the element's room through the aperture.
///
/// The transfer matrix moves the power of one cell across one free flight and
/// through the boundary interaction at the far end. The equilibrium density
/// solves (I - L) rho = rho0 where rho0 is the one-step image of the physical
/// source. Port cells have empty columns: nothing re-enters from outside.

#include <Eigen/Sparse>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cavityflux/boundary.hpp"
#include "cavityflux/density_grid.hpp"
#include "cavityflux/geometry.hpp"
#include "cavityflux/source.hpp"

namespace cavityflux::dea {

using Density = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

class PhaseSpaceBasis {
 public:
  PhaseSpaceBasis(const Scene& scene, double element_length, int n_dir);

  const BoundaryMesh& mesh() const { return mesh_; }
  int n_dir() const { return n_dir_; }
  std::size_t dim() const { return mesh_.size() * static_cast<std::size_t>(n_dir_); }

  std::size_t cell(int element, int bin) const {
    return static_cast<std::size_t>(element) * static_cast<std::size_t>(n_dir_) + static_cast<std::size_t>(bin);
  }
  int element_of(std::size_t cell) const { return static_cast<int>(cell / static_cast<std::size_t>(n_dir_)); }
  int bin_of_cell(std::size_t cell) const { return static_cast<int>(cell % static_cast<std::size_t>(n_dir_)); }

  double bin_width() const { return 2.0 / n_dir_; }
  double bin_lower(int bin) const { return -1.0 + bin * bin_width(); }
  int bin_of(double p) const;
  /// ds dp measure of a cell.
  double cell_measure(std::size_t cell) const;

 private:
  BoundaryMesh mesh_;
  int n_dir_;
};

/// Stratified midpoint rule per cell: positions x directions samples.
struct Quadrature {
  int positions{4};
  int directions{4};
  int samples() const { return positions * directions; }
};

/// Where the samples of each emitting cell land. Independent of absorption,
/// so one map serves a whole alpha sweep.
class FlightMap {
 public:
  struct Arrival {
    std::uint32_t cell;
    double weight;
  };

  FlightMap(const Scene& scene, const PhaseSpaceBasis& basis, Quadrature quad, unsigned threads = 0);

  const PhaseSpaceBasis& basis() const { return *basis_; }
  Quadrature quadrature() const { return quad_; }
  std::span<const Arrival> column(std::size_t cell) const {
    return {arrivals_.data() + offsets_[cell], arrivals_.data() + offsets_[cell + 1]};
  }
  std::size_t nonzeros() const { return arrivals_.size(); }

 private:
  const PhaseSpaceBasis* basis_;
  Quadrature quad_;
  std::vector<std::size_t> offsets_;
  std::vector<Arrival> arrivals_;
};

struct TransferMatrix {
  SparseMatrix L;
  /// Rows: rooms. Column c: power of cell c absorbed in each room's walls during one step.
  SparseMatrix absorption;
};

/// Absorption factor of every element for a uniform wall/scatterer alpha.
std::vector<double> uniform_alpha(const BoundaryMesh& mesh, double alpha);

TransferMatrix transfer_matrix(const FlightMap& flights, std::span<const double> element_alpha, std::size_t n_rooms);

/// Flight map plus the scene's own alpha.
TransferMatrix assemble(const Scene& scene, const PhaseSpaceBasis& basis, Quadrature quad = {});

/// First-hit image of a source fan, before absorption is applied.
struct SourceImage {
  std::vector<FlightMap::Arrival> arrivals;
  std::size_t rays{0};
};

SourceImage source_image(const Scene& scene, const PhaseSpaceBasis& basis, const Source& source,
                         std::size_t rays = std::size_t{1} << 20);

struct SourceVector {
  Density rho0;
  /// Power absorbed at the first hit, per room.
  std::vector<double> absorbed;
};

SourceVector source_vector(const SourceImage& image, const PhaseSpaceBasis& basis,
                           std::span<const double> element_alpha, std::size_t n_rooms);
SourceVector source_vector(const Scene& scene, const PhaseSpaceBasis& basis, const Source& source,
                           std::size_t rays = std::size_t{1} << 20);

struct SolveOptions {
  /// Relative residual target ||(I-L)x - b|| / ||b||.
  double tolerance{1e-13};
  /// Dense LU below this dimension, Krylov above.
  std::size_t direct_limit{2000};
  int max_refinements{8};
};

struct SolveStats {
  double relative_residual{0.0};
  long iterations{0};
  bool direct{false};
};

/// Solves (I - L) rho = rho0. Throws SolveError with a spectral radius estimate
/// if the residual target of 1e-10 cannot be reached.
Density solve(const TransferMatrix& op, const Density& rho0, const SolveOptions& opts = {}, SolveStats* stats = nullptr);

/// Solves (I - L)^T mu = chi.
Density adjoint(const TransferMatrix& op, const Density& chi, const SolveOptions& opts = {},
                SolveStats* stats = nullptr);

/// Power iteration estimate of the spectral radius of L.
double spectral_radius(const SparseMatrix& L, int iterations = 500);

/// 0/1 indicator of the cells of an opening (both sides for apertures).
Density indicator(const Scene& scene, const PhaseSpaceBasis& basis, const std::string& opening_id);
/// Indicator of the aperture cells that feed room `into`.
Density indicator_into(const Scene& scene, const PhaseSpaceBasis& basis, const std::string& opening_id,
                       const std::string& into);

/// <rho, chi_X>. Throws ValidationError for unknown ids.
double port_flux(const Scene& scene, const PhaseSpaceBasis& basis, const Density& rho, const std::string& opening_id);

enum class MapWeighting {
  Flux,      ///< power density: energy per unit area
  Coupling,  ///< direction-averaged value of a per-cell quantity such as mu_X
};

/// Interior map by transporting each emitting cell's value along its quadrature flights.
/// With Flux weighting and a source, the source's own first flights are included.
DensityGrid spatial_map(const Scene& scene, const PhaseSpaceBasis& basis, const Density& values,
                        MapWeighting weighting, double cells_per_unit, Quadrature quad = {},
                        const Source* direct_source = nullptr, double direct_power = 1.0,
                        std::size_t direct_rays = 1 << 14);

/// End-to-end settings for one scene.
struct DeaConfig {
  double element_length{0.02};
  int n_dir{64};
  Quadrature quadrature{};
  std::size_t source_rays{std::size_t{1} << 20};
  unsigned threads{0};
};

/// Largest of 0.02 * 2^-k not exceeding a third of the narrowest opening.
double default_element_length(const Scene& scene);

struct DeaResult {
  Density rho0;
  Density rho;
  std::map<std::string, double> p_port;
  std::map<std::string, double> p_wall;
  double defect{0.0};
  SolveStats stats;
};

/// Scene, basis and flight map bundled for repeated solves over alpha and sources.
class Model {
 public:
  Model(const Scene& scene, const DeaConfig& cfg);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const Scene& scene() const { return scene_; }
  const PhaseSpaceBasis& basis() const { return basis_; }
  const FlightMap& flights() const { return flights_; }
  const DeaConfig& config() const { return cfg_; }

  TransferMatrix transfer_at(double alpha) const;
  DeaResult run(const Source& source, double alpha) const;
  DeaResult run(const SourceImage& image, const TransferMatrix& op, double alpha) const;

 private:
  Scene scene_;
  DeaConfig cfg_;
  PhaseSpaceBasis basis_;
  FlightMap flights_;
};

}  // namespace cavityflux::dea
