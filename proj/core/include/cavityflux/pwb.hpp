#pragma once
/// @file pwb.hpp
/// @brief Power balance: each room holds a uniform energy density and loses
/// power to walls and openings in proportion to their absorption
/// cross-sections.
///
/// For a room i with perimeter l_i (walls plus scatterers), exterior port
/// width w_i and aperture width w_A:
///
///     sigma_wall_i = alpha * (l_i - (w_i + w_A))
///     sigma_tot_i  = sigma_wall_i + w_i + w_A
///
/// and the balance P_tot/sigma_tot = P_port/w = P_back/w_A = P_wall/sigma_wall
/// holds in every room. The general network solver assembles these relations
/// for any number of rooms; the one- and two-room closed forms are its special
/// cases.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cavityflux {
class Scene;
}

namespace cavityflux::pwb {

struct PwbInput {
  double l1{0.0};
  double l2{0.0};
  double w1{0.0};
  double w2{0.0};
  double wA{0.0};
  double alpha{0.0};
  double p_inj1{1.0};
  double p_inj2{0.0};
  /// Replace the geometric sigma_tot of a room (e.g. a published constant).
  std::optional<double> sigma_tot1;
  std::optional<double> sigma_tot2;
};

struct PwbReport {
  std::array<double, 2> sigma_wall{};
  std::array<double, 2> sigma_tot{};
  std::array<double, 2> p_tot{};
  std::array<double, 2> p_port{};
  std::array<double, 2> p_wall{};
  double p_back_12{0.0};  ///< through the aperture from room 2 into room 1
  double p_back_21{0.0};  ///< through the aperture from room 1 into room 2
};

/// Two rooms coupled by one aperture, each with one exterior port.
/// Throws std::domain_error if w_A^2 >= sigma_tot1 * sigma_tot2.
PwbReport solve_two_cavity(const PwbInput& in);

/// Fraction of the power injected into room 1 that leaves through port 1 when alpha = 0.
double lossless_two_cavity_ratio(double w1, double w2, double wA);

/// Lossless single room with two openings: w1 / (w1 + wA).
double single_cavity_ratio(double w1, double wA);

/// Arbitrary set of rooms and openings.
struct Network {
  struct Room {
    std::string id;
    double perimeter{0.0};
    double injected{0.0};
    std::optional<double> sigma_tot;
  };
  struct Port {
    std::string id;
    int room{-1};
    double width{0.0};
  };
  struct Aperture {
    std::string id;
    int room_a{-1};
    int room_b{-1};
    double width{0.0};
  };
  std::vector<Room> rooms;
  std::vector<Port> ports;
  std::vector<Aperture> apertures;
  double alpha{0.0};
};

struct NetworkResult {
  std::vector<double> sigma_wall;
  std::vector<double> sigma_tot;
  std::vector<double> p_tot;
  /// P_tot / sigma_tot per room (the coarse-grained flux density).
  std::vector<double> density;
  std::vector<double> p_wall;
  std::map<std::string, double> p_port;
  /// Per aperture: power moving a->b and b->a.
  std::vector<std::pair<double, double>> aperture_flow;
};

/// Solves the balance system. Throws std::domain_error if it is singular.
NetworkResult solve(const Network& net);

/// Network with geometry-derived perimeters and widths; unit power into `source_room`.
Network network_from_scene(const Scene& scene, int source_room, double injected = 1.0);

}  // namespace cavityflux::pwb
