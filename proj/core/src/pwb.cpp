#include "cavityflux/pwb.hpp"

#include <Eigen/Dense>
#include <stdexcept>

#include "cavityflux/geometry.hpp"

namespace cavityflux::pwb {

PwbReport solve_two_cavity(const PwbInput& in) {
  PwbReport r;
  const std::array<double, 2> l{in.l1, in.l2};
  const std::array<double, 2> w{in.w1, in.w2};
  const std::array<std::optional<double>, 2> override_tot{in.sigma_tot1, in.sigma_tot2};
  for (std::size_t i = 0; i < 2; ++i) {
    if (override_tot[i]) {
      r.sigma_tot[i] = *override_tot[i];
      r.sigma_wall[i] = r.sigma_tot[i] - (w[i] + in.wA);
    } else {
      r.sigma_wall[i] = in.alpha * (l[i] - (w[i] + in.wA));
      r.sigma_tot[i] = r.sigma_wall[i] + w[i] + in.wA;
    }
    if (!(r.sigma_tot[i] > 0.0)) throw std::domain_error("power balance: sigma_tot must be positive");
  }
  const double coupling = in.wA * in.wA / (r.sigma_tot[0] * r.sigma_tot[1]);
  if (coupling >= 1.0) throw std::domain_error("power balance: singular system (w_A^2 >= sigma_tot1 sigma_tot2)");

  // P1 = inj1 + wA P2/s2 and P2 = inj2 + wA P1/s1.
  r.p_tot[0] = (in.p_inj1 + in.wA * in.p_inj2 / r.sigma_tot[1]) / (1.0 - coupling);
  r.p_tot[1] = (in.p_inj2 + in.wA * in.p_inj1 / r.sigma_tot[0]) / (1.0 - coupling);
  for (std::size_t i = 0; i < 2; ++i) {
    const double density = r.p_tot[i] / r.sigma_tot[i];
    r.p_port[i] = w[i] * density;
    r.p_wall[i] = r.sigma_wall[i] * density;
  }
  r.p_back_21 = in.wA * r.p_tot[0] / r.sigma_tot[0];
  r.p_back_12 = in.wA * r.p_tot[1] / r.sigma_tot[1];
  return r;
}

double lossless_two_cavity_ratio(double w1, double w2, double wA) {
  return w1 * (w2 + wA) / (w1 * w2 + wA * (w1 + w2));
}

double single_cavity_ratio(double w1, double wA) { return w1 / (w1 + wA); }

NetworkResult solve(const Network& net) {
  const auto n = static_cast<Eigen::Index>(net.rooms.size());
  NetworkResult out;
  std::vector<double> open_width(net.rooms.size(), 0.0);
  for (const auto& p : net.ports) open_width[static_cast<std::size_t>(p.room)] += p.width;
  for (const auto& a : net.apertures) {
    open_width[static_cast<std::size_t>(a.room_a)] += a.width;
    open_width[static_cast<std::size_t>(a.room_b)] += a.width;
  }
  out.sigma_wall.resize(net.rooms.size());
  out.sigma_tot.resize(net.rooms.size());
  for (std::size_t i = 0; i < net.rooms.size(); ++i) {
    const auto& room = net.rooms[i];
    if (room.sigma_tot) {
      out.sigma_tot[i] = *room.sigma_tot;
      out.sigma_wall[i] = out.sigma_tot[i] - open_width[i];
    } else {
      out.sigma_wall[i] = net.alpha * (room.perimeter - open_width[i]);
      out.sigma_tot[i] = out.sigma_wall[i] + open_width[i];
    }
  }

  // sigma_tot_i e_i - sum_apertures w e_j = injected_i
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = out.sigma_tot[static_cast<std::size_t>(i)];
    b(i) = net.rooms[static_cast<std::size_t>(i)].injected;
  }
  for (const auto& ap : net.apertures) {
    a(ap.room_a, ap.room_b) -= ap.width;
    a(ap.room_b, ap.room_a) -= ap.width;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw std::domain_error("power balance: singular network");
  const Eigen::VectorXd e = lu.solve(b);

  out.density.assign(e.data(), e.data() + n);
  out.p_tot.resize(net.rooms.size());
  out.p_wall.resize(net.rooms.size());
  for (std::size_t i = 0; i < net.rooms.size(); ++i) {
    if (!(out.density[i] >= 0.0)) throw std::domain_error("power balance: negative energy density");
    out.p_tot[i] = out.sigma_tot[i] * out.density[i];
    out.p_wall[i] = out.sigma_wall[i] * out.density[i];
  }
  for (const auto& p : net.ports) out.p_port[p.id] = p.width * out.density[static_cast<std::size_t>(p.room)];
  for (const auto& ap : net.apertures) {
    out.aperture_flow.emplace_back(ap.width * out.density[static_cast<std::size_t>(ap.room_a)],
                                   ap.width * out.density[static_cast<std::size_t>(ap.room_b)]);
  }
  return out;
}

Network network_from_scene(const Scene& scene, int source_room, double injected) {
  Network net;
  net.alpha = scene.alpha();
  for (const auto& d : scene.pwb_dimensions()) net.rooms.push_back({d.cavity, d.perimeter, 0.0, std::nullopt});
  net.rooms.at(static_cast<std::size_t>(source_room)).injected = injected;
  for (std::size_t k = 0; k < scene.openings().size(); ++k) {
    const auto& op = scene.openings()[k];
    const auto [a, b] = scene.opening_cavities(static_cast<int>(k));
    if (op.kind == OpeningKind::Port)
      net.ports.push_back({op.id, a, op.width});
    else
      net.apertures.push_back({op.id, a, b, op.width});
  }
  return net;
}

}  // namespace cavityflux::pwb
