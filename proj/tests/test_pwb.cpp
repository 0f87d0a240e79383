#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "cavityflux/geometry.hpp"
#include "cavityflux/pwb.hpp"
#include "fixtures.hpp"

using namespace cavityflux;

namespace {

// Two-room balance solved by Cramer's rule:
//   T1 = inj1 + wA T2 / s2,  T2 = inj2 + wA T1 / s1.
struct TwoRoom {
  double t1, t2, port1, port2, wall1, wall2;
};

TwoRoom cramer(double l1, double l2, double w1, double w2, double wA, double alpha, double inj1, double inj2,
               double s1_override = 0.0, double s2_override = 0.0) {
  const double sw1 = alpha * (l1 - w1 - wA);
  const double sw2 = alpha * (l2 - w2 - wA);
  const double s1 = s1_override > 0.0 ? s1_override : sw1 + w1 + wA;
  const double s2 = s2_override > 0.0 ? s2_override : sw2 + w2 + wA;
  // [1, -wA/s2; -wA/s1, 1] [T1; T2] = [inj1; inj2]
  const double det = 1.0 - (wA / s2) * (wA / s1);
  const double t1 = (inj1 + (wA / s2) * inj2) / det;
  const double t2 = (inj2 + (wA / s1) * inj1) / det;
  return {t1, t2, w1 * t1 / s1, w2 * t2 / s2, sw1 * t1 / s1, sw2 * t2 / s2};
}

constexpr double kW = 0.1571;
constexpr double kWA = 0.2;
const double kGeomPerimeter = 4.0 + 3.0 * 2.0 * std::numbers::pi * 0.1;

}  // namespace

TEST(Pwb, LosslessTwoCavityRatio) {
  EXPECT_NEAR(pwb::lossless_two_cavity_ratio(kW, kW, kWA), 0.641, 0.001);
  EXPECT_NEAR(pwb::lossless_two_cavity_ratio(kW, kW, kWA), cramer(1, 1, kW, kW, kWA, 0.0, 1.0, 0.0).port1, 1e-15);
}

TEST(Pwb, SingleCavityRatio) {
  EXPECT_NEAR(pwb::single_cavity_ratio(kW, kWA), 0.4399, 0.0005);
  EXPECT_NEAR(pwb::single_cavity_ratio(kW, kWA), kW / (kW + kWA), 1e-15);
}

TEST(Pwb, MaximumLossWithPublishedSigma) {
  pwb::PwbInput in{kGeomPerimeter, kGeomPerimeter, kW, kW, kWA, 1.0};
  in.sigma_tot1 = 5.995;
  in.sigma_tot2 = 5.995;
  const auto r = pwb::solve_two_cavity(in);
  EXPECT_NEAR(r.p_port[0], 0.0267, 0.0005);
  EXPECT_NEAR(r.p_port[0], 0.026234, 5e-7);
  EXPECT_NEAR(r.p_port[0], cramer(0, 0, kW, kW, kWA, 1.0, 1.0, 0.0, 5.995, 5.995).port1, 1e-15);
}

TEST(Pwb, MaximumLossWithGeometricSigma) {
  const auto r = pwb::solve_two_cavity({kGeomPerimeter, kGeomPerimeter, kW, kW, kWA, 1.0});
  EXPECT_NEAR(r.sigma_tot[0], 5.884956, 1e-6);
  EXPECT_NEAR(r.p_port[0], 0.026726, 5e-7);
  EXPECT_LT(std::abs(r.p_port[0] - 0.0267) / 0.0267, 0.05);
}

TEST(Pwb, ClosedFormMatchesOracleOnRandomInputs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double l1 = 4.0 + 2.0 * u(rng), l2 = 4.0 + 2.0 * u(rng);
    const double w1 = 0.01 + 0.3 * u(rng), w2 = 0.01 + 0.3 * u(rng), wA = 0.01 + 0.5 * u(rng);
    const double alpha = u(rng), inj1 = u(rng), inj2 = u(rng);
    const auto r = pwb::solve_two_cavity({l1, l2, w1, w2, wA, alpha, inj1, inj2});
    const auto o = cramer(l1, l2, w1, w2, wA, alpha, inj1, inj2);
    EXPECT_NEAR(r.p_tot[0], o.t1, 1e-12 * o.t1);
    EXPECT_NEAR(r.p_tot[1], o.t2, 1e-12 * o.t2);
    EXPECT_NEAR(r.p_port[0], o.port1, 1e-12 * o.port1);
    EXPECT_NEAR(r.p_port[1], o.port2, 1e-12 * o.port2);
    EXPECT_NEAR(r.p_wall[0], o.wall1, 1e-12 * (o.wall1 + 1e-300));
  }
}

TEST(Pwb, BalanceClosesInEveryRoom) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const pwb::PwbInput in{4.0 + u(rng), 4.0 + u(rng), 0.05 + 0.2 * u(rng), 0.05 + 0.2 * u(rng),
                           0.05 + 0.3 * u(rng), u(rng), u(rng), u(rng)};
    const auto r = pwb::solve_two_cavity(in);
    // In: injection plus what comes back through the aperture. Out: port, wall, aperture.
    const double in1 = in.p_inj1 + r.p_back_12;
    const double out1 = r.p_port[0] + r.p_wall[0] + r.p_back_21;
    const double in2 = in.p_inj2 + r.p_back_21;
    const double out2 = r.p_port[1] + r.p_wall[1] + r.p_back_12;
    EXPECT_NEAR(in1, out1, 1e-12 * in1);
    EXPECT_NEAR(in2, out2, 1e-12 * in2);
    // Globally all injected power leaves through ports or walls.
    const double total = r.p_port[0] + r.p_port[1] + r.p_wall[0] + r.p_wall[1];
    EXPECT_NEAR(total, in.p_inj1 + in.p_inj2, 1e-12 * (in.p_inj1 + in.p_inj2));
  }
}

TEST(Pwb, LimitConsistency) {
  const auto r = pwb::solve_two_cavity({kGeomPerimeter, kGeomPerimeter, kW, kW, kWA, 0.0});
  EXPECT_NEAR(r.p_port[0], pwb::lossless_two_cavity_ratio(kW, kW, kWA), 1e-12);
  const double big = 1e3;
  EXPECT_NEAR(pwb::lossless_two_cavity_ratio(kW, big, big), pwb::single_cavity_ratio(kW, big), 1e-3);
}

TEST(Pwb, PortPowerFallsWithAlpha) {
  double last = 2.0;
  for (int i = 0; i <= 10; ++i) {
    const auto r = pwb::solve_two_cavity({kGeomPerimeter, kGeomPerimeter, kW, kW, kWA, 0.1 * i});
    EXPECT_LT(r.p_port[0], last);
    last = r.p_port[0];
  }
}

TEST(Pwb, SingularSystemRejected) {
  pwb::PwbInput in{kGeomPerimeter, kGeomPerimeter, kW, kW, kWA, 0.0};
  in.sigma_tot1 = 0.2;
  in.sigma_tot2 = 0.2;
  EXPECT_THROW(pwb::solve_two_cavity(in), std::domain_error);
}

TEST(Pwb, NetworkFromSceneMatchesClosedForm) {
  for (const double alpha : {0.0, 0.01, 0.1, 0.5, 1.0}) {
    const Scene s = fixtures::preset("fig1a", alpha);
    const auto net = pwb::solve(pwb::network_from_scene(s, 0));
    const auto o = cramer(kGeomPerimeter, kGeomPerimeter, kW, kW, kWA, alpha, 1.0, 0.0);
    EXPECT_NEAR(net.p_port.at("P1"), o.port1, 1e-12);
    EXPECT_NEAR(net.p_port.at("P2"), o.port2, 1e-12);
    EXPECT_NEAR(net.p_wall[0], o.wall1, 1e-12);
    EXPECT_NEAR(net.p_wall[1], o.wall2, 1e-12);
  }
}

TEST(Pwb, SingleRoomNetwork) {
  const auto net = pwb::solve(pwb::network_from_scene(fixtures::preset("fig2"), 0));
  EXPECT_NEAR(net.p_port.at("P1"), pwb::single_cavity_ratio(kW, kWA), 1e-12);
  EXPECT_NEAR(net.p_port.at("P1") + net.p_port.at("PA"), 1.0, 1e-12);
}

TEST(Pwb, ScattererPlacementIsIrrelevant) {
  for (const double alpha : {0.0, 0.05, 1.0}) {
    const auto a = pwb::solve(pwb::network_from_scene(fixtures::preset("fig1a", alpha), 0));
    const auto b = pwb::solve(pwb::network_from_scene(fixtures::preset("fig1b", alpha), 0));
    EXPECT_EQ(a.p_port, b.p_port);
  }
}
