#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "cavityflux/errors.hpp"
#include "cavityflux/raytrace.hpp"
#include "cavityflux/scene_io.hpp"
#include "cavityflux/source.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace cavityflux;

namespace {

double total(const rt::PowerReport& r) {
  double s = r.p_residual;
  for (const auto& [k, v] : r.p_port) s += v;
  for (const auto& [k, v] : r.p_wall) s += v;
  return s;
}

rt::RtConfig config(std::size_t rays, unsigned threads = 0) {
  rt::RtConfig c;
  c.n_rays = rays;
  c.threads = threads;
  return c;
}

oracle::What kind_of(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::Wall: return oracle::What::Wall;
    case SurfaceKind::Disc: return oracle::What::Disc;
    case SurfaceKind::Port: return oracle::What::Port;
    case SurfaceKind::Aperture: return oracle::What::Aperture;
  }
  return oracle::What::Wall;
}

}  // namespace

TEST(Raytrace, ConservationAcrossPresetsAndAlphas) {
  for (const char* name : {"fig1a", "fig1b", "fig2", "fig3"}) {
    for (const double alpha : {0.0, 0.001, 0.01, 0.1, 0.5, 1.0}) {
      const Scene s = fixtures::preset(name, alpha);
      const auto r = rt::simulate(s, Source::port_normal("P1"), config(2000));
      EXPECT_LT(std::abs(total(r) - 1.0), 1e-9) << name << " alpha=" << alpha;
      EXPECT_LT(r.defect, 1e-9);
      if (alpha >= 0.01) EXPECT_LT(r.p_residual, 1e-6) << name << " alpha=" << alpha;
      for (const auto& [k, v] : r.p_port) EXPECT_GE(v, 0.0);
      for (const auto& [k, v] : r.p_wall) EXPECT_GE(v, 0.0);
    }
  }
}

TEST(Raytrace, PointSourcesConserve) {
  const Scene s = fixtures::preset("fig2", 0.0);
  for (int i = 1; i <= kTable1Count; ++i) {
    const auto r = rt::simulate(s, Source::point_isotropic(table1_source(i)), config(2000));
    EXPECT_LT(std::abs(total(r) - 1.0), 1e-9);
    // Lossless: everything leaves through the two ports unless trapped past the bounce cap.
    EXPECT_NEAR(r.p_port.at("P1") + r.p_port.at("PA"), 1.0 - r.p_residual, 1e-9);
  }
}

TEST(Raytrace, BitwiseDeterministicAndThreadIndependent) {
  const Scene s = fixtures::preset("fig1a", 0.05);
  const auto a = rt::simulate(s, Source::port_normal("P1"), config(3000, 1));
  const auto b = rt::simulate(s, Source::port_normal("P1"), config(3000, 1));
  const auto c = rt::simulate(s, Source::port_normal("P1"), config(3000, 4));
  EXPECT_EQ(a.p_port, b.p_port);
  EXPECT_EQ(a.p_port, c.p_port);
  EXPECT_EQ(a.p_wall, c.p_wall);
  EXPECT_EQ(a.p_residual, c.p_residual);
  auto other = config(3000, 1);
  other.rng_seed = 2;
  EXPECT_NE(a.p_port, rt::simulate(s, Source::port_normal("P1"), other).p_port);
}

TEST(Raytrace, PerfectAbsorberStopsAtFirstHit) {
  const Scene s = Scene::build(fixtures::empty_square(1.0));
  const auto o = rt::trace_one(s, 0, {0.3, 0.6}, normalized(Vec2{1.0, 0.4}), rt::RtConfig{});
  EXPECT_EQ(o.exit_opening, -1);
  EXPECT_EQ(o.bounces, 1u);
  EXPECT_DOUBLE_EQ(o.wall[0], 1.0);
  EXPECT_DOUBLE_EQ(o.residual, 0.0);
}

TEST(Raytrace, AlphaOneDeliversNothing) {
  for (const char* name : {"fig1a", "fig1b", "fig2", "fig3"}) {
    const Scene s = fixtures::preset(name, 1.0);
    const auto r = rt::simulate(s, Source::port_normal("P1"), config(8002));
    for (const auto& [k, v] : r.p_port) EXPECT_LT(v, 1e-12) << name << " " << k;
  }
}

TEST(Raytrace, LosslessRaysLeaveWithFullEnergy) {
  const Scene s = fixtures::preset("fig2", 0.0);
  const Source src = Source::port_normal("P1");
  for (std::size_t k = 0; k < 200; ++k) {
    const auto ray = launch_ray(s, src, rt::launch_fraction(1, k, 200));
    const auto o = rt::trace_one(s, ray.cavity, ray.origin, ray.direction, rt::RtConfig{});
    if (o.residual > 0.0) continue;  // trapped past the bounce cap
    EXPECT_GE(o.exit_opening, 0);
    EXPECT_DOUBLE_EQ(o.exit_energy, 1.0);
  }
}

TEST(Raytrace, PerRayDeliveryFallsWithAlpha) {
  const Source src = Source::port_normal("P1");
  const Scene s0 = fixtures::preset("fig1a", 0.0);
  for (std::size_t k = 0; k < 100; ++k) {
    const auto ray = launch_ray(s0, src, rt::launch_fraction(1, k, 100));
    double last = 2.0;
    for (int i = 0; i <= 10; ++i) {
      const double alpha = 0.1 * i;
      const auto o = rt::trace_one(fixtures::preset("fig1a", alpha), ray.cavity, ray.origin, ray.direction,
                                   rt::RtConfig{});
      EXPECT_LE(o.exit_energy, last);
      if (o.exit_opening >= 0) EXPECT_NEAR(o.exit_energy, std::pow(1.0 - alpha, double(o.bounces)), 1e-12);
      last = o.exit_energy;
    }
  }
}

TEST(Raytrace, EnsemblePortPowerFallsWithAlpha) {
  std::map<std::string, double> last;
  for (int i = 0; i <= 10; ++i) {
    const auto r = rt::simulate(fixtures::preset("fig1a", 0.1 * i), Source::port_normal("P1"), config(2000));
    for (const auto& [k, v] : r.p_port) {
      if (last.count(k)) EXPECT_LE(v, last[k]) << k << " alpha=" << 0.1 * i;
      last[k] = v;
    }
  }
}

TEST(Raytrace, RayCountConvergence) {
  const Scene s = fixtures::preset("fig1a", 0.1);
  const auto a = rt::simulate(s, Source::port_normal("P1"), config(4000));
  const auto b = rt::simulate(s, Source::port_normal("P1"), config(8000));
  for (const auto& [k, v] : b.p_port) EXPECT_LT(std::abs(v - a.p_port.at(k)) / v, 0.02) << k;
}

TEST(Raytrace, LaunchFractionsAreStratified) {
  for (std::size_t k = 0; k < 1000; ++k) {
    const double f = rt::launch_fraction(42, k, 1000);
    EXPECT_GE(f, k / 1000.0);
    EXPECT_LT(f, (k + 1) / 1000.0);
  }
}

// Each interaction reported by the tracer is recomputed from the previous
// reported state with the brute-force intersector.
TEST(Raytrace, StepwiseOracleReplay) {
  const auto desc = preset_description("fig1a");
  auto alpha_desc = desc;
  alpha_desc.alpha = 0.05;
  const Scene s = Scene::build(alpha_desc);
  const Source src = Source::port_normal("P1");
  for (std::size_t k = 0; k < 50; ++k) {
    const auto ray = launch_ray(s, src, rt::launch_fraction(1, k, 50));
    std::vector<std::pair<Hit, int>> seq;
    rt::trace_one(s, ray.cavity, ray.origin, ray.direction, rt::RtConfig{}, nullptr,
                  [&](const Hit& h, int cavity) { seq.emplace_back(h, cavity); });
    ASSERT_FALSE(seq.empty());

    Point2 origin = ray.origin;
    Vec2 dir = ray.direction;
    int room = ray.cavity;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const auto& [h, cavity] = seq[i];
      ASSERT_EQ(cavity, room) << "ray " << k << " step " << i;
      const auto ref = oracle::brute_force_hit(desc, room, origin, dir);
      const Surface& surf = s.surfaces()[static_cast<std::size_t>(h.surface)];
      ASSERT_EQ(kind_of(surf.kind), ref.what) << "ray " << k << " step " << i;
      ASSERT_NEAR(h.distance, ref.t, 1e-12);
      ASSERT_NEAR(h.point.x, ref.point.x, 1e-12);
      ASSERT_NEAR(h.point.y, ref.point.y, 1e-12);
      if (ref.what == oracle::What::Aperture) {
        room = oracle::neighbour_room(desc, ref.point, room);
      } else if (ref.what != oracle::What::Port) {
        const Vec2 m = oracle::mirror(dir, ref.normal);
        ASSERT_NEAR(h.outgoing_direction.x, m.x, 1e-12);
        ASSERT_NEAR(h.outgoing_direction.y, m.y, 1e-12);
        dir = h.outgoing_direction;
      }
      origin = h.point + dir * kRayEpsilon;
    }
    EXPECT_EQ(kind_of(s.surfaces()[static_cast<std::size_t>(seq.back().first.surface)].kind),
              oracle::What::Port);
  }
}

// The first ray from Port 1 replayed by an independent free-running walk.
TEST(Raytrace, FreeRunningOracleReplay) {
  const auto desc = preset_description("fig1a");
  const Scene s = Scene::build(desc);
  const auto ray = launch_ray(s, Source::port_normal("P1"), rt::launch_fraction(1, 0, 8002));
  std::vector<Hit> seq;
  rt::trace_one(s, ray.cavity, ray.origin, ray.direction, rt::RtConfig{}, nullptr,
                [&](const Hit& h, int) { seq.push_back(h); });
  const auto ref = oracle::replay(desc, ray.cavity, ray.origin, ray.direction, 12);
  ASSERT_GE(seq.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_EQ(kind_of(s.surfaces()[static_cast<std::size_t>(seq[i].surface)].kind), ref[i].what) << i;
    EXPECT_NEAR(seq[i].point.x, ref[i].point.x, 1e-9) << i;
    EXPECT_NEAR(seq[i].point.y, ref[i].point.y, 1e-9) << i;
  }
}

TEST(Raytrace, DensityTallyIsNonNegativeAndCoversScene) {
  auto cfg = config(500);
  cfg.grid_resolution = 20.0;
  const auto r = rt::simulate(fixtures::preset("fig1a", 0.1), Source::port_normal("P1"), cfg);
  ASSERT_TRUE(r.density.has_value());
  EXPECT_EQ(r.density->nx(), 40u);
  EXPECT_EQ(r.density->ny(), 20u);
  for (const double v : r.density->values()) EXPECT_GE(v, 0.0);
  EXPECT_GT(r.density->sum(), 0.0);
}

TEST(Raytrace, InvalidSourceRejected) {
  const Scene s = fixtures::preset("fig1a");
  EXPECT_THROW(rt::simulate(s, Source::port_normal("A"), config(10)), ValidationError);
  EXPECT_THROW(rt::simulate(s, Source::port_normal("nope"), config(10)), ValidationError);
  EXPECT_THROW(rt::simulate(s, Source::point_isotropic({0.3, 0.75}), config(10)), ValidationError);
}
