#include <gtest/gtest.h>

#include <cmath>

#include "collapse/mass_transform.hpp"
#include "generators.hpp"

namespace collapse {
namespace {

TEST(ForwardMass, ConstantProfileIsLinearInTransformedCoordinate) {
  const RadialProfile c({0.0, 0.3, 1.0}, {5.0, 5.0, 5.0});
  const Grid g4(64, GridPolicy::Radial4D);
  const Grid g2(64, GridPolicy::Radial2D);
  const MassProfile U = forward_mass_4d(c, g4);
  const MassProfile M = forward_mass_2d(c, g2);
  for (std::size_t i = 0; i < U.size(); ++i) {
    EXPECT_NEAR(U.values()[i], 5.0 * g4.nodes()[i] / 4.0, 1e-14);
    EXPECT_NEAR(M.values()[i], 5.0 * g2.nodes()[i] / 2.0, 1e-14);
  }
  EXPECT_EQ(U.kind(), MassKind::U4D);
  EXPECT_EQ(M.kind(), MassKind::M2D);
}

TEST(ForwardMass, EndpointMatchesProfileMass) {
  testing::Gen gen(21);
  for (int k = 0; k < 40; ++k) {
    const RadialProfile f = gen.decreasing_profile(gen.integer(3, 40));
    const MassProfile U = forward_mass_4d(f, Grid(128, GridPolicy::Radial4D));
    const MassProfile M = forward_mass_2d(f, Grid(128, GridPolicy::Radial2D));
    EXPECT_NEAR(2.0 * kPi * kPi * U.endpoint(), profile_mass_4d(f),
                1e-12 * profile_mass_4d(f));
    EXPECT_NEAR(2.0 * kPi * M.endpoint(), profile_mass_2d(f), 1e-12 * profile_mass_2d(f));
    EXPECT_TRUE(U.nondecreasing());
    EXPECT_TRUE(M.nondecreasing());
  }
}

TEST(ProfileMass, ClosedForms) {
  // f = 1 - r: 2π²(1/4 - 1/5) and 2π(1/2 - 1/3).
  const RadialProfile f({0.0, 1.0}, {1.0, 0.0});
  EXPECT_NEAR(profile_mass_4d(f), 2.0 * kPi * kPi / 20.0, 1e-15);
  EXPECT_NEAR(profile_mass_2d(f), 2.0 * kPi / 6.0, 1e-15);
}

TEST(BackwardDensity, InvertsForwardMassAtFirstOrder) {
  // Smooth profile: the nodal slope error must halve when n doubles.
  const int samples = 4000;
  std::vector<double> r(samples + 1), v(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    r[i] = static_cast<double>(i) / samples;
    v[i] = 3.0 / (1.0 + 4.0 * r[i] * r[i]);
  }
  const RadialProfile f(r, v);
  double prev = 0.0;
  for (int n : {64, 128, 256}) {
    const Grid g(n, GridPolicy::Radial4D);
    const MassProfile U = forward_mass_4d(f, g);
    const RadialProfile back = density_from_mass_4d(U);
    double err = 0.0;
    for (int i = 1; i <= n; ++i) err = std::max(err, std::abs(back.values()[i] - f(g.radius(i))));
    if (prev > 0.0) {
      EXPECT_NEAR(prev / err, 2.0, 0.2);
    }
    prev = err;
  }
}

TEST(BackwardDensity, MatchesProfileSlopes) {
  testing::Gen gen(22);
  const std::vector<double> s{0.0, 0.1, 0.4, 1.0};
  const std::vector<double> U = gen.cumulative(s);
  const auto u = backward_density(s, U, 4.0);
  ASSERT_EQ(u.size(), 4u);
  for (std::size_t i = 1; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(u[i], 4.0 * (U[i] - U[i - 1]) / (s[i] - s[i - 1]));
  }
  EXPECT_DOUBLE_EQ(u[0], u[1]);
  const RadialProfile d = density_from_mass_4d(MassProfile(s, U, MassKind::U4D));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(d.values()[i], u[i]);
  EXPECT_THROW(density_from_mass_4d(MassProfile(s, {0.0, 1.0, 0.5, 2.0}, MassKind::U4D)),
               InputError);
}

TEST(Potential, ConstantSignalHasZeroPotential) {
  const Grid g(256, GridPolicy::Radial4D);
  std::vector<double> W(g.nodes().size());
  for (std::size_t i = 0; i < W.size(); ++i) W[i] = 3.0 * g.nodes()[i] / 4.0;
  const PotentialProfile p =
      reconstruct_potential(MassProfile(g.nodes(), W, MassKind::W4D), 2.0 * kPi * kPi * W.back());
  EXPECT_NEAR(p.mu, 3.0, 1e-14);
  for (std::size_t i = 0; i < W.size(); ++i) {
    EXPECT_NEAR(p.v[i], 0.0, 1e-13);
    EXPECT_NEAR(p.v_r[i], 0.0, 1e-13);
  }
}

TEST(Potential, QuadraticSignalMatchesClosedForm) {
  // w = 1 + r²: W = s/4 + s^{3/2}/6, μ = 1 + 2/3, v_r = μr/4 - W/r³ = r/6 - r³/6.
  const Grid g(512, GridPolicy::Radial4D);
  std::vector<double> W(g.nodes().size());
  for (std::size_t i = 0; i < W.size(); ++i) {
    const double s = g.nodes()[i];
    W[i] = s / 4.0 + s * std::sqrt(s) / 6.0;
  }
  const PotentialProfile p =
      reconstruct_potential(MassProfile(g.nodes(), W, MassKind::W4D), 2.0 * kPi * kPi * W.back());
  EXPECT_NEAR(p.mu, 5.0 / 3.0, 1e-14);
  for (std::size_t i = 1; i < W.size(); ++i) {
    const double r = g.radius(static_cast<int>(i));
    EXPECT_NEAR(p.v_r[i], r / 6.0 - r * r * r / 6.0, 1e-13);
  }
  std::vector<double> r = g.radii();
  EXPECT_NEAR(trapezoid_r3(r, p.v), 0.0, 1e-14);
  EXPECT_THROW(reconstruct_potential(MassProfile(g.nodes(), W, MassKind::U4D), 1.0), InputError);
}

TEST(Trapezoid, PolynomialWeights) {
  std::vector<double> r(2001), one(2001);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = static_cast<double>(i) / 2000.0;
    one[i] = 1.0;
  }
  EXPECT_NEAR(trapezoid_r3(r, one), 0.25, 1e-6);
}

}  // namespace
}  // namespace collapse
