#include <gtest/gtest.h>

#include <cmath>

#include "collapse/radial_model.hpp"
#include "collapse/subsolutions.hpp"
#include "generators.hpp"

namespace collapse {
namespace {

TEST(Constants, CriticalMasses) {
  EXPECT_NEAR(kCriticalMass2D, 25.132741228718345, 1e-14);
  EXPECT_NEAR(kCriticalMass4D, 631.65468166971895, 1e-12);
  EXPECT_DOUBLE_EQ(kBallVolume4D, kPi * kPi / 2.0);
}

TEST(Grid, NodesAreTransformedUniformRadii) {
  const Grid g4(8, GridPolicy::Radial4D);
  const Grid g2(8, GridPolicy::Radial2D);
  ASSERT_EQ(g4.nodes().size(), 9u);
  for (int i = 0; i <= 8; ++i) {
    const double r = i / 8.0;
    EXPECT_DOUBLE_EQ(g4.node(i), r * r * r * r);
    EXPECT_DOUBLE_EQ(g2.node(i), r * r);
    EXPECT_DOUBLE_EQ(g4.radius(i), r);
  }
  EXPECT_THROW(Grid(1, GridPolicy::Radial2D), InputError);
}

TEST(RadialProfile, RejectsBadSamples) {
  EXPECT_THROW(RadialProfile({0.0, 0.5, 0.5}, {1.0, 1.0, 1.0}), InputError);
  EXPECT_THROW(RadialProfile({0.0, 1.0}, {1.0}), InputError);
  EXPECT_THROW(RadialProfile({0.0, 1.0}, {1.0, NAN}), InputError);
}

TEST(RadialProfile, InterpolatesAndClamps) {
  const RadialProfile p({0.0, 0.5, 1.0}, {2.0, 1.0, 0.0});
  EXPECT_DOUBLE_EQ(p(0.25), 1.5);
  EXPECT_DOUBLE_EQ(p(-1.0), 2.0);
  EXPECT_DOUBLE_EQ(p(2.0), 0.0);
  EXPECT_TRUE(p.nonnegative());
}

TEST(MassProfile, Monotonicity) {
  const MassProfile up({0.0, 0.5, 1.0}, {0.0, 1.0, 2.0}, MassKind::U4D);
  const MassProfile down({0.0, 0.5, 1.0}, {0.0, 1.0, 0.5}, MassKind::U4D);
  EXPECT_TRUE(up.nondecreasing());
  EXPECT_FALSE(down.nondecreasing());
  EXPECT_TRUE(down.nondecreasing(0.6));
  EXPECT_DOUBLE_EQ(up.endpoint(), 2.0);
}

TEST(KeyValues, ParsesCommentsAndWhitespace) {
  const KeyValues kv = parse_key_values("# header\n a = 1.5 # tail\n\nb=x\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("a"), "1.5");
  EXPECT_EQ(kv.at("b"), "x");
  EXPECT_DOUBLE_EQ(require_number(kv, "a"), 1.5);
  EXPECT_THROW(require_number(kv, "b"), InputError);
  EXPECT_THROW(require_number(kv, "c"), InputError);
  EXPECT_DOUBLE_EQ(number_or(kv, "c", 7.0), 7.0);
  EXPECT_THROW(parse_key_values("novalue\n"), InputError);
  EXPECT_THROW(parse_key_values("=3\n"), InputError);
}

TEST(Params, FourDRoundTripIsExact) {
  testing::Gen gen(11);
  for (int k = 0; k < 50; ++k) {
    const Params4D p = select_parameters_4d(gen.uniform(0.2, 3.0),
                                            kCriticalMass4D * gen.uniform(1.01, 4.0),
                                            gen.uniform(0.2, 3.0));
    const Params4D q = params4d_from_key_values(parse_key_values(to_key_values(p)));
    EXPECT_EQ(q.delta, p.delta);
    EXPECT_EQ(q.mass_m, p.mass_m);
    EXPECT_EQ(q.kappa, p.kappa);
    EXPECT_EQ(q.mu_star, p.mu_star);
    EXPECT_EQ(q.eps, p.eps);
    EXPECT_EQ(q.ell, p.ell);
    EXPECT_EQ(q.gamma, p.gamma);
    EXPECT_EQ(q.t_star, p.t_star);
  }
}

TEST(Params, TwoDRoundTripIsExact) {
  testing::Gen gen(12);
  for (int k = 0; k < 50; ++k) {
    const Params2D p = select_parameters_2d(kCriticalMass2D * gen.uniform(1.01, 5.0));
    const Params2D q = params2d_from_key_values(parse_key_values(to_key_values(p)));
    EXPECT_EQ(q.mass_m, p.mass_m);
    EXPECT_EQ(q.eps, p.eps);
    EXPECT_EQ(q.ell, p.ell);
    EXPECT_EQ(q.t_star, p.t_star);
  }
}

TEST(Params, ConstructedSetsSatisfyEveryConstraint) {
  testing::Gen gen(13);
  for (int k = 0; k < 200; ++k) {
    const Params4D p = select_parameters_4d(gen.log_uniform(0.05, 20.0),
                                            kCriticalMass4D * gen.uniform(1.001, 10.0),
                                            gen.log_uniform(0.05, 20.0));
    const auto checks = constraint_checks4d(p);
    EXPECT_EQ(checks.size(), 5u);
    for (const auto& c : checks) EXPECT_TRUE(c.holds()) << c.name << " slack " << c.slack;
    EXPECT_TRUE(validate_params4d(p).empty());
    EXPECT_DOUBLE_EQ(p.t_star, p.eps / p.ell);
  }
  for (int k = 0; k < 200; ++k) {
    const Params2D p = select_parameters_2d(kCriticalMass2D * gen.uniform(1.001, 10.0));
    const auto checks = constraint_checks2d(p);
    EXPECT_EQ(checks.size(), 2u);
    for (const auto& c : checks) EXPECT_TRUE(c.holds()) << c.name << " slack " << c.slack;
  }
}

TEST(Params, ViolationsAreReported) {
  Params4D p = select_parameters_4d(1.0, 700.0, 1.0);
  p.ell = 0.5 * p.delta;
  EXPECT_FALSE(validate_params4d(p).empty());
  Params2D q = select_parameters_2d(16.0 * kPi);
  q.eps = 1.0;
  EXPECT_FALSE(validate_params2d(q).empty());
}

}  // namespace
}  // namespace collapse
