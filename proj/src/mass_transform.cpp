#include "collapse/mass_transform.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace collapse {

namespace {

// Three-point Gauss-Legendre on [a, b]: exact for the degree-5 integrands
// (linear profile times r^3) met here.
template <class F>
double gauss3(F&& g, double a, double b) {
  static constexpr std::array<double, 3> kNodes{-0.7745966692414834, 0.0,
                                                0.7745966692414834};
  static constexpr std::array<double, 3> kWeights{5.0 / 9.0, 8.0 / 9.0,
                                                  5.0 / 9.0};
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t j = 0; j < 3; ++j) acc += kWeights[j] * g(mid + half * kNodes[j]);
  return half * acc;
}

MassProfile forward_mass(const RadialProfile& f, const Grid& grid, int power,
                         GridPolicy expected, MassKind kind) {
  if (grid.policy() != expected) {
    throw InputError("forward mass transform: grid policy does not match dimension");
  }
  if (!f.nonnegative()) throw InputError("forward mass transform: negative density sample");
  const auto& fr = f.r();
  if (fr.front() > 0.0 || fr.back() < 1.0 - 1e-12) {
    throw InputError("forward mass transform: profile must cover [0, 1]");
  }
  const auto weighted = [&](double r) {
    return f(r) * (power == 3 ? r * r * r : r);
  };

  const std::vector<double> radii = grid.radii();
  std::vector<double> values(radii.size(), 0.0);
  // Walk grid cells, splitting each at profile breakpoints.
  std::size_t k = static_cast<std::size_t>(
      std::upper_bound(fr.begin(), fr.end(), 0.0) - fr.begin());
  double acc = 0.0;
  for (std::size_t i = 1; i < radii.size(); ++i) {
    double a = radii[i - 1];
    const double b = radii[i];
    while (k < fr.size() && fr[k] < b) {
      if (fr[k] > a) {
        acc += gauss3(weighted, a, fr[k]);
        a = fr[k];
      }
      ++k;
    }
    acc += gauss3(weighted, a, b);
    values[i] = acc;
  }
  return MassProfile(grid.nodes(), std::move(values), kind);
}

double profile_moment(const RadialProfile& f, int power) {
  const auto& r = f.r();
  const auto weighted = [&](double x) {
    return f(x) * (power == 3 ? x * x * x : x);
  };
  double acc = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) acc += gauss3(weighted, r[i - 1], r[i]);
  return acc;
}

}  // namespace

double profile_mass_4d(const RadialProfile& f) {
  return 2.0 * kPi * kPi * profile_moment(f, 3);
}

double profile_mass_2d(const RadialProfile& f) {
  return 2.0 * kPi * profile_moment(f, 1);
}

MassProfile forward_mass_4d(const RadialProfile& f, const Grid& grid) {
  return forward_mass(f, grid, 3, GridPolicy::Radial4D, MassKind::U4D);
}

MassProfile forward_mass_2d(const RadialProfile& f, const Grid& grid) {
  return forward_mass(f, grid, 1, GridPolicy::Radial2D, MassKind::M2D);
}

double monotone_tolerance(const std::vector<double>& values) {
  double scale = 1.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  return 1e-12 * scale;
}

std::vector<double> backward_density(const std::vector<double>& coords,
                                     const std::vector<double>& values,
                                     double factor) {
  std::vector<double> out(coords.size(), 0.0);
  for (std::size_t i = 1; i < coords.size(); ++i) {
    const double slope = (values[i] - values[i - 1]) / (coords[i] - coords[i - 1]);
    out[i] = std::max(0.0, factor * slope);
  }
  if (out.size() > 1) out[0] = out[1];
  return out;
}

namespace {

RadialProfile density_from_mass(const MassProfile& mass, double factor,
                                int root) {
  if (!mass.nondecreasing(monotone_tolerance(mass.values()))) {
    throw InputError("density from mass: cumulative profile decreases");
  }
  const auto& coords = mass.coords();
  std::vector<double> r(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    r[i] = root == 4 ? std::sqrt(std::sqrt(coords[i])) : std::sqrt(coords[i]);
  }
  return RadialProfile(std::move(r), backward_density(coords, mass.values(), factor));
}

}  // namespace

RadialProfile density_from_mass_4d(const MassProfile& mass) {
  if (mass.kind() == MassKind::M2D) {
    throw InputError("density_from_mass_4d: expected a 4D cumulative profile");
  }
  return density_from_mass(mass, 4.0, 4);
}

RadialProfile density_from_mass_2d(const MassProfile& mass) {
  if (mass.kind() != MassKind::M2D) {
    throw InputError("density_from_mass_2d: expected a 2D cumulative profile");
  }
  return density_from_mass(mass, 2.0, 2);
}

double trapezoid_r3(const std::vector<double>& r, const std::vector<double>& g) {
  double acc = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double a = r[i - 1] * r[i - 1] * r[i - 1] * g[i - 1];
    const double b = r[i] * r[i] * r[i] * g[i];
    acc += 0.5 * (r[i] - r[i - 1]) * (a + b);
  }
  return acc;
}

PotentialProfile reconstruct_potential(const MassProfile& w_cumulative,
                                       double w_mass) {
  if (w_cumulative.kind() != MassKind::W4D) {
    throw InputError("reconstruct_potential: expected a W4D profile");
  }
  if (!std::isfinite(w_mass) || w_mass < 0.0) {
    throw InputError("reconstruct_potential: w mass must be finite and nonnegative");
  }
  const auto& s = w_cumulative.coords();
  const auto& W = w_cumulative.values();
  const std::size_t n = s.size();

  PotentialProfile out;
  out.mu = 2.0 * w_mass / (kPi * kPi);
  out.r.resize(n);
  out.v_r.resize(n);
  out.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.r[i] = std::sqrt(std::sqrt(s[i]));

  // v_r = μ r/4 - W(r^4)/r^3; the origin takes the limit of the first slope.
  out.v_r[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double r = out.r[i];
    out.v_r[i] = 0.25 * out.mu * r - W[i] / (r * r * r);
  }

  out.v[n - 1] = 0.0;
  for (std::size_t i = n - 1; i > 0; --i) {
    const double h = out.r[i] - out.r[i - 1];
    out.v[i - 1] = out.v[i] - 0.5 * h * (out.v_r[i] + out.v_r[i - 1]);
  }

  const std::vector<double> ones(n, 1.0);
  const double mean = trapezoid_r3(out.r, out.v) / trapezoid_r3(out.r, ones);
  for (double& v : out.v) v -= mean;
  return out;
}

}  // namespace collapse
