#pragma once

// Shared domain types for the radial chemotaxis laboratory: parameter sets,
// radial profiles, cumulative mass profiles and transformed-coordinate grids.

#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace collapse {

inline constexpr double kPi = std::numbers::pi;
/// Critical mass of the 2D parabolic-elliptic system.
inline constexpr double kCriticalMass2D = 8.0 * kPi;
/// Critical mass of the 4D indirect-signal system.
inline constexpr double kCriticalMass4D = 64.0 * kPi * kPi;
/// |B_1| in R^4.
inline constexpr double kBallVolume4D = kPi * kPi / 2.0;

/// Thrown when an input violates a documented precondition.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Constants of the 4D subsolution construction. `t_star` is always eps/ell.
struct Params4D {
  double delta = 0.0;
  double mass_m = 0.0;
  double kappa = 0.0;
  double mu_star = 0.0;
  double eps = 0.0;
  double ell = 0.0;
  double gamma = 0.0;
  double t_star = 0.0;
};

struct Params2D {
  double mass_m = 0.0;
  double eps = 0.0;
  double ell = 0.0;
  double t_star = 0.0;
};

/// One scalar inequality with its margin. `slack >= 0` means satisfied for
/// non-strict constraints; strict constraints need `slack > 0`.
struct ConstraintCheck {
  std::string name;
  double slack = 0.0;
  bool strict = false;

  bool holds() const { return strict ? slack > 0.0 : slack >= 0.0; }
};

/// A failed ConstraintCheck.
using Violation = ConstraintCheck;

std::vector<ConstraintCheck> constraint_checks4d(const Params4D& p);
std::vector<ConstraintCheck> constraint_checks2d(const Params2D& p);

/// Empty iff every invariant of the parameter set holds.
std::vector<Violation> validate_params4d(const Params4D& p);
std::vector<Violation> validate_params2d(const Params2D& p);

// Left-hand side of e^{(γ+1)ε}(1+3ε³) < m/(64π²); exposed for boundary tests.
double small_eps_lhs4d(double gamma, double eps);

/// Piecewise-linear radial function on [0, 1].
class RadialProfile {
 public:
  RadialProfile() = default;
  /// Throws InputError unless `r` is strictly increasing and values finite.
  RadialProfile(std::vector<double> r, std::vector<double> values);

  const std::vector<double>& r() const { return r_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return r_.size(); }

  /// Linear interpolation; constant extrapolation outside the sample range.
  double operator()(double radius) const;
  bool nonnegative() const;

 private:
  std::vector<double> r_;
  std::vector<double> values_;
};

enum class MassKind { U4D, W4D, M2D };

const char* to_string(MassKind kind);

/// Cumulative mass sampled at transformed coordinates (s = r^4 or ρ = r^2).
/// Construction checks structure only; monotonicity is checked by consumers
/// via `nondecreasing()` so that they can report it as their own error.
class MassProfile {
 public:
  MassProfile() = default;
  MassProfile(std::vector<double> coords, std::vector<double> values,
              MassKind kind);

  const std::vector<double>& coords() const { return coords_; }
  const std::vector<double>& values() const { return values_; }
  MassKind kind() const { return kind_; }
  std::size_t size() const { return coords_.size(); }
  double endpoint() const { return values_.back(); }

  bool nondecreasing(double tolerance = 0.0) const;

 private:
  std::vector<double> coords_;
  std::vector<double> values_;
  MassKind kind_ = MassKind::U4D;
};

enum class GridPolicy {
  Radial4D,  // s_i = (i/n)^4
  Radial2D,  // ρ_i = (i/n)^2
};

const char* to_string(GridPolicy policy);

/// Transformed-coordinate grid, uniform in the physical radius.
class Grid {
 public:
  Grid() = default;
  /// Throws InputError for n < 2.
  Grid(int n, GridPolicy policy);

  int n() const { return n_; }
  GridPolicy policy() const { return policy_; }
  const std::vector<double>& nodes() const { return nodes_; }
  double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  double radius(int i) const { return static_cast<double>(i) / n_; }
  std::vector<double> radii() const;

 private:
  int n_ = 0;
  GridPolicy policy_ = GridPolicy::Radial4D;
  std::vector<double> nodes_;
};

/// Flat key=value text with '#' comments.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
/// Throws InputError if the key is missing or not a finite number.
double require_number(const KeyValues& kv, const std::string& key);
double number_or(const KeyValues& kv, const std::string& key, double fallback);

std::string to_key_values(const Params4D& p);
std::string to_key_values(const Params2D& p);
/// Reads delta, mass_m, kappa, mu_star, eps, ell, gamma; t_star is derived.
Params4D params4d_from_key_values(const KeyValues& kv);
/// Reads mass_m, eps, ell; t_star is derived.
Params2D params2d_from_key_values(const KeyValues& kv);

}  // namespace collapse
