#include "collapse/radial_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <sstream>

namespace collapse {

double small_eps_lhs4d(double gamma, double eps) {
  return std::exp((gamma + 1.0) * eps) * (1.0 + 3.0 * eps * eps * eps);
}

std::vector<ConstraintCheck> constraint_checks4d(const Params4D& p) {
  const double quad = p.mu_star * p.eps + 6.0 * p.ell;
  const double kappa_bound = (1.0 + 2.0 * p.kappa) / (1.0 + p.kappa);
  return {
      {"ell >= delta", p.ell - p.delta, false},
      {"(mu_star*eps + 6*ell)^2 - 4*2^5*(gamma+1)*ell <= 0",
       4.0 * 32.0 * (p.gamma + 1.0) * p.ell - quad * quad, false},
      {"2*gamma^2 - 3*ell >= 0", 2.0 * p.gamma * p.gamma - 3.0 * p.ell, false},
      {"e^eps < (1+2*kappa)/(1+kappa)", kappa_bound - std::exp(p.eps), true},
      {"e^((gamma+1)*eps)*(1+3*eps^3) < m/(64*pi^2)",
       p.mass_m / kCriticalMass4D - small_eps_lhs4d(p.gamma, p.eps), true},
  };
}

std::vector<ConstraintCheck> constraint_checks2d(const Params2D& p) {
  const double lin = 3.0 * p.ell + p.mass_m * p.eps / kPi;
  return {
      {"e^eps < m/(8*pi)", p.mass_m / kCriticalMass2D - std::exp(p.eps), true},
      {"(3*ell + m*eps/pi)^2 - 32*ell <= 0", 32.0 * p.ell - lin * lin, false},
  };
}

namespace {

std::vector<Violation> failed(std::vector<ConstraintCheck> checks) {
  std::erase_if(checks, [](const ConstraintCheck& c) { return c.holds(); });
  return checks;
}

}  // namespace

std::vector<Violation> validate_params4d(const Params4D& p) {
  return failed(constraint_checks4d(p));
}

std::vector<Violation> validate_params2d(const Params2D& p) {
  return failed(constraint_checks2d(p));
}

RadialProfile::RadialProfile(std::vector<double> r, std::vector<double> values)
    : r_(std::move(r)), values_(std::move(values)) {
  if (r_.size() != values_.size() || r_.empty()) {
    throw InputError("RadialProfile: radii and values must be non-empty and of equal length");
  }
  for (std::size_t i = 0; i < r_.size(); ++i) {
    if (!std::isfinite(r_[i]) || !std::isfinite(values_[i])) {
      throw InputError("RadialProfile: non-finite sample");
    }
    if (i > 0 && !(r_[i] > r_[i - 1])) {
      throw InputError("RadialProfile: radii must be strictly increasing");
    }
  }
}

double RadialProfile::operator()(double radius) const {
  if (radius <= r_.front()) return values_.front();
  if (radius >= r_.back()) return values_.back();
  const auto it = std::upper_bound(r_.begin(), r_.end(), radius);
  const auto hi = static_cast<std::size_t>(it - r_.begin());
  const std::size_t lo = hi - 1;
  const double w = (radius - r_[lo]) / (r_[hi] - r_[lo]);
  return values_[lo] + w * (values_[hi] - values_[lo]);
}

bool RadialProfile::nonnegative() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v >= 0.0; });
}

const char* to_string(MassKind kind) {
  switch (kind) {
    case MassKind::U4D: return "U4D";
    case MassKind::W4D: return "W4D";
    case MassKind::M2D: return "M2D";
  }
  return "?";
}

MassProfile::MassProfile(std::vector<double> coords, std::vector<double> values,
                         MassKind kind)
    : coords_(std::move(coords)), values_(std::move(values)), kind_(kind) {
  if (coords_.size() != values_.size() || coords_.size() < 2) {
    throw InputError("MassProfile: need at least two nodes with matching values");
  }
  if (coords_.front() != 0.0 || values_.front() != 0.0) {
    throw InputError("MassProfile: must be pinned to 0 at coordinate 0");
  }
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (!std::isfinite(coords_[i]) || !std::isfinite(values_[i])) {
      throw InputError("MassProfile: non-finite node");
    }
    if (i > 0 && !(coords_[i] > coords_[i - 1])) {
      throw InputError("MassProfile: coordinates must be strictly increasing");
    }
  }
}

bool MassProfile::nondecreasing(double tolerance) const {
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] - values_[i - 1] < -tolerance) return false;
  }
  return true;
}

const char* to_string(GridPolicy policy) {
  return policy == GridPolicy::Radial4D ? "radial4d" : "radial2d";
}

Grid::Grid(int n, GridPolicy policy) : n_(n), policy_(policy) {
  if (n < 2) throw InputError("Grid: need n >= 2");
  nodes_.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    const double r = static_cast<double>(i) / n;
    const double r2 = r * r;
    nodes_[static_cast<std::size_t>(i)] =
        policy == GridPolicy::Radial4D ? r2 * r2 : r2;
  }
}

std::vector<double> Grid::radii() const {
  std::vector<double> out(nodes_.size());
  for (int i = 0; i <= n_; ++i) out[static_cast<std::size_t>(i)] = radius(i);
  return out;
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("line " + std::to_string(lineno) + ": expected key=value");
    }
    auto key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw InputError("line " + std::to_string(lineno) + ": empty key");
    }
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

double require_number(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw InputError("missing key '" + key + "'");
  const char* begin = it->second.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    throw InputError("key '" + key + "' is not a finite number: '" + it->second + "'");
  }
  return v;
}

double number_or(const KeyValues& kv, const std::string& key, double fallback) {
  return kv.count(key) ? require_number(kv, key) : fallback;
}

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string to_key_values(const Params4D& p) {
  std::ostringstream os;
  os << "delta=" << format_number(p.delta) << '\n'
     << "mass_m=" << format_number(p.mass_m) << '\n'
     << "kappa=" << format_number(p.kappa) << '\n'
     << "mu_star=" << format_number(p.mu_star) << '\n'
     << "eps=" << format_number(p.eps) << '\n'
     << "ell=" << format_number(p.ell) << '\n'
     << "gamma=" << format_number(p.gamma) << '\n';
  return os.str();
}

std::string to_key_values(const Params2D& p) {
  std::ostringstream os;
  os << "mass_m=" << format_number(p.mass_m) << '\n'
     << "eps=" << format_number(p.eps) << '\n'
     << "ell=" << format_number(p.ell) << '\n';
  return os.str();
}

Params4D params4d_from_key_values(const KeyValues& kv) {
  Params4D p;
  p.delta = require_number(kv, "delta");
  p.mass_m = require_number(kv, "mass_m");
  p.kappa = require_number(kv, "kappa");
  p.mu_star = require_number(kv, "mu_star");
  p.eps = require_number(kv, "eps");
  p.ell = require_number(kv, "ell");
  p.gamma = require_number(kv, "gamma");
  if (!(p.ell > 0.0)) throw InputError("ell must be positive");
  p.t_star = p.eps / p.ell;
  return p;
}

Params2D params2d_from_key_values(const KeyValues& kv) {
  Params2D p;
  p.mass_m = require_number(kv, "mass_m");
  p.eps = require_number(kv, "eps");
  p.ell = require_number(kv, "ell");
  if (!(p.ell > 0.0)) throw InputError("ell must be positive");
  p.t_star = p.eps / p.ell;
  return p;
}

}  // namespace collapse
