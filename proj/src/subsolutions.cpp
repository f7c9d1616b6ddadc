#include "collapse/subsolutions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "collapse/kernels.hpp"
#include "collapse/mass_transform.hpp"
#include "collapse/parallel.hpp"

namespace collapse {

// ---------------------------------------------------------------------------
// Parameter selection

double solve_eps0(double gamma, double mass_m) {
  const double rhs = mass_m / kCriticalMass4D;
  const auto h = [&](double xi) { return small_eps_lhs4d(gamma, xi) - rhs; };
  double lo = 1e-12;
  double hi = 10.0;
  if (!(h(lo) < 0.0)) {
    throw InputError("eps0: no positive root (mass too small for gamma)");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  return lo;
}

Params4D select_parameters_4d(double delta, double mass_m, double kappa) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InputError("delta must be > 0");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InputError("kappa must be > 0");
  if (!(mass_m > kCriticalMass4D) || !std::isfinite(mass_m)) {
    throw InputError("mass must exceed 64*pi^2");
  }
  Params4D p;
  p.delta = delta;
  p.mass_m = mass_m;
  p.kappa = kappa;
  p.mu_star = 32.0 * (1.0 + kappa + 1.0 / kappa) + 2.0 * mass_m / (kPi * kPi * delta);
  p.ell = 2.0 * delta;
  const double lin = p.mu_star + 12.0 * delta;
  p.gamma = std::max(std::sqrt(3.0 * delta), lin * lin / (256.0 * delta));
  const double eps0 = solve_eps0(p.gamma, mass_m);
  p.eps = std::min({1.0 / 3.0, 0.5 * eps0,
                    0.5 * std::log((1.0 + 2.0 * kappa) / (1.0 + kappa))});
  p.t_star = p.eps / p.ell;
  return p;
}

Params2D select_parameters_2d(double mass_m) {
  if (!(mass_m > kCriticalMass2D) || !std::isfinite(mass_m)) {
    throw InputError("mass must exceed 8*pi");
  }
  Params2D p;
  p.mass_m = mass_m;
  const double k = 3.0 + mass_m / kPi;
  p.eps = std::min({0.5, std::log((mass_m + 8.0 * kPi) / (16.0 * kPi)), 16.0 / (k * k)});
  p.ell = p.eps;
  p.t_star = p.eps / p.ell;
  return p;
}

// ---------------------------------------------------------------------------
// Closed forms

namespace {

void check_domain(double x, double t, double t_star, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw InputError(std::string(what) + ": spatial coordinate outside [0, 1]");
  }
  if (!(t >= 0.0 && t < t_star)) {
    throw InputError(std::string(what) + ": time outside [0, T*)");
  }
}

}  // namespace

SubsolutionPoint4D SubsolutionPair4D::eval(double s, double t) const {
  check_domain(s, t, params_.t_star, "4D subsolution");
  const Sub4DTime c = time_scalars(t);
  if (s == 0.0) {
    // Limits as s -> 0: values and time derivatives vanish, first
    // derivatives are finite, second derivatives diverge and are reported as 0.
    SubsolutionPoint4D p;
    p.u.d_s = 3.0 * c.a / (c.tau3 * c.tau3);
    p.w.d_s = c.b;
    return p;
  }
  const double q = std::sqrt(s);
  return {sub4d_u(s, q, c), sub4d_w(s, q, c)};
}

double SubsolutionPair4D::u(double s, double t) const { return eval(s, t).u.value; }
double SubsolutionPair4D::w(double s, double t) const { return eval(s, t).w.value; }

Jet<double> Subsolution2D::eval(double rho, double t) const {
  check_domain(rho, t, params_.t_star, "2D subsolution");
  return sub2d_u(rho, time_scalars(t));
}

double Subsolution2D::u(double rho, double t) const { return eval(rho, t).value; }

// ---------------------------------------------------------------------------
// Stationary families

StationaryFamily::StationaryFamily(double lambda) : lambda_(lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InputError("stationary family: lambda must be > 0");
  }
  inv_l2_ = 1.0 / (lambda * lambda);
}

double StationaryFamily::X(double r) const {
  const double l2 = lambda_ * lambda_;
  const double d = 1.0 + l2 * r * r;
  return l2 * l2 * 384.0 / (d * d * d * d);
}

double StationaryFamily::Y(double r) const {
  const double l2 = lambda_ * lambda_;
  const double x2 = l2 * r * r;
  const double d = 1.0 + x2;
  return l2 * 16.0 * (2.0 + x2) / (d * d);
}

double StationaryFamily::Z(double r) const { return std::log(X(r)); }

Jet<double> StationaryFamily::LX(double s) const {
  const double L = inv_l2_;
  const double q = std::sqrt(s);
  const double D = q + L;
  const double D4 = D * D * D * D;
  Jet<double> j;
  j.value = 32.0 * s * (q + 3.0 * L) / (D * D * D);
  j.d_s = 96.0 * L * L / D4;
  j.d_ss = s > 0.0 ? -192.0 * L * L / (q * D4 * D) : 0.0;
  return j;
}

Jet<double> StationaryFamily::LY(double s) const {
  const double L = inv_l2_;
  const double q = std::sqrt(s);
  const double D = q + L;
  Jet<double> j;
  j.value = 8.0 * s / D;
  j.d_s = 8.0 * (L + 0.5 * q) / (D * D);
  j.d_ss = s > 0.0 ? -2.0 * (1.0 + 3.0 * L / q) / (D * D * D) : 0.0;
  return j;
}

Jet<double> StationaryFamily::F(double rho) const {
  const double l2 = lambda_ * lambda_;
  const double D = rho + l2;
  Jet<double> j;
  j.value = 4.0 * rho / D;
  j.d_s = 4.0 * l2 / (D * D);
  j.d_ss = -8.0 * l2 / (D * D * D);
  return j;
}

StationaryResidual stationary_residual_4d(const StationaryFamily& fam, double s) {
  const Jet<double> X = fam.LX(s);
  const Jet<double> Y = fam.LY(s);
  const double k = 16.0 * s * std::sqrt(s);
  const double a1 = k * X.d_ss;
  const double a2 = 4.0 * X.d_s * Y.value;
  const double b1 = k * Y.d_ss;
  StationaryResidual r;
  r.first = a1 + a2;
  r.second = b1 + X.value;
  r.scale = std::max({std::abs(a1), std::abs(a2), std::abs(b1), std::abs(X.value)});
  return r;
}

StationaryResidual stationary_residual_2d(const StationaryFamily& fam, double rho) {
  const Jet<double> f = fam.F(rho);
  const double a1 = 4.0 * rho * f.d_ss;
  const double a2 = 2.0 * f.value * f.d_s;
  StationaryResidual r;
  r.first = a1 + a2;
  r.scale = std::max(std::abs(a1), std::abs(a2));
  return r;
}

// ---------------------------------------------------------------------------
// Certificates

std::string Certificate::to_csv() const {
  std::ostringstream os;
  os << "check_name,max_residual_or_slack,grid_n,verdict\n";
  char buf[64];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%.17g", c.value);
    os << '"' << c.name << "\"," << buf << ',' << grid_n << ','
       << (c.pass ? "pass" : "fail") << '\n';
  }
  os << "\"verdict\",0," << grid_n << ',' << (pass ? "pass" : "fail") << '\n';
  return os.str();
}

const CertificateCheck* Certificate::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

std::vector<double> certificate_times(double t_star, int time_n) {
  const double t_end = t_star * (1.0 - 1e-9);
  std::vector<double> t(static_cast<std::size_t>(time_n));
  for (int j = 0; j < time_n; ++j) {
    t[static_cast<std::size_t>(j)] =
        time_n == 1 ? 0.0 : t_end * static_cast<double>(j) / (time_n - 1);
  }
  return t;
}

// Worst shape defects of one sampled profile v on nodes x (v[0] at x = 0),
// divided by `scale`: most negative first difference and largest amount by
// which a node falls below the chord of its neighbours.
struct ShapeDefect {
  double min_increment = std::numeric_limits<double>::infinity();
  double max_convexity = -std::numeric_limits<double>::infinity();

  void merge(const ShapeDefect& o) {
    min_increment = std::min(min_increment, o.min_increment);
    max_convexity = std::max(max_convexity, o.max_convexity);
  }
};

ShapeDefect shape_defect(const std::vector<double>& x, const std::vector<double>& v,
                         double scale, bool concavity) {
  ShapeDefect d;
  for (std::size_t i = 1; i < x.size(); ++i) {
    d.min_increment = std::min(d.min_increment, (v[i] - v[i - 1]) / scale);
  }
  if (concavity) {
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
      const double hl = x[i] - x[i - 1];
      const double hr = x[i + 1] - x[i];
      const double chord = (hr * v[i - 1] + hl * v[i + 1]) / (hl + hr);
      d.max_convexity = std::max(d.max_convexity, (chord - v[i]) / scale);
    }
  }
  return d;
}

void add_check(Certificate& cert, std::string name, double value, bool pass) {
  cert.checks.push_back({std::move(name), value, pass});
}

void add_constraints(Certificate& cert, const std::vector<ConstraintCheck>& checks) {
  for (const auto& c : checks) add_check(cert, c.name, c.slack, c.holds());
}

void finish(Certificate& cert) {
  cert.pass = std::all_of(cert.checks.begin(), cert.checks.end(),
                          [](const CertificateCheck& c) { return c.pass; });
}

}  // namespace

Certificate certify_subsolution_4d(const SubsolutionPair4D& pair,
                                   const CertificateOptions& options) {
  if (options.grid_n < 2 || options.time_n < 1 || options.g_samples < 1) {
    throw InputError("certificate: grid sizes must be positive");
  }
  const Params4D& p = pair.params();
  Certificate cert;
  cert.grid_n = options.grid_n;
  cert.time_n = options.time_n;
  cert.tolerance = options.tolerance;

  const Grid grid(options.grid_n, GridPolicy::Radial4D);
  const std::vector<double>& nodes = grid.nodes();
  const std::span<const double> interior(nodes.data() + 1, nodes.size() - 2);
  const std::vector<double> times = certificate_times(p.t_star, options.time_n);

  struct Partial {
    double p_raw = -1e300, p_scaled = -1e300, q_raw = -1e300, q_scaled = -1e300;
    ShapeDefect u_shape, w_shape;
  };
  const int threads = resolve_threads(options.threads);
  std::vector<Partial> partial(static_cast<std::size_t>(threads));

  parallel_rows(options.time_n, threads, [&](int worker, int lo, int hi) {
    Partial& acc = partial[static_cast<std::size_t>(worker)];
    std::vector<double> u(nodes.size(), 0.0);
    std::vector<double> w(nodes.size(), 0.0);
    for (int j = lo; j < hi; ++j) {
      const Sub4DTime c = pair.time_scalars(times[static_cast<std::size_t>(j)]);
      const simd::ResidualRowMax row =
          simd::residual_row_4d(interior, c, p.mu_star, p.delta);
      const double scale = std::max(1.0, std::abs(c.a));
      acc.p_raw = std::max(acc.p_raw, row.p_max);
      acc.q_raw = std::max(acc.q_raw, row.q_max);
      acc.p_scaled = std::max(acc.p_scaled, row.p_max / scale);
      acc.q_scaled = std::max(acc.q_scaled, row.q_max / scale);

      for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double q = std::sqrt(nodes[i]);
        u[i] = sub4d_u(nodes[i], q, c).value;
        w[i] = sub4d_w(nodes[i], q, c).value;
      }
      acc.u_shape.merge(shape_defect(nodes, u, scale, true));
      acc.w_shape.merge(shape_defect(nodes, w, std::max(1.0, c.b), true));
    }
  });

  Partial total;
  for (const Partial& part : partial) {
    total.p_raw = std::max(total.p_raw, part.p_raw);
    total.q_raw = std::max(total.q_raw, part.q_raw);
    total.p_scaled = std::max(total.p_scaled, part.p_scaled);
    total.q_scaled = std::max(total.q_scaled, part.q_scaled);
    total.u_shape.merge(part.u_shape);
    total.w_shape.merge(part.w_shape);
  }
  cert.max_residual_P = total.p_raw;
  cert.max_scaled_P = total.p_scaled;
  cert.max_residual_Q = total.q_raw;
  cert.max_scaled_Q = total.q_scaled;

  const double tol = options.tolerance;
  add_check(cert, "P_mu_star_max_scaled", total.p_scaled, total.p_scaled <= tol);
  add_check(cert, "Q_max_scaled", total.q_scaled, total.q_scaled <= tol);
  add_constraints(cert, constraint_checks4d(p));

  // g(t) - (1 + ε³) with g(t) = e^{(ℓ-δ)t}(1 + τ³), written to avoid cancellation.
  double g_slack = std::numeric_limits<double>::infinity();
  double u_end = -std::numeric_limits<double>::infinity();
  double w_end = -std::numeric_limits<double>::infinity();
  const std::vector<double> g_times = certificate_times(p.t_star, options.g_samples);
  for (double t : g_times) {
    const double tau = p.eps - p.ell * t;
    const double tau3 = tau * tau * tau;
    const double slack = std::expm1((p.ell - p.delta) * t) * (1.0 + tau3) -
                         p.ell * t * (tau * tau + tau * p.eps + p.eps * p.eps);
    g_slack = std::min(g_slack, slack);
    const Sub4DTime c = pair.time_scalars(t);
    u_end = std::max(u_end, sub4d_u(1.0, 1.0, c).value);
    w_end = std::max(w_end, sub4d_w(1.0, 1.0, c).value);
  }
  add_check(cert, "g(t) - (1+eps^3) >= 0", g_slack, g_slack >= 0.0);
  const double u_cap = p.mass_m / (2.0 * kPi * kPi);
  const double w_cap = 8.0 * (1.0 + 2.0 * p.kappa) / (1.0 + p.kappa);
  add_check(cert, "m/(2*pi^2) - sup_t u(1,t) > 0", u_cap - u_end, u_cap - u_end > 0.0);
  add_check(cert, "8(1+2*kappa)/(1+kappa) - sup_t w(1,t) > 0", w_cap - w_end,
            w_cap - w_end > 0.0);
  add_check(cert, "u first difference min_scaled", total.u_shape.min_increment,
            total.u_shape.min_increment >= -tol);
  add_check(cert, "u chord excess max_scaled", total.u_shape.max_convexity,
            total.u_shape.max_convexity <= tol);
  add_check(cert, "w first difference min_scaled", total.w_shape.min_increment,
            total.w_shape.min_increment >= -tol);
  add_check(cert, "w chord excess max_scaled", total.w_shape.max_convexity,
            total.w_shape.max_convexity <= tol);
  finish(cert);
  return cert;
}

Certificate certify_subsolution_2d(const Subsolution2D& sub,
                                   const CertificateOptions& options) {
  if (options.grid_n < 2 || options.time_n < 1 || options.g_samples < 1) {
    throw InputError("certificate: grid sizes must be positive");
  }
  const Params2D& p = sub.params();
  Certificate cert;
  cert.grid_n = options.grid_n;
  cert.time_n = options.time_n;
  cert.tolerance = options.tolerance;

  const Grid grid(options.grid_n, GridPolicy::Radial2D);
  const std::vector<double>& nodes = grid.nodes();
  const std::span<const double> interior(nodes.data() + 1, nodes.size() - 2);
  const std::vector<double> times = certificate_times(p.t_star, options.time_n);

  struct Partial {
    double raw = -1e300, scaled = -1e300;
    ShapeDefect shape;
  };
  const int threads = resolve_threads(options.threads);
  std::vector<Partial> partial(static_cast<std::size_t>(threads));

  parallel_rows(options.time_n, threads, [&](int worker, int lo, int hi) {
    Partial& acc = partial[static_cast<std::size_t>(worker)];
    std::vector<double> u(nodes.size(), 0.0);
    for (int j = lo; j < hi; ++j) {
      const Sub2DTime c = sub.time_scalars(times[static_cast<std::size_t>(j)]);
      const double row = simd::theta_row_2d(interior, c, p.mass_m);
      const double scale = std::max(1.0, std::abs(c.a));
      acc.raw = std::max(acc.raw, row);
      acc.scaled = std::max(acc.scaled, row / scale);
      for (std::size_t i = 1; i < nodes.size(); ++i) u[i] = sub2d_u(nodes[i], c).value;
      acc.shape.merge(shape_defect(nodes, u, scale, false));
    }
  });

  Partial total;
  for (const Partial& part : partial) {
    total.raw = std::max(total.raw, part.raw);
    total.scaled = std::max(total.scaled, part.scaled);
    total.shape.merge(part.shape);
  }
  cert.max_residual_P = total.raw;
  cert.max_scaled_P = total.scaled;

  const double tol = options.tolerance;
  add_check(cert, "Theta_max_scaled", total.scaled, total.scaled <= tol);
  add_constraints(cert, constraint_checks2d(p));

  double u_end = -std::numeric_limits<double>::infinity();
  for (double t : certificate_times(p.t_star, options.g_samples)) {
    u_end = std::max(u_end, sub2d_u(1.0, sub.time_scalars(t)).value);
  }
  const double cap = p.mass_m / (2.0 * kPi);
  add_check(cert, "m/(2*pi) - sup_t u(1,t) > 0", cap - u_end, cap - u_end > 0.0);
  add_check(cert, "u first difference min_scaled", total.shape.min_increment,
            total.shape.min_increment >= -tol);
  finish(cert);
  return cert;
}

// ---------------------------------------------------------------------------
// Initial data

double mobius(double theta, double target, double xi) {
  return (1.0 + theta) * xi / (theta + xi) * target;
}

double mobius_envelope(const std::vector<double>& xi, const std::vector<double>& f,
                       double target, int max_halvings) {
  if (xi.size() != f.size() || xi.size() < 2) {
    throw InputError("mobius_envelope: need matching samples");
  }
  if (xi.front() != 0.0 || xi.back() != 1.0) {
    throw InputError("mobius_envelope: samples must span [0, 1]");
  }
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (!std::isfinite(f[i]) || (i > 0 && !(xi[i] > xi[i - 1]))) {
      throw InputError("mobius_envelope: samples must be finite and increasing");
    }
    if (xi[i] > 0.0 && !std::isfinite(f[i] / xi[i])) {
      throw InputError("mobius_envelope: f(xi)/xi is unbounded on the samples");
    }
  }
  if (!(target > f.back())) {
    throw InputError("mobius_envelope: target must exceed f(1)");
  }
  const auto dominates = [&](double theta) {
    for (std::size_t i = 0; i < xi.size(); ++i) {
      if (mobius(theta, target, xi[i]) < f[i]) return false;
    }
    return true;
  };
  double theta = 1.0;
  if (dominates(theta)) return theta;
  for (int k = 0; k < max_halvings; ++k) {
    theta *= 0.5;
    if (dominates(theta)) return 0.5 * theta;
  }
  char msg[160];
  std::snprintf(msg, sizeof msg,
                "mobius_envelope: no domination after %d halvings (theta=%.3g)",
                max_halvings, theta);
  throw EnvelopeError(msg);
}

std::vector<double> envelope_samples(int log_points, int uniform) {
  std::vector<double> xi{0.0, 1.0};
  for (int k = 0; k < log_points; ++k) {
    xi.push_back(std::pow(10.0, -40.0 + 40.0 * k / log_points));
  }
  for (int i = 1; i < uniform; ++i) xi.push_back(static_cast<double>(i) / uniform);
  std::sort(xi.begin(), xi.end());
  xi.erase(std::unique(xi.begin(), xi.end()), xi.end());
  return xi;
}

RadialProfile mobius_density(double theta, double endpoint, int power, int samples) {
  if (!(theta > 0.0) || !(endpoint >= 0.0) || (power != 2 && power != 4) ||
      samples < 16) {
    throw InputError("mobius_density: invalid arguments");
  }
  const double factor = power;
  const auto density = [&](double r) {
    const double x = power == 4 ? (r * r) * (r * r) : r * r;
    const double d = theta + x;
    return factor * endpoint * (1.0 + theta) * theta / (d * d);
  };
  // The profile is flat for r well below θ^{1/power} and decays beyond it;
  // geometric spacing from far inside the core resolves both regimes.
  const double core = std::pow(theta, 1.0 / power);
  const double r_min = std::min(1e-3, core) * 1e-3;
  std::vector<double> r{0.0};
  const double span = std::log(1.0 / r_min);
  for (int k = 0; k < samples; ++k) {
    r.push_back(r_min * std::exp(span * k / (samples - 1)));
  }
  r.back() = 1.0;
  std::vector<double> v(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) v[i] = density(r[i]);

  RadialProfile raw(r, v);
  const double mass = power == 4 ? profile_mass_4d(raw) / (2.0 * kPi * kPi)
                                  : profile_mass_2d(raw) / (2.0 * kPi);
  if (mass > 0.0) {
    const double k = endpoint / mass;
    for (double& x : v) x *= k;
  }
  return RadialProfile(std::move(r), std::move(v));
}

InitialData4D build_initial_data_4d(const SubsolutionPair4D& pair, double mass_m,
                                    double kappa) {
  const Params4D& p = pair.params();
  if (!validate_params4d(p).empty()) {
    throw InputError("initial data: subsolution parameters violate their constraints");
  }
  const double u_target = mass_m / (2.0 * kPi * kPi);
  const double w_lower = pair.w(1.0, 0.0);
  const double w_upper = 8.0 * (1.0 + 2.0 * kappa) / (1.0 + kappa);
  if (!(w_lower < w_upper)) {
    throw InputError("initial data: no admissible endpoint for w0");
  }
  const double c_w = 0.5 * (w_lower + w_upper);
  if (2.0 * kPi * kPi * c_w > 16.0 * kPi * kPi * (1.0 + kappa + 1.0 / kappa)) {
    throw InputError("initial data: w0 mass exceeds its cap");
  }

  const std::vector<double> xi = envelope_samples(4000, 4000);
  std::vector<double> fu(xi.size());
  std::vector<double> fw(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const SubsolutionPoint4D pt = pair.eval(xi[i], 0.0);
    fu[i] = pt.u.value;
    fw[i] = pt.w.value;
  }
  InitialData4D out;
  out.theta_u = mobius_envelope(xi, fu, u_target);
  out.theta_w = mobius_envelope(xi, fw, c_w);
  out.u_endpoint = u_target;
  out.w_endpoint = c_w;
  out.u0 = mobius_density(out.theta_u, u_target, 4);
  out.w0 = mobius_density(out.theta_w, c_w, 4);
  return out;
}

InitialData2D build_initial_data_2d(const Subsolution2D& sub, double mass_m) {
  const double target = mass_m / (2.0 * kPi);
  const double u_end = sub.u(1.0, 0.0);
  if (!(2.0 * kPi * u_end < mass_m)) {
    throw InputError("initial data: subsolution endpoint mass is not below m");
  }
  const std::vector<double> xi = envelope_samples(4000, 4000);
  std::vector<double> f(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) f[i] = sub.u(xi[i], 0.0);
  InitialData2D out;
  out.theta = mobius_envelope(xi, f, target);
  out.endpoint = target;
  out.u0 = mobius_density(out.theta, target, 2);
  return out;
}

}  // namespace collapse
