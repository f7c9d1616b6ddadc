#include "collapse/energetics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "collapse/mass_transform.hpp"
#include "collapse/parallel.hpp"

namespace collapse {

namespace {

constexpr double kTwoPiSq = 2.0 * kPi * kPi;

// Densities and potential of one 4D state on the grid radii.
struct Reconstruction {
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> w;
  PotentialProfile v;
};

void check_snapshot(const Grid& grid, const Snapshot4D& snap) {
  if (grid.policy() != GridPolicy::Radial4D || snap.U.size() != grid.nodes().size() ||
      snap.W.size() != grid.nodes().size()) {
    throw InputError("energetics: snapshot does not match the grid");
  }
  if (!monotone_profile(snap.U) || !monotone_profile(snap.W)) {
    throw InputError("energetics: cumulative profiles must be nondecreasing");
  }
}

Reconstruction reconstruct(const Grid& grid, const std::vector<double>& U,
                           const std::vector<double>& W) {
  const auto& s = grid.nodes();
  Reconstruction out;
  out.r = grid.radii();
  out.u = backward_density(s, U, 4.0);
  out.w = backward_density(s, W, 4.0);
  out.v = reconstruct_potential(MassProfile(s, W, MassKind::W4D), kTwoPiSq * W.back());
  return out;
}

double ball_integral(const std::vector<double>& r, const std::vector<double>& g) {
  return kTwoPiSq * trapezoid_r3(r, g);
}

EnergyTerms energy_of(const Reconstruction& rc, double t, double delta) {
  const std::size_t n = rc.r.size();
  std::vector<double> g(n);
  EnergyTerms e;
  e.t = t;
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = rc.u[i] > 1e-300 ? rc.u[i] * std::log(rc.u[i]) : 0.0;
  }
  e.entropy = ball_integral(rc.r, g);
  for (std::size_t i = 0; i < n; ++i) g[i] = rc.u[i] * rc.v.v[i];
  e.coupling = ball_integral(rc.r, g);
  for (std::size_t i = 0; i < n; ++i) g[i] = (rc.v.mu - rc.w[i]) * (rc.v.mu - rc.w[i]);
  e.half_laplacian = 0.5 * ball_integral(rc.r, g);
  for (std::size_t i = 0; i < n; ++i) g[i] = rc.v.v_r[i] * rc.v.v_r[i];
  e.gradient = 0.5 * delta * ball_integral(rc.r, g);
  e.total = e.entropy - e.coupling + e.half_laplacian + e.gradient;
  return e;
}

std::string fmt(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

}  // namespace

EnergyTerms energy(const Grid& grid, const Snapshot4D& snap, double delta) {
  check_snapshot(grid, snap);
  return energy_of(reconstruct(grid, snap.U, snap.W), snap.t, delta);
}

Dissipation dissipation(const Grid& grid, const Snapshot4D& a, const Snapshot4D& b,
                        double delta) {
  if (!(b.t > a.t)) throw InputError("dissipation: snapshots must be increasing in time");
  check_snapshot(grid, a);
  check_snapshot(grid, b);
  const double dt = b.t - a.t;
  const Reconstruction ra = reconstruct(grid, a.U, a.W);
  const Reconstruction rb = reconstruct(grid, b.U, b.W);

  const std::size_t n = ra.r.size();
  std::vector<double> U(n), W(n);
  for (std::size_t i = 0; i < n; ++i) {
    U[i] = 0.5 * (a.U[i] + b.U[i]);
    W[i] = 0.5 * (a.W[i] + b.W[i]);
  }
  const Reconstruction mid = reconstruct(grid, U, W);

  Dissipation d;
  d.t_begin = a.t;
  d.t_end = b.t;
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double vt = (rb.v.v_r[i] - ra.v.v_r[i]) / dt;
    g[i] = vt * vt;
  }
  d.grad_vt = ball_integral(ra.r, g);

  // u (ln u - v)_r² = (u_r - u v_r)² / u with one-sided slopes of u.
  const double u_max = *std::max_element(mid.u.begin(), mid.u.end());
  const double floor = kDensityGuard * u_max;
  std::fill(g.begin(), g.end(), 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double u = mid.u[i];
    if (!(u >= floor) || u <= 0.0) continue;
    const double u_r = (mid.u[i] - mid.u[i - 1]) / (mid.r[i] - mid.r[i - 1]);
    const double flux = u_r - u * mid.v.v_r[i];
    g[i] = flux * flux / u;
  }
  d.drift = ball_integral(mid.r, g);
  d.total = d.grad_vt + d.drift;

  const double fa = energy_of(ra, a.t, delta).total;
  const double fb = energy_of(rb, b.t, delta).total;
  d.residual = std::abs((fb - fa) / dt + d.total);
  return d;
}

EnergyReport energy_report(const Trajectory4D& traj, double delta, int threads) {
  if (!traj.grid) throw InputError("energy_report: trajectory without grid");
  const Grid& grid = *traj.grid;
  const int count = static_cast<int>(traj.snapshots.size());
  EnergyReport rep;
  rep.terms.resize(traj.snapshots.size());
  rep.intervals.resize(count > 1 ? traj.snapshots.size() - 1 : 0);
  parallel_rows(count, resolve_threads(threads), [&](int, int lo, int hi) {
    for (int k = lo; k < hi; ++k) {
      const auto i = static_cast<std::size_t>(k);
      rep.terms[i] = energy(grid, traj.snapshots[i], delta);
      if (i + 1 < traj.snapshots.size()) {
        rep.intervals[i] =
            dissipation(grid, traj.snapshots[i], traj.snapshots[i + 1], delta);
      }
    }
  });
  std::vector<double> residuals;
  for (const auto& d : rep.intervals) residuals.push_back(d.residual);
  rep.residual_scale = median(residuals);
  for (std::size_t i = 0; i < rep.intervals.size(); ++i) {
    const double rise = rep.terms[i + 1].total - rep.terms[i].total;
    const double dt = rep.intervals[i].t_end - rep.intervals[i].t_begin;
    if (rise > 10.0 * rep.residual_scale * dt) ++rep.monotonicity_violations;
  }
  return rep;
}

std::string EnergyReport::to_csv() const {
  std::ostringstream os;
  os << "t,F,entropy,coupling,half_laplacian_sq,half_delta_gradient_sq,"
        "dissipation,identity_residual\n";
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& e = terms[i];
    const double d = i == 0 ? std::numeric_limits<double>::quiet_NaN()
                            : intervals[i - 1].total;
    const double res = i == 0 ? std::numeric_limits<double>::quiet_NaN()
                              : intervals[i - 1].residual;
    os << fmt(e.t) << ',' << fmt(e.total) << ',' << fmt(e.entropy) << ','
       << fmt(e.coupling) << ',' << fmt(e.half_laplacian) << ',' << fmt(e.gradient)
       << ',' << fmt(d) << ',' << fmt(res) << '\n';
  }
  return os.str();
}

namespace {

// Sum of cell increments; rounding accumulates like a quadrature would.
double telescoped(const std::vector<double>& v) {
  double acc = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) acc += v[i] - v[i - 1];
  return acc;
}

}  // namespace

InvariantAudit invariant_audit(const Trajectory4D& traj, const Model4D& model,
                               int threads) {
  if (!traj.grid || traj.snapshots.empty()) {
    throw InputError("invariant_audit: empty trajectory");
  }
  const Grid& grid = *traj.grid;
  const auto& first = traj.snapshots.front();
  const double m0 = kTwoPiSq * telescoped(first.U);
  const double w0 = kTwoPiSq * telescoped(first.W);
  const EnergyReport energies = energy_report(traj, model.delta, threads);

  InvariantAudit audit;
  audit.pass = true;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto& snap = traj.snapshots[k];
    AuditRow row;
    row.t = snap.t;
    row.u_mass = kTwoPiSq * telescoped(snap.U);
    row.u_mass_drift = m0 > 0.0 ? std::abs(row.u_mass - m0) / m0 : std::abs(row.u_mass);
    row.w_right = snap.W.back();
    row.w_right_closed = model.w_right(snap.t);
    row.w_mass = kTwoPiSq * telescoped(snap.W);
    row.w_mass_bound = model.delta > 0.0 ? std::max(w0, m0 / model.delta) : w0 + m0 * snap.t;
    const PotentialProfile v =
        reconstruct_potential(MassProfile(grid.nodes(), snap.W, MassKind::W4D),
                              kTwoPiSq * snap.W.back());
    for (std::size_t i = 0; i < v.r.size(); ++i) {
      row.max_r3_vr = std::max(row.max_r3_vr, std::abs(v.r[i] * v.r[i] * v.r[i] * v.v_r[i]));
    }
    row.vr_bound = row.w_mass_bound / (kPi * kPi);
    row.energy = energies.terms[k].total;
    if (k > 0) row.energy_rise = row.energy - energies.terms[k - 1].total;
    const double w_error = std::abs(row.w_right - row.w_right_closed);

    row.u_mass_ok = row.u_mass_drift <= kMassDriftTolerance;
    row.w_right_ok = w_error <= kBoundaryTolerance;
    row.w_mass_ok = row.w_mass <= row.w_mass_bound * (1.0 + kBoundTolerance) + kBoundTolerance;
    row.vr_ok = row.max_r3_vr <= row.vr_bound + kBoundTolerance;
    const double dt = k > 0 ? snap.t - traj.snapshots[k - 1].t : 0.0;
    row.energy_ok = row.energy_rise <= 10.0 * energies.residual_scale * dt;

    audit.max_u_mass_drift = std::max(audit.max_u_mass_drift, row.u_mass_drift);
    audit.max_w_right_error = std::max(audit.max_w_right_error, w_error);
    if (!row.energy_ok) ++audit.energy_violations;
    audit.pass = audit.pass && row.u_mass_ok && row.w_right_ok && row.w_mass_ok && row.vr_ok;
    audit.rows.push_back(row);
  }
  return audit;
}

InvariantAudit invariant_audit(const Trajectory2D& traj, const Model2D& model) {
  if (!traj.grid || traj.snapshots.empty()) {
    throw InputError("invariant_audit: empty trajectory");
  }
  const double two_pi = 2.0 * kPi;
  const double m0 = two_pi * telescoped(traj.snapshots.front().M);
  InvariantAudit audit;
  audit.two_d = true;
  audit.pass = true;
  for (const auto& snap : traj.snapshots) {
    AuditRow row;
    row.t = snap.t;
    row.u_mass = two_pi * telescoped(snap.M);
    row.u_mass_drift = m0 > 0.0 ? std::abs(row.u_mass - m0) / m0 : std::abs(row.u_mass);
    row.w_right = snap.M.back();
    row.w_right_closed = model.m_right;
    row.u_mass_ok = row.u_mass_drift <= kMassDriftTolerance;
    const double error = std::abs(row.w_right - row.w_right_closed);
    row.w_right_ok = error <= kBoundaryTolerance;
    row.w_mass_ok = row.vr_ok = row.energy_ok = true;
    audit.max_u_mass_drift = std::max(audit.max_u_mass_drift, row.u_mass_drift);
    audit.max_w_right_error = std::max(audit.max_w_right_error, error);
    audit.pass = audit.pass && row.u_mass_ok && row.w_right_ok;
    audit.rows.push_back(row);
  }
  return audit;
}

std::string InvariantAudit::to_csv() const {
  const auto flag = [](bool ok) { return ok ? "pass" : "fail"; };
  std::ostringstream os;
  if (two_d) {
    os << "t,u_mass,u_mass_drift,u_mass_check,M_right,M_right_expected,M_right_check\n";
    for (const auto& r : rows) {
      os << fmt(r.t) << ',' << fmt(r.u_mass) << ',' << fmt(r.u_mass_drift) << ','
         << flag(r.u_mass_ok) << ',' << fmt(r.w_right) << ',' << fmt(r.w_right_closed)
         << ',' << flag(r.w_right_ok) << '\n';
    }
    return os.str();
  }
  os << "t,u_mass,u_mass_drift,u_mass_check,W_right,W_right_closed_form,W_right_check,"
        "w_mass,w_mass_bound,w_mass_check,max_r3_vr,vr_bound,vr_check,F,F_rise,F_check\n";
  for (const auto& r : rows) {
    os << fmt(r.t) << ',' << fmt(r.u_mass) << ',' << fmt(r.u_mass_drift) << ','
       << flag(r.u_mass_ok) << ',' << fmt(r.w_right) << ',' << fmt(r.w_right_closed) << ','
       << flag(r.w_right_ok) << ',' << fmt(r.w_mass) << ',' << fmt(r.w_mass_bound) << ','
       << flag(r.w_mass_ok) << ',' << fmt(r.max_r3_vr) << ',' << fmt(r.vr_bound) << ','
       << flag(r.vr_ok) << ',' << fmt(r.energy) << ',' << fmt(r.energy_rise) << ','
       << flag(r.energy_ok) << '\n';
  }
  return os.str();
}

namespace {

// Intercept of the least-squares line through the first three interior points.
double extrapolate_to_origin(const std::vector<double>& r, const std::vector<double>& y) {
  double sr = 0.0, sy = 0.0, srr = 0.0, sry = 0.0;
  for (std::size_t i = 1; i <= 3; ++i) {
    sr += r[i];
    sy += y[i];
    srr += r[i] * r[i];
    sry += r[i] * y[i];
  }
  const double slope = (3.0 * sry - sr * sy) / (3.0 * srr - sr * sr);
  return (sy - slope * sr) / 3.0;
}

CollapseReport collapse_report(double t, std::vector<double> radii, std::vector<double> xi,
                               const std::vector<double>& density, double critical) {
  if (radii.size() < 5) throw InputError("collapse_diagnostics: grid too small");
  CollapseReport rep;
  rep.t = t;
  rep.total_mass = xi.back();
  rep.critical_mass = critical;
  rep.m_star = std::clamp(extrapolate_to_origin(radii, xi), 0.0, rep.total_mass);
  rep.r_cut = 10.0 * radii[1];
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (radii[i] >= rep.r_cut) {
      rep.f_radii.push_back(radii[i]);
      rep.f_values.push_back(density[i]);
    }
  }
  rep.radii = std::move(radii);
  rep.xi = std::move(xi);
  return rep;
}

template <class Traj>
void require_blowup(const Traj& traj) {
  if (!traj.grid || traj.snapshots.empty()) {
    throw InputError("collapse_diagnostics: empty trajectory");
  }
  if (traj.termination != Termination::Blowup) {
    throw PreconditionError("collapse_diagnostics: no blowup (run ended with \"" +
                            std::string(to_string(traj.termination)) + "\")");
  }
}

}  // namespace

CollapseReport collapse_diagnostics(const Trajectory4D& traj) {
  require_blowup(traj);
  const auto& snap = traj.last();
  const auto& s = traj.grid->nodes();
  std::vector<double> xi(snap.U.size());
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = kTwoPiSq * snap.U[i];
  CollapseReport rep = collapse_report(snap.t, traj.grid->radii(), std::move(xi),
                                       backward_density(s, snap.U, 4.0), kCriticalMass4D);
  rep.core_value = snap.U[1];
  return rep;
}

CollapseReport collapse_diagnostics(const Trajectory2D& traj) {
  require_blowup(traj);
  const auto& snap = traj.last();
  const auto& rho = traj.grid->nodes();
  std::vector<double> xi(snap.M.size());
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = 2.0 * kPi * snap.M[i];
  CollapseReport rep = collapse_report(snap.t, traj.grid->radii(), std::move(xi),
                                       backward_density(rho, snap.M, 2.0), kCriticalMass2D);
  rep.core_value = snap.M[1];
  return rep;
}

std::string CollapseReport::to_csv() const {
  std::ostringstream os;
  os << "section,r,value\n";
  for (std::size_t i = 0; i < radii.size(); ++i) {
    os << "xi," << fmt(radii[i]) << ',' << fmt(xi[i]) << '\n';
  }
  for (std::size_t i = 0; i < f_radii.size(); ++i) {
    os << "f," << fmt(f_radii[i]) << ',' << fmt(f_values[i]) << '\n';
  }
  os << "m_star,0," << fmt(m_star) << '\n';
  os << "total_mass,1," << fmt(total_mass) << '\n';
  os << "critical_mass,0," << fmt(critical_mass) << '\n';
  os << "core_value," << fmt(radii.size() > 1 ? radii[1] : 0.0) << ',' << fmt(core_value)
     << '\n';
  os << "time,0," << fmt(t) << '\n';
  return os.str();
}

}  // namespace collapse
