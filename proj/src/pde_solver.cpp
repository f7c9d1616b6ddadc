#include "collapse/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "collapse/kernels.hpp"
#include "collapse/mass_transform.hpp"

namespace collapse {

const char* to_string(TransportScheme scheme) {
  switch (scheme) {
    case TransportScheme::ImplicitFitted:
      return "implicit-fitted";
    case TransportScheme::ImplicitHybrid:
      return "implicit-hybrid";
    case TransportScheme::ExplicitUpwind:
      return "explicit-upwind";
  }
  return "unknown";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedEnd:
      return "reached t_end";
    case Termination::Blowup:
      return "blowup detected";
    case Termination::StepCollapse:
      return "step-size collapse";
  }
  return "unknown";
}

double Model4D::w_right(double t) const {
  if (pin_w_right) return w_right0;
  if (delta == 0.0) return w_right0 + u_right * t;
  const double decay = -std::expm1(-delta * t);  // 1 - e^{-δt}
  return w_right0 * (1.0 - decay) + (u_right / delta) * decay;
}

double Model4D::mu(double t) const {
  return mu_override ? *mu_override : 4.0 * w_right(t);
}

Model2D Model2D::standard(double mass_m) {
  return {mass_m / (2.0 * kPi), mass_m / (2.0 * kPi)};
}

Model2D Model2D::without_mass_term(double right_value) { return {right_value, 0.0}; }

namespace {

struct Discretization {
  std::vector<double> inv_h;  // inv_h[i] = 1/(x_i - x_{i-1}); inv_h[0] unused
  std::vector<double> k;      // diffusion coefficient at each node
  ImplicitDiffusion diffusion;

  Discretization(const Grid& grid, bool four_d) : inv_h(grid.nodes().size(), 0.0) {
    const auto& x = grid.nodes();
    k.assign(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      k[i] = four_d ? 16.0 * x[i] * std::sqrt(x[i]) : 4.0 * x[i];
      if (i > 0) inv_h[i] = 1.0 / (x[i] - x[i - 1]);
    }
    diffusion = ImplicitDiffusion(x, k);
  }
};

double max_backward_slope(const std::vector<double>& x, const std::vector<double>& v) {
  double out = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    out = std::max(out, (v[i] - v[i - 1]) / (x[i] - x[i - 1]));
  }
  return out;
}

void check_grid(const std::shared_ptr<const Grid>& grid, std::size_t a, std::size_t b,
                GridPolicy policy) {
  if (!grid) throw InputError("solver state: missing grid");
  if (grid->policy() != policy) throw InputError("solver state: wrong grid policy");
  const std::size_t n = grid->nodes().size();
  if (a != n || b != n) throw InputError("solver state: size does not match grid");
}

// Advances phi_t = K phi_xx + A (X - B x) phi_x by one step with the
// coefficient frozen at X; phi holds the old values on entry.
void transport_diffusion(const std::vector<double>& x, const Discretization& d,
                         const std::vector<double>& X, double A, double B, double dt,
                         double right, TransportScheme scheme, std::vector<double>& phi) {
  std::vector<double> lower(x.size(), 0.0);
  std::vector<double> upper(x.size(), 0.0);
  if (scheme == TransportScheme::ImplicitFitted) {
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
      exponential_fit_coefficients(x[i] - x[i - 1], x[i + 1] - x[i], d.k[i],
                                   A * (X[i] - B * x[i]), lower[i], upper[i]);
    }
    solve_zero_row_sum(dt, lower, upper, 0.0, right, phi);
    return;
  }
  if (scheme == TransportScheme::ExplicitUpwind) {
    const std::vector<double> old = phi;
    simd::upwind_transport(x, d.inv_h, old, X, A, B, dt, phi);
    d.diffusion.solve(dt, 0.0, right, phi);
    return;
  }
  simd::hybrid_coefficients(x, d.inv_h, d.diffusion.lower(), d.diffusion.upper(), X, A,
                            B, lower, upper);
  solve_zero_row_sum(dt, lower, upper, 0.0, right, phi);
}

SolverState4D step_4d_impl(const SolverState4D& s, double dt, const Model4D& model,
                           const Discretization& d, TransportScheme scheme) {
  const auto& x = s.grid->nodes();
  const std::size_t n = x.size();
  SolverState4D out;
  out.grid = s.grid;
  out.U = s.U;
  out.W.assign(n, 0.0);
  out.t = s.t + dt;

  const double mu = model.mu(s.t);
  transport_diffusion(x, d, s.W, 4.0, 0.25 * mu, dt, model.u_right, scheme, out.U);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out.W[i] = s.W[i] + dt * (s.U[i] - model.delta * s.W[i]);
  }
  d.diffusion.solve(dt, 0.0, model.w_right(out.t), out.W);
  out.mu = model.mu(out.t);
  return out;
}

SolverState2D step_2d_impl(const SolverState2D& s, double dt, const Model2D& model,
                           const Discretization& d, TransportScheme scheme) {
  SolverState2D out;
  out.grid = s.grid;
  out.M = s.M;
  out.t = s.t + dt;
  transport_diffusion(s.grid->nodes(), d, s.M, 2.0, model.transport_mass, dt,
                      model.m_right, scheme, out.M);
  return out;
}

double max_abs_change(const std::vector<double>& a, const std::vector<double>& b) {
  const double scale = std::max(std::abs(a.back()), 1e-300);
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(b[i] - a[i]));
  return a.back() == 0.0 && out == 0.0 ? 0.0 : out / scale;
}

void require_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("step: dt must be positive");
}

Snapshot4D snapshot(const SolverState4D& s) { return {s.t, s.mu, s.U, s.W, s.flags}; }
Snapshot2D snapshot(const SolverState2D& s) { return {s.t, s.M, s.flags}; }

// Shared driver. Ops provides speed(state) (explicit scheme only),
// step(state, dt), monotone(state), change(old, new) and indicators(state).
template <class State, class Snap, class Ops>
Trajectory<Snap> drive(State state, const SolverConfig& cfg, Ops&& ops) {
  if (!(cfg.t_end >= state.t) || !(cfg.cfl > 0.0) || !(cfg.dt_max > 0.0) ||
      !(cfg.max_change > 0.0) || !(cfg.dt_initial > 0.0)) {
    throw InputError("solver: invalid configuration");
  }
  Trajectory<Snap> traj;
  traj.grid = state.grid;
  traj.min_dt = std::numeric_limits<double>::infinity();
  state.flags = ops.indicators(state);
  traj.snapshots.push_back(snapshot(state));

  const auto finish = [&](Termination why, std::string msg) {
    traj.termination = why;
    traj.t_final = state.t;
    traj.message = std::move(msg);
    if (traj.snapshots.back().t != state.t) traj.snapshots.push_back(snapshot(state));
    if (!std::isfinite(traj.min_dt)) traj.min_dt = 0.0;
    return traj;
  };

  if (state.flags.triggered) return finish(Termination::Blowup, "indicator at initial state");

  const double t_eps = 1e-12 * std::max(1.0, cfg.t_end);
  double next_snapshot = cfg.snapshot_dt > 0.0 ? state.t + cfg.snapshot_dt
                                               : std::numeric_limits<double>::infinity();
  double dt_guess = std::min(cfg.dt_initial, cfg.dt_max);
  while (state.t < cfg.t_end - t_eps) {
    if (traj.accepted_steps >= cfg.max_steps) {
      return finish(Termination::StepCollapse, "step budget exhausted");
    }
    double dt = std::min(dt_guess, cfg.dt_max);
    if (cfg.scheme == TransportScheme::ExplicitUpwind) {
      const double speed = ops.speed(state);
      if (speed > 0.0) dt = std::min(dt, cfg.cfl / speed);
    }
    // Land exactly on the next output time; absorb slivers into this step.
    const double target = std::min(cfg.t_end, next_snapshot);
    bool lands = false;
    if (state.t + 1.01 * dt >= target - t_eps) {
      dt = target - state.t;
      lands = true;
    }
    State trial;
    double change = 0.0;
    for (;;) {
      if (dt < cfg.dt_min) {
        return finish(Termination::StepCollapse, "time step fell below dt_min");
      }
      trial = ops.step(state, dt);
      change = ops.change(state, trial);
      if (ops.monotone(trial) && change <= 2.0 * cfg.max_change) break;
      ++traj.rejected_steps;
      dt *= 0.5;
      lands = false;
    }
    traj.min_dt = std::min(traj.min_dt, dt);
    const double grow = change > 0.0 ? 0.9 * cfg.max_change / change : 2.0;
    if (!lands || grow < 1.0) dt_guess = dt * std::clamp(grow, 0.2, 2.0);
    state = std::move(trial);
    if (lands) state.t = target;
    ++traj.accepted_steps;
    state.flags = ops.indicators(state);
    if (state.flags.triggered) {
      traj.snapshots.push_back(snapshot(state));
      return finish(Termination::Blowup, "blowup indicator triggered");
    }
    if (state.t >= next_snapshot - t_eps) {
      traj.snapshots.push_back(snapshot(state));
      next_snapshot += cfg.snapshot_dt;
    }
  }
  return finish(Termination::ReachedEnd, "");
}

}  // namespace

SolverState4D initial_state_4d(const RadialProfile& u0, const RadialProfile& w0, int n) {
  const Grid grid(n, GridPolicy::Radial4D);
  MassProfile W = forward_mass_4d(w0, grid);
  MassProfile U = forward_mass_4d(u0, grid);
  return state_from_mass_4d(U, MassProfile(W.coords(), W.values(), MassKind::W4D));
}

SolverState2D initial_state_2d(const RadialProfile& u0, int n) {
  return state_from_mass_2d(forward_mass_2d(u0, Grid(n, GridPolicy::Radial2D)));
}

SolverState4D state_from_mass_4d(const MassProfile& U, const MassProfile& W) {
  const std::size_t n = U.size();
  if (W.size() != n || U.coords() != W.coords()) {
    throw InputError("state_from_mass_4d: U and W must share nodes");
  }
  const int cells = static_cast<int>(n) - 1;
  auto grid = std::make_shared<const Grid>(cells, GridPolicy::Radial4D);
  if (grid->nodes() != U.coords()) {
    throw InputError("state_from_mass_4d: nodes are not a radial 4D grid");
  }
  if (!monotone_profile(U.values()) || !monotone_profile(W.values())) {
    throw InputError("state_from_mass_4d: cumulative profiles must be nondecreasing");
  }
  SolverState4D s;
  s.grid = std::move(grid);
  s.U = U.values();
  s.W = W.values();
  s.mu = 4.0 * s.W.back();
  return s;
}

SolverState2D state_from_mass_2d(const MassProfile& M) {
  const int cells = static_cast<int>(M.size()) - 1;
  auto grid = std::make_shared<const Grid>(cells, GridPolicy::Radial2D);
  if (grid->nodes() != M.coords()) {
    throw InputError("state_from_mass_2d: nodes are not a radial 2D grid");
  }
  if (!monotone_profile(M.values())) {
    throw InputError("state_from_mass_2d: cumulative profile must be nondecreasing");
  }
  SolverState2D s;
  s.grid = std::move(grid);
  s.M = M.values();
  return s;
}

Model4D model_for_state(const SolverState4D& state, double delta) {
  if (!(delta >= 0.0)) throw InputError("model: delta must be >= 0");
  Model4D m;
  m.delta = delta;
  m.u_right = state.U.back();
  m.w_right0 = state.W.back();
  return m;
}

BlowupIndicators blowup_indicators_4d(const SolverState4D& s, const BlowupThresholds& th) {
  BlowupIndicators b;
  b.max_slope = max_backward_slope(s.grid->nodes(), s.U);
  b.core_value = s.U[1];
  b.triggered = b.max_slope > th.max_slope || b.core_value >= th.core_fraction * 32.0;
  return b;
}

BlowupIndicators blowup_indicators_2d(const SolverState2D& s, const BlowupThresholds& th) {
  BlowupIndicators b;
  b.max_slope = max_backward_slope(s.grid->nodes(), s.M);
  b.core_value = s.M[std::min<std::size_t>(th.core_node_2d, s.M.size() - 1)];
  b.triggered = b.max_slope > th.max_slope || b.core_value >= th.core_fraction * 4.0;
  return b;
}

double cfl_step_4d(const SolverState4D& s, const Model4D& model, double cfl) {
  const Discretization d(*s.grid, true);
  const double speed = simd::upwind_max_speed(s.grid->nodes(), d.inv_h, s.W, 4.0,
                                              0.25 * model.mu(s.t));
  return speed > 0.0 ? cfl / speed : std::numeric_limits<double>::infinity();
}

double cfl_step_2d(const SolverState2D& s, const Model2D& model, double cfl) {
  const Discretization d(*s.grid, false);
  const double speed =
      simd::upwind_max_speed(s.grid->nodes(), d.inv_h, s.M, 2.0, model.transport_mass);
  return speed > 0.0 ? cfl / speed : std::numeric_limits<double>::infinity();
}

SolverState4D step_4d(const SolverState4D& state, double dt, const Model4D& model,
                      TransportScheme scheme) {
  require_dt(dt);
  check_grid(state.grid, state.U.size(), state.W.size(), GridPolicy::Radial4D);
  return step_4d_impl(state, dt, model, Discretization(*state.grid, true), scheme);
}

SolverState2D step_2d(const SolverState2D& state, double dt, const Model2D& model,
                      TransportScheme scheme) {
  require_dt(dt);
  check_grid(state.grid, state.M.size(), state.M.size(), GridPolicy::Radial2D);
  return step_2d_impl(state, dt, model, Discretization(*state.grid, false), scheme);
}

bool monotone_profile(const std::vector<double>& v) {
  const double tol = monotone_tolerance(v);
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1] - tol) return false;
  }
  return true;
}

Trajectory4D run_4d(SolverState4D initial, const Model4D& model, const SolverConfig& cfg) {
  check_grid(initial.grid, initial.U.size(), initial.W.size(), GridPolicy::Radial4D);
  const Discretization d(*initial.grid, true);
  initial.mu = model.mu(initial.t);
  struct Ops {
    const Model4D& model;
    const Discretization& d;
    const SolverConfig& cfg;
    double speed(const SolverState4D& s) const {
      return simd::upwind_max_speed(s.grid->nodes(), d.inv_h, s.W, 4.0,
                                    0.25 * model.mu(s.t));
    }
    SolverState4D step(const SolverState4D& s, double dt) const {
      return step_4d_impl(s, dt, model, d, cfg.scheme);
    }
    bool monotone(const SolverState4D& s) const {
      return monotone_profile(s.U) && monotone_profile(s.W);
    }
    double change(const SolverState4D& a, const SolverState4D& b) const {
      return std::max(max_abs_change(a.U, b.U), max_abs_change(a.W, b.W));
    }
    BlowupIndicators indicators(const SolverState4D& s) const {
      return blowup_indicators_4d(s, cfg.blowup);
    }
  };
  return drive<SolverState4D, Snapshot4D>(std::move(initial), cfg, Ops{model, d, cfg});
}

Trajectory2D run_2d(SolverState2D initial, const Model2D& model, const SolverConfig& cfg) {
  check_grid(initial.grid, initial.M.size(), initial.M.size(), GridPolicy::Radial2D);
  const Discretization d(*initial.grid, false);
  struct Ops {
    const Model2D& model;
    const Discretization& d;
    const SolverConfig& cfg;
    double speed(const SolverState2D& s) const {
      return simd::upwind_max_speed(s.grid->nodes(), d.inv_h, s.M, 2.0,
                                    model.transport_mass);
    }
    SolverState2D step(const SolverState2D& s, double dt) const {
      return step_2d_impl(s, dt, model, d, cfg.scheme);
    }
    bool monotone(const SolverState2D& s) const { return monotone_profile(s.M); }
    double change(const SolverState2D& a, const SolverState2D& b) const {
      return max_abs_change(a.M, b.M);
    }
    BlowupIndicators indicators(const SolverState2D& s) const {
      return blowup_indicators_2d(s, cfg.blowup);
    }
  };
  return drive<SolverState2D, Snapshot2D>(std::move(initial), cfg, Ops{model, d, cfg});
}

Trajectory4D run_4d(const RadialProfile& u0, const RadialProfile& w0, double delta,
                    int n, const SolverConfig& config) {
  SolverState4D s = initial_state_4d(u0, w0, n);
  const Model4D model = model_for_state(s, delta);
  return run_4d(std::move(s), model, config);
}

Trajectory2D run_2d(const RadialProfile& u0, int n, const SolverConfig& config) {
  SolverState2D s = initial_state_2d(u0, n);
  const Model2D model = Model2D::standard(2.0 * kPi * s.M.back());
  return run_2d(std::move(s), model, config);
}

double comparison_violation(const Grid& grid, const Snapshot4D& snap,
                            const SubsolutionPair4D& pair) {
  if (!(snap.t < pair.t_star())) return std::numeric_limits<double>::quiet_NaN();
  const auto& x = grid.nodes();
  const Sub4DTime c = pair.time_scalars(snap.t);
  double worst = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    worst = std::max(worst, sub4d_u(x[i], std::sqrt(x[i]), c).value - snap.U[i]);
  }
  return worst;
}

double comparison_violation(const Grid& grid, const Snapshot2D& snap,
                            const Subsolution2D& sub) {
  if (!(snap.t < sub.t_star())) return std::numeric_limits<double>::quiet_NaN();
  const auto& x = grid.nodes();
  const Sub2DTime c = sub.time_scalars(snap.t);
  double worst = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    worst = std::max(worst, sub2d_u(x[i], c).value - snap.M[i]);
  }
  return worst;
}

double comparison_monitor(const Trajectory4D& traj, const SubsolutionPair4D& pair) {
  double worst = 0.0;
  for (const auto& snap : traj.snapshots) {
    const double v = comparison_violation(*traj.grid, snap, pair);
    if (!std::isnan(v)) worst = std::max(worst, v);
  }
  return worst;
}

double comparison_monitor(const Trajectory2D& traj, const Subsolution2D& sub) {
  double worst = 0.0;
  for (const auto& snap : traj.snapshots) {
    const double v = comparison_violation(*traj.grid, snap, sub);
    if (!std::isnan(v)) worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace collapse
