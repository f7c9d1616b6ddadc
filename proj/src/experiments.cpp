#include "collapse/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "collapse/mass_transform.hpp"
#include "collapse/parallel.hpp"

namespace collapse {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Certify4D:
      return "certify4d";
    case Mode::Certify2D:
      return "certify2d";
    case Mode::Simulate4D:
      return "simulate4d";
    case Mode::Simulate2D:
      return "simulate2d";
    case Mode::Sweep:
      return "sweep";
    case Mode::Collapse:
      return "collapse";
    case Mode::Energy:
      return "energy";
  }
  return "unknown";
}

double RunConfig::critical_mass() const {
  return dimension == 2 ? kCriticalMass2D : kCriticalMass4D;
}

double default_probe_theta(int dimension) { return dimension == 2 ? 1e-3 : 0.05; }

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "mode",         "dimension",   "delta",         "mass_m",
      "mass_fraction", "kappa",      "n",             "t_end",
      "snapshot_dt",  "output_dir",  "seed",          "initial",
      "theta",        "w0_scale",    "scheme",        "max_change",
      "dt_initial",   "dt_max",      "dt_min",        "max_steps",
      "blowup_slope", "blowup_core_fraction", "core_node_2d", "grid_n",
      "time_n",       "g_samples",   "tolerance",     "mass_lo",
      "mass_hi",      "fraction_lo", "fraction_hi",   "max_bisections"};
  return keys;
}

Mode parse_mode(const std::string& s) {
  static const std::map<std::string, Mode> modes = {
      {"certify4d", Mode::Certify4D},   {"certify2d", Mode::Certify2D},
      {"simulate4d", Mode::Simulate4D}, {"simulate2d", Mode::Simulate2D},
      {"sweep", Mode::Sweep},           {"collapse", Mode::Collapse},
      {"energy", Mode::Energy}};
  const auto it = modes.find(s);
  if (it == modes.end()) throw InputError("unknown mode '" + s + "'");
  return it->second;
}

long long integer_or(const KeyValues& kv, const std::string& key, long long fallback) {
  const double v = number_or(kv, key, static_cast<double>(fallback));
  if (v != std::floor(v) || std::abs(v) > 9e15) {
    throw InputError("key '" + key + "' must be an integer");
  }
  return static_cast<long long>(v);
}

std::string string_or(const KeyValues& kv, const std::string& key, std::string fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

double mass_from(const KeyValues& kv, const std::string& absolute,
                 const std::string& fraction, double critical) {
  const bool has_abs = kv.count(absolute) > 0;
  const bool has_frac = kv.count(fraction) > 0;
  if (has_abs && has_frac) {
    throw InputError("give either '" + absolute + "' or '" + fraction + "', not both");
  }
  if (has_frac) return require_number(kv, fraction) * critical;
  return require_number(kv, absolute);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InputError(message);
}

}  // namespace

namespace {

RunConfig parse_config(const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (!known_keys().count(key)) throw InputError("unknown key '" + key + "'");
  }
  RunConfig c;
  c.mode = parse_mode(string_or(kv, "mode", ""));
  switch (c.mode) {
    case Mode::Certify4D:
    case Mode::Simulate4D:
      c.dimension = 4;
      break;
    case Mode::Certify2D:
    case Mode::Simulate2D:
      c.dimension = 2;
      break;
    default:
      c.dimension = static_cast<int>(integer_or(kv, "dimension", 4));
  }
  if (kv.count("dimension") && integer_or(kv, "dimension", 0) != c.dimension) {
    throw InputError("dimension does not match mode");
  }
  require(c.dimension == 2 || c.dimension == 4, "dimension must be 2 or 4");

  c.delta = number_or(kv, "delta", 1.0);
  c.kappa = number_or(kv, "kappa", 1.0);
  require(c.delta >= 0.0, "delta must be >= 0");
  require(c.kappa > 0.0, "kappa must be > 0");

  const long long n = integer_or(kv, "n", 2048);
  require(n >= 64 && n <= 1 << 22, "n must be in [64, 4194304]");
  c.n = static_cast<int>(n);
  c.output_dir = string_or(kv, "output_dir", "");
  const long long seed = integer_or(kv, "seed", 0);
  require(seed >= 0, "seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);

  if (c.mode == Mode::Sweep) {
    c.mass_lo = mass_from(kv, "mass_lo", "fraction_lo", c.critical_mass());
    c.mass_hi = mass_from(kv, "mass_hi", "fraction_hi", c.critical_mass());
    require(c.mass_lo > 0.0 && c.mass_hi > 0.0, "sweep masses must be positive");
    const long long b = integer_or(kv, "max_bisections", 12);
    require(b >= 1 && b <= 12, "max_bisections must be in [1, 12]");
    c.max_bisections = static_cast<int>(b);
  } else {
    c.mass_m = mass_from(kv, "mass_m", "mass_fraction", c.critical_mass());
    require(c.mass_m > 0.0, "mass must be positive");
  }

  c.t_end = number_or(kv, "t_end", c.mode == Mode::Sweep ? 20.0 : 10.0);
  require(c.t_end > 0.0, "t_end must be > 0");
  c.snapshot_dt = number_or(kv, "snapshot_dt", 0.0);
  require(c.snapshot_dt >= 0.0, "snapshot_dt must be >= 0");

  const bool supercritical = c.mode != Mode::Sweep && c.mass_m > c.critical_mass();
  const std::string initial =
      string_or(kv, "initial", supercritical && c.mode != Mode::Sweep ? "constructed" : "mobius");
  if (initial == "constructed") {
    c.initial = InitialKind::Constructed;
    require(c.mode != Mode::Sweep, "sweeps use Möbius probes");
  } else if (initial == "mobius") {
    c.initial = InitialKind::Mobius;
  } else {
    throw InputError("initial must be 'constructed' or 'mobius'");
  }
  c.theta = number_or(kv, "theta", c.mode == Mode::Sweep ? default_probe_theta(c.dimension) : 0.05);
  require(c.theta > 0.0, "theta must be > 0");
  c.w0_scale = number_or(kv, "w0_scale", 1.0);
  require(c.w0_scale >= 0.0, "w0_scale must be >= 0");

  SolverConfig& s = c.solver;
  const std::string scheme = string_or(kv, "scheme", "implicit-fitted");
  if (scheme == "implicit-fitted") {
    s.scheme = TransportScheme::ImplicitFitted;
  } else if (scheme == "implicit-hybrid") {
    s.scheme = TransportScheme::ImplicitHybrid;
  } else if (scheme == "explicit-upwind") {
    s.scheme = TransportScheme::ExplicitUpwind;
  } else {
    throw InputError("unknown scheme '" + scheme + "'");
  }
  s.t_end = c.t_end;
  s.snapshot_dt = c.snapshot_dt > 0.0 ? c.snapshot_dt : c.t_end / 20.0;
  s.max_change = number_or(kv, "max_change", s.max_change);
  s.dt_initial = number_or(kv, "dt_initial", s.dt_initial);
  s.dt_max = number_or(kv, "dt_max", s.dt_max);
  s.dt_min = number_or(kv, "dt_min", s.dt_min);
  const long long steps = integer_or(kv, "max_steps", static_cast<long long>(s.max_steps));
  require(steps > 0, "max_steps must be > 0");
  s.max_steps = static_cast<std::size_t>(steps);
  require(s.max_change > 0.0 && s.dt_initial > 0.0 && s.dt_max > 0.0 && s.dt_min > 0.0,
          "step controls must be positive");
  s.blowup.max_slope = number_or(kv, "blowup_slope", s.blowup.max_slope);
  s.blowup.core_fraction = number_or(kv, "blowup_core_fraction", s.blowup.core_fraction);
  const long long core = integer_or(kv, "core_node_2d", 2);
  require(core >= 1 && core < n, "core_node_2d must be an interior node");
  s.blowup.core_node_2d = static_cast<std::size_t>(core);
  require(s.blowup.max_slope > 0.0 && s.blowup.core_fraction > 0.0,
          "blowup thresholds must be positive");

  CertificateOptions& cert = c.certificate;
  cert.grid_n = static_cast<int>(integer_or(kv, "grid_n", c.n));
  cert.time_n = static_cast<int>(integer_or(kv, "time_n", 2048));
  cert.g_samples = static_cast<int>(integer_or(kv, "g_samples", 10000));
  cert.tolerance = number_or(kv, "tolerance", 1e-12);
  require(cert.grid_n >= 64 && cert.time_n >= 2 && cert.g_samples >= 2,
          "certificate grid too small");
  require(cert.tolerance >= 0.0, "tolerance must be >= 0");
  return c;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  return parse_config(parse_key_values(text));
}

RunConfig parse_command_config(const std::string& command, const std::string& text) {
  KeyValues kv = parse_key_values(text);
  if (!kv.count("mode")) {
    if (command == "certify" || command == "simulate") {
      const std::string dim = kv.count("dimension") ? kv.at("dimension") : "4";
      if (dim != "2" && dim != "4") throw InputError("dimension must be 2 or 4");
      kv["mode"] = command + dim + "d";
    } else {
      kv["mode"] = command;
    }
  }
  RunConfig c = parse_config(kv);
  const std::string mode = to_string(c.mode);
  if (mode.rfind(command, 0) != 0) {
    throw InputError("config mode '" + mode + "' does not match command '" + command + "'");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

// ---------------------------------------------------------------------------
// Runs

namespace {

RadialProfile scaled(const RadialProfile& p, double factor) {
  std::vector<double> v = p.values();
  for (double& x : v) x *= factor;
  return RadialProfile(p.r(), std::move(v));
}

std::string num(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_termination(Termination t, const std::string& message) {
  if (t == Termination::StepCollapse) throw SolverFailure("solver: " + message);
}

}  // namespace

Simulation4D simulate_4d(const RunConfig& c) {
  if (c.dimension != 4) throw InputError("simulate_4d: dimension must be 4");
  RadialProfile u0, w0;
  std::optional<SubsolutionPair4D> pair;
  if (c.initial == InitialKind::Constructed) {
    pair.emplace(select_parameters_4d(c.delta, c.mass_m, c.kappa));
    InitialData4D data = build_initial_data_4d(*pair, c.mass_m, c.kappa);
    u0 = std::move(data.u0);
    w0 = std::move(data.w0);
  } else {
    u0 = mobius_density(c.theta, c.mass_m / (2.0 * kPi * kPi), 4);
    w0 = scaled(u0, c.w0_scale);
  }
  SolverState4D state = initial_state_4d(u0, w0, c.n);
  Model4D model = model_for_state(state, c.delta);
  Simulation4D sim{run_4d(std::move(state), model, c.solver), model, pair};
  return sim;
}

Simulation2D simulate_2d(const RunConfig& c) {
  if (c.dimension != 2) throw InputError("simulate_2d: dimension must be 2");
  RadialProfile u0;
  std::optional<Subsolution2D> sub;
  if (c.initial == InitialKind::Constructed) {
    sub.emplace(select_parameters_2d(c.mass_m));
    u0 = build_initial_data_2d(*sub, c.mass_m).u0;
  } else {
    u0 = mobius_density(c.theta, c.mass_m / (2.0 * kPi), 2);
  }
  SolverState2D state = initial_state_2d(u0, c.n);
  const Model2D model = Model2D::standard(2.0 * kPi * state.M.back());
  Simulation2D sim{run_2d(std::move(state), model, c.solver), model, sub};
  return sim;
}

namespace {

template <class Traj>
void footer(std::ostringstream& os, const Traj& traj, const RunConfig& c) {
  os << "# termination=" << to_string(traj.termination) << '\n';
  os << "# t_final=" << num(traj.t_final) << '\n';
  os << "# accepted_steps=" << traj.accepted_steps << '\n';
  os << "# rejected_steps=" << traj.rejected_steps << '\n';
  os << "# dimension=" << c.dimension << '\n';
  os << "# n=" << c.n << '\n';
  os << "# scheme=" << to_string(c.solver.scheme) << '\n';
  os << "# initial=" << (c.initial == InitialKind::Constructed ? "constructed" : "mobius")
     << '\n';
  if (c.initial == InitialKind::Mobius) os << "# theta=" << num(c.theta) << '\n';
}

void footer_params(std::ostringstream& os, const std::string& kv) {
  std::istringstream in(kv);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) os << "# " << line << '\n';
  }
}

}  // namespace

std::string trajectory_csv(const Simulation4D& sim, const RunConfig& c) {
  const auto& traj = sim.trajectory;
  const auto& s = traj.grid->nodes();
  std::ostringstream os;
  os << "t,s,U,W,u_reconstructed,w_reconstructed\n";
  for (const auto& snap : traj.snapshots) {
    const auto u = backward_density(s, snap.U, 4.0);
    const auto w = backward_density(s, snap.W, 4.0);
    const std::string t = num(snap.t);
    for (std::size_t i = 0; i < s.size(); ++i) {
      os << t << ',' << num(s[i]) << ',' << num(snap.U[i]) << ',' << num(snap.W[i]) << ','
         << num(u[i]) << ',' << num(w[i]) << '\n';
    }
  }
  footer(os, traj, c);
  if (sim.pair) {
    footer_params(os, to_key_values(sim.pair->params()));
    os << "# t_star=" << num(sim.pair->t_star()) << '\n';
  } else {
    os << "# delta=" << num(c.delta) << "\n# mass_m=" << num(c.mass_m) << '\n';
  }
  return os.str();
}

std::string trajectory_csv(const Simulation2D& sim, const RunConfig& c) {
  const auto& traj = sim.trajectory;
  const auto& rho = traj.grid->nodes();
  std::ostringstream os;
  os << "t,s,U,W,u_reconstructed,w_reconstructed\n";
  for (const auto& snap : traj.snapshots) {
    const auto u = backward_density(rho, snap.M, 2.0);
    const std::string t = num(snap.t);
    for (std::size_t i = 0; i < rho.size(); ++i) {
      os << t << ',' << num(rho[i]) << ',' << num(snap.M[i]) << ",," << num(u[i]) << ",\n";
    }
  }
  footer(os, traj, c);
  if (sim.sub) {
    footer_params(os, to_key_values(sim.sub->params()));
    os << "# t_star=" << num(sim.sub->t_star()) << '\n';
  } else {
    os << "# mass_m=" << num(c.mass_m) << '\n';
  }
  return os.str();
}

std::string monitor_csv(const Simulation4D& sim) {
  std::ostringstream os;
  os << "t,max_violation\n";
  if (!sim.pair) return os.str();
  for (const auto& snap : sim.trajectory.snapshots) {
    const double v = comparison_violation(*sim.trajectory.grid, snap, *sim.pair);
    if (!std::isnan(v)) os << num(snap.t) << ',' << num(v) << '\n';
  }
  return os.str();
}

std::string monitor_csv(const Simulation2D& sim) {
  std::ostringstream os;
  os << "t,max_violation\n";
  if (!sim.sub) return os.str();
  for (const auto& snap : sim.trajectory.snapshots) {
    const double v = comparison_violation(*sim.trajectory.grid, snap, *sim.sub);
    if (!std::isnan(v)) os << num(snap.t) << ',' << num(v) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Sweeps

SweepProbe run_probe(const RunConfig& c, double mass) {
  SweepProbe p;
  p.mass = mass;
  if (c.dimension == 2) {
    const RadialProfile u0 = mobius_density(c.theta, mass / (2.0 * kPi), 2);
    const Trajectory2D tr = run_2d(u0, c.n, c.solver);
    check_termination(tr.termination, tr.message);
    p.termination = tr.termination;
    p.t_final = tr.t_final;
    p.steps = tr.accepted_steps;
  } else {
    const RadialProfile u0 = mobius_density(c.theta, mass / (2.0 * kPi * kPi), 4);
    const Trajectory4D tr = run_4d(u0, scaled(u0, c.w0_scale), c.delta, c.n, c.solver);
    check_termination(tr.termination, tr.message);
    p.termination = tr.termination;
    p.t_final = tr.t_final;
    p.steps = tr.accepted_steps;
  }
  p.blowup = p.termination == Termination::Blowup;
  return p;
}

namespace {

// Runs probes for all masses on the pool; results keep the input order.
std::vector<SweepProbe> run_probes(const RunConfig& c, const std::vector<double>& masses,
                                   int threads) {
  std::vector<SweepProbe> out(masses.size());
  std::vector<std::string> errors(masses.size());
  parallel_rows(static_cast<int>(masses.size()), threads, [&](int, int lo, int hi) {
    for (int k = lo; k < hi; ++k) {
      const auto i = static_cast<std::size_t>(k);
      try {
        out[i] = run_probe(c, masses[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  });
  for (const auto& e : errors) {
    if (!e.empty()) throw SolverFailure("sweep probe failed: " + e);
  }
  return out;
}

// Midpoints plain bisection could visit in the next `depth` steps.
void midpoint_tree(double a, double b, int depth, std::vector<double>& out) {
  if (depth == 0) return;
  const double m = 0.5 * (a + b);
  out.push_back(m);
  midpoint_tree(a, m, depth - 1, out);
  midpoint_tree(m, b, depth - 1, out);
}

}  // namespace

SweepResult run_sweep(const RunConfig& c, int threads) {
  if (!(c.mass_lo < c.mass_hi)) {
    throw BracketError("sweep bracket is empty: mass_lo must be < mass_hi");
  }
  threads = resolve_threads(threads);
  SweepResult res;
  res.dimension = c.dimension;
  const auto ends = run_probes(c, {c.mass_lo, c.mass_hi}, threads);
  res.probes = ends;
  if (ends[0].blowup || !ends[1].blowup) {
    throw BracketError("sweep bracket does not straddle the threshold (lower end " +
                       std::string(ends[0].blowup ? "blows up" : "stays bounded") +
                       ", upper end " + (ends[1].blowup ? "blows up" : "stays bounded") +
                       ")");
  }
  double lo = c.mass_lo;
  double hi = c.mass_hi;
  int depth = 1;
  while ((2 << depth) - 1 <= threads) ++depth;
  while (res.bisections < c.max_bisections) {
    const int d = std::min(depth, c.max_bisections - res.bisections);
    std::vector<double> masses;
    midpoint_tree(lo, hi, d, masses);
    const auto probes = run_probes(c, masses, threads);
    std::map<double, SweepProbe> by_mass;
    for (const auto& p : probes) by_mass[p.mass] = p;
    for (int k = 0; k < d; ++k) {
      const double m = 0.5 * (lo + hi);
      const SweepProbe& p = by_mass.at(m);
      res.probes.push_back(p);
      (p.blowup ? hi : lo) = m;
      ++res.bisections;
    }
  }
  res.bounded_max = lo;
  res.blowup_min = hi;
  res.estimate = 0.5 * (lo + hi);
  return res;
}

std::string SweepResult::to_csv() const {
  std::ostringstream os;
  os << "step,mass,verdict,termination,t_final,accepted_steps\n";
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& p = probes[i];
    os << i << ',' << num(p.mass) << ',' << (p.blowup ? "blowup" : "bounded") << ','
       << to_string(p.termination) << ',' << num(p.t_final) << ',' << p.steps << '\n';
  }
  os << "# dimension=" << dimension << '\n';
  os << "# bounded_max=" << num(bounded_max) << '\n';
  os << "# blowup_min=" << num(blowup_min) << '\n';
  os << "# estimate=" << num(estimate) << '\n';
  os << "# bisections=" << bisections << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Summary {
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    lines.push_back(std::string(ok ? "PASS " : "FAIL ") + what);
  }
  void note(const std::string& what) { lines.push_back("INFO " + what); }
};

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << body;
}

void write_summary(const std::filesystem::path& out, const std::string& command,
                   const Summary& s) {
  std::string body = "command=" + command + "\n";
  for (const auto& l : s.lines) body += l + "\n";
  write_file(out / "summary.txt", body);
}

void prepare(const std::filesystem::path& out) { std::filesystem::create_directories(out); }

template <class Traj>
void note_run(Summary& s, const Traj& traj) {
  s.note("termination=" + std::string(to_string(traj.termination)));
  s.note("t_final=" + num(traj.t_final));
  s.note("accepted_steps=" + std::to_string(traj.accepted_steps));
  s.note("max_slope=" + num(traj.last().flags.max_slope));
  s.note("core_value=" + num(traj.last().flags.core_value));
}

void note_audit(Summary& s, const InvariantAudit& a) {
  s.check(a.max_u_mass_drift <= kMassDriftTolerance,
          "u-mass drift " + num(a.max_u_mass_drift) + " <= 1e-08");
  s.check(a.max_w_right_error <= kBoundaryTolerance,
          "boundary value error " + num(a.max_w_right_error) + " <= 1e-10");
  if (!a.two_d) {
    bool w_ok = true, v_ok = true;
    for (const auto& r : a.rows) {
      w_ok = w_ok && r.w_mass_ok;
      v_ok = v_ok && r.vr_ok;
    }
    s.check(w_ok, "w-mass bound on every snapshot");
    s.check(v_ok, "|r^3 v_r| bound on every snapshot");
    s.note("energy_rises_beyond_tolerance=" + std::to_string(a.energy_violations));
  }
}

int simulate_and_report(const RunConfig& c, const std::filesystem::path& out, int threads,
                        Summary& s) {
  if (c.dimension == 4) {
    const Simulation4D sim = simulate_4d(c);
    write_file(out / "trajectory.csv", trajectory_csv(sim, c));
    const InvariantAudit audit = invariant_audit(sim.trajectory, sim.model, threads);
    write_file(out / "audit.csv", audit.to_csv());
    note_run(s, sim.trajectory);
    note_audit(s, audit);
    if (sim.pair) {
      write_file(out / "monitor.csv", monitor_csv(sim));
      s.note("t_star=" + num(sim.pair->t_star()));
      s.note("comparison_monitor=" + num(comparison_monitor(sim.trajectory, *sim.pair)));
    }
    check_termination(sim.trajectory.termination, sim.trajectory.message);
    return audit.pass ? kExitOk : kExitSolver;
  }
  const Simulation2D sim = simulate_2d(c);
  write_file(out / "trajectory.csv", trajectory_csv(sim, c));
  const InvariantAudit audit = invariant_audit(sim.trajectory, sim.model);
  write_file(out / "audit.csv", audit.to_csv());
  note_run(s, sim.trajectory);
  note_audit(s, audit);
  if (sim.sub) {
    write_file(out / "monitor.csv", monitor_csv(sim));
    s.note("t_star=" + num(sim.sub->t_star()));
    s.note("comparison_monitor=" + num(comparison_monitor(sim.trajectory, *sim.sub)));
  }
  check_termination(sim.trajectory.termination, sim.trajectory.message);
  return audit.pass ? kExitOk : kExitSolver;
}

// Maps exceptions onto the exit code contract and records them.
int guarded(const std::filesystem::path& out, const std::string& command,
            const std::function<int(Summary&)>& body) {
  Summary s;
  int code = kExitOk;
  try {
    prepare(out);
    code = body(s);
  } catch (const BracketError& e) {
    s.lines.push_back(std::string("ERROR ") + e.what());
    code = kExitBracket;
  } catch (const PreconditionError& e) {
    s.lines.push_back(std::string("ERROR ") + e.what());
    code = kExitPrecondition;
  } catch (const SolverFailure& e) {
    s.lines.push_back(std::string("ERROR ") + e.what());
    code = kExitSolver;
  } catch (const EnvelopeError& e) {
    s.lines.push_back(std::string("ERROR ") + e.what());
    code = kExitConfig;
  } catch (const InputError& e) {
    s.lines.push_back(std::string("ERROR ") + e.what());
    code = kExitConfig;
  }
  s.lines.push_back("exit_code=" + std::to_string(code));
  try {
    write_summary(out, command, s);
  } catch (const std::exception&) {
  }
  for (const auto& l : s.lines) std::printf("%s\n", l.c_str());
  return code;
}

}  // namespace

int cmd_certify(const RunConfig& c, const std::filesystem::path& out, int threads) {
  return guarded(out, "certify", [&](Summary& s) {
    if (c.mode != Mode::Certify4D && c.mode != Mode::Certify2D) {
      throw InputError("certify needs mode certify4d or certify2d");
    }
    CertificateOptions opt = c.certificate;
    opt.threads = threads;
    Certificate cert;
    if (c.mode == Mode::Certify4D) {
      const SubsolutionPair4D pair(select_parameters_4d(c.delta, c.mass_m, c.kappa));
      write_file(out / "params.txt", to_key_values(pair.params()));
      cert = certify_subsolution_4d(pair, opt);
    } else {
      const Subsolution2D sub(select_parameters_2d(c.mass_m));
      write_file(out / "params.txt", to_key_values(sub.params()));
      cert = certify_subsolution_2d(sub, opt);
    }
    write_file(out / "certificate.csv", cert.to_csv());
    for (const auto& chk : cert.checks) s.check(chk.pass, chk.name + " = " + num(chk.value));
    s.check(cert.pass, "certificate verdict");
    return cert.pass ? kExitOk : kExitFail;
  });
}

int cmd_simulate(const RunConfig& c, const std::filesystem::path& out, int threads) {
  return guarded(out, "simulate", [&](Summary& s) {
    if (c.mode != Mode::Simulate4D && c.mode != Mode::Simulate2D) {
      throw InputError("simulate needs mode simulate4d or simulate2d");
    }
    return simulate_and_report(c, out, threads, s);
  });
}

int cmd_sweep(const RunConfig& c, const std::filesystem::path& out, int threads) {
  return guarded(out, "sweep", [&](Summary& s) {
    if (c.mode != Mode::Sweep) throw InputError("sweep needs mode sweep");
    const SweepResult r = run_sweep(c, threads);
    write_file(out / "sweep.csv", r.to_csv());
    s.note("bounded_max=" + num(r.bounded_max));
    s.note("blowup_min=" + num(r.blowup_min));
    s.note("estimate=" + num(r.estimate));
    s.note("critical_mass=" + num(c.critical_mass()));
    s.note("relative_error=" +
           num(std::abs(r.estimate - c.critical_mass()) / c.critical_mass()));
    s.check(r.bounded_max < r.blowup_min, "bracket ordered");
    return kExitOk;
  });
}

int cmd_collapse(const RunConfig& c, const std::filesystem::path& out, int threads) {
  return guarded(out, "collapse", [&](Summary& s) {
    if (c.mode != Mode::Collapse) throw InputError("collapse needs mode collapse");
    CollapseReport rep;
    if (c.dimension == 4) {
      const Simulation4D sim = simulate_4d(c);
      check_termination(sim.trajectory.termination, sim.trajectory.message);
      note_run(s, sim.trajectory);
      rep = collapse_diagnostics(sim.trajectory);
    } else {
      const Simulation2D sim = simulate_2d(c);
      check_termination(sim.trajectory.termination, sim.trajectory.message);
      note_run(s, sim.trajectory);
      rep = collapse_diagnostics(sim.trajectory);
    }
    (void)threads;
    write_file(out / "collapse.csv", rep.to_csv());
    bool monotone = true;
    for (std::size_t i = 1; i < rep.xi.size(); ++i) monotone = monotone && rep.xi[i] >= rep.xi[i - 1];
    s.check(monotone, "Xi nondecreasing in r");
    s.check(std::abs(rep.xi.back() - rep.total_mass) <= 1e-12 * rep.total_mass,
            "Xi(1) = m = " + num(rep.total_mass));
    s.note("m_star=" + num(rep.m_star));
    s.note("critical_mass=" + num(rep.critical_mass));
    return monotone ? kExitOk : kExitFail;
  });
}

int cmd_energy(const RunConfig& c, const std::filesystem::path& out, int threads) {
  return guarded(out, "energy", [&](Summary& s) {
    if (c.mode != Mode::Energy) throw InputError("energy needs mode energy");
    if (c.dimension != 4) throw InputError("energy is defined for the 4D system");
    const Simulation4D sim = simulate_4d(c);
    check_termination(sim.trajectory.termination, sim.trajectory.message);
    note_run(s, sim.trajectory);
    const EnergyReport rep = energy_report(sim.trajectory, c.delta, threads);
    write_file(out / "energy.csv", rep.to_csv());
    s.note("residual_scale=" + num(rep.residual_scale));
    s.check(rep.monotonicity_violations == 0,
            "F non-increasing within 10x residual scale (" +
                std::to_string(rep.monotonicity_violations) + " violations)");
    return rep.monotonicity_violations == 0 ? kExitOk : kExitFail;
  });
}

int run_command(const RunConfig& c, const std::filesystem::path& out, int threads) {
  switch (c.mode) {
    case Mode::Certify4D:
    case Mode::Certify2D:
      return cmd_certify(c, out, threads);
    case Mode::Simulate4D:
    case Mode::Simulate2D:
      return cmd_simulate(c, out, threads);
    case Mode::Sweep:
      return cmd_sweep(c, out, threads);
    case Mode::Collapse:
      return cmd_collapse(c, out, threads);
    case Mode::Energy:
      return cmd_energy(c, out, threads);
  }
  return kExitConfig;
}

}  // namespace collapse
