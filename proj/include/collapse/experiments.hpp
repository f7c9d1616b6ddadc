#pragma once

// Batch experiments behind the command line: run configuration, the five
// commands and their CSV and summary outputs.
//
// Config files are key=value lines with '#' comments. Unknown keys are
// rejected. Masses are given either as mass_m or as mass_fraction of the
// critical mass (64π² in 4D, 8π in 2D).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "collapse/energetics.hpp"
#include "collapse/pde_solver.hpp"
#include "collapse/subsolutions.hpp"

namespace collapse {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitBracket = 4;
inline constexpr int kExitPrecondition = 5;

enum class Mode { Certify4D, Certify2D, Simulate4D, Simulate2D, Sweep, Collapse, Energy };

const char* to_string(Mode mode);

/// Initial data: Möbius envelopes dominating the subsolution at t = 0 (needs a
/// supercritical mass) or a Möbius profile with fixed θ.
enum class InitialKind { Constructed, Mobius };

struct RunConfig {
  Mode mode = Mode::Simulate4D;
  int dimension = 4;
  double delta = 1.0;
  double mass_m = 0.0;
  double kappa = 1.0;
  int n = 2048;
  double t_end = 10.0;
  double snapshot_dt = 0.0;  // 0: t_end / 20
  std::string output_dir;
  std::uint64_t seed = 0;

  InitialKind initial = InitialKind::Mobius;
  double theta = 0.05;   // Möbius θ in s (4D) or ρ (2D); sweeps default per dimension
  double w0_scale = 1.0; // 4D Möbius data: w₀ = w0_scale · u₀

  SolverConfig solver;
  CertificateOptions certificate;

  // Sweep
  double mass_lo = 0.0;
  double mass_hi = 0.0;
  int max_bisections = 12;

  double critical_mass() const;
};

/// Default Möbius θ of sweep probes: 0.05 in 4D, 1e-3 in 2D.
double default_probe_theta(int dimension);

/// Parses a config file body. Throws InputError on malformed lines, unknown
/// keys, missing required keys or invalid values (n < 64 among them).
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Config for a CLI command (certify, simulate, sweep, collapse, energy). A
/// missing mode key is derived from the command and dimension; a present one
/// must agree with the command.
RunConfig parse_command_config(const std::string& command, const std::string& text);

/// Failure of a run that the exit code contract maps to 3.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bracket that is empty or does not straddle the threshold (exit 4).
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Runs

struct Simulation4D {
  Trajectory4D trajectory;
  Model4D model;
  std::optional<SubsolutionPair4D> pair;  // constructed data only
};

struct Simulation2D {
  Trajectory2D trajectory;
  Model2D model;
  std::optional<Subsolution2D> sub;
};

Simulation4D simulate_4d(const RunConfig& config);
Simulation2D simulate_2d(const RunConfig& config);

/// Trajectory CSV: t,s,U,W,u_reconstructed,w_reconstructed (W and w empty in
/// 2D, where s is ρ and U is M), then '#'-prefixed key=value footer rows
/// carrying the termination record and the run parameters.
std::string trajectory_csv(const Simulation4D& sim, const RunConfig& config);
std::string trajectory_csv(const Simulation2D& sim, const RunConfig& config);

/// Comparison monitor CSV: t,max_violation for snapshots before T★.
std::string monitor_csv(const Simulation4D& sim);
std::string monitor_csv(const Simulation2D& sim);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepProbe {
  double mass = 0.0;
  bool blowup = false;
  Termination termination = Termination::ReachedEnd;
  double t_final = 0.0;
  std::size_t steps = 0;
};

struct SweepResult {
  int dimension = 4;
  double bounded_max = 0.0;
  double blowup_min = 0.0;
  double estimate = 0.0;
  int bisections = 0;
  std::vector<SweepProbe> probes;  // in bisection order, endpoints first

  std::string to_csv() const;
};

/// Runs one probe: Möbius data of the given mass, integrated to t_end.
/// Throws SolverFailure on step collapse.
SweepProbe run_probe(const RunConfig& config, double mass);

/// Bisection on mass. Each round evaluates a small tree of future midpoints
/// on the worker pool and keeps only the branch plain bisection would take,
/// so the result does not depend on the thread count.
SweepResult run_sweep(const RunConfig& config, int threads);

// ---------------------------------------------------------------------------
// Commands. Each writes its CSV files and summary.txt into `out` and returns
// the exit status.

int cmd_certify(const RunConfig& config, const std::filesystem::path& out, int threads);
int cmd_simulate(const RunConfig& config, const std::filesystem::path& out, int threads);
int cmd_sweep(const RunConfig& config, const std::filesystem::path& out, int threads);
int cmd_collapse(const RunConfig& config, const std::filesystem::path& out, int threads);
int cmd_energy(const RunConfig& config, const std::filesystem::path& out, int threads);

/// Dispatches on config.mode.
int run_command(const RunConfig& config, const std::filesystem::path& out, int threads);

}  // namespace collapse
