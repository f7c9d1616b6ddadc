#pragma once

// Time integration of the transformed radial systems.
//
//   4D:  U_t = 16 s^{3/2} U_ss + 4 U_s (W - μ s/4)
//        W_t = 16 s^{3/2} W_ss - δ W + U
//        U(0)=W(0)=0, U(1)=m/(2π²), W(1,t) relaxing exponentially, μ = 4 W(1,t)
//   2D:  M_t = 4ρ M_ρρ + 2 M_ρ (M - mρ/(2π)),  M(0)=0, M(1)=m/(2π)
//
// One step is IMEX. The transport coefficient is frozen at the old state and
// the reaction of W is explicit. The implicit schemes put transport into the
// tridiagonal solve, either with an exponentially fitted stencil (default) or
// a hybrid central/upwind one. The explicit upwind scheme advances transport
// first under a CFL limit and then solves the degenerate diffusion
// implicitly.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "collapse/radial_model.hpp"
#include "collapse/subsolutions.hpp"
#include "collapse/tridiagonal.hpp"

namespace collapse {

enum class TransportScheme { ImplicitFitted, ImplicitHybrid, ExplicitUpwind };

const char* to_string(TransportScheme scheme);

enum class Termination { ReachedEnd, Blowup, StepCollapse };

/// "reached t_end", "blowup detected" or "step-size collapse".
const char* to_string(Termination t);

/// Blowup indicators of one state.
struct BlowupIndicators {
  double max_slope = 0.0;   // max backward slope of U (or M) over all cells
  double core_value = 0.0;  // U at the first interior node, or M at the 2D core node
  bool triggered = false;
};

struct SolverState4D {
  std::shared_ptr<const Grid> grid;
  std::vector<double> U;
  std::vector<double> W;
  double t = 0.0;
  double mu = 0.0;
  BlowupIndicators flags;
};

struct SolverState2D {
  std::shared_ptr<const Grid> grid;
  std::vector<double> M;
  double t = 0.0;
  BlowupIndicators flags;
};

/// Coefficients shared by all steps of a 4D run.
struct Model4D {
  double delta = 1.0;
  double u_right = 0.0;   // m/(2π²)
  double w_right0 = 0.0;  // W_0(1)
  /// Keep W(1) at w_right0 instead of the relaxation law (stationary tests).
  bool pin_w_right = false;
  /// Replaces μ(t) = 4 W(1,t) by a constant.
  std::optional<double> mu_override;

  /// W(1,t) = W_0(1) e^{-δt} + (U(1)/δ)(1 - e^{-δt}); the δ → 0 limit is
  /// W_0(1) + U(1) t.
  double w_right(double t) const;
  double mu(double t) const;
};

struct Model2D {
  double m_right = 0.0;  // m/(2π)
  /// Coefficient in front of ρ inside the transport, m/(2π) unless disabled.
  double transport_mass = 0.0;

  static Model2D standard(double mass_m);
  /// Free-space operator 4ρM'' + 2MM' with the given Dirichlet value at ρ=1.
  static Model2D without_mass_term(double right_value);
};

struct BlowupThresholds {
  double max_slope = 1e8;
  /// Fraction of the limiting core value (2^5 in 4D, 4 in 2D).
  double core_fraction = 0.9;
  /// Node at which the 2D core value is read. A collapsed 2D profile settles
  /// into a grid-scale spike holding about 0.85 of the limit at node 1 for
  /// every n, so the core is read one cell further out.
  std::size_t core_node_2d = 2;
};

struct SolverConfig {
  double t_end = 10.0;
  /// Snapshot spacing in time; <= 0 keeps only the first and last states.
  double snapshot_dt = 0.0;
  TransportScheme scheme = TransportScheme::ImplicitFitted;
  /// Courant number; enforced only by the explicit scheme.
  double cfl = 0.5;
  /// Largest accepted change of any nodal value per step, relative to the
  /// right endpoint value. Steps exceeding twice this are rejected.
  double max_change = 1e-3;
  double dt_initial = 1e-8;
  double dt_max = 1e-2;
  double dt_min = 1e-14;
  std::size_t max_steps = 50'000'000;
  BlowupThresholds blowup;
};

struct Snapshot4D {
  double t = 0.0;
  double mu = 0.0;
  std::vector<double> U;
  std::vector<double> W;
  BlowupIndicators flags;
};

struct Snapshot2D {
  double t = 0.0;
  std::vector<double> M;
  BlowupIndicators flags;
};

template <class Snap>
struct Trajectory {
  std::shared_ptr<const Grid> grid;
  std::vector<Snap> snapshots;
  Termination termination = Termination::ReachedEnd;
  double t_final = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  double min_dt = 0.0;
  std::string message;

  const Snap& last() const { return snapshots.back(); }
};

using Trajectory4D = Trajectory<Snapshot4D>;
using Trajectory2D = Trajectory<Snapshot2D>;

/// Cumulative profiles of the initial densities on Grid(n).
SolverState4D initial_state_4d(const RadialProfile& u0, const RadialProfile& w0, int n);
SolverState2D initial_state_2d(const RadialProfile& u0, int n);
/// State taken directly from cumulative nodal values.
SolverState4D state_from_mass_4d(const MassProfile& U, const MassProfile& W);
SolverState2D state_from_mass_2d(const MassProfile& M);

/// Model whose boundary data match the state (U(1) and W(1) read from it).
Model4D model_for_state(const SolverState4D& state, double delta);

BlowupIndicators blowup_indicators_4d(const SolverState4D& state,
                                      const BlowupThresholds& thresholds);
BlowupIndicators blowup_indicators_2d(const SolverState2D& state,
                                      const BlowupThresholds& thresholds);

/// Largest stable explicit step for the transport term: cfl / max(|c|/Δx).
double cfl_step_4d(const SolverState4D& state, const Model4D& model, double cfl);
double cfl_step_2d(const SolverState2D& state, const Model2D& model, double cfl);

/// One IMEX step without acceptance checks. Throws InputError for dt <= 0.
SolverState4D step_4d(const SolverState4D& state, double dt, const Model4D& model,
                      TransportScheme scheme = TransportScheme::ImplicitFitted);
SolverState2D step_2d(const SolverState2D& state, double dt, const Model2D& model,
                      TransportScheme scheme = TransportScheme::ImplicitFitted);

/// Nondecreasing within 1e-12 max(1, max|v|).
bool monotone_profile(const std::vector<double>& v);

/// Integrates until t_end, blowup or step collapse. Indicators are evaluated on
/// every accepted state including the initial one. A step whose result is not
/// monotone, or changes too much, is rejected and retried with half the step.
Trajectory4D run_4d(SolverState4D initial, const Model4D& model,
                    const SolverConfig& config);
Trajectory2D run_2d(SolverState2D initial, const Model2D& model,
                    const SolverConfig& config);

/// Convenience overloads building the state and the standard model from
/// initial densities.
Trajectory4D run_4d(const RadialProfile& u0, const RadialProfile& w0, double delta,
                    int n, const SolverConfig& config);
Trajectory2D run_2d(const RadialProfile& u0, int n, const SolverConfig& config);

/// max over interior nodes of (ū - U)_+ for one snapshot; NaN when t >= T★.
double comparison_violation(const Grid& grid, const Snapshot4D& snap,
                            const SubsolutionPair4D& pair);
double comparison_violation(const Grid& grid, const Snapshot2D& snap,
                            const Subsolution2D& sub);

/// max over snapshots with t < T★ and all nodes of (ū - U)_+ (or (ū - M)_+).
double comparison_monitor(const Trajectory4D& traj, const SubsolutionPair4D& pair);
double comparison_monitor(const Trajectory2D& traj, const Subsolution2D& sub);

}  // namespace collapse
