#pragma once

// Post-processing of solver trajectories: the Lyapunov functional of the 4D
// system, its dissipation, conservation audits and collapse diagnostics.
//
//   F = ∫u ln u - ∫uv + ½∫|Δv|² + (δ/2)∫|∇v|²
//   D = ∫|∇v_t|² + ∫u|∇(ln u - v)|²,   dF/dt = -D
//
// All integrals are over the unit ball of R^4, evaluated as 2π² ∫ g r³ dr by
// the trapezoid rule on the grid radii. u and w are backward-slope densities
// of U and W; v comes from reconstruct_potential, and ∫|Δv|² = ∫(μ - w)².

#include <stdexcept>
#include <string>
#include <vector>

#include "collapse/pde_solver.hpp"

namespace collapse {

/// Raised when an operation needs a state the input does not have, such as
/// collapse diagnostics on a run that did not blow up.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnergyTerms {
  double t = 0.0;
  double entropy = 0.0;         // ∫u ln u
  double coupling = 0.0;        // ∫uv
  double half_laplacian = 0.0;  // ½∫|Δv|²
  double gradient = 0.0;        // (δ/2)∫|∇v|²
  double total = 0.0;           // F
};

/// Energy terms of one 4D snapshot. Throws InputError when U or W decreases
/// or the grid does not match.
EnergyTerms energy(const Grid& grid, const Snapshot4D& snap, double delta);

struct Dissipation {
  double t_begin = 0.0;
  double t_end = 0.0;
  double grad_vt = 0.0;  // ∫|∇v_t|² with v_t differenced between the snapshots
  double drift = 0.0;    // ∫u|∇(ln u - v)|² at the midpoint state
  double total = 0.0;    // D
  double residual = 0.0; // |ΔF/Δt + D|
};

/// Relative floor below which u is skipped in the drift integrand.
inline constexpr double kDensityGuard = 1e-12;

/// D between two snapshots. The midpoint state averages U and W. Throws
/// InputError unless b.t > a.t.
Dissipation dissipation(const Grid& grid, const Snapshot4D& a, const Snapshot4D& b,
                        double delta);

struct EnergyReport {
  std::vector<EnergyTerms> terms;        // one per snapshot
  std::vector<Dissipation> intervals;    // one per consecutive pair
  /// Median identity residual over the intervals.
  double residual_scale = 0.0;
  /// Intervals where F rises by more than 10 residual_scale Δt.
  int monotonicity_violations = 0;

  std::string to_csv() const;
};

EnergyReport energy_report(const Trajectory4D& traj, double delta, int threads = 0);

/// Per-snapshot conservation and bound checks.
struct AuditRow {
  double t = 0.0;
  double u_mass = 0.0;
  double u_mass_drift = 0.0;  // relative to the initial mass
  double w_right = 0.0;
  double w_right_closed = 0.0;
  double w_mass = 0.0;
  double w_mass_bound = 0.0;  // max(∫w₀, ∫u₀/δ), or ∫w₀ + t∫u₀ for δ = 0
  double max_r3_vr = 0.0;
  double vr_bound = 0.0;      // w_mass_bound / π²
  double energy = 0.0;
  double energy_rise = 0.0;   // F(t) - F(previous snapshot)
  bool u_mass_ok = false;
  bool w_right_ok = false;
  bool w_mass_ok = false;
  bool vr_ok = false;
  bool energy_ok = false;
};

struct InvariantAudit {
  std::vector<AuditRow> rows;
  double max_u_mass_drift = 0.0;
  double max_w_right_error = 0.0;
  int energy_violations = 0;
  bool two_d = false;
  /// Mass, boundary value and bound checks on every row. Energy rises are
  /// counted separately since they are expected after collapse.
  bool pass = false;

  std::string to_csv() const;
};

inline constexpr double kMassDriftTolerance = 1e-8;
inline constexpr double kBoundaryTolerance = 1e-10;
inline constexpr double kBoundTolerance = 1e-8;

/// Audits every snapshot. Masses use a telescoping sum of cell increments.
/// The energy check allows a rise of 10 residual_scale Δt per interval.
InvariantAudit invariant_audit(const Trajectory4D& traj, const Model4D& model,
                               int threads = 0);
/// 2D audit: mass drift and M(1) against m/(2π).
InvariantAudit invariant_audit(const Trajectory2D& traj, const Model2D& model);

struct CollapseReport {
  double t = 0.0;              // time of the final snapshot
  double total_mass = 0.0;     // m
  double critical_mass = 0.0;  // 64π² or 8π, for reporting
  double core_value = 0.0;     // U or M at the first interior node
  std::vector<double> radii;   // grid radii
  std::vector<double> xi;      // mass inside each radius
  double m_star = 0.0;         // Ξ extrapolated to r = 0, clamped to [0, m]
  double r_cut = 0.0;          // 10 r_1
  std::vector<double> f_radii;
  std::vector<double> f_values;

  std::string to_csv() const;
};

/// Throws PreconditionError unless the trajectory ended in blowup.
CollapseReport collapse_diagnostics(const Trajectory4D& traj);
CollapseReport collapse_diagnostics(const Trajectory2D& traj);

}  // namespace collapse
