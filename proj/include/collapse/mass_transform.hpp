#pragma once

// The cumulative-mass substitution and its inverse, plus the radial potential
// recovered from the cumulative mass of w.
//
//   4D:  U(s) = ∫_0^{s^{1/4}} f r^3 dr     (so 2π² U(1) is the mass of f)
//   2D:  M(ρ) = ∫_0^{ρ^{1/2}} f r dr       (so 2π  M(1) is the mass of f)
//
// Forward transforms integrate the piecewise-linear profile exactly against
// the radial weight, so a constant profile maps to c·s/4 (c·ρ/2) at every node.

#include <vector>

#include "collapse/radial_model.hpp"

namespace collapse {

struct PotentialProfile {
  std::vector<double> r;
  std::vector<double> v;
  std::vector<double> v_r;
  double mu = 0.0;  // ball average of w
};

MassProfile forward_mass_4d(const RadialProfile& f, const Grid& grid);
MassProfile forward_mass_2d(const RadialProfile& f, const Grid& grid);

/// u(r_i) = 4 (U_i - U_{i-1}) / (s_i - s_{i-1}); the origin takes the first
/// cell's value. Throws InputError when U decreases.
RadialProfile density_from_mass_4d(const MassProfile& mass);
/// u(r_i) = 2 (M_i - M_{i-1}) / (ρ_i - ρ_{i-1}).
RadialProfile density_from_mass_2d(const MassProfile& mass);

/// Same slopes as density_from_mass_* without profile construction; index i
/// holds the density assigned to node i (i = 0 copies node 1).
std::vector<double> backward_density(const std::vector<double>& coords,
                                     const std::vector<double>& values,
                                     double factor);

/// Potential v with Δv = μ - w, ∂_ν v = 0 and zero ball average, from W = ℒw.
/// μ = 2 w_mass / π²; pass w_mass = 2π² W(1) for the Neumann-consistent case.
PotentialProfile reconstruct_potential(const MassProfile& w_cumulative,
                                       double w_mass);

/// Total mass of a piecewise-linear radial density over its sample range,
/// integrated exactly: 2π² ∫ f r³ dr (4D) and 2π ∫ f r dr (2D).
double profile_mass_4d(const RadialProfile& f);
double profile_mass_2d(const RadialProfile& f);

/// Trapezoid ∫_0^1 g r^3 dr over an arbitrary increasing radius grid.
double trapezoid_r3(const std::vector<double>& r, const std::vector<double>& g);

/// Tolerance used when checking monotone cumulative profiles.
double monotone_tolerance(const std::vector<double>& values);

}  // namespace collapse
