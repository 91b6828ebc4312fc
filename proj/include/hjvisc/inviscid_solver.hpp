#pragma once

#include <cstddef>
#include <optional>

#include "hjvisc/core.hpp"

namespace hjvisc {

/// Inviscid discounted pendulum solution on the torus of 2*n_half nodes.
///
/// On [0, pi] the solution is the increasing branch
///   u' = sqrt(2 (1 - cos x - lambda u)),  u(0) = 0,
/// integrated with classical RK4 at step pi/n_half; [pi, 2pi] follows by the
/// reflection u(2pi - x) = u(x). Radicands in [-1e-8, 0) are clamped to 0;
/// anything lower throws SolverError (lambda too large for the branch).
ScalarField solve_pendulum_ode(double lambda, std::size_t n_half);

enum class Dissipation {
  /// Constant artificial viscosity sigma everywhere.
  global,
  /// sigma_j = max(|dH/dp(x_j, D+u_j)|, |dH/dp(x_j, D-u_j)|), capped by sigma.
  local
};

struct LaxFriedrichsOptions {
  Dissipation dissipation = Dissipation::local;
  long max_iterations = 20'000'000;
  /// Run damped Newton on the scheme's residual before the fixed-point
  /// iteration; the fixed point itself is unchanged.
  bool newton_warm_start = true;
  std::optional<ScalarField> initial_guess;
};

struct LaxFriedrichsSolution {
  ScalarField u;
  SolveReport report;
  /// Relaxation factor used by the fixed-point update.
  double omega = 0.0;
  /// Inf-norm of the last fixed-point update.
  double last_update_inf = 0.0;
  int warm_start_iterations = 0;
};

/// Residual of the monotone scheme:
///   G_j = lambda u_j + H(x_j, (D+u_j + D-u_j)/2) - (sigma_j/2)(D+u_j - D-u_j).
ScalarField lax_friedrichs_residual(const HamiltonianModel& model, const ScalarField& u,
                                    double lambda, double sigma,
                                    Dissipation dissipation = Dissipation::local);

/// One relaxed update u_j - omega * G_j(u).
ScalarField lax_friedrichs_update(const HamiltonianModel& model, const ScalarField& u,
                                  double lambda, double sigma, double omega,
                                  Dissipation dissipation = Dissipation::local);

/// Largest relaxation factor for which the update is monotone.
double lax_friedrichs_relaxation(double lambda, double sigma, double h,
                                 Dissipation dissipation);

/// Fixed point of the relaxed Lax-Friedrichs update; returns once the update
/// inf-norm is at most tol * lambda. Throws InvalidArgument when sigma does
/// not dominate |dH/dp| on the iterates or the iteration diverges.
LaxFriedrichsSolution solve_discounted_lax_friedrichs(
    const HamiltonianModel& model, double lambda, const Grid1D& grid, double sigma,
    double tol, const LaxFriedrichsOptions& opts = {});

}  // namespace hjvisc
