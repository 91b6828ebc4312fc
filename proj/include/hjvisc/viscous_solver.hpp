#pragma once

#include <optional>
#include <vector>

#include "hjvisc/core.hpp"
#include "hjvisc/tridiagonal.hpp"

namespace hjvisc {

/// How H(x, du) is discretized in the viscous residual.
///
/// `central` evaluates H at the centered difference (u_{j+1} - u_{j-1})/(2h).
/// `peclet_hybrid` does the same wherever the grid resolves the viscous
/// layer (cell Peclet number max|dH/dp| h / (2 eps) <= 1) and blends
/// linearly into the monotone Godunov flux as the Peclet number goes from
/// 1 to 2. On resolved grids the two residuals are identical.
enum class GradientScheme { central, peclet_hybrid };

struct ViscousOptions {
  double tol_residual_inf = 1e-10;
  int max_newton_iters = 200;
  double damping = 0.5;
  double min_step = 0x1p-20;
  bool continuation = true;
  double continuation_start = 0.5;
  /// Residual target for the intermediate (larger-eps) continuation stages.
  double continuation_tol = 1e-8;
  GradientScheme scheme = GradientScheme::peclet_hybrid;
  std::optional<ScalarField> initial_guess;

  void validate() const;
};

struct ViscousSolution {
  ScalarField u;
  SolveReport report;
};

/// F_j(u) = lambda u_j + H(x_j, Du_j) - eps (u_{j+1} - 2u_j + u_{j-1}) / h^2.
ScalarField viscous_residual(const HamiltonianModel& model, const ScalarField& u,
                             double lambda, double eps,
                             GradientScheme scheme = GradientScheme::central);

/// dF/du for the residual above, with periodic corner entries.
CyclicTridiagonalMatrix viscous_jacobian(const HamiltonianModel& model,
                                         const ScalarField& u, double lambda,
                                         double eps,
                                         GradientScheme scheme = GradientScheme::central);

/// Damped Newton on the periodic residual. Non-convergence is reported, not
/// thrown; the best iterate is returned either way.
ViscousSolution solve_viscous(const HamiltonianModel& model, double lambda, double eps,
                              const Grid1D& grid, const ViscousOptions& opts = {});

/// Nodal values on [0, pi] at x_j = j h, h = pi / n_half, j = 0..n_half.
struct IntervalField {
  double h = 0.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double x(std::size_t j) const { return static_cast<double>(j) * h; }
  double operator[](std::size_t j) const { return values[j]; }
};

struct NeumannSolution {
  IntervalField u;
  SolveReport report;
};

/// Residual on [0, pi] with ghost nodes u_{-1} = u_1 and u_{N+1} = u_{N-1}.
std::vector<double> viscous_residual_neumann(const HamiltonianModel& model,
                                             const IntervalField& u, double lambda,
                                             double eps,
                                             GradientScheme scheme = GradientScheme::central);

/// Same Newton iteration on the half interval [0, pi] with reflecting ghost
/// nodes. The model must be symmetric about 0 and pi (checked by sampling).
NeumannSolution solve_viscous_neumann(const HamiltonianModel& model, double lambda,
                                      double eps, std::size_t n_half,
                                      const ViscousOptions& opts = {});

}  // namespace hjvisc
