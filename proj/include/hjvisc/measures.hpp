#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hjvisc/adjoint.hpp"
#include "hjvisc/core.hpp"
#include "hjvisc/viscous_solver.hpp"

namespace hjvisc {

/// Value at 0 of the polynomial through (xs[i], ys[i]), by Neville's scheme.
/// With k points the error is O(x^k) when ys is smooth in xs.
double extrapolate_to_zero(std::span<const double> xs, std::span<const double> ys);

struct ErgodicEstimate {
  /// Ergodic constant of the model: c(eps) = -lim_{lambda->0} lambda u(x0).
  double c_eps = 0.0;
  /// c(eps) - c(H) when the model carries c(H).
  std::optional<double> shift_from_critical;
  std::vector<double> lambdas;
  /// lambda * u_lambda^eps(x0) for each lambda.
  std::vector<double> lambda_u;
  std::vector<SolveReport> reports;
};

/// Solves the viscous equation at each lambda (strictly decreasing, at
/// least 3 values, all in (0, 1)) and extrapolates -lambda u(x0) to
/// lambda = 0. Throws SolverError naming the lambda whose solve did not
/// converge.
ErgodicEstimate estimate_ergodic_constant(const HamiltonianModel& model, double eps,
                                          std::span<const double> lambda_seq,
                                          const Grid1D& grid, std::size_t x0_index = 0,
                                          const ViscousOptions& opts = {});

struct MeasurePoint {
  double x = 0.0;
  double v = 0.0;
};

/// Probability measure on a finite set of (x, v) points whose positions are
/// nodes of `grid`. Weights are >= -1e-12 and sum to 1 within 1e-8.
class DiscreteMeasure {
 public:
  DiscreteMeasure(Grid1D grid, std::vector<MeasurePoint> support, std::vector<double> weights);

  const Grid1D& grid() const { return grid_; }
  std::span<const MeasurePoint> support() const { return support_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }

 private:
  Grid1D grid_;
  std::vector<MeasurePoint> support_;
  std::vector<double> weights_;
};

/// Support (x_j, dH/dp(x_j, Du_j)) with weights h theta_j renormalized to 1.
DiscreteMeasure extract_measure(const HamiltonianModel& model, const ScalarField& u,
                                const DensityField& theta);

/// sum_j w_j L(x_j, v_j).
double measure_action(const DiscreteMeasure& mu, const HamiltonianModel& model);

/// |sum_j w_j (v_j Dphi(x_j) - eps Lap_h phi(x_j))| with central differences
/// of phi on the measure's grid.
double closedness_defect(const DiscreteMeasure& mu, double eps, const ScalarField& test_fn);

/// Fraction of mass whose position lies within `radius` of `center`.
double mass_near(const DiscreteMeasure& mu, double center, double radius);

}  // namespace hjvisc
