#include "hjvisc/measures.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace hjvisc {

double extrapolate_to_zero(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.empty()) {
    throw InvalidArgument("extrapolate_to_zero: need matching, nonempty abscissae and values");
  }
  std::vector<double> p(ys.begin(), ys.end());
  const std::size_t k = xs.size();
  for (std::size_t level = 1; level < k; ++level) {
    for (std::size_t i = 0; i + level < k; ++i) {
      const double xi = xs[i];
      const double xj = xs[i + level];
      if (xi == xj) throw InvalidArgument("extrapolate_to_zero: repeated abscissa");
      p[i] = (xi * p[i + 1] - xj * p[i]) / (xi - xj);
    }
  }
  return p[0];
}

ErgodicEstimate estimate_ergodic_constant(const HamiltonianModel& model, double eps,
                                          std::span<const double> lambda_seq,
                                          const Grid1D& grid, std::size_t x0_index,
                                          const ViscousOptions& opts) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument("estimate_ergodic_constant: eps must be > 0");
  }
  if (lambda_seq.size() < 3) {
    throw InvalidArgument("estimate_ergodic_constant: need at least 3 lambda values");
  }
  for (std::size_t i = 0; i < lambda_seq.size(); ++i) {
    const double l = lambda_seq[i];
    if (!(l > 0.0 && l < 1.0)) {
      throw InvalidArgument("estimate_ergodic_constant: lambda values must lie in (0, 1)");
    }
    if (i > 0 && !(l < lambda_seq[i - 1])) {
      throw InvalidArgument("estimate_ergodic_constant: lambda values must decrease");
    }
  }
  if (x0_index >= grid.n()) {
    throw InvalidArgument("estimate_ergodic_constant: x0 index outside the grid");
  }

  ErgodicEstimate est;
  std::optional<ScalarField> warm;
  for (double lambda : lambda_seq) {
    ViscousOptions o = opts;
    if (!o.initial_guess && warm) o.initial_guess = warm;
    ViscousSolution s = solve_viscous(model, lambda, eps, grid, o);
    if (!s.report.converged) {
      throw SolverError("estimate_ergodic_constant: viscous solve at lambda=" +
                        std::to_string(lambda) + " did not converge (residual " +
                        std::to_string(s.report.final_residual_inf) + ")");
    }
    est.lambdas.push_back(lambda);
    est.lambda_u.push_back(lambda * s.u[x0_index]);
    est.reports.push_back(s.report);
    warm = std::move(s.u);
  }
  // + 0.0 maps -0 to 0 for models whose lambda u vanishes identically.
  est.c_eps = -extrapolate_to_zero(est.lambdas, est.lambda_u) + 0.0;
  if (model.critical_value()) est.shift_from_critical = est.c_eps - *model.critical_value() + 0.0;
  return est;
}

DiscreteMeasure::DiscreteMeasure(Grid1D grid, std::vector<MeasurePoint> support,
                                 std::vector<double> weights)
    : grid_(grid), support_(std::move(support)), weights_(std::move(weights)) {
  if (support_.size() != weights_.size() || support_.empty()) {
    throw InvalidArgument("DiscreteMeasure: need one weight per support point");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const MeasurePoint& p = support_[i];
    if (!std::isfinite(weights_[i]) || !std::isfinite(p.x) || !std::isfinite(p.v)) {
      throw InvalidArgument("DiscreteMeasure: non-finite entry at point " + std::to_string(i));
    }
    if (weights_[i] < -DensityField::kNegativeTolerance) {
      throw InvalidArgument("DiscreteMeasure: negative weight at point " + std::to_string(i));
    }
    const std::size_t j = grid_.nearest_index(p.x);
    if (grid_.periodic_distance(grid_.x(j), p.x) > 1e-9 * grid_.h()) {
      throw InvalidArgument("DiscreteMeasure: support position " + std::to_string(p.x) +
                            " is not a grid node");
    }
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > DensityField::kMassTolerance) {
    throw InvalidArgument("DiscreteMeasure: weights sum to " + std::to_string(total));
  }
}

DiscreteMeasure extract_measure(const HamiltonianModel& model, const ScalarField& u,
                                const DensityField& theta) {
  if (!(u.grid() == theta.grid())) {
    throw InvalidArgument("extract_measure: u and theta live on different grids");
  }
  const Grid1D& g = u.grid();
  const ScalarField b = adjoint_drift(model, u);
  std::vector<MeasurePoint> support(g.n());
  std::vector<double> weights(g.n());
  double total = 0.0;
  for (std::size_t j = 0; j < g.n(); ++j) {
    support[j] = {g.x(j), b[j]};
    weights[j] = g.h() * theta[j];
    total += weights[j];
  }
  for (double& w : weights) w /= total;
  return DiscreteMeasure(g, std::move(support), std::move(weights));
}

double measure_action(const DiscreteMeasure& mu, const HamiltonianModel& model) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    s += mu.weights()[i] * model.lagrangian(mu.support()[i].x, mu.support()[i].v);
  }
  return s;
}

double closedness_defect(const DiscreteMeasure& mu, double eps, const ScalarField& test_fn) {
  if (!(test_fn.grid() == mu.grid())) {
    throw InvalidArgument("closedness_defect: test function and measure live on different grids");
  }
  const ScalarField d = central_gradient(test_fn);
  const ScalarField lap = discrete_laplacian(test_fn);
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const MeasurePoint& p = mu.support()[i];
    const std::size_t j = mu.grid().nearest_index(p.x);
    s += mu.weights()[i] * (p.v * d[j] - eps * lap[j]);
  }
  return std::abs(s);
}

double mass_near(const DiscreteMeasure& mu, double center, double radius) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.grid().periodic_distance(mu.support()[i].x, center) <= radius) s += mu.weights()[i];
  }
  return s;
}

}  // namespace hjvisc
