#include "hjvisc/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hjvisc {

ScalarField sup_convolution(const ScalarField& u, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidArgument("sup_convolution: delta must be finite and > 0");
  }
  const Grid1D& g = u.grid();
  const std::size_t n = g.n();
  // penalty[k] = (k h)^2 / (2 delta) for the index gap k <= n/2.
  std::vector<double> penalty(n / 2 + 1);
  for (std::size_t k = 0; k < penalty.size(); ++k) {
    const double d = static_cast<double>(k) * g.h();
    penalty[k] = d * d / (2.0 * delta);
  }
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t gap = j > k ? j - k : k - j;
      best = std::max(best, u[k] - penalty[std::min(gap, n - gap)]);
    }
    out[j] = best;
  }
  return ScalarField(g, std::move(out));
}

double subsolution_defect(const ScalarField& u_delta, double lambda,
                          const HamiltonianModel& model) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("subsolution_defect: lambda must be > 0");
  }
  const Grid1D& g = u_delta.grid();
  const ScalarField du = central_gradient(u_delta);
  double worst = 0.0;
  for (std::size_t j = 0; j < g.n(); ++j) {
    worst = std::max(worst, lambda * u_delta[j] + model.H(g.x(j), du[j]));
  }
  return worst;
}

double min_second_difference(const ScalarField& u) {
  const Grid1D& g = u.grid();
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < g.n(); ++j) {
    m = std::min(m, u[g.next(j)] - 2.0 * u[j] + u[g.prev(j)]);
  }
  return m;
}

}  // namespace hjvisc
