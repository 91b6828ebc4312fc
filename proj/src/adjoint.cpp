#include "hjvisc/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace hjvisc {

namespace {

double node_mass(const Grid1D& g, std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s * g.h();
}

void check_positive(double value, const char* what, const char* where) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(std::string(where) + ": " + what + " must be finite and > 0");
  }
}

void check_index(const Grid1D& g, std::size_t index, const char* where) {
  if (index >= g.n()) {
    throw InvalidArgument(std::string(where) + ": node index " + std::to_string(index) +
                          " outside a grid of " + std::to_string(g.n()) + " nodes");
  }
}

// B(z) = z / (e^z - 1), with B(0) = 1.
double bernoulli(double z) {
  if (std::abs(z) < 1e-6) return 1.0 - 0.5 * z + z * z / 12.0;
  return z / std::expm1(z);
}

}  // namespace

DensityField::DensityField(Grid1D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n()) {
    throw InvalidArgument("DensityField: " + std::to_string(values_.size()) +
                          " values for a grid of " + std::to_string(grid_.n()) + " nodes");
  }
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!std::isfinite(values_[j])) {
      throw InvalidArgument("DensityField: non-finite value at node " + std::to_string(j));
    }
    if (values_[j] < -kNegativeTolerance) {
      throw InvalidArgument("DensityField: negative value " + std::to_string(values_[j]) +
                            " at node " + std::to_string(j));
    }
  }
  const double m = mass();
  if (std::abs(m - 1.0) > kMassTolerance) {
    throw InvalidArgument("DensityField: mass " + std::to_string(m) + " is not 1");
  }
}

DensityField DensityField::normalized(Grid1D grid, std::vector<double> values) {
  if (values.size() != grid.n()) {
    throw InvalidArgument("DensityField: value count does not match the grid");
  }
  const double m = node_mass(grid, values);
  if (!(m > 0.0) || !std::isfinite(m)) {
    throw InvalidArgument("DensityField: cannot normalize a field of mass " +
                          std::to_string(m));
  }
  for (double& v : values) v /= m;
  return DensityField(grid, std::move(values));
}

DensityField DensityField::uniform(const Grid1D& grid) {
  return DensityField(grid, std::vector<double>(grid.n(), 1.0 / grid.length()));
}

DensityField DensityField::point_mass(const Grid1D& grid, std::size_t index) {
  check_index(grid, index, "DensityField::point_mass");
  std::vector<double> v(grid.n(), 0.0);
  v[index] = 1.0 / grid.h();
  return DensityField(grid, std::move(v));
}

double DensityField::mass() const { return node_mass(grid_, values_); }

double DensityField::min() const { return *std::min_element(values_.begin(), values_.end()); }

CyclicTridiagonalMatrix transport_operator(const ScalarField& drift, double eps,
                                           AdjointFlux flux) {
  check_positive(eps, "eps", "transport_operator");
  const Grid1D& g = drift.grid();
  const std::size_t n = g.n();
  const double h = g.h();
  // Face f sits between nodes f and f+1 and carries F_f = alpha_f theta_f - beta_f theta_{f+1}.
  std::vector<double> alpha(n);
  std::vector<double> beta(n);
  for (std::size_t f = 0; f < n; ++f) {
    const double velocity = -0.5 * (drift[f] + drift[g.next(f)]);
    if (flux == AdjointFlux::central) {
      alpha[f] = eps / h + 0.5 * velocity;
      beta[f] = eps / h - 0.5 * velocity;
    } else {
      const double z = velocity * h / eps;
      alpha[f] = eps / h * bernoulli(-z);
      beta[f] = eps / h * bernoulli(z);
    }
  }
  CyclicTridiagonalMatrix m(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t left = g.prev(j);
    m.diag[j] = (alpha[j] + beta[left]) / h;
    m.super[j] = -beta[j] / h;
    m.sub[j] = -alpha[left] / h;
  }
  return m;
}

ScalarField adjoint_drift(const HamiltonianModel& model, const ScalarField& u) {
  ScalarField du = central_gradient(u);
  const Grid1D& g = u.grid();
  std::vector<double> b(g.n());
  for (std::size_t j = 0; j < g.n(); ++j) b[j] = model.dHdp(g.x(j), du[j]);
  return ScalarField(g, std::move(b));
}

AdjointSolution solve_adjoint_stationary(const HamiltonianModel& model,
                                         const ScalarField& u, double lambda, double eps,
                                         std::size_t x0_index, AdjointFlux flux) {
  constexpr const char* kWhere = "solve_adjoint_stationary";
  constexpr double kNegativeGate = 1e-8;
  constexpr double kRenormalizationGate = 1e-6;
  check_positive(lambda, "lambda", kWhere);
  check_positive(eps, "eps", kWhere);
  const Grid1D& g = u.grid();
  check_index(g, x0_index, kWhere);

  CyclicTridiagonalMatrix m = transport_operator(adjoint_drift(model, u), eps, flux);
  for (double& d : m.diag) d += lambda;
  std::vector<double> theta(g.n(), 0.0);
  theta[x0_index] = lambda / g.h();
  CyclicTridiagonalFactorization(m).solve_in_place(theta);

  for (std::size_t j = 0; j < theta.size(); ++j) {
    if (!std::isfinite(theta[j])) throw SolverError(std::string(kWhere) + ": non-finite density");
    if (theta[j] < -kNegativeGate) {
      throw SolverError(std::string(kWhere) + ": density " + std::to_string(theta[j]) +
                        " at node " + std::to_string(j) +
                        "; the flux is not monotone at this resolution, refine the grid "
                        "or use exponential fitting");
    }
    theta[j] = std::max(theta[j], 0.0);
  }
  const double mass = node_mass(g, theta);
  const double factor = 1.0 / mass;
  if (!(std::abs(factor - 1.0) <= kRenormalizationGate)) {
    throw SolverError(std::string(kWhere) + ": mass " + std::to_string(mass) +
                      " before renormalization");
  }
  for (double& v : theta) v *= factor;
  return {DensityField(g, std::move(theta)), factor};
}

std::size_t evolve_fokker_planck(const ScalarField& drift, double eps,
                                 std::size_t x0_index, double T, double dt,
                                 const DensityObserver& observer,
                                 const FokkerPlanckOptions& opts) {
  constexpr const char* kWhere = "evolve_fokker_planck";
  check_positive(eps, "eps", kWhere);
  check_positive(dt, "dt", kWhere);
  check_positive(T, "T", kWhere);
  const Grid1D& g = drift.grid();
  check_index(g, x0_index, kWhere);
  if (T < dt * (1.0 - 1e-12)) throw InvalidArgument(std::string(kWhere) + ": T must be >= dt");
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));

  CyclicTridiagonalMatrix m = transport_operator(drift, eps, opts.flux);
  for (std::size_t j = 0; j < g.n(); ++j) {
    m.sub[j] *= dt;
    m.super[j] *= dt;
    m.diag[j] = 1.0 + dt * m.diag[j];
  }
  const CyclicTridiagonalFactorization step(m);

  std::vector<double> rho(g.n(), 0.0);
  rho[x0_index] = 1.0 / g.h();
  if (observer) observer(0, 0.0, rho);
  for (std::size_t k = 1; k <= steps; ++k) {
    step.solve_in_place(rho);
    double mass = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) {
      if (!(rho[j] >= -DensityField::kNegativeTolerance)) {
        throw SolverError(std::string(kWhere) + ": density " + std::to_string(rho[j]) +
                          " at node " + std::to_string(j) + " after step " +
                          std::to_string(k));
      }
      mass += rho[j];
    }
    mass *= g.h();
    if (std::abs(mass - 1.0) > DensityField::kMassTolerance) {
      throw SolverError(std::string(kWhere) + ": mass " + std::to_string(mass) +
                        " after step " + std::to_string(k));
    }
    if (observer) observer(k, static_cast<double>(k) * dt, rho);
  }
  return steps;
}

std::vector<DensitySnapshot> evolve_fokker_planck(const ScalarField& drift, double eps,
                                                  std::size_t x0_index, double T,
                                                  double dt, std::size_t stride,
                                                  const FokkerPlanckOptions& opts) {
  if (stride == 0) throw InvalidArgument("evolve_fokker_planck: stride must be >= 1");
  const Grid1D& g = drift.grid();
  std::vector<DensitySnapshot> out;
  std::vector<double> last;
  double last_t = 0.0;
  std::size_t last_k = 0;
  evolve_fokker_planck(
      drift, eps, x0_index, T, dt,
      [&](std::size_t k, double t, std::span<const double> rho) {
        if (k % stride == 0) {
          out.push_back({t, DensityField(g, std::vector<double>(rho.begin(), rho.end()))});
        }
        last.assign(rho.begin(), rho.end());
        last_t = t;
        last_k = k;
      },
      opts);
  if (last_k % stride != 0) out.push_back({last_t, DensityField(g, std::move(last))});
  return out;
}

DiscountedTimeAverage::DiscountedTimeAverage(Grid1D grid, double lambda, double dt,
                                             DiscountQuadrature rule)
    : grid_(grid), lambda_(lambda), dt_(dt), rule_(rule), sum_(grid.n(), 0.0) {
  check_positive(lambda, "lambda", "DiscountedTimeAverage");
  check_positive(dt, "dt", "DiscountedTimeAverage");
}

double DiscountedTimeAverage::weight(std::size_t k) const {
  const double ldt = lambda_ * dt_;
  const double kd = static_cast<double>(k);
  if (rule_ == DiscountQuadrature::trapezoid) return ldt * std::exp(-ldt * kd);
  if (k == 0) return 0.0;
  return ldt * std::exp(-kd * std::log1p(ldt));
}

void DiscountedTimeAverage::add(std::span<const double> rho) {
  if (rho.size() != grid_.n()) {
    throw InvalidArgument("DiscountedTimeAverage: snapshot size does not match the grid");
  }
  double w = weight(count_);
  if (rule_ == DiscountQuadrature::trapezoid && count_ == 0) w *= 0.5;
  for (std::size_t j = 0; j < rho.size(); ++j) sum_[j] += w * rho[j];
  weight_sum_ += w;
  last_.assign(rho.begin(), rho.end());
  ++count_;
}

double DiscountedTimeAverage::weight_sum() const {
  if (count_ == 0) return 0.0;
  // The trapezoid's last interior weight is halved once the sequence ends.
  if (rule_ == DiscountQuadrature::trapezoid && count_ > 1) {
    return weight_sum_ - 0.5 * weight(count_ - 1);
  }
  return weight_sum_;
}

double DiscountedTimeAverage::tail_weight() const {
  const double kd = static_cast<double>(steps());
  if (rule_ == DiscountQuadrature::trapezoid) return std::exp(-lambda_ * dt_ * kd);
  return std::exp(-kd * std::log1p(lambda_ * dt_));
}

DensityField DiscountedTimeAverage::finish() const {
  constexpr double kTailGate = 1e-6;
  constexpr double kMassGate = 1e-6;
  if (count_ == 0) throw InvalidArgument("DiscountedTimeAverage: no snapshots");
  const double tail = tail_weight();
  if (tail > kTailGate) {
    throw InvalidArgument("DiscountedTimeAverage: horizon " +
                          std::to_string(dt_ * static_cast<double>(steps())) +
                          " too short for lambda=" + std::to_string(lambda_) +
                          " (tail weight " + std::to_string(tail) + " > 1e-6)");
  }
  std::vector<double> theta = sum_;
  const double end_correction =
      rule_ == DiscountQuadrature::trapezoid && count_ > 1 ? 0.5 * weight(count_ - 1) : 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    theta[j] += (tail - end_correction) * last_[j];
  }
  const double mass = node_mass(grid_, theta);
  if (!(std::abs(mass - 1.0) <= kMassGate)) {
    throw SolverError("DiscountedTimeAverage: averaged mass " + std::to_string(mass));
  }
  return DensityField::normalized(grid_, std::move(theta));
}

DensityField stationary_from_transient(std::span<const DensitySnapshot> rho_sequence,
                                       double lambda, DiscountQuadrature rule) {
  if (rho_sequence.size() < 2) {
    throw InvalidArgument("stationary_from_transient: need at least two snapshots");
  }
  const double dt = rho_sequence[1].t - rho_sequence[0].t;
  if (rho_sequence[0].t != 0.0 || !(dt > 0.0)) {
    throw InvalidArgument("stationary_from_transient: sequence must start at t = 0 with increasing times");
  }
  const Grid1D& g = rho_sequence[0].rho.grid();
  DiscountedTimeAverage avg(g, lambda, dt, rule);
  for (std::size_t k = 0; k < rho_sequence.size(); ++k) {
    const DensitySnapshot& s = rho_sequence[k];
    if (std::abs(s.t - dt * static_cast<double>(k)) > 1e-9 * dt * static_cast<double>(k + 1)) {
      throw InvalidArgument("stationary_from_transient: snapshots must be uniformly spaced "
                            "and include every step");
    }
    if (!(s.rho.grid() == g)) {
      throw InvalidArgument("stationary_from_transient: snapshots live on different grids");
    }
    avg.add(s.rho.values());
  }
  return avg.finish();
}

DensityField discounted_density(const ScalarField& drift, double eps,
                                std::size_t x0_index, double lambda, double T, double dt,
                                DiscountQuadrature rule, const FokkerPlanckOptions& opts) {
  DiscountedTimeAverage avg(drift.grid(), lambda, dt, rule);
  evolve_fokker_planck(
      drift, eps, x0_index, T, dt,
      [&](std::size_t, double, std::span<const double> rho) { avg.add(rho); }, opts);
  return avg.finish();
}

GaussLegendreRule gauss_legendre(std::size_t n) {
  if (n == 0) throw InvalidArgument("gauss_legendre: need at least one node");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess for the i-th root.
    double t = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = t;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kd = static_cast<double>(k);
        const double p2 = ((2.0 * kd - 1.0) * t * p1 - (kd - 1.0) * p0) / kd;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = nd * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - t * t) * dp * dp);
    // Map [-1, 1] to [0, 1].
    rule.nodes[i] = 0.5 * (1.0 - t);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + t);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

ScalarField averaged_drift(const ScalarField& u_eps, const ScalarField& u_delta,
                           const HamiltonianModel& model, std::size_t quad_points) {
  if (!(u_eps.grid() == u_delta.grid())) {
    throw InvalidArgument("averaged_drift: fields live on different grids");
  }
  if (quad_points < 4) throw InvalidArgument("averaged_drift: need at least 4 quadrature points");
  const GaussLegendreRule rule = gauss_legendre(quad_points);
  const ScalarField de = central_gradient(u_eps);
  const ScalarField dd = central_gradient(u_delta);
  const Grid1D& g = u_eps.grid();
  std::vector<double> out(g.n());
  for (std::size_t j = 0; j < g.n(); ++j) {
    if (de[j] == dd[j]) {
      out[j] = model.dHdp(g.x(j), de[j]);
      continue;
    }
    double s = 0.0;
    for (std::size_t q = 0; q < quad_points; ++q) {
      const double r = rule.nodes[q];
      s += rule.weights[q] * model.dHdp(g.x(j), r * de[j] + (1.0 - r) * dd[j]);
    }
    out[j] = s;
  }
  return ScalarField(g, std::move(out));
}

double entropy_diagnostic(const DensityField& rho) {
  double s = 0.0;
  for (double r : rho.values()) {
    const double c = std::max(r, 1e-300);
    s += std::abs(std::log(c)) * c;
  }
  return s * rho.grid().h();
}

}  // namespace hjvisc
