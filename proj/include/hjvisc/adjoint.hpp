#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hjvisc/core.hpp"
#include "hjvisc/tridiagonal.hpp"

namespace hjvisc {

/// Nonnegative grid density of unit mass against the node weight h.
/// Construction enforces h*sum = 1 within kMassTolerance and entries
/// >= -kNegativeTolerance.
class DensityField {
 public:
  static constexpr double kMassTolerance = 1e-8;
  static constexpr double kNegativeTolerance = 1e-12;

  DensityField(Grid1D grid, std::vector<double> values);

  /// Rescales positive-mass values to unit mass before validating.
  static DensityField normalized(Grid1D grid, std::vector<double> values);
  static DensityField uniform(const Grid1D& grid);
  /// Mass 1/h at a single node.
  static DensityField point_mass(const Grid1D& grid, std::size_t index);

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& data() const { return values_; }

  double mass() const;
  double min() const;

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

/// Discretization of the face flux of theta.
enum class AdjointFlux {
  /// Arithmetic face average of theta; second order, monotone only while
  /// the cell Peclet number |b| h / (2 eps) stays below 1.
  central,
  /// Scharfetter-Gummel exponential fitting; monotone for every Peclet
  /// number and equal to `central` up to O(Pe^2) on resolved grids.
  exponential_fitting
};

/// M with (M theta)_j = (F_{j+1/2} - F_{j-1/2}) / h for the face flux
/// F = -b theta - eps theta', b_{j+1/2} = (b_j + b_{j+1}) / 2. Columns of M
/// sum to zero, so -M generates a mass-conserving evolution.
CyclicTridiagonalMatrix transport_operator(const ScalarField& drift, double eps,
                                           AdjointFlux flux = AdjointFlux::central);

/// b_j = dH/dp(x_j, (u_{j+1} - u_{j-1}) / (2h)).
ScalarField adjoint_drift(const HamiltonianModel& model, const ScalarField& u);

struct AdjointSolution {
  DensityField theta;
  /// Factor applied to reach unit mass; within 1e-6 of 1 by contract.
  double renormalization = 1.0;
};

/// Solves (lambda + M) theta = lambda delta_{x0} / h with the drift of u.
/// Throws SolverError when the system is singular, when an entry falls
/// below -1e-8 (non-monotone flux at this h), or when the mass drifts by
/// more than 1e-6 before renormalization.
AdjointSolution solve_adjoint_stationary(const HamiltonianModel& model,
                                         const ScalarField& u, double lambda, double eps,
                                         std::size_t x0_index,
                                         AdjointFlux flux = AdjointFlux::central);

/// Called with the step index, the time k*dt and the density after step k
/// (k = 0 is the initial point mass).
using DensityObserver =
    std::function<void(std::size_t step, double t, std::span<const double> rho)>;

struct FokkerPlanckOptions {
  AdjointFlux flux = AdjointFlux::central;
};

/// Implicit Euler for d rho/dt = -M rho from rho(0) = delta_{x0} / h, with
/// round(T/dt) steps of size dt. Every step is checked for unit mass
/// (1e-8) and entries >= -1e-12; violations throw SolverError. Returns the
/// number of steps taken.
std::size_t evolve_fokker_planck(const ScalarField& drift, double eps,
                                 std::size_t x0_index, double T, double dt,
                                 const DensityObserver& observer,
                                 const FokkerPlanckOptions& opts = {});

struct DensitySnapshot {
  double t = 0.0;
  DensityField rho;
};

/// Same evolution, keeping every `stride`-th density plus the final one.
std::vector<DensitySnapshot> evolve_fokker_planck(const ScalarField& drift, double eps,
                                                  std::size_t x0_index, double T,
                                                  double dt, std::size_t stride = 1,
                                                  const FokkerPlanckOptions& opts = {});

/// Quadrature for theta = int_0^inf lambda e^{-lambda t} rho(t) dt over the
/// implicit-Euler samples rho_k = rho(k dt), k = 0..K.
enum class DiscountQuadrature {
  /// Trapezoid weights lambda dt e^{-lambda t_k}, halved at both ends, plus
  /// the tail e^{-lambda T} rho_K.
  trapezoid,
  /// Weights lambda dt (1 + lambda dt)^{-k} for k >= 1 plus the tail
  /// (1 + lambda dt)^{-K} rho_K. Summed over infinitely many implicit-Euler
  /// steps this is exactly lambda (lambda + (1 + lambda dt) M)^{-1} delta.
  implicit_euler
};

/// Streaming discounted time average; snapshots must arrive in step order
/// 0, 1, 2, ... with uniform spacing dt.
class DiscountedTimeAverage {
 public:
  DiscountedTimeAverage(Grid1D grid, double lambda, double dt,
                        DiscountQuadrature rule = DiscountQuadrature::implicit_euler);

  void add(std::span<const double> rho);

  /// Sum of the interior quadrature weights (tail excluded) for the
  /// snapshots received so far.
  double weight_sum() const;

  /// Weight carried by the tail term.
  double tail_weight() const;

  std::size_t steps() const { return count_ == 0 ? 0 : count_ - 1; }

  /// Throws InvalidArgument when the tail weight exceeds 1e-6 and
  /// SolverError when the averaged mass is off by more than 1e-6.
  DensityField finish() const;

 private:
  double weight(std::size_t k) const;

  Grid1D grid_;
  double lambda_;
  double dt_;
  DiscountQuadrature rule_;
  std::size_t count_ = 0;
  double weight_sum_ = 0.0;
  std::vector<double> sum_;
  std::vector<double> last_;
};

/// Discounted average of a snapshot sequence taken at every step.
DensityField stationary_from_transient(std::span<const DensitySnapshot> rho_sequence,
                                       double lambda,
                                       DiscountQuadrature rule = DiscountQuadrature::implicit_euler);

/// Evolves and averages in one pass without storing snapshots.
DensityField discounted_density(const ScalarField& drift, double eps,
                                std::size_t x0_index, double lambda, double T, double dt,
                                DiscountQuadrature rule = DiscountQuadrature::implicit_euler,
                                const FokkerPlanckOptions& opts = {});

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

/// n-point Gauss-Legendre rule mapped to [0, 1].
GaussLegendreRule gauss_legendre(std::size_t n);

/// int_0^1 dH/dp(x, r Du_eps + (1 - r) Du_delta) dr per node, with central
/// gradients and a quad_points-point Gauss-Legendre rule (quad_points >= 4).
ScalarField averaged_drift(const ScalarField& u_eps, const ScalarField& u_delta,
                           const HamiltonianModel& model, std::size_t quad_points = 8);

/// h * sum |log rho_j| rho_j with rho clamped below at 1e-300.
double entropy_diagnostic(const DensityField& rho);

}  // namespace hjvisc
