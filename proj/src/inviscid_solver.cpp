#include "hjvisc/inviscid_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "hjvisc/tridiagonal.hpp"

namespace hjvisc {

namespace {

constexpr double kRadicandClamp = 1e-8;

double branch_slope(double x, double u, double lambda) {
  // 1 - cos x written as 2 sin^2(x/2) to avoid cancellation near x = 0.
  const double s = std::sin(0.5 * x);
  const double radicand = 2.0 * (2.0 * s * s - lambda * u);
  if (radicand >= 0.0) return std::sqrt(radicand);
  if (radicand >= -kRadicandClamp) return 0.0;
  char msg[160];
  std::snprintf(msg, sizeof msg,
                "solve_pendulum_ode: radicand %.3e at x=%.6g; lambda=%.6g is too large for the "
                "branch formula",
                radicand, x, lambda);
  throw SolverError(msg);
}

}  // namespace

ScalarField solve_pendulum_ode(double lambda, std::size_t n_half) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("solve_pendulum_ode: lambda must be > 0");
  }
  const Grid1D grid(2 * n_half);
  const double h = grid.h();
  std::vector<double> u(grid.n(), 0.0);
  double y = 0.0;
  for (std::size_t j = 0; j < n_half; ++j) {
    const double x = grid.x(j);
    const double k1 = branch_slope(x, y, lambda);
    const double k2 = branch_slope(x + 0.5 * h, y + 0.5 * h * k1, lambda);
    const double k3 = branch_slope(x + 0.5 * h, y + 0.5 * h * k2, lambda);
    const double k4 = branch_slope(x + h, y + h * k3, lambda);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    u[j + 1] = y;
  }
  for (std::size_t j = 1; j < n_half; ++j) u[grid.n() - j] = u[j];
  return ScalarField(grid, std::move(u));
}

namespace {

struct LfRow {
  double value;
  double d_left;
  double d_center;
  double d_right;
  double max_speed;  // max |dH/dp| over the two one-sided slopes
};

LfRow lf_row(const HamiltonianModel& model, double x, double um, double u0, double up,
             double h, double lambda, double sigma, Dissipation dissipation) {
  const double a = (up - u0) / h;
  const double b = (u0 - um) / h;
  const double pc = 0.5 * (a + b);
  const double ha = model.dHdp(x, a);
  const double hb = model.dHdp(x, b);
  const double speed = std::max(std::abs(ha), std::abs(hb));

  double s = sigma;
  double ds_a = 0.0;
  double ds_b = 0.0;
  if (dissipation == Dissipation::local) {
    s = speed;
    if (std::abs(ha) >= std::abs(hb)) {
      ds_a = std::copysign(1.0, ha) * model.d2Hdp2(x, a);
    } else {
      ds_b = std::copysign(1.0, hb) * model.d2Hdp2(x, b);
    }
  }
  const double hpc = model.dHdp(x, pc);
  const double jump = a - b;
  const double dg_a = 0.5 * hpc - 0.5 * s - 0.5 * ds_a * jump;
  const double dg_b = 0.5 * hpc + 0.5 * s - 0.5 * ds_b * jump;
  LfRow r;
  r.value = lambda * u0 + model.H(x, pc) - 0.5 * s * jump;
  r.d_right = dg_a / h;
  r.d_left = -dg_b / h;
  r.d_center = lambda + (dg_b - dg_a) / h;
  r.max_speed = speed;
  return r;
}

struct LfEval {
  std::vector<double> g;
  double max_speed = 0.0;
};

LfEval lf_residual(const HamiltonianModel& model, const Grid1D& grid,
                   std::span<const double> u, double lambda, double sigma,
                   Dissipation dissipation) {
  LfEval e;
  e.g.resize(grid.n());
  for (std::size_t j = 0; j < grid.n(); ++j) {
    LfRow r = lf_row(model, grid.x(j), u[grid.prev(j)], u[j], u[grid.next(j)],
                     grid.h(), lambda, sigma, dissipation);
    e.g[j] = r.value;
    e.max_speed = std::max(e.max_speed, r.max_speed);
  }
  return e;
}

CyclicTridiagonalMatrix lf_jacobian(const HamiltonianModel& model, const Grid1D& grid,
                                    std::span<const double> u, double lambda,
                                    double sigma, Dissipation dissipation) {
  CyclicTridiagonalMatrix m(grid.n());
  for (std::size_t j = 0; j < grid.n(); ++j) {
    LfRow r = lf_row(model, grid.x(j), u[grid.prev(j)], u[j], u[grid.next(j)],
                     grid.h(), lambda, sigma, dissipation);
    m.sub[j] = r.d_left;
    m.diag[j] = r.d_center;
    m.super[j] = r.d_right;
  }
  return m;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(x));
  }
  return m;
}

void check_lf_parameters(double lambda, double sigma) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("Lax-Friedrichs: lambda must be > 0");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("Lax-Friedrichs: sigma must be > 0");
  }
}

[[noreturn]] void sigma_too_small(double sigma, double speed) {
  throw InvalidArgument("Lax-Friedrichs: sigma=" + std::to_string(sigma) +
                        " does not dominate |dH/dp|=" + std::to_string(speed) +
                        " on the iterates; rerun with a larger sigma");
}

// Damped Newton on G(u) = 0; leaves u unchanged if it does not help.
int newton_warm_start(const HamiltonianModel& model, const Grid1D& grid,
                      std::vector<double>& u, double lambda, double sigma,
                      Dissipation dissipation) {
  constexpr int kMaxIters = 100;
  constexpr double kTarget = 1e-13;
  LfEval e = lf_residual(model, grid, u, lambda, sigma, dissipation);
  double nr = inf_norm(e.g);
  std::vector<double> trial(u.size());
  int it = 0;
  for (; it < kMaxIters && nr > kTarget; ++it) {
    std::vector<double> step;
    try {
      CyclicTridiagonalFactorization lu(lf_jacobian(model, grid, u, lambda, sigma, dissipation));
      for (double& v : e.g) v = -v;
      step = lu.solve(e.g);
    } catch (const SolverError&) {
      break;
    }
    bool accepted = false;
    for (double t = 1.0; t >= 0x1p-20; t *= 0.5) {
      for (std::size_t j = 0; j < u.size(); ++j) trial[j] = u[j] + t * step[j];
      LfEval et = lf_residual(model, grid, trial, lambda, sigma, dissipation);
      double nt = inf_norm(et.g);
      if (nt < nr) {
        u.swap(trial);
        e = std::move(et);
        nr = nt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return it;
}

}  // namespace

ScalarField lax_friedrichs_residual(const HamiltonianModel& model, const ScalarField& u,
                                    double lambda, double sigma, Dissipation dissipation) {
  check_lf_parameters(lambda, sigma);
  return ScalarField(u.grid(),
                     lf_residual(model, u.grid(), u.values(), lambda, sigma, dissipation).g);
}

double lax_friedrichs_relaxation(double lambda, double sigma, double h,
                                 Dissipation dissipation) {
  // The local variant's dissipation coefficient varies with u_j, which
  // doubles its weight on the diagonal of the update.
  const double diag_speed = dissipation == Dissipation::local ? 2.0 * sigma : sigma;
  return h / (diag_speed + lambda * h);
}

ScalarField lax_friedrichs_update(const HamiltonianModel& model, const ScalarField& u,
                                  double lambda, double sigma, double omega,
                                  Dissipation dissipation) {
  ScalarField g = lax_friedrichs_residual(model, u, lambda, sigma, dissipation);
  std::vector<double> out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) out[j] = u[j] - omega * g[j];
  return ScalarField(u.grid(), std::move(out));
}

LaxFriedrichsSolution solve_discounted_lax_friedrichs(const HamiltonianModel& model,
                                                      double lambda, const Grid1D& grid,
                                                      double sigma, double tol,
                                                      const LaxFriedrichsOptions& opts) {
  check_lf_parameters(lambda, sigma);
  if (!(tol > 0.0)) throw InvalidArgument("Lax-Friedrichs: tol must be > 0");

  std::vector<double> u(grid.n(), 0.0);
  if (opts.initial_guess) {
    if (!(opts.initial_guess->grid() == grid)) {
      throw InvalidArgument("Lax-Friedrichs: initial guess lives on a different grid");
    }
    u = opts.initial_guess->data();
  }

  SolveReport rep;
  int warm_its = 0;
  if (opts.newton_warm_start) {
    std::vector<double> warm = u;
    warm_its = newton_warm_start(model, grid, warm, lambda, sigma, opts.dissipation);
    LfEval check = lf_residual(model, grid, warm, lambda, sigma, opts.dissipation);
    // Keep the warm start only if it stays inside the monotone regime.
    if (check.max_speed <= sigma && std::isfinite(inf_norm(check.g))) u = std::move(warm);
  }

  const double omega = lax_friedrichs_relaxation(lambda, sigma, grid.h(), opts.dissipation);
  const double stop = tol * lambda;
  double update = std::numeric_limits<double>::infinity();
  double first_update = -1.0;
  long it = 0;
  for (; it < opts.max_iterations; ++it) {
    LfEval e = lf_residual(model, grid, u, lambda, sigma, opts.dissipation);
    if (e.max_speed > sigma) sigma_too_small(sigma, e.max_speed);
    update = omega * inf_norm(e.g);
    if (!std::isfinite(update)) {
      throw InvalidArgument("Lax-Friedrichs: iterates diverged; rerun with a larger sigma");
    }
    if (first_update < 0.0) first_update = update;
    for (std::size_t j = 0; j < u.size(); ++j) u[j] -= omega * e.g[j];
    if (update <= stop) {
      ++it;
      break;
    }
    if (update > 1e6 * std::max(first_update, 1.0)) {
      throw InvalidArgument("Lax-Friedrichs: iterates diverged; rerun with a larger sigma");
    }
  }
  rep.iterations = static_cast<int>(std::min<long>(it, std::numeric_limits<int>::max()));
  rep.final_residual_inf = update;
  rep.converged = update <= stop;
  return {ScalarField(grid, std::move(u)), rep, omega, update, warm_its};
}

}  // namespace hjvisc
