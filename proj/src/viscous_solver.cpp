#include "hjvisc/viscous_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace hjvisc {

void ViscousOptions::validate() const {
  if (!(tol_residual_inf > 0.0)) throw InvalidArgument("ViscousOptions: tol_residual_inf must be > 0");
  if (max_newton_iters < 1) throw InvalidArgument("ViscousOptions: max_newton_iters must be >= 1");
  if (!(damping > 0.0 && damping < 1.0)) throw InvalidArgument("ViscousOptions: damping must lie in (0, 1)");
  if (!(min_step > 0.0 && min_step <= 1.0)) throw InvalidArgument("ViscousOptions: min_step must lie in (0, 1]");
  if (!(continuation_start > 0.0)) throw InvalidArgument("ViscousOptions: continuation_start must be > 0");
  if (!(continuation_tol > 0.0)) throw InvalidArgument("ViscousOptions: continuation_tol must be > 0");
}

namespace {

// Node layout shared by the periodic torus and the reflecting half interval.
struct Layout {
  std::size_t n;
  double h;
  bool periodic;

  std::size_t left(std::size_t j) const {
    if (j > 0) return j - 1;
    return periodic ? n - 1 : 1;
  }
  std::size_t right(std::size_t j) const {
    if (j + 1 < n) return j + 1;
    return periodic ? 0 : n - 2;
  }
  double x(std::size_t j) const { return static_cast<double>(j) * h; }
};

struct RowEval {
  double value = 0.0;
  double d_left = 0.0;
  double d_center = 0.0;
  double d_right = 0.0;
};

// Numerical Hamiltonian at one node from the one-sided slopes
// a = (u_{j+1} - u_j)/h and b = (u_j - u_{j-1})/h, with partials.
struct NumericalH {
  double value;
  double d_a;
  double d_b;
};

NumericalH numerical_hamiltonian(const HamiltonianModel& model, double x, double a,
                                 double b, double h, double eps, double pstar,
                                 GradientScheme scheme) {
  const double pc = 0.5 * (a + b);
  const double hc = model.H(x, pc);
  const double hpc = model.dHdp(x, pc);
  NumericalH central{hc, 0.5 * hpc, 0.5 * hpc};
  if (scheme == GradientScheme::central) return central;

  const double ha = model.dHdp(x, a);
  const double hb = model.dHdp(x, b);
  const double scale = h / (2.0 * eps);
  const bool a_dominates = std::abs(ha) >= std::abs(hb);
  const double peclet = scale * (a_dominates ? std::abs(ha) : std::abs(hb));
  if (peclet <= 1.0) return central;

  // Godunov flux for H convex in p with minimum at pstar.
  const double pb = std::max(b, pstar);
  const double pa = std::min(a, pstar);
  const double hb_up = model.H(x, pb);
  const double ha_up = model.H(x, pa);
  double hg;
  double dg_a = 0.0;
  double dg_b = 0.0;
  if (hb_up >= ha_up) {
    hg = hb_up;
    if (b > pstar) dg_b = model.dHdp(x, pb);
  } else {
    hg = ha_up;
    if (a < pstar) dg_a = model.dHdp(x, pa);
  }
  if (peclet >= 2.0) return {hg, dg_a, dg_b};

  const double w = peclet - 1.0;
  double dw_a = 0.0;
  double dw_b = 0.0;
  if (a_dominates) {
    dw_a = scale * std::copysign(1.0, ha) * model.d2Hdp2(x, a);
  } else {
    dw_b = scale * std::copysign(1.0, hb) * model.d2Hdp2(x, b);
  }
  const double gap = hg - hc;
  return {hc + w * gap,
          (1.0 - w) * central.d_a + w * dg_a + gap * dw_a,
          (1.0 - w) * central.d_b + w * dg_b + gap * dw_b};
}

class ResidualEngine {
 public:
  ResidualEngine(const HamiltonianModel& model, Layout layout, double lambda,
                 double eps, GradientScheme scheme)
      : model_(model), layout_(layout), lambda_(lambda), eps_(eps), scheme_(scheme) {
    pstar_.assign(layout_.n, 0.0);
    if (scheme_ != GradientScheme::central && !model_.potential()) {
      for (std::size_t j = 0; j < layout_.n; ++j) {
        pstar_[j] = model_.momentum_at_minimum(layout_.x(j));
      }
    }
  }

  RowEval row(std::span<const double> u, std::size_t j) const {
    const double h = layout_.h;
    const double um = u[layout_.left(j)];
    const double u0 = u[j];
    const double up = u[layout_.right(j)];
    const double a = (up - u0) / h;
    const double b = (u0 - um) / h;
    NumericalH nh = numerical_hamiltonian(model_, layout_.x(j), a, b, h, eps_,
                                          pstar_[j], scheme_);
    const double diff = eps_ / (h * h);
    RowEval r;
    r.value = lambda_ * u0 + nh.value - diff * (up - 2.0 * u0 + um);
    r.d_right = nh.d_a / h - diff;
    r.d_left = -nh.d_b / h - diff;
    r.d_center = lambda_ + (nh.d_b - nh.d_a) / h + 2.0 * diff;
    return r;
  }

  std::vector<double> residual(std::span<const double> u) const {
    std::vector<double> r(layout_.n);
    for (std::size_t j = 0; j < layout_.n; ++j) r[j] = row(u, j).value;
    return r;
  }

  CyclicTridiagonalMatrix jacobian(std::span<const double> u) const {
    const std::size_t n = layout_.n;
    CyclicTridiagonalMatrix m(n);
    for (std::size_t j = 0; j < n; ++j) {
      RowEval r = row(u, j);
      m.diag[j] += r.d_center;
      if (layout_.periodic) {
        m.sub[j] += r.d_left;
        m.super[j] += r.d_right;
      } else if (j == 0) {
        m.super[j] += r.d_left + r.d_right;  // ghost u_{-1} = u_1
      } else if (j + 1 == n) {
        m.sub[j] += r.d_left + r.d_right;    // ghost u_{N+1} = u_{N-1}
      } else {
        m.sub[j] += r.d_left;
        m.super[j] += r.d_right;
      }
    }
    return m;
  }

 private:
  const HamiltonianModel& model_;
  Layout layout_;
  double lambda_;
  double eps_;
  GradientScheme scheme_;
  std::vector<double> pstar_;
};

// Size of the residual change caused by rounding u to working precision.
double residual_floor(const CyclicTridiagonalMatrix& jac, std::span<const double> u) {
  double row = 0.0;
  for (std::size_t j = 0; j < jac.size(); ++j) {
    row = std::max(row, std::abs(jac.sub[j]) + std::abs(jac.diag[j]) + std::abs(jac.super[j]));
  }
  double umax = 0.0;
  for (double x : u) umax = std::max(umax, std::abs(x));
  return 4.0 * std::numeric_limits<double>::epsilon() * umax * row;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    m = std::max(m, std::abs(x));
  }
  return m;
}

// One damped-Newton run at fixed eps. Updates u in place with the best
// iterate found.
SolveReport newton_stage(const ResidualEngine& engine, std::vector<double>& u,
                         double tol, const ViscousOptions& opts) {
  SolveReport rep;
  std::vector<double> r = engine.residual(u);
  double nr = inf_norm(r);
  std::vector<double> trial(u.size());
  bool stalled = false;
  for (int it = 0; it < opts.max_newton_iters; ++it) {
    if (nr <= tol) break;
    std::vector<double> step;
    try {
      CyclicTridiagonalMatrix jac = engine.jacobian(u);
      rep.residual_floor = residual_floor(jac, u);
      CyclicTridiagonalFactorization lu(jac);
      for (double& v : r) v = -v;
      step = lu.solve(r);
    } catch (const SolverError&) {
      break;
    }
    double t = 1.0;
    bool accepted = false;
    while (t >= opts.min_step) {
      for (std::size_t j = 0; j < u.size(); ++j) trial[j] = u[j] + t * step[j];
      std::vector<double> rt = engine.residual(trial);
      double nt = inf_norm(rt);
      if (nt < nr) {
        u.swap(trial);
        r.swap(rt);
        nr = nt;
        accepted = true;
        break;
      }
      t *= opts.damping;
    }
    ++rep.iterations;
    if (!accepted) {  // no step length reduces the residual
      stalled = true;
      break;
    }
  }
  rep.final_residual_inf = nr;
  rep.converged = nr <= tol;
  if (!rep.converged && stalled && nr <= rep.residual_floor) {
    rep.converged = true;
    rep.roundoff_limited = true;
  }
  return rep;
}

void check_parameters(double lambda, double eps, const char* who) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument(std::string(who) + ": lambda must be > 0");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidArgument(std::string(who) + ": eps must be > 0");
  }
}

// Cold start, then (if that stalls and continuation is on) a factor-2
// descent in eps from max(eps, continuation_start).
SolveReport solve_with_continuation(const HamiltonianModel& model, Layout layout,
                                    double lambda, double eps,
                                    std::vector<double>& u,
                                    const ViscousOptions& opts) {
  const std::vector<double> start = u;
  ResidualEngine target(model, layout, lambda, eps, opts.scheme);
  SolveReport cold = newton_stage(target, u, opts.tol_residual_inf, opts);
  if (cold.converged || !opts.continuation) return cold;

  std::vector<double> cold_u = u;
  u = start;
  SolveReport total;
  total.iterations = cold.iterations;
  double e = std::max(eps, opts.continuation_start);
  while (e > eps) {
    ResidualEngine stage(model, layout, lambda, e, opts.scheme);
    total.iterations += newton_stage(stage, u, opts.continuation_tol, opts).iterations;
    ++total.continuation_steps;
    e = std::max(0.5 * e, eps);
  }
  SolveReport fin = newton_stage(target, u, opts.tol_residual_inf, opts);
  total.iterations += fin.iterations;
  total.final_residual_inf = fin.final_residual_inf;
  total.converged = fin.converged;
  total.roundoff_limited = fin.roundoff_limited;
  total.residual_floor = fin.residual_floor;
  if (!fin.converged && cold.final_residual_inf < fin.final_residual_inf) {
    u = std::move(cold_u);
    total.final_residual_inf = cold.final_residual_inf;
  }
  return total;
}

void check_neumann_symmetry(const HamiltonianModel& model) {
  constexpr int kSamples = 64;
  const double pi = std::numbers::pi;
  for (int i = 0; i <= kSamples; ++i) {
    double s = pi * i / kSamples;
    for (double p : {-2.0, -0.5, 0.0, 0.7, 3.0}) {
      double at0 = std::abs(model.H(s, p) - model.H(-s, -p));
      double atpi = std::abs(model.H(pi + s, p) - model.H(pi - s, -p));
      double scale = 1.0 + std::abs(model.H(s, p));
      if (at0 > 1e-10 * scale || atpi > 1e-10 * scale) {
        throw InvalidArgument("solve_viscous_neumann: model '" + model.name() +
                              "' is not symmetric about 0 and pi");
      }
    }
  }
}

}  // namespace

ScalarField viscous_residual(const HamiltonianModel& model, const ScalarField& u,
                             double lambda, double eps, GradientScheme scheme) {
  check_parameters(lambda, eps, "viscous_residual");
  const Grid1D& g = u.grid();
  ResidualEngine engine(model, Layout{g.n(), g.h(), true}, lambda, eps, scheme);
  return ScalarField(g, engine.residual(u.values()));
}

CyclicTridiagonalMatrix viscous_jacobian(const HamiltonianModel& model,
                                         const ScalarField& u, double lambda,
                                         double eps, GradientScheme scheme) {
  check_parameters(lambda, eps, "viscous_jacobian");
  const Grid1D& g = u.grid();
  ResidualEngine engine(model, Layout{g.n(), g.h(), true}, lambda, eps, scheme);
  return engine.jacobian(u.values());
}

ViscousSolution solve_viscous(const HamiltonianModel& model, double lambda, double eps,
                              const Grid1D& grid, const ViscousOptions& opts) {
  check_parameters(lambda, eps, "solve_viscous");
  opts.validate();
  std::vector<double> u(grid.n(), 0.0);
  if (opts.initial_guess) {
    if (!(opts.initial_guess->grid() == grid)) {
      throw InvalidArgument("solve_viscous: initial guess lives on a different grid");
    }
    u = opts.initial_guess->data();
  }
  SolveReport rep = solve_with_continuation(model, Layout{grid.n(), grid.h(), true},
                                            lambda, eps, u, opts);
  return {ScalarField(grid, std::move(u)), rep};
}

std::vector<double> viscous_residual_neumann(const HamiltonianModel& model,
                                             const IntervalField& u, double lambda,
                                             double eps, GradientScheme scheme) {
  check_parameters(lambda, eps, "viscous_residual_neumann");
  if (u.size() < 3) throw InvalidArgument("viscous_residual_neumann: need >= 3 nodes");
  ResidualEngine engine(model, Layout{u.size(), u.h, false}, lambda, eps, scheme);
  return engine.residual(u.values);
}

NeumannSolution solve_viscous_neumann(const HamiltonianModel& model, double lambda,
                                      double eps, std::size_t n_half,
                                      const ViscousOptions& opts) {
  check_parameters(lambda, eps, "solve_viscous_neumann");
  opts.validate();
  if (n_half < Grid1D::kMinNodes / 2) {
    throw InvalidArgument("solve_viscous_neumann: n_half must be >= 4");
  }
  check_neumann_symmetry(model);

  const double h = std::numbers::pi / static_cast<double>(n_half);
  std::vector<double> u(n_half + 1, 0.0);
  if (opts.initial_guess) {
    const ScalarField& g = *opts.initial_guess;
    if (g.size() != 2 * n_half) {
      throw InvalidArgument("solve_viscous_neumann: initial guess must live on the "
                            "matching torus grid of 2*n_half nodes");
    }
    std::copy_n(g.data().begin(), n_half + 1, u.begin());
  }
  SolveReport rep = solve_with_continuation(model, Layout{n_half + 1, h, false},
                                            lambda, eps, u, opts);
  return {IntervalField{h, std::move(u)}, rep};
}

}  // namespace hjvisc
