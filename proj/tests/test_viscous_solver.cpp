#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hjvisc/viscous_solver.hpp"

namespace hjvisc {
namespace {

double inf_norm(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

// u* = 0.3 sin x solves lambda u + |u'|^2/2 + V = eps u'' for this V.
HamiltonianModel manufactured_model(double lambda, double eps) {
  return separable_hamiltonian([=](double x) {
    const double c = 0.3 * std::cos(x);
    return -eps * 0.3 * std::sin(x) - lambda * 0.3 * std::sin(x) - 0.5 * c * c;
  });
}

double manufactured_error(std::size_t n, double lambda, double eps) {
  Grid1D g(n);
  ViscousSolution s = solve_viscous(manufactured_model(lambda, eps), lambda, eps, g);
  EXPECT_TRUE(s.report.converged);
  return inf_norm_diff(s.u, ScalarField::sample(g, [](double x) { return 0.3 * std::sin(x); }));
}

TEST(ViscousResidual, Examples) {
  Grid1D g(64);
  const HamiltonianModel p = pendulum_hamiltonian();
  ScalarField r = viscous_residual(p, ScalarField::zeros(g), 0.1, 0.05);
  for (std::size_t j = 0; j < g.n(); ++j) EXPECT_EQ(r[j], std::cos(g.x(j)) - 1.0);
  ScalarField f = viscous_residual(flat_hamiltonian(), ScalarField::zeros(g), 0.1, 0.05);
  EXPECT_EQ(inf_norm(f), 0.0);
  ScalarField c = viscous_residual(p, ScalarField::constant(g, 2.0), 0.1, 0.05);
  for (std::size_t j = 0; j < g.n(); ++j) EXPECT_NEAR(c[j], 0.2 + std::cos(g.x(j)) - 1.0, 1e-15);
}

TEST(ViscousJacobian, FlatModelAtZero) {
  Grid1D g(32);
  const double lambda = 0.1;
  const double eps = 0.05;
  CyclicTridiagonalMatrix j = viscous_jacobian(flat_hamiltonian(), ScalarField::zeros(g), lambda, eps);
  const double k = eps / (g.h() * g.h());
  for (std::size_t i = 0; i < g.n(); ++i) {
    EXPECT_DOUBLE_EQ(j.sub[i], -k);
    EXPECT_DOUBLE_EQ(j.super[i], -k);
    EXPECT_DOUBLE_EQ(j.diag[i], lambda + 2.0 * k);
    EXPECT_NEAR(j.sub[i] + j.diag[i] + j.super[i], lambda, 1e-10);
  }
}

TEST(ViscousJacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  const HamiltonianModel quartic = HamiltonianModel::general(
      "quartic", [](double x, double p) { return p * p / 2.0 + p * p * p * p / 12.0 + std::sin(x); },
      [](double, double p) { return p + p * p * p / 3.0; },
      [](double, double p) { return 1.0 + p * p; });
  const std::vector<HamiltonianModel> models = {pendulum_hamiltonian(), quartic};
  Grid1D g(32);
  for (const HamiltonianModel& m : models) {
    for (GradientScheme scheme : {GradientScheme::central, GradientScheme::peclet_hybrid}) {
      std::vector<double> v(g.n());
      for (double& x : v) x = amp(rng);
      const ScalarField u(g, v);
      const double lambda = 0.1;
      const double eps = scheme == GradientScheme::central ? 0.05 : 0.002;
      const std::vector<double> dense = viscous_jacobian(m, u, lambda, eps, scheme).to_dense();
      double scale = 0.0;
      for (double d : dense) scale = std::max(scale, std::abs(d));
      const double t = 1e-6;
      for (std::size_t k = 0; k < g.n(); ++k) {
        std::vector<double> up = v;
        std::vector<double> dn = v;
        up[k] += t;
        dn[k] -= t;
        const ScalarField fp = viscous_residual(m, ScalarField(g, up), lambda, eps, scheme);
        const ScalarField fm = viscous_residual(m, ScalarField(g, dn), lambda, eps, scheme);
        for (std::size_t i = 0; i < g.n(); ++i) {
          const double fd = (fp[i] - fm[i]) / (2.0 * t);
          EXPECT_LE(std::abs(fd - dense[i * g.n() + k]), 1e-6 * scale)
              << m.name() << " row " << i << " col " << k;
        }
      }
    }
  }
}

TEST(ViscousOptions, Validation) {
  ViscousOptions o;
  EXPECT_NO_THROW(o.validate());
  o.tol_residual_inf = 0.0;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = {};
  o.max_newton_iters = 0;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = {};
  o.damping = 1.0;
  EXPECT_THROW(o.validate(), InvalidArgument);
}

TEST(SolveViscous, RejectsNonPositiveParameters) {
  Grid1D g(32);
  const HamiltonianModel m = pendulum_hamiltonian();
  EXPECT_THROW(solve_viscous(m, 0.0, 0.1, g), InvalidArgument);
  EXPECT_THROW(solve_viscous(m, 0.1, 0.0, g), InvalidArgument);
  EXPECT_THROW(solve_viscous(m, -0.1, 0.1, g), InvalidArgument);
  ViscousOptions o;
  o.initial_guess = ScalarField::zeros(Grid1D(16));
  EXPECT_THROW(solve_viscous(m, 0.1, 0.1, g, o), InvalidArgument);
}

TEST(SolveViscous, FlatModelGivesZero) {
  for (double lambda : {0.5, 0.01}) {
    for (double eps : {0.3, 1e-4}) {
      ViscousSolution s = solve_viscous(flat_hamiltonian(), lambda, eps, Grid1D(128));
      EXPECT_TRUE(s.report.converged);
      EXPECT_EQ(inf_norm(s.u), 0.0);
    }
  }
}

TEST(SolveViscous, ResidualCertificate) {
  const HamiltonianModel m = pendulum_hamiltonian();
  const Grid1D g(1024);
  ViscousOptions o;
  for (double lambda : {0.1, 0.01}) {
    const double eps = std::pow(lambda, 1.2);
    ViscousSolution s = solve_viscous(m, lambda, eps, g, o);
    ASSERT_TRUE(s.report.converged);
    const double r = inf_norm(viscous_residual(m, s.u, lambda, eps, o.scheme));
    EXPECT_EQ(r, s.report.final_residual_inf);
    EXPECT_LE(r, s.report.roundoff_limited ? s.report.residual_floor : o.tol_residual_inf);
  }
}

TEST(SolveViscous, ManufacturedSolutionIsSecondOrder) {
  const double lambda = 0.1;
  const double eps = 0.05;
  double prev = manufactured_error(256, lambda, eps);
  for (std::size_t n : {512u, 1024u, 2048u}) {
    const double e = manufactured_error(n, lambda, eps);
    EXPECT_GE(prev / e, 3.0) << "n=" << n;
    EXPECT_LE(prev / e, 5.0) << "n=" << n;
    prev = e;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(SolveViscous, PendulumZeroPointAndSymmetry) {
  const double lambda = 0.1;
  const double eps = std::pow(lambda, 1.2);
  const Grid1D g(2048);
  ViscousSolution s = solve_viscous(pendulum_hamiltonian(), lambda, eps, g);
  ASSERT_TRUE(s.report.converged);
  const ScalarField lap = discrete_laplacian(s.u);
  EXPECT_LE(std::abs(lambda * s.u[0] - eps * lap[0]), 1e-10 + 5.0 * g.h() * g.h());
  double asym = 0.0;
  for (std::size_t j = 1; j < g.n(); ++j) asym = std::max(asym, std::abs(s.u[j] - s.u[g.n() - j]));
  EXPECT_LE(asym, 10.0 * 1e-10);
}

TEST(SolveViscous, ContinuationRescuesSmallViscosity) {
  const double lambda = 1e-3;
  const double eps = std::pow(lambda, 1.6);
  ViscousSolution s = solve_viscous(pendulum_hamiltonian(), lambda, eps, Grid1D(2048));
  EXPECT_TRUE(s.report.converged);
  ViscousOptions cold;
  cold.continuation = false;
  cold.max_newton_iters = 3;
  ViscousSolution c = solve_viscous(pendulum_hamiltonian(), lambda, eps, Grid1D(2048), cold);
  EXPECT_FALSE(c.report.converged);
  EXPECT_EQ(c.report.continuation_steps, 0);
  EXPECT_GT(c.report.final_residual_inf, 0.0);
}

TEST(SolveViscous, WarmStartConvergesImmediately) {
  const HamiltonianModel m = pendulum_hamiltonian();
  const Grid1D g(512);
  ViscousSolution a = solve_viscous(m, 0.05, 0.02, g);
  ASSERT_TRUE(a.report.converged);
  ViscousOptions o;
  o.initial_guess = a.u;
  ViscousSolution b = solve_viscous(m, 0.05, 0.02, g, o);
  EXPECT_TRUE(b.report.converged);
  EXPECT_LE(b.report.iterations, 1);
  EXPECT_LE(inf_norm_diff(a.u, b.u), 1e-9);
}

TEST(SolveViscous, UniformLipschitzAndSemiconcavity) {
  const HamiltonianModel m = pendulum_hamiltonian();
  const Grid1D g(2048);
  std::vector<double> lips;
  std::vector<double> semis;
  for (double alpha : {0.2, 0.6}) {
    for (double lambda : {1e-1, 1e-2, 1e-3}) {
      const double eps = std::pow(lambda, 1.0 + alpha);
      ViscousSolution s = solve_viscous(m, lambda, eps, g);
      ASSERT_TRUE(s.report.converged);
      double lip = 0.0;
      for (std::size_t j = 0; j < g.n(); ++j) {
        lip = std::max(lip, std::abs(s.u[g.next(j)] - s.u[j]) / g.h());
      }
      lips.push_back(lip);
      semis.push_back(discrete_laplacian(s.u).max());
    }
  }
  const auto [llo, lhi] = std::minmax_element(lips.begin(), lips.end());
  EXPECT_LE(*lhi / *llo, 3.0);
  const auto [slo, shi] = std::minmax_element(semis.begin(), semis.end());
  EXPECT_GT(*slo, 0.0);
  EXPECT_LE(*shi / *slo, 3.0);
}

TEST(SolveViscousNeumann, MatchesPeriodicRestriction) {
  const double lambda = 0.1;
  const double eps = std::pow(lambda, 1.2);
  const std::size_t n_half = 1024;
  NeumannSolution half = solve_viscous_neumann(pendulum_hamiltonian(), lambda, eps, n_half);
  ASSERT_TRUE(half.report.converged);
  ASSERT_EQ(half.u.size(), n_half + 1);
  ViscousOptions central;
  central.scheme = GradientScheme::central;
  ViscousSolution full = solve_viscous(pendulum_hamiltonian(), lambda, eps, Grid1D(2 * n_half), central);
  ASSERT_TRUE(full.report.converged);
  double d = 0.0;
  for (std::size_t j = 0; j <= n_half; ++j) d = std::max(d, std::abs(half.u[j] - full.u[j]));
  EXPECT_LE(d, 1e-6 + half.u.h * half.u.h);
  const std::vector<double> r = viscous_residual_neumann(pendulum_hamiltonian(), half.u, lambda, eps);
  double rmax = 0.0;
  for (double x : r) rmax = std::max(rmax, std::abs(x));
  EXPECT_LE(rmax, 1e-10);
}

TEST(SolveViscousNeumann, FlatModelAndBoundaryRows) {
  NeumannSolution s = solve_viscous_neumann(flat_hamiltonian(), 0.1, 0.05, 64);
  ASSERT_TRUE(s.report.converged);
  for (double v : s.u.values) EXPECT_EQ(v, 0.0);
  // With u_{-1} = u_1 the boundary gradient vanishes, so the end rows read
  // lambda u + H(x, 0) - 2 eps (u_1 - u_0) / h^2.
  const HamiltonianModel m = pendulum_hamiltonian();
  IntervalField u;
  u.h = std::numbers::pi / 16.0;
  for (std::size_t j = 0; j <= 16; ++j) u.values.push_back(std::cos(0.7 * u.x(j)) + 0.1 * j);
  const double lambda = 0.1;
  const double eps = 0.05;
  const std::vector<double> r = viscous_residual_neumann(m, u, lambda, eps);
  ASSERT_EQ(r.size(), 17u);
  const double k = eps / (u.h * u.h);
  EXPECT_NEAR(r[0], lambda * u[0] + m.H(0.0, 0.0) - 2.0 * k * (u[1] - u[0]), 1e-12);
  EXPECT_NEAR(r[16], lambda * u[16] + m.H(std::numbers::pi, 0.0) - 2.0 * k * (u[15] - u[16]),
              1e-12);
  const double p8 = (u[9] - u[7]) / (2.0 * u.h);
  EXPECT_NEAR(r[8], lambda * u[8] + m.H(u.x(8), p8) - k * (u[9] - 2.0 * u[8] + u[7]), 1e-12);
}

TEST(SolveViscousNeumann, RejectsAsymmetricModel) {
  const HamiltonianModel tilted = separable_hamiltonian([](double x) { return std::sin(x); });
  EXPECT_THROW(solve_viscous_neumann(tilted, 0.1, 0.05, 64), InvalidArgument);
  EXPECT_THROW(solve_viscous_neumann(pendulum_hamiltonian(), 0.1, 0.05, 2), InvalidArgument);
}

}  // namespace
}  // namespace hjvisc
