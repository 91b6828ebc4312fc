#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "hjvisc/core.hpp"

namespace hjvisc {
namespace {

constexpr double kPi = std::numbers::pi;

double max_error(const ScalarField& f, double (*exact)(double)) {
  double e = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) e = std::max(e, std::abs(f[j] - exact(f.grid().x(j))));
  return e;
}

TEST(Grid1D, SpacingAndWrap) {
  Grid1D g(1024);
  EXPECT_NEAR(g.h() * static_cast<double>(g.n()), kTwoPi, 1e-15);
  EXPECT_EQ(g.next(1023), 0u);
  EXPECT_EQ(g.prev(0), 1023u);
  EXPECT_EQ(g.x(0), 0.0);
  Grid1D unit(16, 1.0);
  EXPECT_DOUBLE_EQ(unit.h(), 1.0 / 16.0);
}

TEST(Grid1D, RejectsTooFewNodesAndBadLength) {
  EXPECT_THROW(Grid1D(7), InvalidArgument);
  EXPECT_THROW(Grid1D(0), InvalidArgument);
  EXPECT_THROW(Grid1D(16, 0.0), InvalidArgument);
  EXPECT_THROW(Grid1D(16, -1.0), InvalidArgument);
  EXPECT_THROW(Grid1D(16, std::numeric_limits<double>::infinity()), InvalidArgument);
  EXPECT_NO_THROW(Grid1D(8));
}

TEST(Grid1D, PeriodicDistanceAndNearestIndex) {
  Grid1D g(8);
  EXPECT_NEAR(g.periodic_distance(0.1, kTwoPi - 0.1), 0.2, 1e-14);
  EXPECT_NEAR(g.periodic_distance(0.0, kPi), kPi, 1e-14);
  EXPECT_EQ(g.nearest_index(kTwoPi - 1e-9), 0u);
  EXPECT_EQ(g.nearest_index(g.x(3) + 0.1 * g.h()), 3u);
  EXPECT_EQ(g.nearest_index(-g.h()), 7u);
}

TEST(ScalarField, ValidatesEntries) {
  Grid1D g(8);
  EXPECT_THROW(ScalarField(g, std::vector<double>(7, 0.0)), InvalidArgument);
  std::vector<double> v(8, 0.0);
  v[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(ScalarField(g, v), InvalidArgument);
  v[2] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(ScalarField(g, v), InvalidArgument);
  ScalarField s = ScalarField::sample(g, [](double x) { return x; });
  EXPECT_EQ(s.min(), 0.0);
  EXPECT_DOUBLE_EQ(s.max(), g.x(7));
}

TEST(Stencils, AnnihilateConstants) {
  Grid1D g(64);
  ScalarField c = ScalarField::constant(g, 3.7);
  ScalarField d = central_gradient(c);
  ScalarField l = discrete_laplacian(c);
  for (std::size_t j = 0; j < g.n(); ++j) {
    EXPECT_EQ(d[j], 0.0);
    EXPECT_EQ(l[j], 0.0);
  }
}

TEST(Stencils, SineAtN1024) {
  Grid1D g(1024);
  ScalarField u = ScalarField::sample(g, [](double x) { return std::sin(x); });
  EXPECT_LE(max_error(central_gradient(u), [](double x) { return std::cos(x); }), 1e-4);
  EXPECT_LE(max_error(discrete_laplacian(u), [](double x) { return -std::sin(x); }), 1e-4);
  ScalarField w = ScalarField::sample(g, [](double x) { return std::cos(2.0 * x); });
  EXPECT_LE(max_error(discrete_laplacian(w), [](double x) { return -4.0 * std::cos(2.0 * x); }),
            1e-4);
}

TEST(Stencils, SawtoothSpikesAtSeam) {
  Grid1D g(64);
  ScalarField u = ScalarField::sample(g, [](double x) { return x; });
  ScalarField d = central_gradient(u);
  EXPECT_NEAR(d[5], 1.0, 1e-12);
  EXPECT_LT(d[0], -10.0);
  EXPECT_LT(d[63], -10.0);
}

TEST(Stencils, SecondOrderUnderRefinement) {
  auto f = [](double x) { return std::sin(x) + 0.5 * std::cos(3.0 * x); };
  auto fp = [](double x) { return std::cos(x) - 1.5 * std::sin(3.0 * x); };
  auto fpp = [](double x) { return -std::sin(x) - 4.5 * std::cos(3.0 * x); };
  double prev_grad = 0.0;
  double prev_lap = 0.0;
  for (std::size_t n : {64u, 128u, 256u, 512u}) {
    Grid1D g(n);
    ScalarField u = ScalarField::sample(g, f);
    ScalarField d = central_gradient(u);
    ScalarField l = discrete_laplacian(u);
    double eg = 0.0;
    double el = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      eg = std::max(eg, std::abs(d[j] - fp(g.x(j))));
      el = std::max(el, std::abs(l[j] - fpp(g.x(j))));
    }
    if (prev_grad > 0.0) {
      EXPECT_GE(prev_grad / eg, 3.5);
      EXPECT_LE(prev_grad / eg, 4.5);
      EXPECT_GE(prev_lap / el, 3.5);
      EXPECT_LE(prev_lap / el, 4.5);
    }
    prev_grad = eg;
    prev_lap = el;
  }
}

TEST(InfNormDiff, Examples) {
  Grid1D g(16);
  ScalarField s = ScalarField::sample(g, [](double x) { return std::sin(x); });
  ScalarField ms = ScalarField::sample(g, [](double x) { return -std::sin(x); });
  EXPECT_EQ(inf_norm_diff(s, s), 0.0);
  EXPECT_EQ(inf_norm_diff(ScalarField::constant(g, 1.0), ScalarField::zeros(g)), 1.0);
  EXPECT_NEAR(inf_norm_diff(s, ms), 2.0, 1e-15);
  EXPECT_THROW(inf_norm_diff(s, ScalarField::zeros(Grid1D(32))), InvalidArgument);
}

TEST(Pendulum, Values) {
  const HamiltonianModel m = pendulum_hamiltonian();
  EXPECT_EQ(m.family(), ModelFamily::pendulum);
  EXPECT_EQ(m.H(0.0, 0.0), 0.0);
  EXPECT_NEAR(m.H(kPi, 0.0), -2.0, 1e-15);
  EXPECT_EQ(m.lagrangian(0.0, 0.0), 0.0);
  EXPECT_EQ(m.dHdp(1.0, 0.7), 0.7);
  EXPECT_EQ(m.d2Hdp2(1.0, 0.7), 1.0);
  EXPECT_NEAR(m.lagrangian(kPi, 2.0), 2.0 + 2.0, 1e-15);
  ASSERT_TRUE(m.critical_value().has_value());
  EXPECT_EQ(*m.critical_value(), 0.0);
}

TEST(Separable, Examples) {
  const HamiltonianModel flat = separable_hamiltonian([](double) { return 0.0; });
  EXPECT_EQ(flat.H(1.3, 3.0), 4.5);
  const HamiltonianModel s = separable_hamiltonian([](double x) { return std::sin(x); });
  EXPECT_NEAR(s.H(kPi / 2.0, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(*s.critical_value(), 1.0, 1e-3);
  const HamiltonianModel p = pendulum_hamiltonian();
  const HamiltonianModel q = separable_hamiltonian([](double x) { return std::cos(x) - 1.0; });
  for (double x : {0.0, 0.4, 2.0, 5.5}) {
    for (double v : {-2.0, 0.0, 0.3}) {
      EXPECT_EQ(p.H(x, v), q.H(x, v));
      EXPECT_EQ(p.dHdp(x, v), q.dHdp(x, v));
      EXPECT_EQ(p.lagrangian(x, v), q.lagrangian(x, v));
    }
  }
}

TEST(Separable, RejectsNonFinitePotential) {
  EXPECT_THROW(separable_hamiltonian([](double x) { return 1.0 / (x - x); }), InvalidArgument);
  Grid1D g(8);
  EXPECT_NO_THROW(separable_hamiltonian(ScalarField::constant(g, 2.0)));
}

TEST(Separable, SampledPotentialIsExactAtNodes) {
  Grid1D g(32);
  ScalarField v = ScalarField::sample(g, [](double x) { return std::sin(2.0 * x); });
  const HamiltonianModel m = separable_hamiltonian(v);
  for (std::size_t j = 0; j < g.n(); ++j) EXPECT_EQ(m.H(g.x(j), 0.0), v[j]);
  const double mid = 0.5 * (g.x(3) + g.x(4));
  EXPECT_NEAR(m.H(mid, 0.0), 0.5 * (v[3] + v[4]), 1e-14);
  EXPECT_NEAR(m.H(kTwoPi - 0.5 * g.h(), 0.0), 0.5 * (v[31] + v[0]), 1e-14);
}

TEST(Legendre, DualityForEveryModel) {
  const HamiltonianModel general = HamiltonianModel::general(
      "quartic", [](double x, double p) { return p * p / 2.0 + p * p * p * p / 12.0 + std::sin(x); },
      [](double, double p) { return p + p * p * p / 3.0; },
      [](double, double p) { return 1.0 + p * p; });
  const std::vector<HamiltonianModel> models = {
      pendulum_hamiltonian(), flat_hamiltonian(),
      separable_hamiltonian([](double x) { return 0.3 * std::cos(2.0 * x); }), general};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.0, kTwoPi);
  std::uniform_real_distribution<double> up(-3.0, 3.0);
  for (const HamiltonianModel& m : models) {
    for (int i = 0; i < 50; ++i) {
      const double x = ux(rng);
      const double p = up(rng);
      const double v = m.dHdp(x, p);
      EXPECT_LE(std::abs(m.lagrangian(x, v) + m.H(x, p) - p * v), 1e-10)
          << m.name() << " x=" << x << " p=" << p;
    }
  }
}

TEST(Convexity, SampledMinimum) {
  EXPECT_EQ(pendulum_hamiltonian().min_convexity(), 1.0);
  const HamiltonianModel general = HamiltonianModel::general(
      "quartic", [](double, double p) { return p * p / 2.0 + p * p * p * p / 12.0; },
      [](double, double p) { return p + p * p * p / 3.0; },
      [](double, double p) { return 1.0 + p * p; });
  EXPECT_NEAR(general.min_convexity(), 1.0, 1e-2);
  EXPECT_NEAR(general.momentum_at_minimum(0.5), 0.0, 1e-8);
}

}  // namespace
}  // namespace hjvisc
