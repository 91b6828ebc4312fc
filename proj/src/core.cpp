#include "hjvisc/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <utility>

namespace hjvisc {

Grid1D::Grid1D(std::size_t n, double length) : n_(n), length_(length) {
  if (n < kMinNodes) {
    throw InvalidArgument("Grid1D: need at least " + std::to_string(kMinNodes) +
                          " nodes, got " + std::to_string(n));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw InvalidArgument("Grid1D: length must be finite and positive");
  }
  h_ = length_ / static_cast<double>(n_);
}

double Grid1D::periodic_distance(double a, double b) const {
  double d = std::fmod(std::abs(a - b), length_);
  return std::min(d, length_ - d);
}

std::size_t Grid1D::nearest_index(double x) const {
  double r = std::fmod(x, length_);
  if (r < 0.0) r += length_;
  auto j = static_cast<std::size_t>(std::llround(r / h_));
  return j % n_;
}

std::vector<double> Grid1D::nodes() const {
  std::vector<double> xs(n_);
  for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
  return xs;
}

ScalarField::ScalarField(Grid1D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n()) {
    throw InvalidArgument("ScalarField: " + std::to_string(values_.size()) +
                          " values for a grid of " + std::to_string(grid_.n()) +
                          " nodes");
  }
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!std::isfinite(values_[j])) {
      throw InvalidArgument("ScalarField: non-finite value at node " +
                            std::to_string(j));
    }
  }
}

ScalarField ScalarField::zeros(const Grid1D& grid) { return constant(grid, 0.0); }

ScalarField ScalarField::constant(const Grid1D& grid, double c) {
  return ScalarField(grid, std::vector<double>(grid.n(), c));
}

ScalarField ScalarField::sample(const Grid1D& grid,
                                const std::function<double(double)>& f) {
  std::vector<double> v(grid.n());
  for (std::size_t j = 0; j < grid.n(); ++j) v[j] = f(grid.x(j));
  return ScalarField(grid, std::move(v));
}

double ScalarField::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

double ScalarField::min() const {
  return *std::min_element(values_.begin(), values_.end());
}

ScalarField central_gradient(const ScalarField& u) {
  const Grid1D& g = u.grid();
  const double inv2h = 1.0 / (2.0 * g.h());
  std::vector<double> out(g.n());
  for (std::size_t j = 0; j < g.n(); ++j) {
    out[j] = (u[g.next(j)] - u[g.prev(j)]) * inv2h;
  }
  return ScalarField(g, std::move(out));
}

ScalarField discrete_laplacian(const ScalarField& u) {
  const Grid1D& g = u.grid();
  const double invh2 = 1.0 / (g.h() * g.h());
  std::vector<double> out(g.n());
  for (std::size_t j = 0; j < g.n(); ++j) {
    out[j] = (u[g.next(j)] - 2.0 * u[j] + u[g.prev(j)]) * invh2;
  }
  return ScalarField(g, std::move(out));
}

double inf_norm_diff(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) {
    throw InvalidArgument("inf_norm_diff: fields live on different grids");
  }
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    m = std::max(m, std::abs(a[j] - b[j]));
  }
  return m;
}

namespace {

constexpr double kGoldenTol = 1e-10;

// Smallest bracket [lo, hi] with dHdp(lo) <= v <= dHdp(hi); dHdp is
// increasing in p for Tonelli models.
std::pair<double, double> bracket_momentum(const HamiltonianModel::PointFn& dHdp,
                                           double x, double v) {
  double lo = -1.0;
  double hi = 1.0;
  for (int k = 0; k < 200 && dHdp(x, lo) > v; ++k) lo *= 2.0;
  for (int k = 0; k < 200 && dHdp(x, hi) < v; ++k) hi *= 2.0;
  if (dHdp(x, lo) > v || dHdp(x, hi) < v) {
    throw SolverError("HamiltonianModel: could not bracket the momentum for v=" +
                      std::to_string(v) + " (is H superlinear?)");
  }
  return {lo, hi};
}

}  // namespace

double HamiltonianModel::lagrangian(double x, double v) const {
  if (potential_) return 0.5 * v * v - (*potential_)(x);

  auto [lo, hi] = bracket_momentum(dHdp_, x, v);
  auto g = [&](double p) { return v * p - H_(x, p); };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double gc = g(c);
  double gd = g(d);
  while (b - a > kGoldenTol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (gc > gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - invphi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + invphi * (b - a);
      gd = g(d);
    }
  }
  return std::max({g(a), g(b), g(0.5 * (a + b))});
}

double HamiltonianModel::momentum_at_minimum(double x) const {
  if (potential_) return 0.0;
  auto [lo, hi] = bracket_momentum(dHdp_, x, 0.0);
  // Bisection on the increasing function dHdp(x, .).
  for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++k) {
    double mid = 0.5 * (lo + hi);
    if (dHdp_(x, mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double HamiltonianModel::min_convexity(double length, double p_max,
                                       std::size_t samples) const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    double x = length * static_cast<double>(i) / static_cast<double>(samples);
    for (std::size_t k = 0; k <= samples; ++k) {
      double p = -p_max + 2.0 * p_max * static_cast<double>(k) /
                              static_cast<double>(samples);
      m = std::min(m, d2Hdp2_(x, p));
    }
  }
  return m;
}

HamiltonianModel HamiltonianModel::general(std::string name, PointFn H,
                                           PointFn dHdp, PointFn d2Hdp2) {
  if (!H || !dHdp || !d2Hdp2) {
    throw InvalidArgument("HamiltonianModel::general: all three callables are required");
  }
  HamiltonianModel m;
  m.name_ = std::move(name);
  m.family_ = ModelFamily::general;
  m.H_ = std::move(H);
  m.dHdp_ = std::move(dHdp);
  m.d2Hdp2_ = std::move(d2Hdp2);
  return m;
}

HamiltonianModel pendulum_hamiltonian() {
  HamiltonianModel m = separable_hamiltonian(
      [](double x) { return std::cos(x) - 1.0; }, "pendulum");
  m.family_ = ModelFamily::pendulum;
  m.critical_value_ = 0.0;
  return m;
}

HamiltonianModel separable_hamiltonian(HamiltonianModel::Potential V,
                                       std::string name, double probe_length) {
  if (!V) throw InvalidArgument("separable_hamiltonian: empty potential");
  constexpr std::size_t kProbes = 4096;
  double vmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kProbes; ++i) {
    double x = probe_length * static_cast<double>(i) / kProbes;
    double v = V(x);
    if (!std::isfinite(v)) {
      throw InvalidArgument("separable_hamiltonian: potential is not finite at x=" +
                            std::to_string(x));
    }
    vmax = std::max(vmax, v);
  }

  auto pot = std::make_shared<HamiltonianModel::Potential>(std::move(V));
  HamiltonianModel m;
  m.name_ = std::move(name);
  m.family_ = ModelFamily::separable;
  m.H_ = [pot](double x, double p) { return 0.5 * p * p + (*pot)(x); };
  m.dHdp_ = [](double, double p) { return p; };
  m.d2Hdp2_ = [](double, double) { return 1.0; };
  m.potential_ = [pot](double x) { return (*pot)(x); };
  m.critical_value_ = vmax;
  return m;
}

HamiltonianModel separable_hamiltonian(const ScalarField& V, std::string name) {
  const Grid1D grid = V.grid();
  auto samples = std::make_shared<std::vector<double>>(V.data());
  auto interp = [grid, samples](double x) {
    double r = std::fmod(x, grid.length());
    if (r < 0.0) r += grid.length();
    double s = r / grid.h();
    auto j = static_cast<std::size_t>(std::floor(s));
    double t = s - static_cast<double>(j);
    j %= grid.n();
    // Snap to the node when x is a grid point up to roundoff.
    if (t < 1e-12) return (*samples)[j];
    if (t > 1.0 - 1e-12) return (*samples)[grid.next(j)];
    return (1.0 - t) * (*samples)[j] + t * (*samples)[grid.next(j)];
  };
  return separable_hamiltonian(interp, std::move(name), grid.length())
      .with_critical_value(V.max());
}

HamiltonianModel flat_hamiltonian() {
  HamiltonianModel m = separable_hamiltonian([](double) { return 0.0; }, "flat");
  m.critical_value_ = 0.0;
  return m;
}

}  // namespace hjvisc
