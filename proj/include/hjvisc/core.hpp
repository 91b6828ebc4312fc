#pragma once

#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjvisc {

/// Raised when an input violates an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot produce a trustworthy result
/// (singular systems, negative densities, divergent iterations).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform periodic grid on a circle of circumference `length`.
/// Nodes sit at x_j = j*h, j = 0..n-1; node n coincides with node 0.
class Grid1D {
 public:
  static constexpr std::size_t kMinNodes = 8;

  explicit Grid1D(std::size_t n, double length = kTwoPi);

  std::size_t n() const { return n_; }
  double length() const { return length_; }
  double h() const { return h_; }
  double x(std::size_t j) const { return static_cast<double>(j) * h_; }

  std::size_t next(std::size_t j) const { return j + 1 == n_ ? 0 : j + 1; }
  std::size_t prev(std::size_t j) const { return j == 0 ? n_ - 1 : j - 1; }

  /// Shortest distance between two points on the circle.
  double periodic_distance(double a, double b) const;

  /// Index of the node closest to x (x taken modulo length).
  std::size_t nearest_index(double x) const;

  std::vector<double> nodes() const;

  bool operator==(const Grid1D& other) const {
    return n_ == other.n_ && length_ == other.length_;
  }

 private:
  std::size_t n_;
  double length_;
  double h_;
};

/// Grid-aligned real function. Entries are validated finite on construction.
class ScalarField {
 public:
  ScalarField(Grid1D grid, std::vector<double> values);

  static ScalarField zeros(const Grid1D& grid);
  static ScalarField constant(const Grid1D& grid, double c);
  static ScalarField sample(const Grid1D& grid,
                            const std::function<double(double)>& f);

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& data() const { return values_; }

  double max() const;
  double min() const;

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

/// (u_{j+1} - u_{j-1}) / (2h), periodic.
ScalarField central_gradient(const ScalarField& u);

/// (u_{j+1} - 2u_j + u_{j-1}) / h^2, periodic.
ScalarField discrete_laplacian(const ScalarField& u);

/// max_j |a_j - b_j|. Throws InvalidArgument on grid mismatch.
double inf_norm_diff(const ScalarField& a, const ScalarField& b);

enum class ModelFamily { pendulum, separable, general };

/// A Tonelli Hamiltonian H(x, p) on the circle with analytic p-derivatives
/// and its Legendre dual L(x, v) = sup_p (v p - H(x, p)).
///
/// Separable models H = p^2/2 + V(x) carry the potential and evaluate L in
/// closed form; general models maximize v p - H over p numerically.
class HamiltonianModel {
 public:
  using PointFn = std::function<double(double x, double p)>;
  using Potential = std::function<double(double x)>;

  const std::string& name() const { return name_; }
  ModelFamily family() const { return family_; }

  double H(double x, double p) const { return H_(x, p); }
  double dHdp(double x, double p) const { return dHdp_(x, p); }
  double d2Hdp2(double x, double p) const { return d2Hdp2_(x, p); }
  double lagrangian(double x, double v) const;

  /// argmin_p H(x, p); 0 for separable models.
  double momentum_at_minimum(double x) const;

  /// Potential V for separable models, empty otherwise.
  const std::optional<Potential>& potential() const { return potential_; }

  /// Mañé critical value c(H) when known in closed form (max V for
  /// separable models on the circle).
  std::optional<double> critical_value() const { return critical_value_; }

  /// Smallest sampled d2H/dp2 over x in [0, length), |p| <= p_max.
  double min_convexity(double length = kTwoPi, double p_max = 10.0,
                       std::size_t samples = 64) const;

  static HamiltonianModel general(std::string name, PointFn H, PointFn dHdp,
                                  PointFn d2Hdp2);

  HamiltonianModel with_critical_value(double c) const {
    HamiltonianModel m = *this;
    m.critical_value_ = c;
    return m;
  }

 private:
  friend HamiltonianModel pendulum_hamiltonian();
  friend HamiltonianModel separable_hamiltonian(Potential, std::string, double);
  friend HamiltonianModel flat_hamiltonian();

  HamiltonianModel() = default;

  std::string name_;
  ModelFamily family_ = ModelFamily::general;
  PointFn H_;
  PointFn dHdp_;
  PointFn d2Hdp2_;
  std::optional<Potential> potential_;
  std::optional<double> critical_value_;
};

/// H(x, p) = p^2/2 + cos x - 1.
HamiltonianModel pendulum_hamiltonian();

/// H(x, p) = p^2/2 + V(x). V is sampled on `probe_length` to reject
/// non-finite values and to record max V as the critical value.
HamiltonianModel separable_hamiltonian(HamiltonianModel::Potential V,
                                       std::string name = "separable",
                                       double probe_length = kTwoPi);

/// Separable model whose potential is the periodic piecewise-linear
/// interpolant of grid samples (exact at the nodes).
HamiltonianModel separable_hamiltonian(const ScalarField& V,
                                       std::string name = "separable");

/// V = 0, the flat model whose discounted solutions vanish identically.
HamiltonianModel flat_hamiltonian();

/// Outcome of an iterative solve.
struct SolveReport {
  int iterations = 0;
  double final_residual_inf = 0.0;
  bool converged = false;
  int continuation_steps = 0;
  /// Converged at the floating-point floor of the residual rather than the
  /// requested tolerance; final_residual_inf is then <= residual_floor.
  bool roundoff_limited = false;
  /// 4 * machine epsilon * |u|_inf * |J|_inf at the last Jacobian.
  double residual_floor = 0.0;
};

}  // namespace hjvisc
