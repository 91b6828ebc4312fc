#include "hjvisc/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hjvisc/core.hpp"

namespace hjvisc {

std::vector<double> CyclicTridiagonalMatrix::multiply(std::span<const double> x) const {
  const std::size_t n = size();
  if (x.size() != n) throw InvalidArgument("CyclicTridiagonalMatrix::multiply: size mismatch");
  std::vector<double> y(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t jm = j == 0 ? n - 1 : j - 1;
    std::size_t jp = j + 1 == n ? 0 : j + 1;
    y[j] = sub[j] * x[jm] + diag[j] * x[j] + super[j] * x[jp];
  }
  return y;
}

std::vector<double> CyclicTridiagonalMatrix::to_dense() const {
  const std::size_t n = size();
  std::vector<double> a(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t jm = j == 0 ? n - 1 : j - 1;
    std::size_t jp = j + 1 == n ? 0 : j + 1;
    a[j * n + jm] += sub[j];
    a[j * n + j] += diag[j];
    a[j * n + jp] += super[j];
  }
  return a;
}

namespace {

constexpr double kPivotTol = 1e-13;

double matrix_scale(const CyclicTridiagonalMatrix& m) {
  double s = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) {
    s = std::max(s, std::abs(m.sub[j]) + std::abs(m.diag[j]) + std::abs(m.super[j]));
  }
  return s;
}

}  // namespace

CyclicTridiagonalFactorization::CyclicTridiagonalFactorization(
    const CyclicTridiagonalMatrix& m)
    : n_(m.size()) {
  if (n_ < 3) throw InvalidArgument("cyclic tridiagonal solve needs n >= 3");
  if (m.sub.size() != n_ || m.super.size() != n_) {
    throw InvalidArgument("cyclic tridiagonal matrix has ragged bands");
  }
  const double scale = matrix_scale(m);
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw SolverError("cyclic tridiagonal matrix is zero or non-finite");
  }
  const double corner_lo = m.sub[0];        // A(0, n-1)
  const double corner_hi = m.super[n_ - 1]; // A(n-1, 0)
  cyclic_ = corner_lo != 0.0 || corner_hi != 0.0;

  // A = A_mod + u v^T with u = (gamma, 0.., corner_hi), v = (1, 0.., corner_lo/gamma).
  std::vector<double> d = m.diag;
  double gamma = 0.0;
  if (cyclic_) {
    gamma = m.diag[0] != 0.0 ? -m.diag[0] : -scale;
    d[0] -= gamma;
    d[n_ - 1] -= corner_hi * corner_lo / gamma;
    v0_ = 1.0;
    vlast_ = corner_lo / gamma;
  }

  lower_.assign(n_, 0.0);
  upper_.assign(n_, 0.0);
  pivot_.assign(n_, 0.0);
  pivot_[0] = d[0];
  for (std::size_t j = 0; j < n_; ++j) {
    if (j > 0) {
      lower_[j] = m.sub[j] / pivot_[j - 1];
      pivot_[j] = d[j] - lower_[j] * upper_[j - 1];
    }
    if (std::abs(pivot_[j]) <= kPivotTol * scale || !std::isfinite(pivot_[j])) {
      throw SolverError("cyclic tridiagonal solve: near-singular pivot " +
                        std::to_string(pivot_[j]) + " at row " + std::to_string(j));
    }
    upper_[j] = j + 1 < n_ ? m.super[j] : 0.0;
  }
  for (std::size_t j = 0; j < n_; ++j) {
    pivot_[j] = 1.0 / pivot_[j];
    upper_[j] *= pivot_[j];
  }

  if (cyclic_) {
    z_.assign(n_, 0.0);
    z_[0] = gamma;
    z_[n_ - 1] = corner_hi;
    thomas(z_);
    sm_denominator_ = 1.0 + v0_ * z_[0] + vlast_ * z_[n_ - 1];
    double size = 1.0 + std::abs(v0_ * z_[0]) + std::abs(vlast_ * z_[n_ - 1]);
    if (std::abs(sm_denominator_) <= 1e-11 * size || !std::isfinite(sm_denominator_)) {
      throw SolverError(
          "cyclic tridiagonal solve: matrix is singular (Sherman-Morrison "
          "denominator " + std::to_string(sm_denominator_) + ")");
    }
  }
}

void CyclicTridiagonalFactorization::thomas(std::span<double> x) const {
  for (std::size_t j = 1; j < n_; ++j) x[j] -= lower_[j] * x[j - 1];
  x[n_ - 1] *= pivot_[n_ - 1];
  for (std::size_t j = n_ - 1; j-- > 0;) {
    x[j] = x[j] * pivot_[j] - upper_[j] * x[j + 1];
  }
}

void CyclicTridiagonalFactorization::solve_in_place(std::span<double> x) const {
  if (x.size() != n_) throw InvalidArgument("cyclic tridiagonal solve: rhs size mismatch");
  thomas(x);
  if (cyclic_) {
    double f = (v0_ * x[0] + vlast_ * x[n_ - 1]) / sm_denominator_;
    for (std::size_t j = 0; j < n_; ++j) x[j] -= f * z_[j];
  }
}

std::vector<double> CyclicTridiagonalFactorization::solve(std::span<const double> rhs) const {
  std::vector<double> x(rhs.begin(), rhs.end());
  solve_in_place(x);
  return x;
}

std::vector<double> solve_cyclic_tridiagonal(const CyclicTridiagonalMatrix& m,
                                             std::span<const double> rhs) {
  return CyclicTridiagonalFactorization(m).solve(rhs);
}

}  // namespace hjvisc
