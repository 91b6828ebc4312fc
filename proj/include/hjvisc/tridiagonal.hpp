#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hjvisc {

/// Row j reads sub[j]*x[j-1] + diag[j]*x[j] + super[j]*x[j+1] with indices
/// taken modulo n, so sub[0] and super[n-1] are the periodic corner entries.
struct CyclicTridiagonalMatrix {
  std::vector<double> sub;
  std::vector<double> diag;
  std::vector<double> super;

  explicit CyclicTridiagonalMatrix(std::size_t n = 0)
      : sub(n, 0.0), diag(n, 0.0), super(n, 0.0) {}

  std::size_t size() const { return diag.size(); }

  std::vector<double> multiply(std::span<const double> x) const;

  /// Dense copy, row-major; for small oracles and diagnostics.
  std::vector<double> to_dense() const;
};

/// LU factors of a cyclic tridiagonal matrix, reusable across right-hand
/// sides. The periodic corners are removed by a rank-one update and restored
/// with the Sherman-Morrison formula.
///
/// Throws SolverError when a pivot (or the Sherman-Morrison denominator)
/// vanishes relative to the matrix scale.
class CyclicTridiagonalFactorization {
 public:
  explicit CyclicTridiagonalFactorization(const CyclicTridiagonalMatrix& m);

  std::vector<double> solve(std::span<const double> rhs) const;
  void solve_in_place(std::span<double> x) const;

 private:
  void thomas(std::span<double> x) const;

  std::size_t n_;
  bool cyclic_;
  std::vector<double> lower_;    // multipliers
  std::vector<double> upper_;    // super-diagonal of U, scaled by the pivot inverse
  std::vector<double> pivot_;    // inverse diagonal of U
  std::vector<double> z_;        // A_mod^{-1} u for the rank-one correction
  double v0_ = 0.0;              // v = (1, 0, ..., 0, v_last)
  double vlast_ = 0.0;
  double sm_denominator_ = 1.0;
};

/// Solves m x = rhs; see CyclicTridiagonalFactorization.
std::vector<double> solve_cyclic_tridiagonal(const CyclicTridiagonalMatrix& m,
                                             std::span<const double> rhs);

}  // namespace hjvisc
