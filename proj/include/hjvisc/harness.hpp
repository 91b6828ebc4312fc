#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hjvisc/core.hpp"
#include "hjvisc/viscous_solver.hpp"

namespace hjvisc {

/// One (lambda, eps = lambda^{1+alpha}) experiment.
struct SweepRecord {
  double lambda = 0.0;
  double epsilon = 0.0;
  /// max_j |u^eps_j - u_j|
  double sup_diff = 0.0;
  /// |u^eps(0) - u(0)|
  double diff_at_zero = 0.0;
  /// max_j (u^eps - u)_j * lambda / eps
  double c_delta_ratio = 0.0;
  int newton_iters = 0;

  /// max_j (u^eps - u)_j
  double gap_plus = 0.0;
  /// max_j (u - u^eps)_j; negative when u^eps lies strictly above u.
  double gap_minus = 0.0;
  /// |lambda u^eps(0) - eps Lap_h u^eps(0)|
  double zero_point_residual = 0.0;
  double h = 0.0;
  SolveReport viscous_report;
};

struct SweepFailure {
  double lambda = 0.0;
  std::string message;
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<SweepFailure> failures;
  double alpha = 0.0;
  std::size_t n = 0;
  /// Empty when fewer than 3 records have sup_diff > 0.
  std::optional<LogLogFit> fit;
};

struct SweepOptions {
  ViscousOptions viscous;
  /// Worker threads; 0 means HJVISC_THREADS if set to a positive integer,
  /// else the hardware concurrency. HJVISC_THREADS also caps explicit counts.
  std::size_t threads = 0;
  /// Lax-Friedrichs settings for models without a closed-form inviscid
  /// solver. sigma <= 0 picks 2 max|dH/dp| over the viscous solution + 1.
  double lf_sigma = 0.0;
  double lf_tol = 1e-10;
};

/// 10 values log-spaced from 1e-1 down to 1e-3.
std::vector<double> default_lambda_list();

/// Worker count for `requested` threads (0 = hardware) and `jobs` tasks.
std::size_t sweep_thread_count(std::size_t requested, std::size_t jobs);

/// For each lambda: solves the periodic viscous problem with eps =
/// lambda^{1+alpha} and the inviscid problem on the same grid (RK4 branch
/// ODE for the pendulum, Lax-Friedrichs otherwise), then fits
/// log sup_diff against log lambda. Records keep the order of `lambdas`
/// whatever the thread count; failed solves are listed in `failures`.
SweepResult run_sweep(const HamiltonianModel& model, double alpha,
                      std::span<const double> lambdas, std::size_t n,
                      const SweepOptions& opts = {});

/// Least squares line through (log x, log y); needs >= 3 points with
/// positive coordinates.
LogLogFit fit_loglog_slope(std::span<const std::pair<double, double>> points);

/// Constant of a one-sided bound fitted over a sweep.
struct BoundCheck {
  /// Largest per-record ratio (signed).
  double constant = 0.0;
  /// max |ratio| / min |ratio|; 1 when every ratio is zero.
  double spread = 1.0;
  /// spread <= 5
  bool uniform = true;
  std::vector<double> ratios;
};

inline constexpr double kBoundSpreadLimit = 5.0;

/// Ratios gap_plus * lambda / eps.
BoundCheck check_upper_bound(std::span<const SweepRecord> records);

/// Ratios gap_minus / (eps / lambda + eps |log eps|).
BoundCheck check_lower_bound(std::span<const SweepRecord> records);

/// Whether -c_low (eps/lambda + eps|log eps|) <= u^eps - u <= c_up eps/lambda
/// holds for every record.
bool bounds_envelope_contains(std::span<const SweepRecord> records, double c_up,
                              double c_low);

/// Header, one row per record, and '#'-prefixed summary lines; 17
/// significant digits throughout.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace hjvisc
