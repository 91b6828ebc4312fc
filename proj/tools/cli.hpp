#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace hjvisc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNotConverged = 2;

/// Everything a run depends on. Keys of the JSON form match the member
/// names; unused members are ignored by commands that do not need them.
struct RunConfig {
  std::string command;
  /// pendulum, flat, or potential (then `potential` holds n samples).
  std::string hamiltonian = "pendulum";
  std::vector<double> potential;
  std::size_t n = 1024;
  double lambda = 0.1;
  /// Empty selects the command default (sweep: 10 log-spaced values in
  /// [1e-3, 1e-1]; ergodic: 1e-2, 5e-3, 2.5e-3).
  std::vector<double> lambda_list;
  double alpha = 0.2;
  double epsilon = 0.05;
  /// Residual tolerance of the solver the command runs.
  double tol = 1e-10;
  int max_newton_iters = 200;
  bool continuation = true;
  /// central or peclet_hybrid
  std::string scheme = "peclet_hybrid";
  /// Inviscid method: auto, ode (pendulum only) or lf.
  std::string method = "auto";
  /// Lax-Friedrichs dissipation bound; 0 derives one from the potential.
  double sigma = 0.0;
  std::size_t x0 = 0;
  /// central or exponential_fitting
  std::string flux = "central";
  /// Adjoint mode: stationary or transient.
  std::string mode = "stationary";
  /// Transient horizon; 0 means 20 / lambda.
  double horizon = 0.0;
  /// Transient step; 0 means the grid spacing.
  double dt = 0.0;
  double delta = 0.01;
  std::size_t threads = 0;
  /// Output path; empty writes to standard output.
  std::string out;

  bool operator==(const RunConfig&) const = default;
};

/// Strict parse: unknown keys, wrong types and negative counts are rejected
/// with InvalidArgument.
RunConfig parse_config(const std::string& json_text);

/// Every member, in declaration order; parse_config inverts it exactly.
std::string dump_config(const RunConfig& cfg);

/// Checks the members `cfg.command` uses; throws InvalidArgument.
void validate(const RunConfig& cfg);

/// Parses argv, runs the subcommand and returns the exit code: 0 success,
/// 1 usage or validation error, 2 solver non-convergence.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hjvisc::cli
