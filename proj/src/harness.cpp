#include "hjvisc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <thread>

#include "hjvisc/inviscid_solver.hpp"

namespace hjvisc {

std::vector<double> default_lambda_list() {
  std::vector<double> l(10);
  for (std::size_t i = 0; i < l.size(); ++i) {
    l[i] = std::pow(10.0, -1.0 - 2.0 * static_cast<double>(i) / 9.0);
  }
  return l;
}

std::size_t sweep_thread_count(std::size_t requested, std::size_t jobs) {
  std::size_t cap = 0;
  if (const char* env = std::getenv("HJVISC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = static_cast<std::size_t>(v);
  }
  std::size_t t = requested;
  if (t == 0) t = cap > 0 ? cap : std::max(1u, std::thread::hardware_concurrency());
  if (cap > 0) t = std::min(t, cap);
  return std::max<std::size_t>(1, std::min(t, jobs));
}

namespace {

void validate_sweep(double alpha, std::span<const double> lambdas, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("run_sweep: alpha must lie in (0, 1)");
  if (lambdas.empty()) throw InvalidArgument("run_sweep: lambda list is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0 && lambdas[i] < 1.0)) {
      throw InvalidArgument("run_sweep: lambda values must lie in (0, 1)");
    }
    if (i > 0 && !(lambdas[i] < lambdas[i - 1])) {
      throw InvalidArgument("run_sweep: lambda values must decrease");
    }
  }
  if (n % 2 != 0) throw InvalidArgument("run_sweep: n must be even");
}

ScalarField inviscid_solution(const HamiltonianModel& model, double lambda,
                              const ScalarField& viscous, const SweepOptions& opts) {
  const Grid1D& g = viscous.grid();
  if (model.family() == ModelFamily::pendulum && g.length() == kTwoPi) {
    return solve_pendulum_ode(lambda, g.n() / 2);
  }
  double sigma = opts.lf_sigma;
  if (!(sigma > 0.0)) {
    double speed = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j) {
      const double a = (viscous[g.next(j)] - viscous[j]) / g.h();
      speed = std::max(speed, std::abs(model.dHdp(g.x(j), a)));
    }
    sigma = 2.0 * speed + 1.0;
  }
  LaxFriedrichsOptions lf;
  LaxFriedrichsSolution s = solve_discounted_lax_friedrichs(model, lambda, g, sigma, opts.lf_tol, lf);
  if (!s.report.converged) {
    throw SolverError("Lax-Friedrichs did not converge (last update " +
                      std::to_string(s.last_update_inf) + ")");
  }
  return s.u;
}

SweepRecord sweep_point(const HamiltonianModel& model, double alpha, double lambda,
                        const Grid1D& grid, const SweepOptions& opts) {
  const double eps = std::pow(lambda, 1.0 + alpha);
  ViscousSolution v = solve_viscous(model, lambda, eps, grid, opts.viscous);
  if (!v.report.converged) {
    throw SolverError("viscous solve did not converge (residual " +
                      std::to_string(v.report.final_residual_inf) + " after " +
                      std::to_string(v.report.iterations) + " Newton iterations)");
  }
  const ScalarField u = inviscid_solution(model, lambda, v.u, opts);

  SweepRecord r;
  r.lambda = lambda;
  r.epsilon = eps;
  r.h = grid.h();
  r.newton_iters = v.report.iterations;
  r.viscous_report = v.report;
  r.gap_plus = -std::numeric_limits<double>::infinity();
  r.gap_minus = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.n(); ++j) {
    const double d = v.u[j] - u[j];
    r.gap_plus = std::max(r.gap_plus, d);
    r.gap_minus = std::max(r.gap_minus, -d);
  }
  r.sup_diff = std::max(r.gap_plus, r.gap_minus);
  r.diff_at_zero = std::abs(v.u[0] - u[0]);
  r.c_delta_ratio = r.gap_plus * lambda / eps;
  const double lap0 = (v.u[1] - 2.0 * v.u[0] + v.u[grid.n() - 1]) / (grid.h() * grid.h());
  r.zero_point_residual = std::abs(lambda * v.u[0] - eps * lap0);
  return r;
}

}  // namespace

SweepResult run_sweep(const HamiltonianModel& model, double alpha,
                      std::span<const double> lambdas, std::size_t n,
                      const SweepOptions& opts) {
  validate_sweep(alpha, lambdas, n);
  opts.viscous.validate();
  const Grid1D grid(n);

  struct Slot {
    std::optional<SweepRecord> record;
    std::string error;
  };
  std::vector<Slot> slots(lambdas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < lambdas.size(); i = next++) {
      try {
        slots[i].record = sweep_point(model, alpha, lambdas[i], grid, opts);
      } catch (const std::exception& e) {
        slots[i].error = e.what();
      }
    }
  };
  const std::size_t threads = sweep_thread_count(opts.threads, lambdas.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  SweepResult result;
  result.alpha = alpha;
  result.n = n;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].record) {
      result.records.push_back(*slots[i].record);
      if (slots[i].record->sup_diff > 0.0) pts.emplace_back(lambdas[i], slots[i].record->sup_diff);
    } else {
      result.failures.push_back({lambdas[i], slots[i].error});
    }
  }
  if (pts.size() >= 3) result.fit = fit_loglog_slope(pts);
  return result;
}

LogLogFit fit_loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw InvalidArgument("fit_loglog_slope: need at least 3 points");
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
      throw InvalidArgument("fit_loglog_slope: coordinates must be finite and positive");
    }
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  const double k = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_loglog_slope: x values are all equal");
  LogLogFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (f.intercept + f.slope * lx[i]);
    ss_res += e * e;
  }
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return f;
}

namespace {

BoundCheck summarize(std::vector<double> ratios) {
  BoundCheck c;
  c.ratios = std::move(ratios);
  if (c.ratios.empty()) return c;
  c.constant = *std::max_element(c.ratios.begin(), c.ratios.end());
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double r : c.ratios) {
    lo = std::min(lo, std::abs(r));
    hi = std::max(hi, std::abs(r));
  }
  if (hi == 0.0) {
    c.spread = 1.0;
  } else {
    c.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  }
  c.uniform = c.spread <= kBoundSpreadLimit;
  return c;
}

double lower_scale(const SweepRecord& r) {
  return r.epsilon / r.lambda + r.epsilon * std::abs(std::log(r.epsilon));
}

}  // namespace

BoundCheck check_upper_bound(std::span<const SweepRecord> records) {
  std::vector<double> ratios;
  for (const SweepRecord& r : records) ratios.push_back(r.gap_plus * r.lambda / r.epsilon);
  return summarize(std::move(ratios));
}

BoundCheck check_lower_bound(std::span<const SweepRecord> records) {
  std::vector<double> ratios;
  for (const SweepRecord& r : records) ratios.push_back(r.gap_minus / lower_scale(r));
  return summarize(std::move(ratios));
}

bool bounds_envelope_contains(std::span<const SweepRecord> records, double c_up,
                              double c_low) {
  for (const SweepRecord& r : records) {
    if (r.gap_plus > c_up * r.epsilon / r.lambda) return false;
    if (r.gap_minus > c_low * lower_scale(r)) return false;
  }
  return true;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::setprecision(17);
  out << "lambda,epsilon,sup_diff,diff_at_zero,c_delta_ratio,newton_iters\n";
  for (const SweepRecord& r : result.records) {
    out << r.lambda << ',' << r.epsilon << ',' << r.sup_diff << ',' << r.diff_at_zero << ','
        << r.c_delta_ratio << ',' << r.newton_iters << '\n';
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out << "# alpha=" << result.alpha << '\n';
  out << "# fitted_slope=" << (result.fit ? result.fit->slope : nan) << '\n';
  out << "# fitted_intercept=" << (result.fit ? result.fit->intercept : nan) << '\n';
  out << "# r_squared=" << (result.fit ? result.fit->r_squared : nan) << '\n';
  out << "# n=" << result.n << '\n';
  for (const SweepFailure& f : result.failures) {
    out << "# failed_lambda=" << f.lambda << " reason=" << f.message << '\n';
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace hjvisc
