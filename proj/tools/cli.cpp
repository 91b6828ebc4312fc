#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hjvisc/adjoint.hpp"
#include "hjvisc/core.hpp"
#include "hjvisc/harness.hpp"
#include "hjvisc/inviscid_solver.hpp"
#include "hjvisc/measures.hpp"
#include "hjvisc/regularize.hpp"
#include "hjvisc/viscous_solver.hpp"

namespace hjvisc::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<std::string> kCommands = {"solve-viscous", "solve-inviscid", "adjoint",
                                            "ergodic",       "supconv",        "sweep"};

[[noreturn]] void bad_key(const std::string& key, const char* expected) {
  throw InvalidArgument("config: key '" + key + "' must be " + expected);
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) bad_key(key, "a string");
  return v.get<std::string>();
}

double as_number(const std::string& key, const json& v) {
  if (!v.is_number()) bad_key(key, "a number");
  return v.get<double>();
}

std::size_t as_count(const std::string& key, const json& v) {
  if (!v.is_number_unsigned()) bad_key(key, "a nonnegative integer");
  return v.get<std::size_t>();
}

int as_int(const std::string& key, const json& v) {
  if (!v.is_number_integer()) bad_key(key, "an integer");
  const auto i = v.get<long long>();
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) {
    bad_key(key, "an integer in range");
  }
  return static_cast<int>(i);
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) bad_key(key, "true or false");
  return v.get<bool>();
}

std::vector<double> as_numbers(const std::string& key, const json& v) {
  if (!v.is_array()) bad_key(key, "an array of numbers");
  std::vector<double> out;
  for (const json& e : v) out.push_back(as_number(key, e));
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

bool positive(double x) { return x > 0.0 && std::isfinite(x); }
bool nonnegative(double x) { return x >= 0.0 && std::isfinite(x); }

bool one_of(const std::string& s, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(), [&](const char* o) { return s == o; });
}

HamiltonianModel make_model(const RunConfig& c) {
  if (c.hamiltonian == "pendulum") return pendulum_hamiltonian();
  if (c.hamiltonian == "flat") return flat_hamiltonian();
  return separable_hamiltonian(ScalarField(Grid1D(c.n), c.potential), "potential");
}

ViscousOptions viscous_options(const RunConfig& c) {
  ViscousOptions o;
  o.tol_residual_inf = c.tol;
  o.max_newton_iters = c.max_newton_iters;
  o.continuation = c.continuation;
  o.scheme = c.scheme == "central" ? GradientScheme::central : GradientScheme::peclet_hybrid;
  return o;
}

AdjointFlux adjoint_flux(const RunConfig& c) {
  return c.flux == "central" ? AdjointFlux::central : AdjointFlux::exponential_fitting;
}

// Output goes to --out when given, else to the caller's stream.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw InvalidArgument("cannot open output file " + path);
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

void write_field(std::ostream& os, const Grid1D& g, std::span<const double> values) {
  os << std::setprecision(17) << "x,value\n";
  for (std::size_t j = 0; j < g.n(); ++j) os << g.x(j) << ',' << values[j] << '\n';
}

void print_report(std::ostream& err, const char* what, const SolveReport& r) {
  err << what << ": " << (r.converged ? "converged" : "did not converge") << " after "
      << r.iterations << " Newton iterations, residual " << std::setprecision(3)
      << std::scientific << r.final_residual_inf << std::defaultfloat
      << ", continuation steps " << r.continuation_steps
      << (r.roundoff_limited ? " (round-off limited)" : "") << '\n';
}

ScalarField inviscid_field(const HamiltonianModel& model, const RunConfig& c) {
  const bool ode = c.method == "ode" || (c.method == "auto" && c.hamiltonian == "pendulum");
  if (ode) return solve_pendulum_ode(c.lambda, c.n / 2);
  const Grid1D g(c.n);
  double sigma = c.sigma;
  if (sigma == 0.0) {
    // lambda |u| <= max|V| bounds |p| by 2 sqrt(max|V|) on the solution.
    double vmax = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j) vmax = std::max(vmax, std::abs(model.H(g.x(j), 0.0)));
    sigma = 4.0 * std::sqrt(vmax) + 1.0;
  }
  LaxFriedrichsSolution s = solve_discounted_lax_friedrichs(model, c.lambda, g, sigma, c.tol);
  if (!s.report.converged) {
    throw SolverError("Lax-Friedrichs did not converge (last update " +
                      std::to_string(s.last_update_inf) + ")");
  }
  return s.u;
}

int cmd_solve_viscous(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Grid1D g(c.n);
  ViscousSolution s = solve_viscous(make_model(c), c.lambda, c.epsilon, g, viscous_options(c));
  Output o(c.out, out);
  write_field(o.get(), g, s.u.values());
  print_report(err, "solve-viscous", s.report);
  return s.report.converged ? kExitOk : kExitNotConverged;
}

int cmd_solve_inviscid(const RunConfig& c, std::ostream& out, std::ostream&) {
  const ScalarField u = inviscid_field(make_model(c), c);
  Output o(c.out, out);
  write_field(o.get(), u.grid(), u.values());
  return kExitOk;
}

int cmd_adjoint(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const HamiltonianModel model = make_model(c);
  const Grid1D g(c.n);
  ViscousSolution s = solve_viscous(model, c.lambda, c.epsilon, g, viscous_options(c));
  print_report(err, "adjoint (viscous solve)", s.report);
  if (!s.report.converged) return kExitNotConverged;
  if (c.mode == "stationary") {
    AdjointSolution a = solve_adjoint_stationary(model, s.u, c.lambda, c.epsilon, c.x0, adjoint_flux(c));
    Output o(c.out, out);
    write_field(o.get(), g, a.theta.values());
    err << "adjoint: mass " << std::setprecision(17) << a.theta.mass() << ", min "
        << a.theta.min() << ", renormalization " << a.renormalization << '\n';
    return kExitOk;
  }
  const double horizon = c.horizon > 0.0 ? c.horizon : 20.0 / c.lambda;
  const double dt = c.dt > 0.0 ? c.dt : g.h();
  FokkerPlanckOptions fp;
  fp.flux = adjoint_flux(c);
  const DensityField theta = discounted_density(adjoint_drift(model, s.u), c.epsilon, c.x0,
                                                c.lambda, horizon, dt,
                                                DiscountQuadrature::implicit_euler, fp);
  Output o(c.out, out);
  write_field(o.get(), g, theta.values());
  err << "adjoint: mass " << std::setprecision(17) << theta.mass() << ", min " << theta.min()
      << '\n';
  return kExitOk;
}

int cmd_ergodic(const RunConfig& c, std::ostream& out, std::ostream&) {
  const std::vector<double> lambdas =
      c.lambda_list.empty() ? std::vector<double>{1e-2, 5e-3, 2.5e-3} : c.lambda_list;
  ErgodicEstimate e = estimate_ergodic_constant(make_model(c), c.epsilon, lambdas, Grid1D(c.n),
                                                c.x0, viscous_options(c));
  out << std::setprecision(17) << "c_eps=" << e.c_eps << '\n';
  if (e.shift_from_critical) out << "shift_from_critical=" << *e.shift_from_critical << '\n';
  if (!c.out.empty()) {
    Output o(c.out, out);
    std::ostream& os = o.get();
    os << std::setprecision(17) << "lambda,lambda_u,newton_iters\n";
    for (std::size_t i = 0; i < e.lambdas.size(); ++i) {
      os << e.lambdas[i] << ',' << e.lambda_u[i] << ',' << e.reports[i].iterations << '\n';
    }
    os << "# c_eps=" << e.c_eps << '\n';
  }
  return kExitOk;
}

int cmd_supconv(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const HamiltonianModel model = make_model(c);
  const ScalarField u = inviscid_field(model, c);
  const ScalarField ud = sup_convolution(u, c.delta);
  Output o(c.out, out);
  write_field(o.get(), ud.grid(), ud.values());
  double lift = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) lift = std::max(lift, ud[j] - u[j]);
  err << std::setprecision(17) << "supconv: max(u_delta - u) " << lift
      << ", subsolution defect " << subsolution_defect(ud, c.lambda, model)
      << ", min second difference " << min_second_difference(ud) << '\n';
  return kExitOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const std::vector<double> lambdas = c.lambda_list.empty() ? default_lambda_list() : c.lambda_list;
  SweepOptions so;
  so.viscous = viscous_options(c);
  so.threads = c.threads;
  so.lf_sigma = c.sigma;
  SweepResult r = run_sweep(make_model(c), c.alpha, lambdas, c.n, so);
  Output o(c.out, out);
  write_sweep_csv(o.get(), r);
  if (r.fit) {
    err << std::setprecision(6) << "sweep: fitted slope " << r.fit->slope << " (r^2 "
        << r.fit->r_squared << ") over " << r.records.size() << " records\n";
  }
  for (const SweepFailure& f : r.failures) {
    err << "sweep: lambda " << f.lambda << " failed: " << f.message << '\n';
  }
  return r.failures.empty() ? kExitOk : kExitNotConverged;
}

int dispatch(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.command == "solve-viscous") return cmd_solve_viscous(c, out, err);
  if (c.command == "solve-inviscid") return cmd_solve_inviscid(c, out, err);
  if (c.command == "adjoint") return cmd_adjoint(c, out, err);
  if (c.command == "ergodic") return cmd_ergodic(c, out, err);
  if (c.command == "supconv") return cmd_supconv(c, out, err);
  return cmd_sweep(c, out, err);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A flag bound to a scratch RunConfig; applied on top of the config file
// only when given on the command line.
struct Binding {
  CLI::Option* option;
  std::function<void(RunConfig&)> apply;
};

class Parser {
 public:
  Parser() : app_("Discounted viscous Hamilton-Jacobi solvers on the circle", "hjvisc") {
    app_.require_subcommand(1);
    app_.fallthrough(false);
    add("solve-viscous", "Newton solve of lambda u + H(x, u') = eps u''",
        {"lambda", "epsilon", "tol", "max-newton-iters", "continuation", "scheme"});
    add("solve-inviscid", "Inviscid discounted solution (pendulum ODE or Lax-Friedrichs)",
        {"lambda", "method", "sigma", "tol"});
    add("adjoint", "Adjoint density of the viscous solution",
        {"lambda", "epsilon", "x0", "flux", "mode", "horizon", "dt", "tol", "max-newton-iters",
         "continuation", "scheme"});
    add("ergodic", "Ergodic constant c(eps) by extrapolating lambda u(x0) to lambda = 0",
        {"epsilon", "lambda-list", "x0", "tol", "max-newton-iters", "continuation", "scheme"});
    add("supconv", "Sup-convolution of the inviscid solution",
        {"lambda", "delta", "method", "sigma", "tol"});
    add("sweep", "Convergence-rate sweep over lambda with eps = lambda^(1 + alpha)",
        {"alpha", "lambda-list", "threads", "sigma", "tol", "max-newton-iters", "continuation",
         "scheme"});
  }

  CLI::App& app() { return app_; }
  const std::string& config_path() const { return config_path_; }
  bool dump() const { return dump_; }

  std::string command() const { return app_.get_subcommands().front()->get_name(); }

  void apply(RunConfig& cfg) const {
    for (const Binding& b : bindings_) {
      if (b.option->count() > 0) b.apply(cfg);
    }
  }

 private:
  template <class T>
  void bind(CLI::App* sub, const std::string& flag, T RunConfig::*member, const std::string& help) {
    CLI::Option* opt = sub->add_option("--" + flag, flags_.*member, help);
    if constexpr (std::is_same_v<T, std::vector<double>>) opt->delimiter(',');
    bindings_.push_back({opt, [this, member](RunConfig& c) { c.*member = flags_.*member; }});
  }

  void add(const std::string& name, const std::string& description,
           std::initializer_list<const char*> extra) {
    CLI::App* sub = app_.add_subcommand(name, description);
    sub->add_option("--config", config_path_, "JSON config file; flags override its values");
    sub->add_flag("--dump-config", dump_, "Print the resolved config as JSON and exit");
    bind(sub, "out", &RunConfig::out, "Output path (default: standard output)");
    bind(sub, "hamiltonian", &RunConfig::hamiltonian, "pendulum, flat or potential");
    bind(sub, "potential", &RunConfig::potential, "Comma-separated V samples on the grid");
    bind(sub, "n", &RunConfig::n, "Grid nodes on [0, 2pi)");
    for (const std::string f : extra) {
      if (f == "lambda") bind(sub, f, &RunConfig::lambda, "Discount factor");
      if (f == "epsilon") bind(sub, f, &RunConfig::epsilon, "Viscosity");
      if (f == "alpha") bind(sub, f, &RunConfig::alpha, "Exponent in eps = lambda^(1 + alpha)");
      if (f == "lambda-list") bind(sub, f, &RunConfig::lambda_list, "Comma-separated decreasing lambda values");
      if (f == "tol") bind(sub, f, &RunConfig::tol, "Residual tolerance");
      if (f == "max-newton-iters") bind(sub, f, &RunConfig::max_newton_iters, "Newton iteration cap");
      if (f == "continuation") bind(sub, f, &RunConfig::continuation, "Viscosity continuation (true/false)");
      if (f == "scheme") bind(sub, f, &RunConfig::scheme, "central or peclet_hybrid");
      if (f == "method") bind(sub, f, &RunConfig::method, "auto, ode or lf");
      if (f == "sigma") bind(sub, f, &RunConfig::sigma, "Lax-Friedrichs dissipation bound (0 = auto)");
      if (f == "x0") bind(sub, f, &RunConfig::x0, "Grid index of the base point");
      if (f == "flux") bind(sub, f, &RunConfig::flux, "central or exponential_fitting");
      if (f == "mode") bind(sub, f, &RunConfig::mode, "stationary or transient");
      if (f == "horizon") bind(sub, f, &RunConfig::horizon, "Transient horizon (0 = 20/lambda)");
      if (f == "dt") bind(sub, f, &RunConfig::dt, "Transient time step (0 = h)");
      if (f == "delta") bind(sub, f, &RunConfig::delta, "Sup-convolution parameter");
      if (f == "threads") bind(sub, f, &RunConfig::threads, "Worker threads (0 = auto)");
    }
  }

  CLI::App app_;
  RunConfig flags_;
  std::string config_path_;
  bool dump_ = false;
  std::vector<Binding> bindings_;
};

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "command") c.command = as_string(key, v);
    else if (key == "hamiltonian") c.hamiltonian = as_string(key, v);
    else if (key == "potential") c.potential = as_numbers(key, v);
    else if (key == "n") c.n = as_count(key, v);
    else if (key == "lambda") c.lambda = as_number(key, v);
    else if (key == "lambda_list") c.lambda_list = as_numbers(key, v);
    else if (key == "alpha") c.alpha = as_number(key, v);
    else if (key == "epsilon") c.epsilon = as_number(key, v);
    else if (key == "tol") c.tol = as_number(key, v);
    else if (key == "max_newton_iters") c.max_newton_iters = as_int(key, v);
    else if (key == "continuation") c.continuation = as_bool(key, v);
    else if (key == "scheme") c.scheme = as_string(key, v);
    else if (key == "method") c.method = as_string(key, v);
    else if (key == "sigma") c.sigma = as_number(key, v);
    else if (key == "x0") c.x0 = as_count(key, v);
    else if (key == "flux") c.flux = as_string(key, v);
    else if (key == "mode") c.mode = as_string(key, v);
    else if (key == "horizon") c.horizon = as_number(key, v);
    else if (key == "dt") c.dt = as_number(key, v);
    else if (key == "delta") c.delta = as_number(key, v);
    else if (key == "threads") c.threads = as_count(key, v);
    else if (key == "out") c.out = as_string(key, v);
    else throw InvalidArgument("config: unknown key '" + key + "'");
  }
  return c;
}

std::string dump_config(const RunConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  j["hamiltonian"] = c.hamiltonian;
  j["potential"] = c.potential;
  j["n"] = c.n;
  j["lambda"] = c.lambda;
  j["lambda_list"] = c.lambda_list;
  j["alpha"] = c.alpha;
  j["epsilon"] = c.epsilon;
  j["tol"] = c.tol;
  j["max_newton_iters"] = c.max_newton_iters;
  j["continuation"] = c.continuation;
  j["scheme"] = c.scheme;
  j["method"] = c.method;
  j["sigma"] = c.sigma;
  j["x0"] = c.x0;
  j["flux"] = c.flux;
  j["mode"] = c.mode;
  j["horizon"] = c.horizon;
  j["dt"] = c.dt;
  j["delta"] = c.delta;
  j["threads"] = c.threads;
  j["out"] = c.out;
  return j.dump(2);
}

void validate(const RunConfig& c) {
  require(std::find(kCommands.begin(), kCommands.end(), c.command) != kCommands.end(),
          "unknown command '" + c.command + "'");
  require(one_of(c.hamiltonian, {"pendulum", "flat", "potential"}),
          "hamiltonian must be pendulum, flat or potential");
  require(c.n >= Grid1D::kMinNodes && c.n % 2 == 0, "n must be an even integer >= 8");
  if (c.hamiltonian == "potential") {
    require(c.potential.size() == c.n, "potential needs exactly n = " + std::to_string(c.n) +
                                           " samples, got " + std::to_string(c.potential.size()));
    for (double v : c.potential) require(std::isfinite(v), "potential samples must be finite");
  } else {
    require(c.potential.empty(), "potential samples need hamiltonian = potential");
  }
  require(positive(c.tol), "tol must be > 0");
  require(c.max_newton_iters >= 1, "max_newton_iters must be >= 1");
  require(one_of(c.scheme, {"central", "peclet_hybrid"}), "scheme must be central or peclet_hybrid");
  require(one_of(c.method, {"auto", "ode", "lf"}), "method must be auto, ode or lf");
  require(c.method != "ode" || c.hamiltonian == "pendulum", "method ode needs the pendulum");
  require(nonnegative(c.sigma), "sigma must be >= 0");
  require(c.x0 < c.n, "x0 must be a grid index below n");
  require(one_of(c.flux, {"central", "exponential_fitting"}),
          "flux must be central or exponential_fitting");
  require(one_of(c.mode, {"stationary", "transient"}), "mode must be stationary or transient");
  require(nonnegative(c.horizon), "horizon must be >= 0");
  require(nonnegative(c.dt), "dt must be >= 0");
  for (double l : c.lambda_list) require(positive(l) && l < 1.0, "lambda_list values must lie in (0, 1)");

  const std::string& k = c.command;
  if (k != "ergodic" && k != "sweep") require(positive(c.lambda), "lambda must be > 0");
  if (k == "solve-viscous" || k == "adjoint" || k == "ergodic") {
    require(positive(c.epsilon), "epsilon must be > 0");
  }
  if (k == "supconv") require(positive(c.delta), "delta must be > 0");
  if (k == "sweep") require(c.alpha > 0.0 && c.alpha < 1.0, "alpha must lie in (0, 1)");
  if (k == "ergodic" && !c.lambda_list.empty()) {
    require(c.lambda_list.size() >= 3, "ergodic needs at least 3 lambda values");
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Parser parser;
  CLI::App& app = parser.app();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << app.help();
    return kExitInvalid;
  }
  try {
    RunConfig cfg;
    if (!parser.config_path().empty()) cfg = parse_config(read_file(parser.config_path()));
    const std::string command = parser.command();
    require(cfg.command.empty() || cfg.command == command,
            "config is for '" + cfg.command + "', not '" + command + "'");
    cfg.command = command;
    parser.apply(cfg);
    validate(cfg);
    if (parser.dump()) {
      out << dump_config(cfg) << '\n';
      return kExitOk;
    }
    return dispatch(cfg, out, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace hjvisc::cli
