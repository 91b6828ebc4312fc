#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "hjvisc/core.hpp"
#include "hjvisc/viscous_solver.hpp"

namespace hjvisc::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "hjvisc");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::path(::testing::TempDir()) / ("hjvisc_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::pair<double, double>> read_field(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,value");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  return rows;
}

TEST(Cli, UsageErrorsExitOne) {
  Result none = call({});
  EXPECT_EQ(none.code, kExitInvalid);
  EXPECT_NE(none.err.find("Usage"), std::string::npos);
  EXPECT_EQ(call({"frobnicate"}).code, kExitInvalid);
  Result flag = call({"sweep", "--bogus"});
  EXPECT_EQ(flag.code, kExitInvalid);
  EXPECT_NE(flag.err.find("--bogus"), std::string::npos);
  EXPECT_EQ(call({"solve-viscous", "--lambda", "abc"}).code, kExitInvalid);
  EXPECT_EQ(call({"solve-viscous", "--alpha", "0.3"}).code, kExitInvalid);
}

TEST(Cli, HelpExitsZero) {
  Result r = call({"sweep", "--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("--alpha"), std::string::npos);
}

TEST(Cli, ValidationErrorsExitOne) {
  EXPECT_EQ(call({"solve-viscous", "--lambda", "0"}).code, kExitInvalid);
  EXPECT_EQ(call({"solve-viscous", "--epsilon", "-1"}).code, kExitInvalid);
  EXPECT_EQ(call({"solve-viscous", "--n", "7"}).code, kExitInvalid);
  EXPECT_EQ(call({"solve-viscous", "--scheme", "upwind"}).code, kExitInvalid);
  EXPECT_EQ(call({"sweep", "--alpha", "1.5"}).code, kExitInvalid);
  EXPECT_EQ(call({"solve-inviscid", "--hamiltonian", "flat", "--method", "ode"}).code, kExitInvalid);
  EXPECT_EQ(call({"solve-inviscid", "--hamiltonian", "potential", "--n", "8", "--potential",
                  "0,1,2"}).code,
            kExitInvalid);
  EXPECT_EQ(call({"adjoint", "--n", "64", "--x0", "64"}).code, kExitInvalid);
  EXPECT_EQ(call({"ergodic", "--lambda-list", "0.01,0.005"}).code, kExitInvalid);
  EXPECT_EQ(call({"sweep", "--config", temp_path("missing.json")}).code, kExitInvalid);
}

TEST(Cli, ErgodicFlatIsZero) {
  Result r = call({"ergodic", "--hamiltonian", "flat", "--epsilon", "0.1", "--n", "128"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  ASSERT_EQ(r.out.rfind("c_eps=", 0), 0u);
  EXPECT_LE(std::abs(std::stod(r.out.substr(6))), 1e-8);
}

TEST(Cli, SolveViscousWritesTheLibrarySolution) {
  const std::string path = temp_path("u.csv");
  Result r = call({"solve-viscous", "--hamiltonian", "pendulum", "--lambda", "0.1", "--epsilon",
                   "0.0631", "--n", "1024", "--out", path});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = read_field(slurp(path));
  ASSERT_EQ(rows.size(), 1024u);
  const Grid1D g(1024);
  ViscousSolution s = solve_viscous(pendulum_hamiltonian(), 0.1, 0.0631, g);
  for (std::size_t j = 0; j < g.n(); ++j) {
    EXPECT_EQ(rows[j].first, g.x(j));
    EXPECT_EQ(rows[j].second, s.u[j]);
  }
}

TEST(Cli, NonConvergenceExitsTwo) {
  Result r = call({"solve-viscous", "--lambda", "0.001", "--epsilon", "1e-7", "--n", "4096",
                   "--max-newton-iters", "2", "--continuation", "false"});
  EXPECT_EQ(r.code, kExitNotConverged);
  EXPECT_NE(r.err.find("did not converge"), std::string::npos);
  EXPECT_EQ(call({"solve-inviscid", "--lambda", "2"}).code, kExitNotConverged);
}

TEST(Cli, DumpConfigRoundTrips) {
  Result a = call({"adjoint", "--lambda", "0.02", "--epsilon", "0.03", "--n", "256", "--x0", "17",
                   "--flux", "exponential_fitting", "--mode", "transient", "--tol", "1e-11",
                   "--dump-config"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  const RunConfig cfg = parse_config(a.out);
  EXPECT_EQ(cfg.command, "adjoint");
  EXPECT_EQ(cfg.x0, 17u);
  EXPECT_EQ(cfg.tol, 1e-11);
  EXPECT_EQ(parse_config(dump_config(cfg)), cfg);

  const std::string path = temp_path("cfg.json");
  std::ofstream(path) << a.out;
  Result b = call({"adjoint", "--config", path, "--dump-config"});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  EXPECT_EQ(b.out, a.out);
  EXPECT_NE(call({"sweep", "--config", path}).code, kExitOk);
}

TEST(Cli, ConfigRunMatchesFlagRun) {
  const std::vector<std::string> flags = {"supconv", "--lambda", "0.05", "--delta", "0.02",
                                          "--n", "256"};
  Result direct = call(flags);
  ASSERT_EQ(direct.code, kExitOk) << direct.err;
  std::vector<std::string> dump = flags;
  dump.push_back("--dump-config");
  const std::string path = temp_path("supconv.json");
  std::ofstream(path) << call(dump).out;
  Result via = call({"supconv", "--config", path});
  ASSERT_EQ(via.code, kExitOk) << via.err;
  EXPECT_EQ(via.out, direct.out);
  EXPECT_EQ(via.err, direct.err);
}

TEST(Cli, FlagsOverrideConfig) {
  const std::string path = temp_path("override.json");
  std::ofstream(path) << R"({"n": 64, "lambda": 0.3, "epsilon": 0.2})";
  Result r = call({"solve-viscous", "--config", path, "--lambda", "0.1", "--dump-config"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const RunConfig c = parse_config(r.out);
  EXPECT_EQ(c.n, 64u);
  EXPECT_EQ(c.lambda, 0.1);
  EXPECT_EQ(c.epsilon, 0.2);
}

TEST(Config, StrictParsing) {
  EXPECT_THROW(parse_config(R"({"n": 64, "colour": "red"})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"n": -64})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"n": 64.0})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"lambda": "0.1"})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"continuation": 1})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"lambda_list": [0.1, "x"]})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"([1, 2])"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"n": 64,})"), InvalidArgument);
  const RunConfig c = parse_config(R"({"hamiltonian": "flat", "lambda_list": [0.1, 0.01, 0.001]})");
  EXPECT_EQ(c.hamiltonian, "flat");
  EXPECT_EQ(c.lambda_list.size(), 3u);
  EXPECT_EQ(c.n, RunConfig{}.n);
}

TEST(Config, ValidateChecksCommandFields) {
  RunConfig c;
  c.command = "sweep";
  EXPECT_NO_THROW(validate(c));
  c.alpha = 0.0;
  EXPECT_THROW(validate(c), InvalidArgument);
  c = {};
  EXPECT_THROW(validate(c), InvalidArgument);
  c.command = "supconv";
  c.delta = 0.0;
  EXPECT_THROW(validate(c), InvalidArgument);
  c = {};
  c.command = "solve-viscous";
  c.potential = {1.0};
  EXPECT_THROW(validate(c), InvalidArgument);
}

TEST(Cli, InlinePotential) {
  // V = cos x - 1 sampled on the grid reproduces the pendulum at the nodes.
  const std::size_t n = 64;
  const Grid1D g(n);
  std::string samples;
  for (std::size_t j = 0; j < n; ++j) {
    std::ostringstream s;
    s.precision(17);
    s << std::cos(g.x(j)) - 1.0;
    samples += (j ? "," : "") + s.str();
  }
  Result a = call({"solve-viscous", "--hamiltonian", "potential", "--potential", samples, "--n", "64",
                   "--lambda", "0.1", "--epsilon", "0.1"});
  Result b = call({"solve-viscous", "--n", "64", "--lambda", "0.1", "--epsilon", "0.1"});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  ASSERT_EQ(b.code, kExitOk) << b.err;
  const auto ra = read_field(a.out);
  const auto rb = read_field(b.out);
  for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(ra[j].second, rb[j].second, 1e-12);
  Result lf = call({"solve-inviscid", "--hamiltonian", "potential", "--potential", samples, "--n",
                    "64", "--lambda", "0.1"});
  EXPECT_EQ(lf.code, kExitOk) << lf.err;
}

TEST(Cli, AdjointDensitiesHaveUnitMass) {
  for (const char* mode : {"stationary", "transient"}) {
    Result r = call({"adjoint", "--n", "128", "--lambda", "0.2", "--epsilon", "0.1", "--mode", mode});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto rows = read_field(r.out);
    ASSERT_EQ(rows.size(), 128u);
    double mass = 0.0;
    for (const auto& [x, v] : rows) {
      EXPECT_GE(v, -1e-12);
      mass += v * Grid1D(128).h();
    }
    EXPECT_NEAR(mass, 1.0, 1e-8) << mode;
  }
}

TEST(Cli, SweepCsv) {
  const std::string path = temp_path("sweep.csv");
  Result r = call({"sweep", "--alpha", "0.6", "--n", "256", "--lambda-list", "0.1,0.05,0.02",
                   "--threads", "2", "--out", path});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream in(slurp(path));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "lambda,epsilon,sup_diff,diff_at_zero,c_delta_ratio,newton_iters");
  int rows = 0;
  int comments = 0;
  while (std::getline(in, line)) (line.rfind("#", 0) == 0 ? comments : rows)++;
  EXPECT_EQ(rows, 3);
  EXPECT_GE(comments, 3);
  Result again = call({"sweep", "--alpha", "0.6", "--n", "256", "--lambda-list", "0.1,0.05,0.02",
                       "--threads", "1"});
  EXPECT_EQ(again.out, slurp(path));
}

}  // namespace
}  // namespace hjvisc::cli
