#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gausstv_cli/app.hpp"
#include "gausstv_cli/config.hpp"
#include "gausstv_cli/expression.hpp"

namespace fs = std::filesystem;
using namespace gausstv::cli;

namespace {

double eval(const std::string& text, std::vector<double> x) {
  return Expression::parse(text, static_cast<int>(x.size()))(x);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Workspace : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gausstv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }
  int run_file(const fs::path& p) {
    std::ostringstream log;
    const int code = run(p, log);
    log_ = log.str();
    return code;
  }

  fs::path dir_;
  std::string log_;
};

}  // namespace

TEST(Expression, Arithmetic) {
  EXPECT_DOUBLE_EQ(eval("1 + 2 * 3", {0}), 7.0);
  EXPECT_DOUBLE_EQ(eval("-x^2", {3}), -9.0);
  EXPECT_DOUBLE_EQ(eval("2^3^2", {0}), 512.0);
  EXPECT_DOUBLE_EQ(eval("(x1 - x2) / 2", {5, 1}), 2.0);
  EXPECT_DOUBLE_EQ(eval("r", {3, 4}), 5.0);
  EXPECT_DOUBLE_EQ(eval("pi", {0}), M_PI);
  EXPECT_DOUBLE_EQ(eval("1e-3 * x", {2}), 2e-3);
}

TEST(Expression, Functions) {
  EXPECT_DOUBLE_EQ(eval("abs(x) + sqrt(4)", {-1}), 3.0);
  EXPECT_DOUBLE_EQ(eval("step(x)", {0}), 0.0);
  EXPECT_DOUBLE_EQ(eval("step(x)", {1e-300}), 1.0);
  EXPECT_DOUBLE_EQ(eval("max(1, x, 3)", {5}), 5.0);
  EXPECT_DOUBLE_EQ(eval("min(1, x)", {5}), 1.0);
  EXPECT_DOUBLE_EQ(eval("norm(x1, x2)", {3, 4}), 5.0);
  EXPECT_DOUBLE_EQ(eval("exp(100)", {0}), std::exp(50.0));
  EXPECT_DOUBLE_EQ(eval("pwl(x, 0, 0, 1, 2, 2, 0)", {0.5}), 1.0);
  EXPECT_DOUBLE_EQ(eval("pwl(x, 0, 0, 1, 2, 2, 0)", {3}), -2.0);
  EXPECT_DOUBLE_EQ(eval("pwl(x, 0, 0, 1, 2)", {-1}), -2.0);
}

TEST(Expression, Errors) {
  EXPECT_THROW(Expression::parse("x +", 1), ExpressionError);
  EXPECT_THROW(Expression::parse("foo(x)", 1), ExpressionError);
  EXPECT_THROW(Expression::parse("x2", 1), ExpressionError);
  EXPECT_THROW(Expression::parse("pwl(x, 1, 0, 0, 1)", 1), ExpressionError);
  EXPECT_THROW(Expression::parse("pwl(x, 0, 0, 1)", 1), ExpressionError);
  EXPECT_THROW(Expression::parse("max(x)", 1), ExpressionError);
  EXPECT_THROW(eval("sqrt(x)", {-1}), ExpressionError);
  EXPECT_THROW(eval("1 / x", {0}), ExpressionError);
}

TEST(Config, DefaultsAndParsing) {
  RunConfig c = parse_config("command = certify\nproblem.eps = 0.1  # smoothing\ng.expr = \"abs(x)\"\n");
  EXPECT_EQ(c.command, Command::certify);
  EXPECT_EQ(c.eps, 0.1);
  EXPECT_EQ(*c.g_expr, "abs(x)");
  EXPECT_EQ(c.half_width(), 6.0);
  EXPECT_DOUBLE_EQ(*c.window(), 4.0);
  ASSERT_EQ(c.entries.size(), 3u);
  EXPECT_EQ(c.entries[1].first, "problem.eps");

  RunConfig b = parse_config("command = solve\nproblem.eps = 1\nproblem.R = 2\nproblem.M = 1\nproblem.h = 0.1\ng.expr = 0\n");
  EXPECT_NEAR(b.half_width(), 2.1, 1e-12);
  EXPECT_FALSE(b.window());

  RunConfig s = parse_config("command = sweep\nsweep.param = eps\nsweep.values = 1, 0.5, 0.25\ng.expr = x\n");
  EXPECT_EQ(s.sweep_values, (std::vector<double>{1, 0.5, 0.25}));
}

TEST(Config, ErrorsNameTheKey) {
  auto key_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(key_of("command = solve\nproblem.eps = -1\ng.expr = x\n"), "problem.eps");
  EXPECT_EQ(key_of("command = solve\nproblem.epsilon = 1\ng.expr = x\n"), "problem.epsilon");
  EXPECT_EQ(key_of("command = solve\nproblem.h = 0.1\nproblem.h = 0.2\ng.expr = x\n"), "problem.h");
  EXPECT_EQ(key_of("command = solve\nproblem.h = abc\ng.expr = x\n"), "problem.h");
  EXPECT_EQ(key_of("command = solve\nproblem.m = 3\ng.expr = x\n"), "problem.m");
  EXPECT_EQ(key_of("command = launch\ng.expr = x\n"), "command");
  EXPECT_EQ(key_of("command = solve\ng.expr = x + \n"), "g.expr");
  EXPECT_EQ(key_of("command = solve\nproblem.R = 2\ng.expr = 0\n"), "problem.M");
  EXPECT_EQ(key_of("command = sweep\ng.expr = x\n"), "sweep.param");
  EXPECT_EQ(key_of("problem.eps = 1\ng.expr = x\n"), "command");
  EXPECT_EQ(key_of("command = solve\nproblem.eps = 1\n"), "g.expr");
}

TEST_F(Workspace, SolveWritesOutputsAndIsReproducible) {
  const auto cfg = write("a.cfg",
                         "command = verify\nproblem.eps = 0.1\nproblem.h = 0.02\ng.expr = x^2 + max(x, 0)\n"
                         "seed = 7\noutput.dir = out\n");
  ASSERT_EQ(run_file(cfg), kOk) << log_;
  const std::string csv = slurp(dir_ / "out" / "solution.csv");
  const std::string report = slurp(dir_ / "out" / "report.json");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,u,g,grad_norm,z");
  EXPECT_NE(report.find("gausstv.report/1"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "timing.json"));
  EXPECT_EQ(report.find("seconds"), std::string::npos);

  ASSERT_EQ(run_file(cfg), kOk);
  EXPECT_EQ(slurp(dir_ / "out" / "solution.csv"), csv);
  EXPECT_EQ(slurp(dir_ / "out" / "report.json"), report);
}

TEST_F(Workspace, ExitCodes) {
  EXPECT_EQ(run_file(write("bad.cfg", "command = solve\nproblem.eps = -1\ng.expr = x\n")), kConfigError);
  EXPECT_NE(log_.find("problem.eps"), std::string::npos);
  EXPECT_EQ(run_file(dir_ / "missing.cfg"), kConfigError);
  EXPECT_EQ(run_file(write("nc.cfg", "command = solve\nproblem.eps = 0.01\ng.expr = abs(x)\nsolver.max_iter = 1\noutput.dir = nc\n")),
            kNotConverged);
  EXPECT_TRUE(fs::exists(dir_ / "nc" / "report.json"));
  EXPECT_EQ(run_file(write("cx.cfg", "command = certify\nproblem.model = ou\nproblem.L = 4\nproblem.h = 0.25\n"
                                     "g.expr = -x^2\ncertify.window = 4\noutput.dir = cx\n")),
            kCertificationFailure);
}

TEST_F(Workspace, DataFromFile) {
  write("g.csv", "# node values\n0, 1\n0\n");
  const auto cfg = write("f.cfg", "command = solve\nproblem.L = 1\nproblem.h = 1\nproblem.model = ou\ng.file = g.csv\noutput.dir = f\n");
  EXPECT_EQ(run_file(cfg), kOk) << log_;
  const auto short_file = write("s.cfg", "command = solve\nproblem.L = 2\nproblem.h = 1\nproblem.model = ou\ng.file = g.csv\n");
  EXPECT_EQ(run_file(short_file), kConfigError);
}

TEST_F(Workspace, SweepAndBundle) {
  const auto cfg = write("sw.cfg", "command = sweep\nproblem.h = 0.05\ng.expr = x^2\nsweep.param = lambda\n"
                                   "sweep.values = 1, 4, 16\noutput.dir = sw\n");
  ASSERT_EQ(run_file(cfg), kOk) << log_;
  EXPECT_TRUE(fs::exists(dir_ / "sw" / "solution_002.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "sw" / "sweep.csv"));
  ASSERT_EQ(run_file(write("one.cfg", "command = solve\nproblem.eps = 0.5\nproblem.h = 0.05\ng.expr = x\noutput.dir = one\n")), kOk);

  fs::create_directories(dir_ / "corrupt");
  std::ofstream(dir_ / "corrupt" / "report.json") << "{ not json";
  const std::vector<fs::path> dirs = {dir_ / "one", dir_ / "corrupt", dir_ / "absent", dir_ / "sw"};
  Bundle b = collect_reports(dirs);
  EXPECT_EQ(b.warnings.size(), 2u);
  ASSERT_EQ(b.rows.size(), 4u);
  EXPECT_EQ(*b.rows[3].lambda, 16.0);
  EXPECT_EQ(b.rows[0].command, "solve");
  for (std::size_t k = 1; k < b.rows.size(); ++k) EXPECT_EQ(b.rows[k].command, "sweep");
  std::ostringstream csv;
  write_bundle_csv(csv, b);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);

  Bundle empty = collect_reports({});
  EXPECT_TRUE(empty.rows.empty());
  EXPECT_TRUE(empty.warnings.empty());
}
