#include "gausstv_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "gausstv_cli/expression.hpp"

namespace gausstv::cli {

namespace {

constexpr std::string_view kKeys[] = {
    "command",        "problem.model",  "problem.m",        "problem.L",         "problem.h",
    "problem.eps",    "problem.lambda", "problem.R",        "problem.M",         "g.expr",
    "g.file",         "solver.tol",     "solver.max_iter",  "solver.linear",     "solver.newton",
    "output.dir",     "seed",           "sweep.param",      "sweep.values",      "certify.window",
    "reference.expr", "reference.window", "verify.trials",
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key, fmt::format("expected a finite number, got '{}'", v));
  }
  return out;
}

long long to_integer(const std::string& key, std::string_view v) {
  long long out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw ConfigError(key, fmt::format("expected an integer, got '{}'", v));
  }
  return out;
}

bool to_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, fmt::format("expected true or false, got '{}'", v));
}

std::string one_of(const std::string& key, std::string_view v, std::initializer_list<std::string_view> allowed) {
  for (auto a : allowed) {
    if (v == a) return std::string(v);
  }
  throw ConfigError(key, fmt::format("expected one of {}, got '{}'", fmt::join(allowed, " | "), v));
}

std::vector<double> to_list(const std::string& key, std::string_view v) {
  std::vector<double> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    if (item.empty()) throw ConfigError(key, "empty list entry");
    out.push_back(to_double(key, item));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
  return out;
}

void require_positive(const std::string& key, double v) {
  if (!(v > 0.0)) throw ConfigError(key, fmt::format("must be positive, got {}", v));
}

}  // namespace

const char* to_string(Command c) {
  switch (c) {
    case Command::solve:
      return "solve";
    case Command::verify:
      return "verify";
    case Command::sweep:
      return "sweep";
    case Command::certify:
      break;
  }
  return "certify";
}

std::span<const std::string_view> known_keys() { return kKeys; }

double RunConfig::half_width() const {
  if (L) return *L;
  if (!R) return 6.0;
  // Smallest lattice-aligned box that strictly contains the ball.
  return (std::floor(*R / h + 1e-9) + 1.0) * h;
}

std::optional<double> RunConfig::window() const {
  if (certify_window) return certify_window;
  if (R) return std::nullopt;
  return 2.0 * half_width() / 3.0;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base) {
  RunConfig c;
  std::set<std::string, std::less<>> seen;
  std::optional<std::string> command;
  int line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", fmt::format("line {}: expected 'key = value'", line_no));
    }
    const std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw ConfigError(key, fmt::format("unknown key (line {})", line_no));
    }
    if (!seen.insert(key).second) throw ConfigError(key, fmt::format("repeated key (line {})", line_no));
    if (value.empty()) throw ConfigError(key, "missing value");
    c.entries.emplace_back(key, std::string(value));

    if (key == "command") {
      command = one_of(key, value, {"solve", "verify", "sweep", "certify"});
    } else if (key == "problem.model") {
      c.model = one_of(key, value, {"tv", "ou"});
    } else if (key == "problem.m") {
      const auto m = to_integer(key, value);
      if (m != 1 && m != 2) throw ConfigError(key, "must be 1 or 2");
      c.m = static_cast<int>(m);
    } else if (key == "problem.L") {
      c.L = to_double(key, value);
      require_positive(key, *c.L);
    } else if (key == "problem.h") {
      c.h = to_double(key, value);
      require_positive(key, c.h);
    } else if (key == "problem.eps") {
      c.eps = to_double(key, value);
      if (c.eps < 0.0) throw ConfigError(key, fmt::format("must be non-negative, got {}", value));
    } else if (key == "problem.lambda") {
      c.lambda = to_double(key, value);
      require_positive(key, *c.lambda);
    } else if (key == "problem.R") {
      c.R = to_double(key, value);
      require_positive(key, *c.R);
    } else if (key == "problem.M") {
      c.M = to_double(key, value);
    } else if (key == "g.expr") {
      c.g_expr = std::string(value);
    } else if (key == "g.file") {
      c.g_file = base / std::filesystem::path(std::string(value));
    } else if (key == "solver.tol") {
      c.tol = to_double(key, value);
      require_positive(key, c.tol);
    } else if (key == "solver.max_iter") {
      const auto n = to_integer(key, value);
      if (n < 0 || n > 100000000) throw ConfigError(key, "must lie in [0, 1e8]");
      c.max_iter = static_cast<int>(n);
    } else if (key == "solver.linear") {
      c.linear = one_of(key, value, {"cg", "cholesky"});
    } else if (key == "solver.newton") {
      c.newton = to_bool(key, value);
    } else if (key == "output.dir") {
      c.output_dir = base / std::filesystem::path(std::string(value));
    } else if (key == "seed") {
      const auto s = to_integer(key, value);
      if (s < 0) throw ConfigError(key, "must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "sweep.param") {
      c.sweep_param = one_of(key, value, {"eps", "lambda"});
    } else if (key == "sweep.values") {
      c.sweep_values = to_list(key, value);
    } else if (key == "certify.window") {
      c.certify_window = to_double(key, value);
      require_positive(key, *c.certify_window);
    } else if (key == "reference.expr") {
      c.reference_expr = std::string(value);
    } else if (key == "reference.window") {
      c.reference_window = to_double(key, value);
      require_positive(key, *c.reference_window);
    } else if (key == "verify.trials") {
      const auto n = to_integer(key, value);
      if (n < 1 || n > 1000) throw ConfigError(key, "must lie in [1, 1000]");
      c.verify_trials = static_cast<int>(n);
    }
  }

  if (!command) throw ConfigError("command", "missing");
  c.command = *command == "solve"    ? Command::solve
              : *command == "verify" ? Command::verify
              : *command == "sweep"  ? Command::sweep
                                     : Command::certify;
  if (c.g_expr.has_value() == c.g_file.has_value()) throw ConfigError("g.expr", "give exactly one of g.expr and g.file");
  for (const auto& [key, text] : {std::pair{"g.expr", c.g_expr}, std::pair{"reference.expr", c.reference_expr}}) {
    if (!text) continue;
    try {
      Expression::parse(*text, c.m);
    } catch (const ExpressionError& e) {
      throw ConfigError(key, e.what());
    }
  }
  if (c.R.has_value() != c.M.has_value()) throw ConfigError(c.R ? "problem.M" : "problem.R", "ball problems need both problem.R and problem.M");
  if (c.model == "ou" && (c.R || c.lambda)) throw ConfigError("problem.model", "ou takes neither a ball nor lambda");
  if (c.model == "ou" && c.eps != 0.0) throw ConfigError("problem.eps", "not used by the ou model");
  if (c.R && c.lambda) throw ConfigError("problem.lambda", "not supported on ball problems");
  if (c.R && c.eps == 0.0) throw ConfigError("problem.eps", "ball problems need eps > 0");
  if (c.command == Command::sweep) {
    if (!c.sweep_param) throw ConfigError("sweep.param", "missing for command = sweep");
    if (c.sweep_values.empty()) throw ConfigError("sweep.values", "missing for command = sweep");
    if (c.model == "ou") throw ConfigError("sweep.param", "sweeps need the tv model");
    if (*c.sweep_param == "lambda" && c.R) throw ConfigError("sweep.param", "lambda sweeps need a full-space problem");
    for (double v : c.sweep_values) {
      if (!(v > 0.0)) throw ConfigError("sweep.values", fmt::format("entries must be positive, got {}", v));
    }
    const bool up = c.sweep_values.size() < 2 || c.sweep_values[1] > c.sweep_values[0];
    for (std::size_t k = 1; k < c.sweep_values.size(); ++k) {
      if (up ? !(c.sweep_values[k] > c.sweep_values[k - 1]) : !(c.sweep_values[k] < c.sweep_values[k - 1])) {
        throw ConfigError("sweep.values", "must be strictly monotone");
      }
    }
  } else if (c.sweep_param || !c.sweep_values.empty()) {
    throw ConfigError(c.sweep_param ? "sweep.param" : "sweep.values", "only used by command = sweep");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("", fmt::format("cannot read config '{}'", file.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), file.parent_path());
}

}  // namespace gausstv::cli
