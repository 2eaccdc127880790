#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gausstv::cli {

/// A configuration problem; `key` names the offending entry when there is one.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class Command { solve, verify, sweep, certify };

const char* to_string(Command c);

struct RunConfig {
  Command command = Command::solve;

  std::string model = "tv";  // tv | ou
  int m = 1;
  std::optional<double> L;  // box half width; defaults to 6, or just beyond R
  double h = 0.01;
  double eps = 0.0;
  std::optional<double> lambda;
  std::optional<double> R;  // ball radius
  std::optional<double> M;  // ball boundary level

  std::optional<std::string> g_expr;
  std::optional<std::filesystem::path> g_file;

  double tol = 1e-8;
  int max_iter = 0;
  std::string linear = "cg";  // cg | cholesky
  bool newton = true;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;

  std::optional<std::string> sweep_param;  // eps | lambda
  std::vector<double> sweep_values;

  std::optional<double> certify_window;
  std::optional<std::string> reference_expr;
  std::optional<double> reference_window;
  int verify_trials = 4;

  /// Entries exactly as read, in file order.
  std::vector<std::pair<std::string, std::string>> entries;

  double half_width() const;
  /// Window used by certificates and reference errors: certify.window, else
  /// two thirds of the box for full-space problems, else the whole grid.
  std::optional<double> window() const;
};

/// Parses `key = value` lines; '#' starts a comment. Relative paths resolve
/// against `base`. Unknown or repeated keys and invalid values throw.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base = {});

RunConfig load_config(const std::filesystem::path& file);

/// Every accepted key, for documentation and error hints.
std::span<const std::string_view> known_keys();

}  // namespace gausstv::cli
