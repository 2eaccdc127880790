#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gausstv/fields.hpp"
#include "gausstv_cli/config.hpp"

namespace gausstv::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kCertificationFailure = 2,
  kNotConverged = 3,
};

inline constexpr const char* kReportSchema = "gausstv.report/1";

/// Runs one configuration. Writes solution/sweep CSVs, report.json and
/// timing.json into the configured output directory; diagnostics go to `log`.
int run(const RunConfig& config, std::ostream& log);

/// Loads the config file first; configuration problems return kConfigError.
int run(const std::filesystem::path& config_file, std::ostream& log);

/// Data field described by g.expr or g.file on `grid`. Files hold one value
/// per node in node order, separated by whitespace or commas.
ScalarField load_data(const RunConfig& config, const GridPtr& grid);

/// Node table with columns x (or x1, x2), u, g, grad_norm, z (or z1, z2);
/// 17 significant digits, LF line endings.
void write_field_csv(std::ostream& out, const ScalarField& u, const ScalarField& g, const VectorField& z);

struct BundleRow {
  std::string command;
  std::string g;
  std::string model;
  double eps = 0.0;
  std::optional<double> lambda;
  double h = 0.0;
  std::size_t nodes = 0;
  bool converged = false;
  int iterations = 0;
  double el_residual = 0.0;
  std::optional<double> energy;
  std::optional<double> gap;
  std::optional<double> reference_error;
  std::string status;
  std::string dir;
};

struct Bundle {
  std::vector<BundleRow> rows;
  std::vector<std::string> warnings;
};

/// Reads <dir>/report.json for every directory. Missing or corrupt reports
/// become warnings. A sweep contributes one row per entry. Rows are ordered by
/// (command, g, eps, lambda, h, dir).
Bundle collect_reports(std::span<const std::filesystem::path> dirs);

void write_bundle_csv(std::ostream& out, const Bundle& bundle);

}  // namespace gausstv::cli
