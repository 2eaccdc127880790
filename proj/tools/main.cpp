#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "gausstv_cli/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gaussian total variation solver and certificate runner"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "run one configuration file");
  run->add_option("config", config, "key = value configuration")->required();

  std::vector<std::string> dirs;
  std::string output;
  auto* bundle = app.add_subcommand("bundle", "aggregate run directories into one CSV table");
  bundle->add_option("dirs", dirs, "run output directories");
  bundle->add_option("-o,--output", output, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : gausstv::cli::kConfigError;
  }

  if (*run) return gausstv::cli::run(std::filesystem::path(config), std::cerr);

  std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
  const auto table = gausstv::cli::collect_reports(paths);
  for (const auto& w : table.warnings) std::cerr << "warning: " << w << '\n';
  if (output.empty()) {
    gausstv::cli::write_bundle_csv(std::cout, table);
    return 0;
  }
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "cannot write " << output << '\n';
    return gausstv::cli::kConfigError;
  }
  gausstv::cli::write_bundle_csv(out, table);
  return 0;
}
