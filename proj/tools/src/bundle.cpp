#include <algorithm>
#include <fstream>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gausstv_cli/app.hpp"

namespace gausstv::cli {

namespace {

using json = nlohmann::json;

std::optional<double> number_at(const json& j, std::initializer_list<const char*> path) {
  const json* node = &j;
  for (const char* key : path) {
    if (!node->is_object() || !node->contains(key)) return std::nullopt;
    node = &(*node)[key];
  }
  if (!node->is_number()) return std::nullopt;
  return node->get<double>();
}

void fill_solve(BundleRow& row, const json& s) {
  row.converged = s.at("converged").get<bool>();
  row.iterations = s.at("iterations").get<int>();
  row.el_residual = s.at("el_residual").get<double>();
  if (s.contains("energy") && s["energy"].is_number()) row.energy = s["energy"].get<double>();
}

// One row per run, or per entry for sweeps (keyed by the swept value).
void append_rows(const json& report, const std::string& dir, std::vector<BundleRow>& rows) {
  if (!report.is_object() || report.value("schema", "") != kReportSchema) {
    throw std::runtime_error("missing or unsupported schema");
  }
  const json& r = report.at("resolved");
  BundleRow row;
  row.command = report.at("command").get<std::string>();
  row.g = r.at("g").get<std::string>();
  row.model = r.at("model").get<std::string>();
  row.eps = r.at("eps").get<double>();
  if (r.at("lambda").is_number()) row.lambda = r["lambda"].get<double>();
  row.h = r.at("h").get<double>();
  row.nodes = r.at("nodes").get<std::size_t>();
  row.status = report.value("status", "");
  row.dir = dir;

  if (!report.contains("sweep")) {
    if (report.contains("solve")) fill_solve(row, report["solve"]);
    row.gap = number_at(report, {"certificate", "convexity", "gap"});
    row.reference_error = number_at(report, {"reference", "sup_error"});
    rows.push_back(std::move(row));
    return;
  }
  const json& sweep = report["sweep"];
  const bool lambda = sweep.at("param").get<std::string>() == "lambda";
  std::vector<BundleRow> entries;
  for (const json& e : sweep.at("entries")) {
    BundleRow er = row;
    const double v = e.at("value").get<double>();
    if (lambda) er.lambda = v;
    else er.eps = v;
    if (e.contains("solve") && e["solve"].is_object()) {
      fill_solve(er, e["solve"]);
    } else {
      er.status = "error";
    }
    er.reference_error = number_at(e, {"reference", "sup_error"});
    entries.push_back(std::move(er));
  }
  rows.insert(rows.end(), entries.begin(), entries.end());
}

std::string cell(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : ""; }

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Bundle collect_reports(std::span<const std::filesystem::path> dirs) {
  Bundle b;
  for (const auto& dir : dirs) {
    const auto file = dir / "report.json";
    std::ifstream in(file);
    if (!in) {
      b.warnings.push_back(fmt::format("{}: missing report.json", dir.string()));
      continue;
    }
    try {
      const json report = json::parse(in);
      append_rows(report, dir.string(), b.rows);
    } catch (const std::exception& e) {
      b.warnings.push_back(fmt::format("{}: corrupt report ({})", dir.string(), e.what()));
    }
  }
  std::sort(b.rows.begin(), b.rows.end(), [](const BundleRow& a, const BundleRow& c) {
    const double la = a.lambda.value_or(0.0), lc = c.lambda.value_or(0.0);
    return std::tie(a.command, a.g, a.eps, la, a.h, a.dir) < std::tie(c.command, c.g, c.eps, lc, c.h, c.dir);
  });
  return b;
}

void write_bundle_csv(std::ostream& out, const Bundle& bundle) {
  out << "command,g,model,eps,lambda,h,nodes,converged,iterations,el_residual,energy,gap,reference_sup_error,status,dir\n";
  for (const auto& r : bundle.rows) {
    out << fmt::format("{},{},{},{:.17g},{},{:.17g},{},{},{},{:.17g},{},{},{},{},{}\n", quoted(r.command), quoted(r.g),
                       r.model, r.eps, cell(r.lambda), r.h, r.nodes, r.converged ? "true" : "false", r.iterations,
                       r.el_residual, cell(r.energy), cell(r.gap), cell(r.reference_error), r.status, quoted(r.dir));
  }
}

}  // namespace gausstv::cli
