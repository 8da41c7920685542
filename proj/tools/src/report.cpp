#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "xfl/error.hpp"

namespace xfl::cli {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void RunReport::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw Error("report row has " + std::to_string(row.size()) + " values for " +
                std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

const Check& RunReport::check_at_most(std::string name, double value, double tolerance) {
  checks.push_back({std::move(name), value, tolerance, value <= tolerance});
  return checks.back();
}

bool RunReport::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

void RunReport::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_real(row[c]);
    out << '\n';
  }
}

namespace {

nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

}  // namespace

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) j["config"][k] = v;
  j["columns"] = columns;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) r[columns[c]] = number(row[c]);
    j["rows"].push_back(r);
  }
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json o;
    o["name"] = c.name;
    o["value"] = number(c.value);
    o["tolerance"] = c.tolerance;
    o["pass"] = c.pass;
    j["checks"].push_back(o);
  }
  j["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : metrics) j["metrics"][k] = number(v);
  j["wall_ms"] = wall_ms;
  return j;
}

void RunReport::write_summary(std::ostream& out) const {
  for (const auto& c : checks) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e <= %.1e", c.value, c.tolerance);
    out << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << buf << '\n';
  }
  for (const auto& [k, v] : metrics) out << "     " << k << " = " << format_real(v) << '\n';
  out << experiment << ": " << (all_pass() ? "all checks passed" : "check failure") << '\n';
}

void RunReport::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  const auto csv = dir / (experiment + ".csv");
  std::ofstream c(csv, std::ios::binary);
  if (!c) throw Error("cannot write " + csv.string());
  write_csv(c);
  const auto js = dir / (experiment + ".json");
  std::ofstream j(js, std::ios::binary);
  if (!j) throw Error("cannot write " + js.string());
  j << to_json().dump(2) << '\n';
}

}  // namespace xfl::cli
