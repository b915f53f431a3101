#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <Eigen/Core>
#include <fftw3.h>

#include "config.hpp"
#include "experiments.hpp"

namespace kinlab::lab {

inline constexpr const char* kinlab_version = "0.1.0";

struct RunReport {
  std::string command;
  json config;  // resolved
  std::string hash;
  std::uint64_t seed = 0;
  SuiteResult result;
  double wall_clock = 0;
  bool pass() const { return result.pass(); }
};

inline json versions() {
  json v = json::object();
  v["kinlab"] = kinlab_version;
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION);
  v["fftw"] = std::string(fftw_version);
  v["json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
              std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  v["compiler"] = __VERSION__;
  return v;
}

// 17 significant digits; non-finite values spelled inf, -inf, nan.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline json number_json(double x) { return std::isfinite(x) ? json(x) : json(format_double(x)); }

inline std::string csv_cell(const Cell& c) {
  if (const long* i = std::get_if<long>(&c)) return std::to_string(*i);
  if (const double* d = std::get_if<double>(&c)) return format_double(*d);
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

inline std::string table_csv(const Table& t) {
  std::string out;
  for (std::size_t j = 0; j < t.columns.size(); ++j) out += (j ? "," : "") + t.columns[j];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out += (j ? "," : "") + csv_cell(row[j]);
    out += "\n";
  }
  return out;
}

// Everything except the final wall-clock field is a function of config + seed.
inline json summary_json(const RunReport& r) {
  json s = json::object();
  s["command"] = r.command;
  s["config_hash"] = r.hash;
  s["seed"] = r.seed;
  s["versions"] = versions();
  s["config"] = r.config;
  s["pass"] = r.pass();
  json checks = json::array();
  for (const auto& c : r.result.checks) {
    json m = json::object();
    for (const auto& x : c.metrics) m[x.key] = number_json(x.value);
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"metrics", m}, {"note", c.note}});
  }
  s["checks"] = checks;
  s["warnings"] = r.result.warnings;
  json tables = json::array();
  for (const auto& t : r.result.tables) tables.push_back(t.name + ".csv");
  s["tables"] = tables;
  s["wall_clock_seconds"] = r.wall_clock;
  return s;
}

inline void write_report(const RunReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << text;
  };
  write("summary.json", summary_json(r).dump(2) + "\n");
  for (const auto& t : r.result.tables) write(t.name + ".csv", table_csv(t));
}

}  // namespace kinlab::lab
