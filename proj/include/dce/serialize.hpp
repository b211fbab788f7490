#pragma once

// JSON and CSV emission. Output contains no timestamps or host details, so a
// fixed (config, seed) always produces the same bytes.

#include "dce/error.hpp"
#include "dce/info_theory.hpp"
#include "dce/risk.hpp"
#include "dce/sdpi_lab.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace dce {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

/// A table whose cells are numbers or strings; rendered as CSV or JSON rows.
struct Table {
  using Cell = std::variant<double, std::string>;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    require(row.size() == columns.size(), "table row has the wrong number of cells");
    rows.push_back(std::move(row));
  }
};

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (const double* d = std::get_if<double>(&row[i])) out += format_number(*d);
      else out += std::get<std::string>(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline json rows_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit([&](const auto& v) { r[t.columns[i]] = v; }, row[i]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline json meta_json(std::uint64_t seed, const std::string& command) {
  return json{{"seed", seed}, {"version", kVersion}, {"schema", kSchemaVersion}, {"command", command}};
}

inline std::string to_json_report(const Table& t, std::uint64_t seed, const std::string& command,
                                  const json& extra = json::object()) {
  json doc{{"meta", meta_json(seed, command)}, {"rows", rows_json(t)}};
  for (const auto& [k, v] : extra.items()) doc[k] = v;
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------- specs and joints

inline json to_json(const InteractiveSpec& s) {
  return json{{"nx", s.nx}, {"ny", s.ny}, {"alphabets", s.alphabets}, {"tables", s.tables}};
}

inline InteractiveSpec spec_from_json(const json& j) {
  InteractiveSpec s;
  s.nx = j.at("nx").get<std::size_t>();
  s.ny = j.at("ny").get<std::size_t>();
  s.alphabets = j.at("alphabets").get<std::vector<std::size_t>>();
  s.tables = j.at("tables").get<std::vector<std::vector<double>>>();
  s.validate();
  return s;
}

inline json to_json(const FiniteJoint& f) {
  return json{{"nx", f.nx()}, {"ny", f.ny()}, {"probs", f.table().probs()}};
}

inline FiniteJoint joint_from_json(const json& j) {
  return FiniteJoint(j.at("nx").get<std::size_t>(), j.at("ny").get<std::size_t>(),
                     j.at("probs").get<std::vector<double>>());
}

// ---------------------------------------------------------------- risk rows

inline const std::vector<std::string>& sweep_columns() {
  static const std::vector<std::string> cols = {
      "scheme",         "k",           "rho",          "trials",        "mse",
      "bias",           "variance",    "ci95",         "se_mse",        "mean_estimate",
      "se_mean",        "failure_rate", "mean_bits",   "mse_unclamped", "se_mse_unclamped",
      "mean_unclamped", "se_mean_unclamped", "global_upper", "local_upper", "local_lower",
      "naive_risk",     "max_scheme_risk"};
  return cols;
}

inline std::vector<Table::Cell> sweep_row(const RiskReport& r) {
  const BoundSet b = risk_bounds(r.k, r.rho_true);
  return {r.scheme,         double(r.k),         r.rho_true,      double(r.trials), r.mse,
          r.bias,           r.variance,          r.ci95_halfwidth, r.se_mse,        r.mean_estimate,
          r.se_mean,        r.failure_rate,      r.mean_bits,     r.mse_unclamped,  r.se_mse_unclamped,
          r.mean_unclamped, r.se_mean_unclamped, b.global_upper,  b.local_upper,    b.local_lower,
          b.naive_risk,     b.max_scheme_risk};
}

}  // namespace dce
