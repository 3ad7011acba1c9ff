#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "plvar/errors.hpp"
#include "plvar/model.hpp"
#include "plvar/params.hpp"

namespace plvar {

namespace detail {

inline std::optional<double> parse_double(std::string_view token) {
  // trim ASCII whitespace; from_chars is locale-independent ('.' decimal)
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) {
    token.remove_prefix(1);
  }
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' ||
                            token.back() == '\r')) {
    token.remove_suffix(1);
  }
  double value = 0.0;
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || token.empty()) return std::nullopt;
  return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline std::string shortest_repr(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

}  // namespace detail

/// Read a time series from CSV: rows are time steps in increasing order,
/// columns are variables, optional header line, '.' decimal separator.
inline TimeSeries read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw InputError("'" + path + "' is empty");

  std::vector<std::string> names;
  std::size_t first_row = 0;
  const auto head = detail::split_csv_line(lines[0]);
  bool all_numeric = true;
  for (const std::string& f : head) {
    if (!detail::parse_double(f)) all_numeric = false;
  }
  if (!all_numeric) {
    names = head;
    first_row = 1;
    if (lines.size() == 1) throw InputError("'" + path + "' has a header but no data");
  }

  const std::size_t d = head.size();
  Matrix values(lines.size() - first_row, d);
  for (std::size_t r = first_row; r < lines.size(); ++r) {
    const auto fields = detail::split_csv_line(lines[r]);
    if (fields.size() != d) {
      throw InputError("'" + path + "' row " + std::to_string(r + 1) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(d));
    }
    for (std::size_t c = 0; c < d; ++c) {
      const auto value = detail::parse_double(fields[c]);
      if (!value || !std::isfinite(*value)) {
        const std::string column =
            names.empty() ? "column " + std::to_string(c + 1) : "column '" + names[c] + "'";
        throw InputError("'" + path + "' row " + std::to_string(r + 1) + ", " + column +
                         ": not a finite number: '" + fields[c] + "'");
      }
      values(r - first_row, c) = *value;
    }
  }
  try {
    return TimeSeries(std::move(values), std::move(names));
  } catch (const std::invalid_argument& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

/// Write a time series as CSV with shortest round-trip float formatting.
inline void write_csv(const TimeSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  if (!series.names.empty()) {
    for (int c = 0; c < series.dims(); ++c) {
      out << (c ? "," : "") << series.names[c];
    }
    out << '\n';
  }
  for (int r = 0; r < series.length(); ++r) {
    for (int c = 0; c < series.dims(); ++c) {
      out << (c ? "," : "") << detail::shortest_repr(series.values(r, c));
    }
    out << '\n';
  }
}

struct LearnDiagnostics {
  std::vector<double> objective_per_k;
  std::vector<double> loglik_trajectory;
  std::map<std::string, double> timings_ms;
};

/// On-disk model document: structure plus parameters, with optional learning
/// metadata. Floats are serialized with shortest round-trip precision, so a
/// written model reloads bit-exactly.
struct ModelRecord {
  int d = 0;
  int k = 0;
  std::optional<double> gamma;
  std::set<TemporalEdge> temporal_edges;
  std::set<std::pair<int, int>> contemporaneous_edges;
  std::vector<Matrix> lag_matrices;
  Matrix omega;
  std::optional<LearnDiagnostics> diagnostics;

  GvarStructure structure() const {
    return {d, k, temporal_edges, contemporaneous_edges};
  }
  GvarModel model() const { return {lag_matrices, omega}; }
};

inline ModelRecord record_of(const GvarModel& model, const GvarStructure& structure,
                             std::optional<double> gamma = std::nullopt) {
  ModelRecord record;
  record.d = model.d;
  record.k = model.k;
  record.gamma = gamma;
  record.temporal_edges = structure.temporal_edges;
  record.contemporaneous_edges = structure.contemporaneous_edges;
  record.lag_matrices = model.lag_matrices;
  record.omega = model.precision;
  return record;
}

namespace detail {

inline nlohmann::json matrix_row_major(const Matrix& m) {
  nlohmann::json flat = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return flat;
}

inline Matrix matrix_from_row_major(const nlohmann::json& flat, int rows, int cols,
                                    const std::string& what) {
  if (!flat.is_array() || static_cast<int>(flat.size()) != rows * cols) {
    throw InputError(what + ": expected " + std::to_string(rows * cols) + " numbers");
  }
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c].get<double>();
  }
  return m;
}

}  // namespace detail

inline void write_model_json(const ModelRecord& record, const std::string& path) {
  nlohmann::json j;
  j["d"] = record.d;
  j["k"] = record.k;
  if (record.gamma) j["gamma"] = *record.gamma;
  auto temporal = nlohmann::json::array();
  for (const TemporalEdge& e : record.temporal_edges) {
    temporal.push_back({e.lag, e.source, e.target});
  }
  j["temporal_edges"] = std::move(temporal);
  auto contemporaneous = nlohmann::json::array();
  for (const auto& [a, b] : record.contemporaneous_edges) {
    contemporaneous.push_back({a, b});
  }
  j["contemporaneous_edges"] = std::move(contemporaneous);
  auto lags = nlohmann::json::array();
  for (const Matrix& a : record.lag_matrices) lags.push_back(detail::matrix_row_major(a));
  j["A"] = std::move(lags);
  j["Omega"] = detail::matrix_row_major(record.omega);
  if (record.diagnostics) {
    j["diagnostics"] = {{"objective_per_k", record.diagnostics->objective_per_k},
                        {"loglik_trajectory", record.diagnostics->loglik_trajectory},
                        {"timings_ms", record.diagnostics->timings_ms}};
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline ModelRecord read_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
  try {
    ModelRecord record;
    record.d = j.at("d").get<int>();
    record.k = j.at("k").get<int>();
    if (j.contains("gamma")) record.gamma = j["gamma"].get<double>();
    for (const auto& e : j.at("temporal_edges")) {
      record.temporal_edges.insert({e.at(0).get<int>(), e.at(1).get<int>(),
                                    e.at(2).get<int>()});
    }
    for (const auto& e : j.at("contemporaneous_edges")) {
      record.contemporaneous_edges.insert({e.at(0).get<int>(), e.at(1).get<int>()});
    }
    const auto& lags = j.at("A");
    for (const auto& a : lags) {
      record.lag_matrices.push_back(
          detail::matrix_from_row_major(a, record.d, record.d, "A"));
    }
    if (static_cast<int>(record.lag_matrices.size()) != record.k) {
      throw InputError("'" + path + "': expected " + std::to_string(record.k) +
                       " lag matrices");
    }
    record.omega = detail::matrix_from_row_major(j.at("Omega"), record.d, record.d,
                                                 "Omega");
    if (j.contains("diagnostics")) {
      LearnDiagnostics diag;
      const auto& dj = j["diagnostics"];
      if (dj.contains("objective_per_k")) {
        diag.objective_per_k = dj["objective_per_k"].get<std::vector<double>>();
      }
      if (dj.contains("loglik_trajectory")) {
        diag.loglik_trajectory = dj["loglik_trajectory"].get<std::vector<double>>();
      }
      if (dj.contains("timings_ms")) {
        diag.timings_ms = dj["timings_ms"].get<std::map<std::string, double>>();
      }
      record.diagnostics = std::move(diag);
    }
    return record;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + path + "' has an invalid model schema: " + e.what());
  }
}

}  // namespace plvar
