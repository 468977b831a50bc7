#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppanova/errors.hpp"
#include "ppanova/layout.hpp"
#include "ppanova/permutation.hpp"
#include "ppanova/point_pattern.hpp"
#include "ppanova/statistic_value.hpp"
#include "ppanova/tt_metric.hpp"

namespace ppanova {

/// A list of named patterns; ids keep file order.
struct PatternSet {
  std::vector<std::string> ids;
  std::vector<PointPattern> patterns;

  std::size_t size() const { return ids.size(); }

  double mean_cardinality() const {
    double s = 0.0;
    for (const auto& p : patterns) s += static_cast<double>(p.size());
    return patterns.empty() ? 0.0 : s / static_cast<double>(patterns.size());
  }
};

namespace io_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

inline double parse_double(const std::string& s, const std::string& file,
                           long line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw parse_error(file, line, "expected a number, got '" + s + "'");
  }
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error(path, 0, "cannot open file");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw parse_error(path, 0, "cannot open file for writing");
  return out;
}

}  // namespace io_detail

/// Pattern CSV: header `pattern_id,x,y`, one row per point. Patterns with
/// zero points carry no rows, so an optional manifest (header `pattern_id`,
/// one id per line) fixes the full id set and order; without it, ids appear
/// in order of first occurrence.
inline PatternSet read_pattern_csv(const std::string& path,
                                   const std::optional<std::string>& manifest =
                                       std::nullopt) {
  PatternSet set;
  std::map<std::string, std::size_t> index;

  if (manifest) {
    auto in = io_detail::open_input(*manifest);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string id = io_detail::trim(line);
      if (id.empty()) continue;
      if (lineno == 1 && id == "pattern_id") continue;
      if (index.count(id)) throw parse_error(*manifest, lineno, "duplicate id");
      index[id] = set.ids.size();
      set.ids.push_back(id);
      set.patterns.emplace_back();
    }
  }

  auto in = io_detail::open_input(path);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (io_detail::trim(line).empty()) continue;
    const auto fields = io_detail::split_csv_line(line);
    if (lineno == 1) {
      if (fields.size() != 3 || fields[0] != "pattern_id" || fields[1] != "x" ||
          fields[2] != "y") {
        throw parse_error(path, lineno, "expected header 'pattern_id,x,y'");
      }
      continue;
    }
    if (fields.size() != 3) {
      throw parse_error(path, lineno, "expected 3 fields");
    }
    const std::string& id = fields[0];
    auto it = index.find(id);
    if (it == index.end()) {
      if (manifest) {
        throw parse_error(path, lineno, "pattern id '" + id + "' not in manifest");
      }
      index[id] = set.ids.size();
      it = index.find(id);
      set.ids.push_back(id);
      set.patterns.emplace_back();
    }
    const double x = io_detail::parse_double(fields[1], path, lineno);
    const double y = io_detail::parse_double(fields[2], path, lineno);
    set.patterns[it->second].add({x, y});
  }
  return set;
}

/// JSON alternative: an array of {"id": ..., "points": [[x, y], ...]}.
inline PatternSet read_pattern_json(const std::string& path) {
  auto in = io_detail::open_input(path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(path, 0, e.what());
  }
  if (!doc.is_array()) throw parse_error(path, 0, "expected a JSON array");
  PatternSet set;
  for (const auto& entry : doc) {
    if (!entry.contains("id") || !entry.contains("points")) {
      throw parse_error(path, 0, "entries need 'id' and 'points'");
    }
    set.ids.push_back(entry["id"].is_string()
                          ? entry["id"].get<std::string>()
                          : entry["id"].dump());
    PointPattern p;
    for (const auto& pt : entry["points"]) {
      if (!pt.is_array() || pt.size() != 2) {
        throw parse_error(path, 0, "points must be [x, y] pairs");
      }
      p.add({pt[0].get<double>(), pt[1].get<double>()});
    }
    set.patterns.push_back(std::move(p));
  }
  return set;
}

inline PatternSet read_patterns(const std::string& path,
                                const std::optional<std::string>& manifest =
                                    std::nullopt) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
    return read_pattern_json(path);
  }
  return read_pattern_csv(path, manifest);
}

inline void write_pattern_csv(const std::string& path, const PatternSet& set) {
  auto out = io_detail::open_output(path);
  out << "pattern_id,x,y\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (const Point& p : set.patterns[i].points()) {
      out << set.ids[i] << ',' << io_detail::format_double(p.x) << ','
          << io_detail::format_double(p.y) << '\n';
    }
  }
}

inline void write_manifest(const std::string& path, const PatternSet& set) {
  auto out = io_detail::open_output(path);
  out << "pattern_id\n";
  for (const auto& id : set.ids) out << id << '\n';
}

/// Distance matrix CSV: a header row of ids followed by the full symmetric
/// matrix, written with 17 significant digits so a round trip is exact.
inline void write_distance_matrix_csv(const std::string& path,
                                      const std::vector<std::string>& ids,
                                      const DistanceMatrix& d) {
  if (ids.size() != d.size()) throw invalid_input("id count != matrix size");
  auto out = io_detail::open_output(path);
  for (std::size_t j = 0; j < ids.size(); ++j) {
    out << (j ? "," : "") << ids[j];
  }
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.size(); ++j) {
      out << (j ? "," : "") << io_detail::format_double(d.at(i, j));
    }
    out << '\n';
  }
}

struct NamedDistanceMatrix {
  std::vector<std::string> ids;
  DistanceMatrix matrix;
};

inline NamedDistanceMatrix read_distance_matrix_csv(const std::string& path) {
  auto in = io_detail::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw parse_error(path, 1, "empty file");
  NamedDistanceMatrix out;
  out.ids = io_detail::split_csv_line(line);
  const std::size_t n = out.ids.size();
  if (n < 2) throw parse_error(path, 1, "need at least 2 ids");
  out.matrix = DistanceMatrix(n, MetricParams{});
  long lineno = 1;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (io_detail::trim(line).empty()) continue;
    const auto fields = io_detail::split_csv_line(line);
    if (fields.size() != n) {
      throw parse_error(path, lineno, "expected " + std::to_string(n) + " fields");
    }
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = io_detail::parse_double(fields[j], path, lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != n) {
    throw parse_error(path, lineno, "expected " + std::to_string(n) + " matrix rows");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i][i] != 0.0) throw parse_error(path, 0, "matrix diagonal must be 0");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rows[i][j] != rows[j][i]) {
        throw parse_error(path, 0, "matrix must be symmetric");
      }
      out.matrix.set(i, j, rows[i][j]);
    }
  }
  return out;
}

/// Group labels CSV: `pattern_id,group` (one-way) or
/// `pattern_id,factorA,factorB` (two-way). Every pattern id must be labeled
/// exactly once; group indices follow first appearance in pattern order.
struct LabelSet {
  std::vector<std::vector<std::string>> factors;  // aligned with pattern ids
  bool two_way = false;
};

inline LabelSet read_labels_csv(const std::string& path,
                                const std::vector<std::string>& pattern_ids) {
  auto in = io_detail::open_input(path);
  std::string line;
  long lineno = 0;
  std::map<std::string, std::vector<std::string>> by_id;
  std::size_t arity = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (io_detail::trim(line).empty()) continue;
    const auto fields = io_detail::split_csv_line(line);
    if (lineno == 1) {
      if (fields.size() < 2 || fields.size() > 3 || fields[0] != "pattern_id") {
        throw parse_error(path, lineno,
                          "expected header 'pattern_id,group' or "
                          "'pattern_id,factorA,factorB'");
      }
      arity = fields.size() - 1;
      continue;
    }
    if (fields.size() != arity + 1) {
      throw parse_error(path, lineno, "expected " + std::to_string(arity + 1) +
                                          " fields");
    }
    if (by_id.count(fields[0])) {
      throw parse_error(path, lineno, "duplicate label for id '" + fields[0] + "'");
    }
    by_id[fields[0]] = std::vector<std::string>(fields.begin() + 1, fields.end());
  }
  LabelSet out;
  out.two_way = arity == 2;
  out.factors.reserve(pattern_ids.size());
  for (const auto& id : pattern_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw parse_error(path, 0, "no label for pattern id '" + id + "'");
    }
    out.factors.push_back(it->second);
  }
  return out;
}

/// Maps label strings to dense indices in order of first appearance.
inline std::vector<int> encode_levels(const std::vector<std::string>& values) {
  std::map<std::string, int> seen;
  std::vector<int> out;
  out.reserve(values.size());
  for (const auto& v : values) {
    auto [it, inserted] = seen.emplace(v, static_cast<int>(seen.size()));
    out.push_back(it->second);
  }
  return out;
}

/// Scalar sample CSV: `id,value,group[,factorB]`.
struct ScalarSample {
  std::vector<std::string> ids;
  std::vector<double> values;
  std::vector<std::string> group_a;
  std::vector<std::string> group_b;  // empty unless two-way
};

inline ScalarSample read_scalar_csv(const std::string& path) {
  auto in = io_detail::open_input(path);
  std::string line;
  long lineno = 0;
  ScalarSample out;
  std::size_t arity = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (io_detail::trim(line).empty()) continue;
    const auto fields = io_detail::split_csv_line(line);
    if (lineno == 1) {
      if ((fields.size() != 3 && fields.size() != 4) || fields[0] != "id" ||
          fields[1] != "value") {
        throw parse_error(path, lineno, "expected header 'id,value,group[,factorB]'");
      }
      arity = fields.size();
      continue;
    }
    if (fields.size() != arity) {
      throw parse_error(path, lineno, "expected " + std::to_string(arity) + " fields");
    }
    out.ids.push_back(fields[0]);
    out.values.push_back(io_detail::parse_double(fields[1], path, lineno));
    out.group_a.push_back(fields[2]);
    if (arity == 4) out.group_b.push_back(fields[3]);
  }
  return out;
}

inline nlohmann::json to_json(const StatisticValue& s) {
  nlohmann::json j;
  j["name"] = s.name;
  if (std::isfinite(s.value)) {
    j["value"] = s.value;
  } else {
    j["value"] = nullptr;
  }
  j["components"] = s.components;
  j["flags"] = nlohmann::json::array();
  if (s.flag != StatFlag::Ok) j["flags"].push_back(to_string(s.flag));
  return j;
}

inline nlohmann::json to_json(const PermutationTestResult& r) {
  nlohmann::json j;
  j["statistic"] = r.statistic;
  if (std::isfinite(r.observed)) {
    j["observed"] = r.observed;
  } else {
    j["observed"] = nullptr;
  }
  j["observed_flag"] = to_string(r.observed_flag);
  j["permutations"] = r.permutations;
  j["rank"] = r.rank;
  j["p_value"] = r.p_value;
  j["seed"] = r.seed;
  j["invalid_permutations"] = r.invalid_permutations;
  return j;
}

}  // namespace ppanova
