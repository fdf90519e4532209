#include "robustfair/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "robustfair/errors.hpp"
#include "robustfair/rng.hpp"

namespace robustfair {

void TabularDataset::validate() const {
  if (x.empty()) throw ValidationError("TabularDataset: empty dataset");
  if (y.size() != x.size() || s.size() != x.size())
    throw ValidationError("TabularDataset: inconsistent lengths");
  const size_t n = x.front().size();
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != n) throw ValidationError("TabularDataset: ragged feature rows");
    for (double v : x[i])
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("TabularDataset: feature outside [0,1]");
    if ((y[i] | s[i]) & ~1)
      throw ValidationError("TabularDataset: labels and sensitive values must be 0 or 1");
  }
}

TabularDataset generate_unfair2d(const Unfair2dParams& p) {
  if (p.m < 1) throw ValidationError("generate_unfair2d: m must be >= 1");
  if (!(p.shift >= 0.0 && p.shift < 0.5))
    throw ValidationError("generate_unfair2d: shift must be in [0, 0.5)");
  if (p.boundary_a1 == 0.0 && p.boundary_a2 == 0.0)
    throw ValidationError("generate_unfair2d: boundary normal must be nonzero");
  if (!(p.group_prob >= 0.0 && p.group_prob <= 1.0))
    throw ValidationError("generate_unfair2d: group_prob must be in [0,1]");

  TabularDataset d;
  d.feature_names = {"x1", "x2"};
  d.x.reserve(p.m);
  d.y.reserve(p.m);
  d.s.reserve(p.m);

  std::mt19937_64 rng(mix_seed(p.seed));
  for (int i = 0; i < p.m; ++i) {
    const double x1 = uniform_double(rng);
    const double x2 = uniform_double(rng);
    const int group = uniform_double(rng) < p.group_prob ? 1 : 0;
    const int label = p.boundary_a1 * x1 + p.boundary_a2 * x2 > p.boundary_c ? 1 : 0;
    const double offset = group == 1 ? p.shift : -p.shift;
    d.x.push_back({std::clamp(x1 + offset, 0.0, 1.0), std::clamp(x2 + offset, 0.0, 1.0)});
    d.y.push_back(label);
    d.s.push_back(group);
  }
  return d;
}

Unfair2dParams unfair2d_params_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("params: invalid JSON: ") + e.what());
  }
  static const std::vector<std::string> known = {"m", "seed", "shift", "boundary",
                                                 "group_prob"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ValidationError("params: unknown key '" + key + "'");

  Unfair2dParams p;
  try {
    if (j.contains("m")) p.m = j["m"].get<int>();
    if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("shift")) p.shift = j["shift"].get<double>();
    if (j.contains("boundary")) {
      const auto b = j["boundary"].get<std::vector<double>>();
      if (b.size() != 3) throw ValidationError("params: boundary must be [a1, a2, c]");
      p.boundary_a1 = b[0];
      p.boundary_a2 = b[1];
      p.boundary_c = b[2];
    }
    if (j.contains("group_prob")) p.group_prob = j["group_prob"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("params: ") + e.what());
  }
  return p;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// One RFC-4180-style record; quoted fields may contain the delimiter,
/// doubled quotes escape a quote. Unquoted cells are trimmed so files with
/// space-padded delimiters ingest cleanly.
std::vector<std::string> split_record(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"' && trim(cur).empty()) {
      quoted = true;
      was_quoted = true;
      cur.clear();
    } else if (ch == delim) {
      cells.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += ch;
    }
  }
  cells.push_back(was_quoted ? cur : trim(cur));
  return cells;
}

bool parse_double(const std::string& cell, double* out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc{} && ptr == end && std::isfinite(*out);
}

int resolve_column(const ColumnRef& ref, const std::vector<std::string>& header, int width,
                   const std::string& what) {
  if (!ref.name.empty()) {
    for (size_t j = 0; j < header.size(); ++j)
      if (header[j] == ref.name) return static_cast<int>(j);
    throw ValidationError("load_csv: " + what + " column '" + ref.name + "' not found");
  }
  if (ref.index < 0 || ref.index >= width)
    throw ValidationError("load_csv: " + what + " column index out of range");
  return ref.index;
}

ColumnRef column_ref_from_json(const nlohmann::json& j, const std::string& what) {
  ColumnRef ref;
  if (j.is_string())
    ref.name = j.get<std::string>();
  else if (j.is_number_integer())
    ref.index = j.get<int>();
  else
    throw ValidationError("schema: " + what + " must be a column name or index");
  return ref;
}

std::vector<std::string> literals_from_json(const nlohmann::json& j, const std::string& what) {
  std::vector<std::string> out;
  if (j.is_string()) {
    out.push_back(j.get<std::string>());
  } else if (j.is_array()) {
    for (const auto& v : j) out.push_back(v.get<std::string>());
  } else {
    throw ValidationError("schema: " + what + " must be a string or array of strings");
  }
  if (out.empty()) throw ValidationError("schema: " + what + " must not be empty");
  return out;
}

}  // namespace

CsvSchema schema_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("schema: invalid JSON: ") + e.what());
  }

  static const std::vector<std::string> known = {"features",  "feature_names", "label",
                                                 "sensitive", "header",        "delimiter",
                                                 "strict"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ValidationError("schema: unknown key '" + key + "'");

  CsvSchema s;
  if (!j.contains("features") || !j["features"].is_array() || j["features"].empty())
    throw ValidationError("schema: 'features' must be a non-empty array");
  for (const auto& f : j["features"]) {
    s.features.push_back(column_ref_from_json(f, "feature"));
    s.feature_names.push_back(f.is_string() ? f.get<std::string>()
                                            : "f" + std::to_string(s.features.size() - 1));
  }
  if (j.contains("feature_names")) {
    s.feature_names = j["feature_names"].get<std::vector<std::string>>();
    if (s.feature_names.size() != s.features.size())
      throw ValidationError("schema: feature_names length mismatch");
  }

  for (const char* side : {"label", "sensitive"}) {
    if (!j.contains(side) || !j[side].is_object())
      throw ValidationError(std::string("schema: '") + side + "' must be an object");
    const auto& block = j[side];
    const std::string value_key = std::string(side) == "label" ? "positive" : "group1";
    for (const auto& [key, _] : block.items())
      if (key != "column" && key != value_key)
        throw ValidationError("schema: unknown key '" + key + "' in " + side);
    if (!block.contains("column") || !block.contains(value_key))
      throw ValidationError(std::string("schema: '") + side + "' needs column and " +
                            value_key);
    if (std::string(side) == "label") {
      s.label = column_ref_from_json(block["column"], "label");
      s.label_positive = literals_from_json(block[value_key], "label positive set");
    } else {
      s.sensitive = column_ref_from_json(block["column"], "sensitive");
      s.sensitive_group1 = literals_from_json(block[value_key], "sensitive group-1 set");
    }
  }

  if (j.contains("header")) s.header = j["header"].get<bool>();
  if (j.contains("delimiter")) {
    const std::string d = j["delimiter"].get<std::string>();
    if (d.size() != 1) throw ValidationError("schema: delimiter must be one character");
    s.delimiter = d[0];
  }
  if (j.contains("strict")) s.strict = j["strict"].get<bool>();
  return s;
}

CsvSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open schema file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return schema_from_json(buf.str());
}

TabularDataset load_csv(const std::string& path, const CsvSchema& schema, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw ValidationError("load_csv: cannot open " + path);

  std::string line;
  std::vector<std::string> header;
  if (schema.header) {
    if (!std::getline(in, line)) throw ValidationError("load_csv: empty file " + path);
    header = split_record(line, schema.delimiter);
  }

  TabularDataset d;
  d.feature_names = schema.feature_names;
  LoadStats local;
  std::vector<int> feature_cols;
  int label_col = -1;
  int sensitive_col = -1;
  bool columns_resolved = false;

  auto contains = [](const std::vector<std::string>& set, const std::string& v) {
    return std::find(set.begin(), set.end(), v) != set.end();
  };

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_record(line, schema.delimiter);
    if (!columns_resolved) {
      const int width =
          schema.header ? static_cast<int>(header.size()) : static_cast<int>(cells.size());
      for (size_t k = 0; k < schema.features.size(); ++k)
        feature_cols.push_back(resolve_column(schema.features[k], header, width, "feature"));
      label_col = resolve_column(schema.label, header, width, "label");
      sensitive_col = resolve_column(schema.sensitive, header, width, "sensitive");
      columns_resolved = true;
    }

    ++local.rows_read;
    const int needed = std::max({label_col, sensitive_col,
                                 *std::max_element(feature_cols.begin(), feature_cols.end())});
    bool ok = static_cast<int>(cells.size()) > needed;

    Vec row(feature_cols.size());
    if (ok) {
      for (size_t k = 0; k < feature_cols.size() && ok; ++k)
        ok = parse_double(cells[feature_cols[k]], &row[k]);
      if (ok && (cells[label_col].empty() || cells[sensitive_col].empty())) ok = false;
    }
    if (!ok) {
      if (schema.strict)
        throw ValidationError("load_csv: unparseable row " + std::to_string(local.rows_read) +
                              " in " + path);
      ++local.rows_dropped;
      continue;
    }
    d.x.push_back(std::move(row));
    d.y.push_back(contains(schema.label_positive, cells[label_col]) ? 1 : 0);
    d.s.push_back(contains(schema.sensitive_group1, cells[sensitive_col]) ? 1 : 0);
  }

  if (d.x.empty())
    throw ValidationError("load_csv: no usable rows in " + path);
  d.x = min_max_normalize(std::move(d.x));
  if (stats) *stats = local;
  return d;
}

std::vector<Vec> min_max_normalize(std::vector<Vec> x) {
  if (x.empty()) return x;
  const size_t n = x.front().size();
  for (size_t j = 0; j < n; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Vec& row : x) {
      if (!std::isfinite(row[j]))
        throw ValidationError("min_max_normalize: non-finite entry");
      lo = std::min(lo, row[j]);
      hi = std::max(hi, row[j]);
    }
    if (lo == hi) {
      for (Vec& row : x) row[j] = 0.5;
    } else {
      const double span = hi - lo;
      for (Vec& row : x) row[j] = (row[j] - lo) / span;
    }
  }
  return x;
}

std::pair<TabularDataset, TabularDataset> train_test_split(const TabularDataset& d,
                                                           double test_fraction,
                                                           std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ValidationError("train_test_split: test_fraction must be in (0,1)");
  if (d.size() < 2) throw ValidationError("train_test_split: need at least 2 rows");

  const int m = d.size();
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  std::mt19937_64 rng(mix_seed(seed, 0x5eed0517ULL));
  for (int i = m - 1; i > 0; --i) {
    const int j = static_cast<int>(uniform_double(rng) * (i + 1));
    std::swap(order[i], order[j]);
  }

  const int train_size = static_cast<int>(std::ceil(m * (1.0 - test_fraction)));
  if (train_size == 0 || train_size == m)
    throw ValidationError("train_test_split: a split would be empty");

  TabularDataset train, test;
  train.feature_names = d.feature_names;
  test.feature_names = d.feature_names;
  for (int i = 0; i < m; ++i) {
    TabularDataset& dst = i < train_size ? train : test;
    dst.x.push_back(d.x[order[i]]);
    dst.y.push_back(d.y[order[i]]);
    dst.s.push_back(d.s[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

}  // namespace robustfair
