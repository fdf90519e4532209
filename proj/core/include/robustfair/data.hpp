#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robustfair/linalg.hpp"

namespace robustfair {

/// Feature matrix (rows in [0,1] after normalization), binary labels and
/// binary sensitive attributes.
struct TabularDataset {
  std::vector<Vec> x;
  std::vector<int> y;
  std::vector<int> s;
  std::vector<std::string> feature_names;

  int size() const { return static_cast<int>(x.size()); }
  int n_features() const { return x.empty() ? 0 : static_cast<int>(x.front().size()); }
  /// Enforces the type invariants (consistent lengths, binary y/s,
  /// features inside [0,1]).
  void validate() const;
};

/// Two-score synthetic hiring population. Points are sampled uniformly on
/// the unit square, labeled by the linear rule a1*x1 + a2*x2 > c at their
/// original position, then group 1 is shifted up by +shift per coordinate
/// and group 0 down by -shift (clamped back into [0,1]). The label is
/// decided before the shift, which is what makes the shifted data unfair.
struct Unfair2dParams {
  int m = 2000;
  std::uint64_t seed = 0;
  double shift = 0.05;
  double boundary_a1 = 1.0;
  double boundary_a2 = 1.0;
  double boundary_c = 1.1;
  double group_prob = 0.5;  // probability of the advantaged group (s = 1)
};

TabularDataset generate_unfair2d(const Unfair2dParams& p);

/// Parses {"m", "seed", "shift", "boundary": [a1, a2, c], "group_prob"},
/// all optional; unknown keys are rejected.
Unfair2dParams unfair2d_params_from_json(const std::string& json_text);

/// Column selector: by header name, or by zero-based index when the file
/// has no header (or name is empty).
struct ColumnRef {
  std::string name;
  int index = -1;
};

/// What to extract from a delimited text file. Label and sensitive cells
/// are binarized by membership in the positive / group-1 literal sets.
struct CsvSchema {
  std::vector<ColumnRef> features;
  std::vector<std::string> feature_names;  // optional display names
  ColumnRef label;
  std::vector<std::string> label_positive;
  ColumnRef sensitive;
  std::vector<std::string> sensitive_group1;
  bool header = true;
  char delimiter = ',';
  bool strict = false;  // error on unparseable rows instead of dropping
};

CsvSchema schema_from_json(const std::string& json_text);
CsvSchema load_schema(const std::string& path);

struct LoadStats {
  int rows_read = 0;
  int rows_dropped = 0;
};

/// Parses the file, drops rows with missing or unparseable selected cells
/// (counted in stats; fatal in strict mode), min-max normalizes features.
TabularDataset load_csv(const std::string& path, const CsvSchema& schema,
                        LoadStats* stats = nullptr);

/// Per-column (x - min) / (max - min); constant columns map to 0.5.
std::vector<Vec> min_max_normalize(std::vector<Vec> x);

/// Seeded-shuffle partition into ceil(m*(1-f)) training rows and the rest.
std::pair<TabularDataset, TabularDataset> train_test_split(const TabularDataset& d,
                                                           double test_fraction,
                                                           std::uint64_t seed);

}  // namespace robustfair
