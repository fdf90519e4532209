#pragma once

#include <string>
#include <variant>
#include <vector>

#include "robustfair/data.hpp"
#include "robustfair/fairness.hpp"
#include "robustfair/trainer.hpp"

namespace robustfair {

struct SyntheticSource {
  Unfair2dParams params;  // params.m is the training-set size
  int m_test = 2000;
};

struct CsvSource {
  std::string path;
  std::string schema_path;        // used when inline_schema is absent
  std::string inline_schema;      // raw JSON of an inline schema object
  double test_fraction = 0.25;
  std::uint64_t split_seed = 0;
};

struct EmitFlags {
  bool fairness = true;
  bool accuracy = true;
  bool timing = true;
};

/// One experiment: train a baseline plus one model per (solver, radius),
/// audit fairness and accuracy on both splits, record epoch timings.
struct SweepConfig {
  std::variant<SyntheticSource, CsvSource> dataset;
  std::vector<double> radii;     // strictly increasing, all >= 0
  std::vector<Solver> solvers;   // NONE is always the implicit baseline
  TrainConfig train;
  std::string output_dir = "out";
  EmitFlags emit;

  void validate() const;
};

/// Parses a JSON config, filling every default; unknown keys are rejected.
SweepConfig parse_config(const std::string& json_text);
SweepConfig load_config(const std::string& path);

/// The fully resolved config as JSON; parse_config(serialize_config(c))
/// reproduces c exactly.
std::string serialize_config(const SweepConfig& cfg);

struct SweepRow {
  Solver solver = Solver::kNone;
  double radius = 0.0;
  std::string split;  // "train" or "test"
  FairnessReport fairness;
  double accuracy = 0.0;
  double mean_epoch_seconds = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

/// Runs the sweep and writes fairness.csv / accuracy.csv / timing.csv /
/// summary.json into the output directory (ROBUSTFAIR_OUTPUT_DIR overrides
/// the configured one). Rows gathered so far are flushed before a solver
/// failure propagates.
SweepReport run_sweep(const SweepConfig& cfg);

/// Benchmark-only path: timing table for the configured cells, written to
/// timing.csv in the output directory.
TimingTable run_bench(const SweepConfig& cfg);

/// CSV serializations (fixed column orders; undefined gaps print as NA).
std::string fairness_csv(const SweepReport& report);
std::string accuracy_csv(const SweepReport& report);
std::string timing_csv(const TimingTable& table);
std::string summary_json(const SweepConfig& cfg, const SweepReport& report);

/// Three-row gap table (independence duplicated across both columns).
std::string render_fairness_table(const FairnessReport& r);

struct AuditInput {
  std::vector<int> preds;
  std::vector<int> labels;
  std::vector<int> sensitive;
};

/// Reads a CSV with header columns pred,label,sensitive (any order).
AuditInput read_predictions_csv(const std::string& path);

/// Writes a dataset as CSV with feature columns plus y and s.
void write_dataset_csv(const TabularDataset& d, const std::string& path);

}  // namespace robustfair
