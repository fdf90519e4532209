#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "robustfair/data.hpp"
#include "robustfair/inner_solvers.hpp"
#include "robustfair/model.hpp"

namespace robustfair {

struct PgdTrainConfig {
  double alpha = -1.0;     // < 0: radius / 4
  int max_iter = 50;
  double stop_tol = -1.0;  // < 0: 1e-10 * max(1, radius)
};

struct TrsTrainConfig {
  double tol = -1.0;  // < 0: 1e-8 * max(1, radius)
  int max_iter = 200;
};

struct TrainConfig {
  double radius = 0.0;            // 0 trains nonrobustly
  Solver solver = Solver::kNone;  // NONE requires radius == 0
  double learning_rate = 0.01;
  int epochs = 10;
  int batch_size = 8;  // 0 = full batch
  double l2_coeff = 0.0;
  std::uint64_t seed = 0;
  PgdTrainConfig pgd;
  TrsTrainConfig trs;
  int threads = 1;  // worker count for per-sample inner solves

  void validate() const;
};

struct EpochStats {
  double mean_loss = 0.0;            // unperturbed loss at visit time
  double mean_perturbed_loss = 0.0;  // loss at x + delta
  double seconds = 0.0;
  double mean_kkt_stationarity = 0.0;  // TRS only; NaN otherwise
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

/// Deterministic per-epoch visiting order (seeded Fisher-Yates shuffle).
/// Exposed so reference implementations can reproduce the exact stream.
std::vector<int> epoch_order(std::uint64_t seed, int epoch, int m);

/// Gradient descent on (w, b) from zero init. Every sample's inner
/// maximization is re-solved at the weights current when its batch is
/// visited; the perturbation is treated as a constant in the parameter
/// gradient. Per-sample gradient contributions are reduced in index order,
/// so results do not depend on the worker count.
std::pair<AffineModel, TrainHistory> train(const TabularDataset& data,
                                           const TrainConfig& cfg);

struct Evaluation {
  double accuracy = 0.0;
  std::vector<int> preds;
};

/// yhat = 1 iff sigmoid(logit) >= threshold (ties classify as 1).
Evaluation evaluate(const AffineModel& m, const TabularDataset& d, double threshold = 0.5);

struct TimingRow {
  Solver solver = Solver::kNone;
  double radius = 0.0;
  double mean_epoch_seconds = 0.0;
};

struct TimingTable {
  std::vector<TimingRow> rows;
};

/// Trains one fresh model per (solver, radius) cell, single threaded, and
/// averages wall-clock epoch times. NONE cells always run at radius 0.
TimingTable benchmark_epochs(const TabularDataset& data, const std::vector<double>& radii,
                             const std::vector<Solver>& solvers, const TrainConfig& base);

/// (radius, PGD time / TRS time) for every radius where both rows exist,
/// computed from full-precision means.
std::vector<std::pair<double, double>> pgd_trs_ratios(const TimingTable& t);

}  // namespace robustfair
