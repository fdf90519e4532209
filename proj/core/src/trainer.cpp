#include "robustfair/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "robustfair/errors.hpp"
#include "robustfair/rng.hpp"

namespace robustfair {

void TrainConfig::validate() const {
  if (radius < 0.0) throw ValidationError("TrainConfig: radius must be >= 0");
  if (solver == Solver::kNone && radius > 0.0)
    throw ValidationError("TrainConfig: radius > 0 requires a perturbation solver");
  if (learning_rate <= 0.0) throw ValidationError("TrainConfig: learning_rate must be > 0");
  if (epochs < 1) throw ValidationError("TrainConfig: epochs must be >= 1");
  if (batch_size < 0) throw ValidationError("TrainConfig: batch_size must be >= 0");
  if (l2_coeff < 0.0) throw ValidationError("TrainConfig: l2_coeff must be >= 0");
  if (threads < 1) throw ValidationError("TrainConfig: threads must be >= 1");
}

std::vector<int> epoch_order(std::uint64_t seed, int epoch, int m) {
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  std::mt19937_64 rng(mix_seed(seed, 0xe90c4ULL, static_cast<std::uint64_t>(epoch)));
  for (int i = m - 1; i > 0; --i) {
    const int j = static_cast<int>(uniform_double(rng) * (i + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

namespace {

struct SampleOutcome {
  Vec grad_w;         // (sigma(z_pert) - y) * (x + delta)
  double grad_b = 0.0;
  double loss = 0.0;
  double perturbed_loss = 0.0;
  double kkt_stationarity = 0.0;
};

SampleOutcome solve_sample(const AffineModel& model, const TabularDataset& data, int index,
                           const TrainConfig& cfg, int epoch) {
  const Vec& x = data.x[index];
  const int y = data.y[index];
  const int n = static_cast<int>(x.size());
  const double z = predict_logit(model, x);

  SampleOutcome out;
  out.loss = bce_from_logit(z, y);

  Vec delta;
  double lambda = 0.0;
  bool have_trs = false;
  if (cfg.radius > 0.0 && cfg.solver != Solver::kNone) {
    switch (cfg.solver) {
      case Solver::kTrs: {
        const PerturbationResult res =
            trs_solve(loss_local_model(model, x, y), cfg.radius, cfg.trs.tol, cfg.trs.max_iter);
        delta = res.delta;
        lambda = res.lambda;
        have_trs = true;
        break;
      }
      case Solver::kPgd: {
        PgdOptions opts{cfg.pgd.alpha, cfg.pgd.max_iter, cfg.pgd.stop_tol};
        const LossOracle oracle = [&](const Vec& d) {
          const double zp = z + dot(model.w, d);
          LossEval e{bce_from_logit(zp, y), Vec(x.size())};
          const double residual = sigmoid(zp) - static_cast<double>(y);
          for (size_t i = 0; i < x.size(); ++i) e.grad[i] = residual * model.w[i];
          return e;
        };
        delta = pgd_solve(oracle, n, cfg.radius, opts).delta;
        break;
      }
      case Solver::kRandom: {
        std::mt19937_64 rng(
            mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(index)));
        delta = random_perturb(rng, n, cfg.radius).delta;
        break;
      }
      case Solver::kNone:
        break;
    }
  }

  double zp = z;
  Vec xp = x;
  if (!delta.empty()) {
    zp = z + dot(model.w, delta);
    for (int i = 0; i < n; ++i) xp[i] += delta[i];
  }
  out.perturbed_loss = bce_from_logit(zp, y);

  const double residual = sigmoid(zp) - static_cast<double>(y);
  out.grad_w.resize(n);
  for (int i = 0; i < n; ++i) out.grad_w[i] = residual * xp[i];
  out.grad_b = residual;

  if (have_trs) {
    // Optimality of the inner solution measured against the true perturbed
    // gradient, not the quadratic model.
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double gi = residual * model.w[i];
      const double v = -gi + lambda * (delta.empty() ? 0.0 : delta[i]);
      s += v * v;
    }
    out.kkt_stationarity = std::sqrt(s);
  }
  return out;
}

void parallel_for(int threads, int count, const std::function<void(int, int)>& body) {
  if (threads <= 1 || count < 2 * threads) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const int chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int begin = t * chunk;
    const int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, t, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::pair<AffineModel, TrainHistory> train(const TabularDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();

  const int m = data.size();
  const int n = data.n_features();
  const int batch = cfg.batch_size == 0 ? m : std::min(cfg.batch_size, m);
  const bool track_kkt = cfg.solver == Solver::kTrs && cfg.radius > 0.0;

  AffineModel model{Vec(n, 0.0), 0.0};
  TrainHistory history;
  history.epochs.reserve(cfg.epochs);

  std::vector<SampleOutcome> outcomes(batch);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<int> order = epoch_order(cfg.seed, epoch, m);

    double loss_sum = 0.0;
    double perturbed_sum = 0.0;
    double kkt_sum = 0.0;

    for (int start = 0; start < m; start += batch) {
      const int count = std::min(batch, m - start);
      parallel_for(cfg.threads, count, [&](int begin, int end) {
        for (int k = begin; k < end; ++k) {
          const int index = order[start + k];
          try {
            outcomes[k] = solve_sample(model, data, index, cfg, epoch);
          } catch (const SolverError& e) {
            throw SolverError("inner solver failed at sample " + std::to_string(index) +
                              ": " + e.what());
          }
        }
      });

      Vec grad_w(n, 0.0);
      double grad_b = 0.0;
      for (int k = 0; k < count; ++k) {  // fixed reduction order
        for (int i = 0; i < n; ++i) grad_w[i] += outcomes[k].grad_w[i];
        grad_b += outcomes[k].grad_b;
        loss_sum += outcomes[k].loss;
        perturbed_sum += outcomes[k].perturbed_loss;
        kkt_sum += outcomes[k].kkt_stationarity;
      }
      const double inv = 1.0 / count;
      for (int i = 0; i < n; ++i)
        model.w[i] -= cfg.learning_rate * (grad_w[i] * inv + cfg.l2_coeff * model.w[i]);
      model.b -= cfg.learning_rate * grad_b * inv;
    }

    const auto t1 = std::chrono::steady_clock::now();
    EpochStats stats;
    stats.mean_loss = loss_sum / m;
    stats.mean_perturbed_loss = perturbed_sum / m;
    stats.seconds = std::chrono::duration<double>(t1 - t0).count();
    stats.mean_kkt_stationarity =
        track_kkt ? kkt_sum / m : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(stats.mean_loss) || !all_finite(model.w) || !std::isfinite(model.b))
      throw SolverError("training diverged at epoch " + std::to_string(epoch));
    history.epochs.push_back(stats);
  }
  return {std::move(model), std::move(history)};
}

Evaluation evaluate(const AffineModel& m, const TabularDataset& d, double threshold) {
  if (d.n_features() != static_cast<int>(m.w.size()))
    throw ValidationError("evaluate: model/dataset dimension mismatch");
  Evaluation out;
  out.preds.reserve(d.size());
  int correct = 0;
  for (int i = 0; i < d.size(); ++i) {
    const int pred = sigmoid(predict_logit(m, d.x[i])) >= threshold ? 1 : 0;
    out.preds.push_back(pred);
    if (pred == d.y[i]) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / d.size();
  return out;
}

TimingTable benchmark_epochs(const TabularDataset& data, const std::vector<double>& radii,
                             const std::vector<Solver>& solvers, const TrainConfig& base) {
  if (solvers.empty()) throw ValidationError("benchmark_epochs: no solvers given");

  TimingTable table;
  for (Solver solver : solvers) {
    const std::vector<double> cell_radii =
        solver == Solver::kNone ? std::vector<double>{0.0} : radii;
    if (cell_radii.empty())
      throw ValidationError("benchmark_epochs: no radii given");
    for (double radius : cell_radii) {
      TrainConfig cfg = base;
      cfg.solver = solver;
      cfg.radius = radius;
      cfg.threads = 1;  // timing comparisons stay hardware-comparable
      auto [model, history] = train(data, cfg);
      double sum = 0.0;
      for (const EpochStats& e : history.epochs) sum += e.seconds;
      table.rows.push_back({solver, radius, sum / history.epochs.size()});
    }
  }
  return table;
}

std::vector<std::pair<double, double>> pgd_trs_ratios(const TimingTable& t) {
  std::vector<std::pair<double, double>> out;
  for (const TimingRow& pgd : t.rows) {
    if (pgd.solver != Solver::kPgd) continue;
    for (const TimingRow& trs : t.rows) {
      if (trs.solver == Solver::kTrs && trs.radius == pgd.radius) {
        out.emplace_back(pgd.radius, pgd.mean_epoch_seconds / trs.mean_epoch_seconds);
        break;
      }
    }
  }
  return out;
}

}  // namespace robustfair
