// Experiment runner: radius sweeps with fairness/accuracy/timing tables,
// epoch-time benchmarks, fairness audits of precomputed predictions, and
// synthetic dataset generation.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "robustfair/errors.hpp"
#include "robustfair/format.hpp"
#include "robustfair/sweep.hpp"

namespace {

using namespace robustfair;

struct Overrides {
  std::string output_dir;
  std::vector<double> radii;
  std::vector<std::string> solvers;
  std::uint64_t seed = 0;
  int epochs = 0;
  double learning_rate = 0.0;
  int batch_size = -1;
  int threads = 0;
};

void add_override_options(CLI::App* cmd, Overrides* o) {
  cmd->add_option("--output-dir", o->output_dir, "write outputs here instead");
  cmd->add_option("--radii", o->radii, "replace the configured radius list");
  cmd->add_option("--solvers", o->solvers, "replace the configured solver list");
  cmd->add_option("--seed", o->seed, "training seed");
  cmd->add_option("--epochs", o->epochs, "training epochs");
  cmd->add_option("--learning-rate", o->learning_rate, "outer step size");
  cmd->add_option("--batch-size", o->batch_size, "minibatch size (0 = full batch)");
  cmd->add_option("--threads", o->threads, "inner-solver worker count");
}

SweepConfig config_with_overrides(const std::string& path, const CLI::App* cmd,
                                  const Overrides& o) {
  SweepConfig cfg = load_config(path);
  if (cmd->count("--output-dir")) cfg.output_dir = o.output_dir;
  if (cmd->count("--radii")) cfg.radii = o.radii;
  if (cmd->count("--solvers")) {
    cfg.solvers.clear();
    for (const std::string& name : o.solvers) cfg.solvers.push_back(solver_from_string(name));
  }
  if (cmd->count("--seed")) cfg.train.seed = o.seed;
  if (cmd->count("--epochs")) cfg.train.epochs = o.epochs;
  if (cmd->count("--learning-rate")) cfg.train.learning_rate = o.learning_rate;
  if (cmd->count("--batch-size")) cfg.train.batch_size = o.batch_size;
  if (cmd->count("--threads")) cfg.train.threads = o.threads;
  cfg.validate();
  return cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"robust training and fairness auditing for affine classifiers"};
  app.require_subcommand(1);

  std::string sweep_config, bench_config, preds_path, params_path, out_csv;
  bool strict = false;
  Overrides sweep_over, bench_over;

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "train across radii and audit fairness");
  sweep_cmd->add_option("config", sweep_config, "JSON experiment config")->required();
  add_override_options(sweep_cmd, &sweep_over);

  CLI::App* bench_cmd = app.add_subcommand("bench", "average epoch times per solver/radius");
  bench_cmd->add_option("config", bench_config, "JSON experiment config")->required();
  add_override_options(bench_cmd, &bench_over);

  CLI::App* audit_cmd = app.add_subcommand("audit", "fairness gaps of stored predictions");
  audit_cmd->add_option("predictions", preds_path, "CSV with pred,label,sensitive columns")
      ->required();
  audit_cmd->add_flag("--strict", strict, "fail on undefined gaps");

  CLI::App* gen_cmd = app.add_subcommand("gen-synth", "generate the synthetic dataset");
  gen_cmd->add_option("params", params_path, "JSON generation parameters")->required();
  gen_cmd->add_option("out", out_csv, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (sweep_cmd->parsed()) {
    const SweepConfig cfg = config_with_overrides(sweep_config, sweep_cmd, sweep_over);
    const SweepReport report = run_sweep(cfg);
    std::cout << "sweep complete: " << report.rows.size() << " rows\n";
    return 0;
  }
  if (bench_cmd->parsed()) {
    const SweepConfig cfg = config_with_overrides(bench_config, bench_cmd, bench_over);
    const TimingTable table = run_bench(cfg);
    std::cout << timing_csv(table);
    return 0;
  }
  if (audit_cmd->parsed()) {
    const AuditInput in = read_predictions_csv(preds_path);
    const FairnessReport report =
        fairness_report(in.preds, in.labels, in.sensitive, strict);
    std::cout << render_fairness_table(report);
    return 0;
  }
  if (gen_cmd->parsed()) {
    std::ifstream in(params_path);
    if (!in) throw ValidationError("cannot open params file: " + params_path);
    std::stringstream buf;
    buf << in.rdbuf();
    const TabularDataset d = generate_unfair2d(unfair2d_params_from_json(buf.str()));
    write_dataset_csv(d, out_csv);
    std::cout << "wrote " << d.size() << " rows to " << out_csv << "\n";
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
