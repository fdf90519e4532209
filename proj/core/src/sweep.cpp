#include "robustfair/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "robustfair/errors.hpp"
#include "robustfair/format.hpp"

namespace robustfair {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end())
      throw ValidationError("config: unknown key '" + key + "' in " + where);
}

std::vector<double> default_radii() {
  std::vector<double> r;
  for (int i = 10; i <= 20; ++i) r.push_back(i / 100.0);
  return r;
}

void parse_train_block(const json& j, TrainConfig* cfg) {
  reject_unknown_keys(j, {"learning_rate", "epochs", "batch_size", "l2_coeff", "seed",
                          "threads", "pgd", "trs"},
                      "train");
  if (j.contains("learning_rate")) cfg->learning_rate = j["learning_rate"].get<double>();
  if (j.contains("epochs")) cfg->epochs = j["epochs"].get<int>();
  if (j.contains("batch_size")) cfg->batch_size = j["batch_size"].get<int>();
  if (j.contains("l2_coeff")) cfg->l2_coeff = j["l2_coeff"].get<double>();
  if (j.contains("seed")) cfg->seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) cfg->threads = j["threads"].get<int>();
  if (j.contains("pgd")) {
    const json& p = j["pgd"];
    reject_unknown_keys(p, {"alpha", "max_iter", "stop_tol"}, "train.pgd");
    if (p.contains("alpha")) cfg->pgd.alpha = p["alpha"].get<double>();
    if (p.contains("max_iter")) cfg->pgd.max_iter = p["max_iter"].get<int>();
    if (p.contains("stop_tol")) cfg->pgd.stop_tol = p["stop_tol"].get<double>();
  }
  if (j.contains("trs")) {
    const json& t = j["trs"];
    reject_unknown_keys(t, {"tol", "max_iter"}, "train.trs");
    if (t.contains("tol")) cfg->trs.tol = t["tol"].get<double>();
    if (t.contains("max_iter")) cfg->trs.max_iter = t["max_iter"].get<int>();
  }
}

std::variant<SyntheticSource, CsvSource> parse_dataset_block(const json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw ValidationError("config: dataset must be an object with a 'type'");
  const std::string type = j["type"].get<std::string>();
  if (type == "synthetic") {
    reject_unknown_keys(
        j, {"type", "m_train", "m_test", "seed", "shift", "boundary", "group_prob"},
        "dataset");
    SyntheticSource src;
    if (j.contains("m_train")) src.params.m = j["m_train"].get<int>();
    if (j.contains("m_test")) src.m_test = j["m_test"].get<int>();
    if (j.contains("seed")) src.params.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("shift")) src.params.shift = j["shift"].get<double>();
    if (j.contains("boundary")) {
      const auto b = j["boundary"].get<std::vector<double>>();
      if (b.size() != 3)
        throw ValidationError("config: dataset.boundary must be [a1, a2, c]");
      src.params.boundary_a1 = b[0];
      src.params.boundary_a2 = b[1];
      src.params.boundary_c = b[2];
    }
    if (j.contains("group_prob")) src.params.group_prob = j["group_prob"].get<double>();
    return src;
  }
  if (type == "csv") {
    reject_unknown_keys(j, {"type", "path", "schema", "test_fraction", "seed"}, "dataset");
    if (!j.contains("path") || !j.contains("schema"))
      throw ValidationError("config: csv dataset needs 'path' and 'schema'");
    CsvSource src;
    src.path = j["path"].get<std::string>();
    if (j["schema"].is_string())
      src.schema_path = j["schema"].get<std::string>();
    else
      src.inline_schema = j["schema"].dump();
    if (j.contains("test_fraction")) src.test_fraction = j["test_fraction"].get<double>();
    if (j.contains("seed")) src.split_seed = j["seed"].get<std::uint64_t>();
    return src;
  }
  throw ValidationError("config: dataset.type must be 'synthetic' or 'csv'");
}

std::string csv_gap(const Gap& g) { return g ? format_double(*g) : "NA"; }

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
}

std::filesystem::path resolve_output_dir(const SweepConfig& cfg) {
  const char* env = std::getenv("ROBUSTFAIR_OUTPUT_DIR");
  std::filesystem::path dir = env && *env ? env : cfg.output_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

struct DatasetPair {
  TabularDataset train;
  TabularDataset test;
};

DatasetPair load_dataset(const SweepConfig& cfg) {
  if (const auto* synth = std::get_if<SyntheticSource>(&cfg.dataset)) {
    Unfair2dParams test_params = synth->params;
    test_params.m = synth->m_test;
    test_params.seed = synth->params.seed + 1;
    return {generate_unfair2d(synth->params), generate_unfair2d(test_params)};
  }
  const auto& src = std::get<CsvSource>(cfg.dataset);
  const CsvSchema schema = src.inline_schema.empty() ? load_schema(src.schema_path)
                                                     : schema_from_json(src.inline_schema);
  const TabularDataset all = load_csv(src.path, schema);
  auto [train, test] = train_test_split(all, src.test_fraction, src.split_seed);
  return {std::move(train), std::move(test)};
}

void append_rows(SweepReport* report, Solver solver, double radius, const AffineModel& model,
                 const TrainHistory& history, const DatasetPair& data) {
  double sum = 0.0;
  for (const EpochStats& e : history.epochs) sum += e.seconds;
  const double mean_seconds = sum / history.epochs.size();

  for (const auto& [split, d] : {std::pair<const char*, const TabularDataset*>{"train", &data.train},
                                 {"test", &data.test}}) {
    const Evaluation eval = evaluate(model, *d);
    SweepRow row;
    row.solver = solver;
    row.radius = radius;
    row.split = split;
    row.fairness = fairness_report(eval.preds, d->y, d->s);
    row.accuracy = eval.accuracy;
    row.mean_epoch_seconds = mean_seconds;
    report->rows.push_back(std::move(row));
  }
}

void flush_outputs(const SweepConfig& cfg, const SweepReport& report,
                   const std::filesystem::path& dir) {
  if (cfg.emit.fairness) write_text_file(dir / "fairness.csv", fairness_csv(report));
  if (cfg.emit.accuracy) write_text_file(dir / "accuracy.csv", accuracy_csv(report));
  if (cfg.emit.timing) {
    TimingTable t;
    for (const SweepRow& row : report.rows)
      if (row.split == "train") t.rows.push_back({row.solver, row.radius, row.mean_epoch_seconds});
    write_text_file(dir / "timing.csv", timing_csv(t));
  }
  write_text_file(dir / "summary.json", summary_json(cfg, report));
}

}  // namespace

void SweepConfig::validate() const {
  for (size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] < 0.0) throw ValidationError("config: radii must be >= 0");
    if (i > 0 && radii[i] <= radii[i - 1])
      throw ValidationError("config: radii must be strictly increasing");
  }
  if (output_dir.empty()) throw ValidationError("config: output_dir must not be empty");
  TrainConfig base = train;
  base.solver = Solver::kNone;
  base.radius = 0.0;
  base.validate();
}

SweepConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  reject_unknown_keys(j, {"dataset", "radii", "solvers", "train", "output_dir", "emit"},
                      "top level");

  SweepConfig cfg;
  cfg.dataset = SyntheticSource{};
  cfg.radii = default_radii();
  cfg.solvers = {Solver::kTrs, Solver::kRandom};

  try {
    if (j.contains("dataset")) cfg.dataset = parse_dataset_block(j["dataset"]);
    if (j.contains("radii")) cfg.radii = j["radii"].get<std::vector<double>>();
    if (j.contains("solvers")) {
      cfg.solvers.clear();
      for (const auto& name : j["solvers"]) {
        try {
          cfg.solvers.push_back(solver_from_string(name.get<std::string>()));
        } catch (const ValidationError& e) {
          throw ValidationError(std::string("config: in field 'solvers': ") + e.what());
        }
      }
    }
    if (j.contains("train")) parse_train_block(j["train"], &cfg.train);
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("emit")) {
      const json& e = j["emit"];
      reject_unknown_keys(e, {"fairness", "accuracy", "timing"}, "emit");
      if (e.contains("fairness")) cfg.emit.fairness = e["fairness"].get<bool>();
      if (e.contains("accuracy")) cfg.emit.accuracy = e["accuracy"].get<bool>();
      if (e.contains("timing")) cfg.emit.timing = e["timing"].get<bool>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }

  cfg.validate();
  return cfg;
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const SweepConfig& cfg) {
  ordered_json j;
  ordered_json ds;
  if (const auto* synth = std::get_if<SyntheticSource>(&cfg.dataset)) {
    ds["type"] = "synthetic";
    ds["m_train"] = synth->params.m;
    ds["m_test"] = synth->m_test;
    ds["seed"] = synth->params.seed;
    ds["shift"] = synth->params.shift;
    ds["boundary"] = {synth->params.boundary_a1, synth->params.boundary_a2,
                      synth->params.boundary_c};
    ds["group_prob"] = synth->params.group_prob;
  } else {
    const auto& src = std::get<CsvSource>(cfg.dataset);
    ds["type"] = "csv";
    ds["path"] = src.path;
    if (src.inline_schema.empty())
      ds["schema"] = src.schema_path;
    else
      ds["schema"] = json::parse(src.inline_schema);
    ds["test_fraction"] = src.test_fraction;
    ds["seed"] = src.split_seed;
  }
  j["dataset"] = std::move(ds);
  j["radii"] = cfg.radii;
  std::vector<std::string> names;
  for (Solver s : cfg.solvers) names.emplace_back(to_string(s));
  j["solvers"] = names;
  j["train"] = {{"learning_rate", cfg.train.learning_rate},
                {"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"l2_coeff", cfg.train.l2_coeff},
                {"seed", cfg.train.seed},
                {"threads", cfg.train.threads},
                {"pgd",
                 {{"alpha", cfg.train.pgd.alpha},
                  {"max_iter", cfg.train.pgd.max_iter},
                  {"stop_tol", cfg.train.pgd.stop_tol}}},
                {"trs", {{"tol", cfg.train.trs.tol}, {"max_iter", cfg.train.trs.max_iter}}}};
  j["output_dir"] = cfg.output_dir;
  j["emit"] = {{"fairness", cfg.emit.fairness},
               {"accuracy", cfg.emit.accuracy},
               {"timing", cfg.emit.timing}};
  return j.dump(2) + "\n";
}

SweepReport run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir = resolve_output_dir(cfg);
  const DatasetPair data = load_dataset(cfg);

  TrainConfig base = cfg.train;
  if (cfg.emit.timing) base.threads = 1;

  SweepReport report;
  try {
    TrainConfig baseline = base;
    baseline.solver = Solver::kNone;
    baseline.radius = 0.0;
    const auto [model, history] = train(data.train, baseline);
    append_rows(&report, Solver::kNone, 0.0, model, history, data);

    for (Solver solver : cfg.solvers) {
      if (solver == Solver::kNone) continue;  // covered by the baseline
      for (double radius : cfg.radii) {
        TrainConfig cell = base;
        cell.solver = solver;
        cell.radius = radius;
        const auto [cell_model, cell_history] = train(data.train, cell);
        append_rows(&report, solver, radius, cell_model, cell_history, data);
      }
    }
  } catch (const SolverError&) {
    flush_outputs(cfg, report, dir);  // keep partial results on disk
    throw;
  }

  flush_outputs(cfg, report, dir);
  return report;
}

TimingTable run_bench(const SweepConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir = resolve_output_dir(cfg);
  const DatasetPair data = load_dataset(cfg);
  const TimingTable table = benchmark_epochs(data.train, cfg.radii, cfg.solvers, cfg.train);
  write_text_file(dir / "timing.csv", timing_csv(table));
  return table;
}

std::string fairness_csv(const SweepReport& report) {
  std::string out = "solver,radius,split,ind,sep_y0,sep_y1,suf_yhat0,suf_yhat1,accuracy\n";
  for (const SweepRow& r : report.rows) {
    out += std::string(to_string(r.solver)) + ',' + format_double(r.radius) + ',' + r.split +
           ',' + csv_gap(r.fairness.independence) + ',' + csv_gap(r.fairness.separation_y0) +
           ',' + csv_gap(r.fairness.separation_y1) + ',' +
           csv_gap(r.fairness.sufficiency_yhat0) + ',' +
           csv_gap(r.fairness.sufficiency_yhat1) + ',' + format_double(r.accuracy) + '\n';
  }
  return out;
}

std::string accuracy_csv(const SweepReport& report) {
  std::string out = "solver,radius,split,accuracy\n";
  for (const SweepRow& r : report.rows)
    out += std::string(to_string(r.solver)) + ',' + format_double(r.radius) + ',' + r.split +
           ',' + format_double(r.accuracy) + '\n';
  return out;
}

std::string timing_csv(const TimingTable& table) {
  std::string out = "solver,radius,mean_epoch_seconds\n";
  for (const TimingRow& r : table.rows)
    out += std::string(to_string(r.solver)) + ',' + format_double(r.radius) + ',' +
           format_significant(r.mean_epoch_seconds, 4) + '\n';
  for (const auto& [radius, ratio] : pgd_trs_ratios(table))
    out += "PGD/TRS," + format_double(radius) + ',' + format_significant(ratio, 4) + '\n';
  return out;
}

std::string summary_json(const SweepConfig& cfg, const SweepReport& report) {
  ordered_json j;
  j["config"] = ordered_json::parse(serialize_config(cfg));
  ordered_json rows = ordered_json::array();
  auto gap_json = [](const Gap& g) {
    return g ? ordered_json(*g) : ordered_json(nullptr);
  };
  for (const SweepRow& r : report.rows) {
    rows.push_back({{"solver", to_string(r.solver)},
                    {"radius", r.radius},
                    {"split", r.split},
                    {"independence", gap_json(r.fairness.independence)},
                    {"separation_y0", gap_json(r.fairness.separation_y0)},
                    {"separation_y1", gap_json(r.fairness.separation_y1)},
                    {"sufficiency_yhat0", gap_json(r.fairness.sufficiency_yhat0)},
                    {"sufficiency_yhat1", gap_json(r.fairness.sufficiency_yhat1)},
                    {"accuracy", r.accuracy},
                    {"mean_epoch_seconds", r.mean_epoch_seconds}});
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string render_fairness_table(const FairnessReport& r) {
  auto cell = [](const Gap& g) -> std::string {
    if (!g) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", *g);
    return buf;
  };
  auto line = [](const std::string& a, const std::string& b, const std::string& c) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-7s %-7s %-7s", a.c_str(), b.c_str(), c.c_str());
    std::string s(buf);
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + '\n';
  };
  std::string out;
  out += line("Diff:", "Y=0", "Y=1");
  out += line("Ind.", cell(r.independence), cell(r.independence));
  out += line("Sep.", cell(r.separation_y0), cell(r.separation_y1));
  out += line("Suff.", cell(r.sufficiency_yhat0), cell(r.sufficiency_yhat1));
  return out;
}

AuditInput read_predictions_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open predictions file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty predictions file: " + path);

  auto split = [](const std::string& text) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : text) {
      if (ch == ',') {
        cells.push_back(cur);
        cur.clear();
      } else if (ch != '\r' && ch != ' ' && ch != '\t') {
        cur += ch;
      }
    }
    cells.push_back(cur);
    return cells;
  };

  const std::vector<std::string> header = split(line);
  int pred_col = -1, label_col = -1, sens_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "pred") pred_col = static_cast<int>(i);
    if (header[i] == "label") label_col = static_cast<int>(i);
    if (header[i] == "sensitive") sens_col = static_cast<int>(i);
  }
  if (pred_col < 0 || label_col < 0 || sens_col < 0)
    throw ValidationError("predictions file needs pred,label,sensitive columns: " + path);

  AuditInput out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    const int needed = std::max({pred_col, label_col, sens_col});
    if (static_cast<int>(cells.size()) <= needed)
      throw ValidationError("predictions file: short row at line " + std::to_string(line_no));
    auto bit = [&](int col) {
      const std::string& v = cells[col];
      if (v == "0") return 0;
      if (v == "1") return 1;
      throw ValidationError("predictions file: non-binary value '" + v + "' at line " +
                            std::to_string(line_no));
    };
    out.preds.push_back(bit(pred_col));
    out.labels.push_back(bit(label_col));
    out.sensitive.push_back(bit(sens_col));
  }
  if (out.preds.empty()) throw ValidationError("predictions file has no rows: " + path);
  return out;
}

void write_dataset_csv(const TabularDataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  for (size_t j = 0; j < d.feature_names.size(); ++j) out << d.feature_names[j] << ',';
  out << "y,s\n";
  for (int i = 0; i < d.size(); ++i) {
    for (double v : d.x[i]) out << format_double(v) << ',';
    out << d.y[i] << ',' << d.s[i] << '\n';
  }
}

}  // namespace robustfair
