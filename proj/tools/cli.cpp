#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "tgclstm/checkpoint.hpp"
#include "tgclstm/config.hpp"
#include "tgclstm/csv.hpp"
#include "tgclstm/dataset.hpp"
#include "tgclstm/errors.hpp"
#include "tgclstm/gradient_suite.hpp"
#include "tgclstm/metrics.hpp"
#include "tgclstm/synthetic.hpp"
#include "tgclstm/training.hpp"

namespace tgclstm {

namespace fs = std::filesystem;

namespace {

/// Bad or missing command-line input discovered after parsing; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphArgs {
  std::string topology;
  std::string speed_limits;
  double free_flow = 60.0;
  int k_hops = 3;
  int m_steps = 3;
  double delta_t_min = 5.0;
};

void add_graph_options(CLI::App* app, GraphArgs& g) {
  app->add_option("--topology", g.topology, "Edge list: node_i,node_j,length_miles");
  app->add_option("--speed-limits", g.speed_limits, "Per-node free-flow speeds: node_id,mph");
  app->add_option("--free-flow", g.free_flow, "Network free-flow speed (mph)")
      ->capture_default_str();
  app->add_option("--k-hops", g.k_hops, "Hop order K")->capture_default_str();
  app->add_option("--m-steps", g.m_steps, "Reachability horizon in time steps")
      ->capture_default_str();
  app->add_option("--delta-t-min", g.delta_t_min, "Time step length (minutes)")
      ->capture_default_str();
}

GraphOptions graph_options(const GraphArgs& g) {
  GraphOptions o;
  o.k_hops = g.k_hops;
  o.horizon_steps = g.m_steps;
  o.time_quantum_min = g.delta_t_min;
  return o;
}

std::int64_t step_seconds(double delta_t_min) {
  if (!(delta_t_min > 0.0)) throw UsageError("--delta-t-min must be positive");
  return std::llround(delta_t_min * 60.0);
}

/// Values from `--config` for every option not given on the command line.
void apply_config(CLI::App* app, const std::string& path) {
  if (path.empty()) return;
  const ConfigFile cfg = ConfigFile::load(path);
  for (const auto& [key, value] : cfg.entries()) {
    std::string flag = "--" + key;
    for (char& c : flag)
      if (c == '_') c = '-';
    CLI::Option* opt = app->get_option_no_throw(flag);
    if (opt == nullptr || flag == "--config") {
      throw UsageError("config " + path + ": unknown key '" + key + "' for " + app->get_name());
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

std::vector<std::string> csv_header_ids(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  auto fields = csv::split(header);
  if (fields.size() < 2) throw FormatError(path.string() + ": header has no node columns");
  fields.erase(fields.begin());
  return fields;
}

std::string join(std::span<const std::string> items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) s += ',';
    s += items[i];
  }
  return s;
}

std::string metadata_value(const CheckpointMetadata& meta, const std::string& key,
                           const std::string& source) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("checkpoint " + source + " lacks '" + key + "'");
  return it->second;
}

SpeedDataset scale_dataset(SpeedDataset ds, double scale) {
  if (!(scale > 0.0)) throw ValidationError("normalization scale must be positive");
  for (double& v : ds.speeds.values()) v /= scale;
  ds.normalization = NormalizationRecord{"train-max", scale};
  return ds;
}

MetricsResult test_metrics(const Forecaster& model, std::span<const WindowedSample> test,
                           const NormalizationRecord& norm) {
  std::vector<Vector> preds;
  std::vector<Vector> targets;
  preds.reserve(test.size());
  targets.reserve(test.size());
  for (const auto& s : test) {
    preds.push_back(denormalize(model.predict(s.input), norm));
    targets.push_back(denormalize(s.target, norm));
  }
  return evaluate(preds, targets);
}

// prep-graph

struct PrepGraphArgs {
  GraphArgs graph;
  std::string node_ids;
  std::string out_dir;
  std::string config;
};

int run_prep_graph(CLI::App* app, PrepGraphArgs& a, std::ostream& out) {
  apply_config(app, a.config);
  if (a.graph.topology.empty()) throw UsageError("prep-graph needs --topology");
  if (a.out_dir.empty()) throw UsageError("prep-graph needs --out-dir");
  std::vector<std::string> ids;
  if (!a.node_ids.empty()) ids = load_node_ids(a.node_ids);
  const TrafficGraph graph = load_topology(a.graph.topology, ids, a.graph.free_flow,
                                           a.graph.speed_limits);
  if (ids.empty()) {
    for (std::size_t i = 0; i < graph.node_count(); ++i) ids.push_back(std::to_string(i));
  }
  const GraphMatrices gm = build_graph_matrices(graph, graph_options(a.graph));

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  csv::write_matrix(dir / "adjacency.csv", gm.adjacency.values, ids, ids);
  csv::write_matrix(dir / "distance.csv", gm.distance.values, ids, ids);
  csv::write_matrix(dir / "ffr.csv", gm.ffr.values, ids, ids);
  for (const auto& k : gm.khop) {
    csv::write_matrix(dir / ("khop_" + std::to_string(k.order) + ".csv"), k.values, ids, ids);
  }
  for (const auto& m : gm.masks) {
    csv::write_matrix(dir / ("mask_" + std::to_string(m.order) + ".csv"), m.values, ids, ids);
  }
  out << "nodes " << graph.node_count() << ", edges " << graph.edges().size() << ", K "
      << a.graph.k_hops << ", K_max " << gm.k_max << '\n';
  out << "wrote " << 3 + gm.khop.size() + gm.masks.size() << " matrices to " << dir.string()
      << '\n';
  return 0;
}

// gen-synthetic

struct GenSyntheticArgs {
  SyntheticOptions opt;
  std::string topology = "ring";
  std::string out_dir;
  std::string config;
};

int run_gen_synthetic(CLI::App* app, GenSyntheticArgs& a, std::ostream& out) {
  apply_config(app, a.config);
  if (a.out_dir.empty()) throw UsageError("gen-synthetic needs --out-dir");
  a.opt.topology = parse_topology(a.topology);
  const SyntheticData data = generate_synthetic(a.opt);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  save_speed_csv(dir / "speeds.csv", data.dataset);
  save_node_ids(dir / "node_ids.txt", data.dataset.node_ids);
  save_topology(dir / "topology.csv", data.graph, data.dataset.node_ids);
  out << "wrote " << data.dataset.steps() << " steps x " << data.dataset.nodes()
      << " nodes to " << dir.string() << '\n';
  return 0;
}

// train

struct TrainArgs {
  GraphArgs graph;
  std::string data;
  std::string node_ids;
  std::string model = "tgc-lstm";
  std::string split = "0.7,0.1,0.2";
  std::string impute = "ffill";
  std::size_t window = 10;
  TrainConfig cfg;
  std::string checkpoint = "model.ckpt";
  std::string report;
  std::string config;
  bool quiet = false;
};

int run_train(CLI::App* app, TrainArgs& a, std::ostream& out) {
  apply_config(app, a.config);
  if (a.data.empty()) throw UsageError("train needs --data");
  const ModelKind kind = parse_model_kind(a.model);
  const SplitFractions fractions = parse_split(a.split);
  if (a.window == 0) throw UsageError("--window must be positive");

  const std::vector<std::string> ids =
      a.node_ids.empty() ? csv_header_ids(a.data) : load_node_ids(a.node_ids);
  const ImputeResult imputed = impute_missing(
      load_speed_csv(a.data, ids, step_seconds(a.graph.delta_t_min)),
      parse_impute_policy(a.impute));
  if (imputed.imputed_cells > 0) out << "imputed " << imputed.imputed_cells << " cells\n";
  const SpeedDataset norm = normalize(imputed.dataset, fractions);
  const WindowSplits windows = make_windows(norm, a.window, fractions);

  ModelStructure structure;
  if (kind == ModelKind::kLstm && a.graph.topology.empty()) {
    structure.kind = kind;
    structure.nodes = ids.size();
  } else {
    if (a.graph.topology.empty()) throw UsageError(a.model + " needs --topology");
    const TrafficGraph graph =
        load_topology(a.graph.topology, ids, a.graph.free_flow, a.graph.speed_limits);
    const GraphMatrices gm = build_graph_matrices(graph, graph_options(a.graph));
    structure = make_structure(kind, gm, a.graph.k_hops);
    if (kind == ModelKind::kTgcLstm) out << "K " << a.graph.k_hops << ", K_max " << gm.k_max << '\n';
  }
  auto model = make_forecaster(std::move(structure), a.cfg.seed);

  out << "training " << a.model << " on " << windows.train.size() << " windows ("
      << windows.validation.size() << " validation, " << windows.test.size() << " test)\n";
  if (!a.quiet) {
    a.cfg.on_epoch = [&out](const EpochRecord& r) {
      out << "epoch " << r.epoch << "  train " << csv::format_double(r.train_loss)
          << "  validation " << csv::format_double(r.validation_loss) << '\n';
    };
  }
  const TrainReport report = train(*model, windows, a.cfg);
  out << "best epoch " << report.best_epoch << " (validation MSE "
      << csv::format_double(report.best_validation_loss) << ")"
      << (report.early_stopped ? ", stopped early" : "") << '\n';

  const MetricsResult m = test_metrics(*model, windows.test, *norm.normalization);
  out << "test MAE " << csv::format_double(m.mae) << " mph, RMSE " << csv::format_double(m.rmse)
      << " mph, MAPE " << csv::format_double(m.mape) << " %\n";

  CheckpointMetadata meta{
      {"model", a.model},
      {"node_ids", join(ids)},
      {"norm_scale", csv::format_double(norm.normalization->scale)},
      {"window", std::to_string(a.window)},
      {"split", a.split},
      {"impute", a.impute},
      {"delta_t_min", csv::format_double(a.graph.delta_t_min)},
      {"best_epoch", std::to_string(report.best_epoch)},
      {"seed", std::to_string(a.cfg.seed)},
  };
  const fs::path ckpt(a.checkpoint);
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  save_checkpoint(ckpt, *model, meta);
  fs::path report_path = a.report.empty()
                             ? ckpt.parent_path() / (ckpt.stem().string() + "_report.csv")
                             : fs::path(a.report);
  write_train_report(report_path, report);
  out << "wrote " << ckpt.string() << " and " << report_path.string() << '\n';
  return 0;
}

// evaluate

struct EvaluateArgs {
  std::string data;
  std::vector<std::string> checkpoints;
  std::vector<std::string> models;
  std::string split;
  std::string out_csv;
  std::string per_node;
  std::string config;
};

int run_evaluate(CLI::App* app, EvaluateArgs& a, std::ostream& out) {
  apply_config(app, a.config);
  if (a.data.empty()) throw UsageError("evaluate needs --data");
  if (a.checkpoints.empty()) throw UsageError("evaluate needs at least one --checkpoint");
  std::set<ModelKind> wanted;
  for (const auto& m : a.models) wanted.insert(parse_model_kind(m));

  std::vector<MetricsRow> rows;
  std::set<ModelKind> seen;
  std::map<std::string, int> label_count;
  for (const auto& path : a.checkpoints) {
    LoadedCheckpoint ck = load_checkpoint(path);
    const ModelKind kind = ck.model->kind();
    if (!wanted.empty() && !wanted.contains(kind)) continue;
    seen.insert(kind);

    const auto ids = csv::split(metadata_value(ck.metadata, "node_ids", path));
    const double scale = csv::parse_double(metadata_value(ck.metadata, "norm_scale", path), path);
    const auto window = static_cast<std::size_t>(
        csv::parse_int(metadata_value(ck.metadata, "window", path), path));
    const SplitFractions fractions =
        parse_split(a.split.empty() ? metadata_value(ck.metadata, "split", path) : a.split);
    const double delta_t = ck.metadata.contains("delta_t_min")
                               ? csv::parse_double(ck.metadata.at("delta_t_min"), path)
                               : 5.0;
    const auto policy = parse_impute_policy(
        ck.metadata.contains("impute") ? ck.metadata.at("impute") : "ffill");

    const SpeedDataset ds = scale_dataset(
        impute_missing(load_speed_csv(a.data, ids, step_seconds(delta_t)), policy).dataset, scale);
    const WindowSplits windows = make_windows(ds, window, fractions);
    MetricsRow row{std::string(model_kind_name(kind)),
                   test_metrics(*ck.model, windows.test, *ds.normalization)};
    if (++label_count[row.model] > 1) row.model += "#" + std::to_string(label_count[row.model]);

    if (!a.per_node.empty()) {
      Matrix per_node(1, ids.size(), row.metrics.per_node_mae);
      const fs::path p = a.per_node;
      const fs::path target =
          a.checkpoints.size() == 1
              ? p
              : p.parent_path() / (p.stem().string() + "_" + row.model + p.extension().string());
      csv::write_matrix(target, per_node, ids, std::vector<std::string>{row.model}, "model");
    }
    rows.push_back(std::move(row));
  }
  for (ModelKind k : wanted) {
    if (!seen.contains(k)) {
      throw ValidationError("no checkpoint holds a " + std::string(model_kind_name(k)) + " model");
    }
  }

  print_metrics_table(out, rows);
  if (a.out_csv.empty()) {
    out << '\n';
    write_metrics_csv(out, rows);
  } else {
    const bool fresh = !fs::exists(a.out_csv) || fs::file_size(a.out_csv) == 0;
    std::ofstream f(a.out_csv, std::ios::app);
    if (!f) throw FormatError("cannot write " + a.out_csv);
    write_metrics_csv(f, rows, fresh);
  }
  return 0;
}

// export-weights

struct ExportArgs {
  std::string checkpoint;
  std::string out_csv;
};

int run_export(ExportArgs& a, std::ostream& out) {
  if (a.checkpoint.empty()) throw UsageError("export-weights needs --checkpoint");
  if (a.out_csv.empty()) throw UsageError("export-weights needs --out");
  const LoadedCheckpoint ck = load_checkpoint(a.checkpoint);
  const Matrix avg = export_avg_weights(*ck.model);
  std::vector<std::string> ids;
  if (const auto it = ck.metadata.find("node_ids"); it != ck.metadata.end()) {
    ids = csv::split(it->second);
  }
  if (ids.size() != avg.rows()) {
    ids.clear();
    for (std::size_t i = 0; i < avg.rows(); ++i) ids.push_back(std::to_string(i));
  }
  write_avg_weights(a.out_csv, avg, ids);
  std::size_t nonzero = 0;
  for (double v : avg.values()) nonzero += v != 0.0;
  out << "wrote " << avg.rows() << "x" << avg.cols() << " averaged weights (" << nonzero
      << " nonzero) to " << a.out_csv << '\n';
  return 0;
}

// gradcheck

struct GradcheckArgs {
  GradientSuiteOptions opt;
  std::size_t seeds = 1;
};

int run_gradcheck(GradcheckArgs& a, std::ostream& out) {
  if (a.seeds == 0) throw UsageError("--seeds must be positive");
  double worst = 0.0;
  std::map<std::string, GradCheckResult> per_component;
  for (std::size_t s = 0; s < a.seeds; ++s) {
    GradientSuiteOptions opt = a.opt;
    opt.seed = a.opt.seed + s;
    for (const auto& c : run_gradient_suite(opt).cases) {
      auto& slot = per_component[c.component];
      if (c.result.max_relative_error >= slot.max_relative_error) {
        const std::size_t coords = slot.coordinates + c.result.coordinates;
        slot = c.result;
        slot.coordinates = coords;
      } else {
        slot.coordinates += c.result.coordinates;
      }
      worst = std::max(worst, c.result.max_relative_error);
    }
  }
  out << std::left << std::setw(12) << "component" << std::setw(14) << "max_rel_err"
      << std::setw(8) << "coords" << "worst" << '\n';
  for (const auto& [name, r] : per_component) {
    out << std::left << std::setw(12) << name << std::setw(14) << std::scientific
        << std::setprecision(3) << r.max_relative_error << std::setw(8) << r.coordinates
        << r.worst_parameter << '[' << r.worst_index << "]\n";
  }
  out << "max relative error " << std::scientific << std::setprecision(3) << worst
      << (worst < a.opt.tolerance ? " (pass)" : " (FAIL)") << '\n';
  out.unsetf(std::ios::floatfield);
  return worst < a.opt.tolerance ? 0 : 1;
}

std::string help_for(const CLI::App& app) {
  for (const CLI::App* sub : app.get_subcommands()) return sub->help();
  return app.help();
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic graph convolutional LSTM forecaster", "tgclstm"};
  app.require_subcommand(1);

  PrepGraphArgs prep;
  auto* prep_cmd = app.add_subcommand("prep-graph", "Write k-hop, distance, FFR and mask CSVs");
  add_graph_options(prep_cmd, prep.graph);
  prep_cmd->add_option("--node-ids", prep.node_ids, "One node id per line");
  prep_cmd->add_option("--out-dir", prep.out_dir, "Output directory");
  prep_cmd->add_option("--config", prep.config, "key = value defaults");

  GenSyntheticArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Generate a congestion-wave dataset");
  gen_cmd->add_option("--nodes", gen.opt.nodes, "Node count")->capture_default_str();
  gen_cmd->add_option("--topology", gen.topology, "ring, path or grid")->capture_default_str();
  gen_cmd->add_option("--steps", gen.opt.steps, "Time steps")->capture_default_str();
  gen_cmd->add_option("--seed", gen.opt.seed, "RNG seed")->capture_default_str();
  gen_cmd->add_option("--event-rate", gen.opt.event_rate, "Events per node per step")
      ->capture_default_str();
  gen_cmd->add_option("--noise", gen.opt.noise_mph, "Uniform noise bound (mph)")
      ->capture_default_str();
  gen_cmd->add_option("--free-flow", gen.opt.free_flow_mph, "Free-flow speed (mph)")
      ->capture_default_str();
  gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory");
  gen_cmd->add_option("--config", gen.config, "key = value defaults");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  add_graph_options(train_cmd, tr.graph);
  train_cmd->add_option("--data", tr.data, "Speed CSV: timestamp,<id1>,<id2>,...");
  train_cmd->add_option("--node-ids", tr.node_ids, "Node order (default: CSV header order)");
  train_cmd->add_option("--model", tr.model, "tgc-lstm, lstm or lsgc-lstm")
      ->capture_default_str();
  train_cmd->add_option("--split", tr.split, "train,validation,test fractions")
      ->capture_default_str();
  train_cmd->add_option("--impute", tr.impute, "ffill or node-mean")->capture_default_str();
  train_cmd->add_option("--window", tr.window, "Input steps T")->capture_default_str();
  train_cmd->add_option("--batch-size", tr.cfg.batch_size)->capture_default_str();
  train_cmd->add_option("--lambda1", tr.cfg.lambda1, "Weight L1 coefficient")
      ->capture_default_str();
  train_cmd->add_option("--lambda2", tr.cfg.lambda2, "Feature smoothness coefficient")
      ->capture_default_str();
  train_cmd->add_option("--lr", tr.cfg.optimizer.learning_rate, "RMSProp learning rate")
      ->capture_default_str();
  train_cmd->add_option("--alpha", tr.cfg.optimizer.alpha, "RMSProp decay")
      ->capture_default_str();
  train_cmd->add_option("--clip-norm", tr.cfg.clip_norm, "Global gradient norm cap (<= 0 off)")
      ->capture_default_str();
  train_cmd->add_option("--patience", tr.cfg.patience)->capture_default_str();
  train_cmd->add_option("--max-epochs", tr.cfg.max_epochs)->capture_default_str();
  train_cmd->add_option("--seed", tr.cfg.seed)->capture_default_str();
  train_cmd->add_option("--checkpoint", tr.checkpoint, "Output checkpoint")
      ->capture_default_str();
  train_cmd->add_option("--report", tr.report, "Per-epoch CSV (default: next to checkpoint)");
  train_cmd->add_option("--config", tr.config, "key = value defaults");
  train_cmd->add_flag("--quiet", tr.quiet, "No per-epoch lines");

  EvaluateArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Test-split MAE, MAPE and RMSE per checkpoint");
  eval_cmd->add_option("--data", ev.data, "Speed CSV");
  eval_cmd->add_option("--checkpoint", ev.checkpoints, "Checkpoint (repeatable)");
  eval_cmd->add_option("--model", ev.models, "Only these model kinds (repeatable)");
  eval_cmd->add_option("--split", ev.split, "Override the checkpoint's split");
  eval_cmd->add_option("--out", ev.out_csv, "Append CSV rows here instead of stdout");
  eval_cmd->add_option("--per-node", ev.per_node, "Per-node MAE CSV");
  eval_cmd->add_option("--config", ev.config, "key = value defaults");

  ExportArgs ex;
  auto* export_cmd = app.add_subcommand("export-weights", "Write the averaged TGC weight matrix");
  export_cmd->add_option("--checkpoint", ex.checkpoint, "TGC-LSTM checkpoint");
  export_cmd->add_option("--out", ex.out_csv, "Output CSV");

  GradcheckArgs gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  gc_cmd->add_option("--n", gc.opt.nodes, "Nodes")->capture_default_str();
  gc_cmd->add_option("--k", gc.opt.order, "Hop order")->capture_default_str();
  gc_cmd->add_option("--t", gc.opt.steps, "Sequence length")->capture_default_str();
  gc_cmd->add_option("--seed", gc.opt.seed, "First seed")->capture_default_str();
  gc_cmd->add_option("--seeds", gc.seeds, "Number of consecutive seeds")->capture_default_str();
  gc_cmd->add_option("--tolerance", gc.opt.tolerance)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << help_for(app);
    return 2;
  }

  try {
    if (prep_cmd->parsed()) return run_prep_graph(prep_cmd, prep, out);
    if (gen_cmd->parsed()) return run_gen_synthetic(gen_cmd, gen, out);
    if (train_cmd->parsed()) return run_train(train_cmd, tr, out);
    if (eval_cmd->parsed()) return run_evaluate(eval_cmd, ev, out);
    if (export_cmd->parsed()) return run_export(ex, out);
    if (gc_cmd->parsed()) return run_gradcheck(gc, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << help_for(app);
    return 2;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << help_for(app);
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace tgclstm
