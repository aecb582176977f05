#include "ugmae/commands.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "ugmae/checkpoint.hpp"
#include "ugmae/config.hpp"
#include "ugmae/plot.hpp"

namespace ugmae {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfigError:
    case ErrorKind::kInvalidRate:
    case ErrorKind::kFormatError:
    case ErrorKind::kInvalidNodeId:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

nlohmann::json to_json(const RunManifest& m) {
  return {{"command", m.command},         {"config_path", m.config_path}, {"output_dir", m.output_dir},
          {"started_at", m.started_at},   {"finished_at", m.finished_at}, {"config_digest", m.config_digest},
          {"dataset", m.dataset},         {"seed", m.seed}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

StagedOutput::StagedOutput(fs::path target, bool force) : target_(std::move(target)) {
  if (target_.empty()) throw Error(ErrorKind::kConfigError, "--out is required");
  if (target_.filename().empty()) target_ = target_.parent_path();
  if (fs::exists(target_) && !force)
    throw Error(ErrorKind::kConfigError, "output directory " + target_.string() + " exists; pass --force to replace it");
  const fs::path parent = target_.has_parent_path() ? target_.parent_path() : fs::path(".");
  fs::create_directories(parent);
  staging_ = parent / ("." + target_.filename().string() + ".partial-" + std::to_string(::getpid()));
  fs::remove_all(staging_);
  fs::create_directories(staging_);
}

StagedOutput::~StagedOutput() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }
}

void StagedOutput::commit() {
  fs::path old;
  if (fs::exists(target_)) {
    old = target_;
    old += ".old-" + std::to_string(::getpid());
    fs::rename(target_, old);
  }
  fs::rename(staging_, target_);
  committed_ = true;
  if (!old.empty()) fs::remove_all(old);
}

std::string metrics_csv_header() { return "epoch,fr,sample,sr,bs,ca,total\n"; }

std::string metrics_csv_row(int epoch, const LossReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", epoch, r.fr, r.sample, r.sr, r.bs, r.ca,
                r.total);
  return buf;
}

TrainConfig ablated(TrainConfig cfg, const std::string& component) {
  if (component == "AM")
    cfg.adaptive_mask = false;
  else if (component == "SR")
    cfg.loss.weights.sr = 0.0;
  else if (component == "BS")
    cfg.loss.weights.bs = 0.0;
  else if (component == "CA")
    cfg.loss.weights.ca = 0.0;
  else
    throw Error(ErrorKind::kConfigError, "unknown component '" + component + "' (expected AM, SR, BS or CA)");
  return cfg;
}

namespace {

std::vector<std::string> split_list(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream in(list);
  for (std::string item; std::getline(in, item, ',');) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIoError, "write failed for " + path.string());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::string> parse_components(const std::string& list) {
  std::vector<std::string> out;
  for (const auto& c : split_list(list)) {
    ablated(TrainConfig{}, c);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

std::vector<double> default_grid(const std::string& param) {
  if (param == "p_f") return {0.25, 0.375, 0.5, 0.625, 0.75};
  if (param == "p_s") return {0.1, 0.2, 0.3, 0.4, 0.5};
  throw Error(ErrorKind::kConfigError, "--param must be p_f or p_s");
}

Split probe_split(const Dataset& dataset) {
  if (!dataset.graph.labels) throw Error(ErrorKind::kMissingLabels, "dataset " + dataset.spec.name + " has no labels");
  if (!dataset.spec.split.train.empty() && !dataset.spec.split.test.empty()) return dataset.spec.split;
  std::map<int, int> sizes;
  for (int label : *dataset.graph.labels) ++sizes[label];
  int smallest = std::numeric_limits<int>::max();
  for (const auto& [_, count] : sizes) smallest = std::min(smallest, count);
  return make_split(*dataset.graph.labels, std::min(20, std::max(1, smallest / 2)), 0, 0);
}

double pretrain_and_probe(const Dataset& dataset, const TrainConfig& cfg, const std::optional<fs::path>& dir,
                          const ProbeConfig& probe) {
  const Split split = probe_split(dataset);
  std::string metrics = metrics_csv_header();
  PretrainOptions options;
  options.on_epoch = [&](int epoch, const LossReport& r) { metrics += metrics_csv_row(epoch, r); };
  if (dir && cfg.checkpoint_every > 0) {
    fs::create_directories(*dir / "checkpoints");
    options.on_checkpoint = [&](const Checkpoint& c) {
      save_checkpoint(c, *dir / "checkpoints" / ("epoch-" + std::to_string(c.epoch) + ".bin"));
    };
  }
  const Checkpoint ckpt = pretrain(dataset.graph, cfg, options);
  if (dir) {
    fs::create_directories(*dir);
    save_checkpoint(ckpt, *dir / "checkpoint.bin");
    write_file(*dir / "metrics.csv", metrics);
  }
  const Mat h = embed_nodes(backbone_from_checkpoint(ckpt), dataset.graph);
  return linear_probe(h, *dataset.graph.labels, split, probe).accuracy_mean;
}

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string dataset = "sbm";
  std::string features = "file";
  int max_degree = 64;
  bool force = false;
};

void add_dataset_options(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--dataset", a.dataset, "Built-in name (sbm, sbm:<seed>) or dataset directory")
      ->capture_default_str();
  cmd->add_option("--features", a.features, "Node features: file or degree-onehot")
      ->check(CLI::IsMember({"file", "degree-onehot"}))
      ->capture_default_str();
  cmd->add_option("--max-degree", a.max_degree, "Cap for degree one-hot features")->capture_default_str();
}

void add_common(CLI::App* cmd, CommonArgs& a, bool config) {
  if (config) cmd->add_option("--config", a.config_path, "JSON training config");
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--seed", a.seed, "Overrides the config seed");
  cmd->add_flag("--force", a.force, "Replace an existing output directory");
  add_dataset_options(cmd, a);
}

TrainConfig resolve_config(const CommonArgs& a) {
  TrainConfig cfg;
  if (!a.config_path.empty()) {
    if (!fs::exists(a.config_path)) throw Error(ErrorKind::kConfigError, "config file not found: " + a.config_path);
    cfg = load_train_config(a.config_path);
  }
  if (a.seed) cfg.seed = *a.seed;
  return cfg;
}

Dataset resolve(const CommonArgs& a) {
  LoadOptions options;
  options.features = a.features == "degree-onehot" ? FeatureMode::kDegreeOneHot : FeatureMode::kFile;
  options.max_degree = a.max_degree;
  return resolve_dataset(a.dataset, options);
}

/// Feature width bound to the data so the digest describes the actual model.
TrainConfig bind_to_data(TrainConfig cfg, const Dataset& ds) {
  if (cfg.backbone.feature_dim <= 0) cfg.backbone.feature_dim = static_cast<int>(ds.graph.feature_dim());
  if (cfg.backbone.feature_dim != ds.graph.feature_dim())
    throw Error(ErrorKind::kConfigError, "backbone.feature_dim is " + std::to_string(cfg.backbone.feature_dim) +
                                             " but the dataset has " + std::to_string(ds.graph.feature_dim()) +
                                             " feature columns");
  validate_train_config(cfg);
  return cfg;
}

RunManifest begin_manifest(const std::string& command, const CommonArgs& a, const std::string& digest,
                           std::uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.config_path = a.config_path;
  m.output_dir = a.out;
  m.started_at = utc_timestamp();
  m.config_digest = digest;
  m.dataset = a.dataset;
  m.seed = seed;
  return m;
}

void finish(StagedOutput& output, RunManifest& manifest) {
  manifest.finished_at = utc_timestamp();
  write_file(output.path() / "manifest.json", to_json(manifest).dump(2) + "\n");
  output.commit();
}

int cmd_pretrain(const CommonArgs& a, std::ostream& out) {
  const Dataset ds = resolve(a);
  const TrainConfig cfg = bind_to_data(resolve_config(a), ds);
  const std::string digest = config_digest(cfg);
  StagedOutput output(a.out, a.force);
  RunManifest manifest = begin_manifest("pretrain", a, digest, cfg.seed);
  write_file(output.path() / "config.json", config_to_json(cfg).dump(2) + "\n");

  std::ofstream metrics(output.path() / "metrics.csv");
  metrics << metrics_csv_header();
  PretrainOptions options;
  options.on_epoch = [&](int epoch, const LossReport& r) { metrics << metrics_csv_row(epoch, r); };
  if (cfg.checkpoint_every > 0) {
    fs::create_directories(output.path() / "checkpoints");
    options.on_checkpoint = [&](const Checkpoint& c) {
      save_checkpoint(c, output.path() / "checkpoints" / ("epoch-" + std::to_string(c.epoch) + ".bin"));
    };
  }
  const Checkpoint ckpt = pretrain(ds.graph, cfg, options);
  metrics.close();
  if (!metrics) throw Error(ErrorKind::kIoError, "failed writing metrics.csv");
  save_checkpoint(ckpt, output.path() / "checkpoint.bin");
  finish(output, manifest);
  out << "pretrained " << cfg.epochs << " epochs on " << ds.spec.name << " -> " << output.target().string() << "\n";
  return kExitOk;
}

struct CheckpointArgs {
  CommonArgs common;
  std::string checkpoint;
  std::string projection = "pca";
};

Checkpoint load_compatible(const std::string& path, const Dataset& ds, Backbone& backbone) {
  if (!fs::exists(path)) throw Error(ErrorKind::kConfigError, "checkpoint not found: " + path);
  Checkpoint ckpt = load_checkpoint(path);
  backbone = backbone_from_checkpoint(ckpt);
  if (backbone.config.feature_dim != ds.graph.feature_dim())
    throw Error(ErrorKind::kIncompatibleCheckpoint, "checkpoint expects " + std::to_string(backbone.config.feature_dim) +
                                                        " feature columns, dataset has " +
                                                        std::to_string(ds.graph.feature_dim()));
  return ckpt;
}

int cmd_probe(const CheckpointArgs& a, std::ostream& out) {
  const Dataset ds = resolve(a.common);
  Backbone backbone;
  const Checkpoint ckpt = load_compatible(a.checkpoint, ds, backbone);
  StagedOutput output(a.common.out, a.common.force);
  ProbeConfig probe;
  if (a.common.seed) probe.seed = *a.common.seed;
  RunManifest manifest = begin_manifest("probe", a.common, ckpt.config_digest, probe.seed);
  manifest.config_path = a.checkpoint;
  const Split split = probe_split(ds);  // raises MissingLabels first
  const ProbeResult result = linear_probe(embed_nodes(backbone, ds.graph), *ds.graph.labels, split, probe);
  write_probe_csv(output.path() / "probe.csv", ds.spec.name, result);
  write_probe_summary(output.path() / "summary.json", ds.spec.name, result);
  finish(output, manifest);
  out << "accuracy " << fmt(result.accuracy_mean) << " +- " << fmt(result.accuracy_std) << "\n";
  return kExitOk;
}

int cmd_plot(const CheckpointArgs& a, std::ostream& out) {
  const Projection projection = parse_projection(a.projection);
  const Dataset ds = resolve(a.common);
  if (!ds.graph.labels) throw Error(ErrorKind::kMissingLabels, "plot-embeddings needs a labelled dataset");
  Backbone backbone;
  const Checkpoint ckpt = load_compatible(a.checkpoint, ds, backbone);
  StagedOutput output(a.common.out, a.common.force);
  RunManifest manifest = begin_manifest("plot-embeddings", a.common, ckpt.config_digest, 0);
  manifest.config_path = a.checkpoint;
  const Mat xy = project_2d(embed_nodes(backbone, ds.graph), projection);
  std::string csv = "node,label,x,y\n";
  for (Index v = 0; v < xy.rows(); ++v)
    csv += std::to_string(v) + "," + std::to_string((*ds.graph.labels)[static_cast<std::size_t>(v)]) + "," +
           fmt(xy(v, 0)) + "," + fmt(xy(v, 1)) + "\n";
  write_file(output.path() / "coordinates.csv", csv);
  write_file(output.path() / "embeddings.svg", scatter_svg(xy, *ds.graph.labels, ds.spec.name + " embeddings"));
  finish(output, manifest);
  out << "wrote " << xy.rows() << " points -> " << output.target().string() << "\n";
  return kExitOk;
}

struct ExperimentArgs {
  CommonArgs common;
  std::string components;
  std::string param;
  std::string values;
  int runs = 1;
};

/// Mean and sample std of probe accuracy over `runs` consecutive seeds.
ProbeResult repeated(const Dataset& ds, const TrainConfig& cfg, int runs, const fs::path& dir) {
  std::vector<double> accuracies;
  for (int r = 0; r < runs; ++r) {
    TrainConfig run = cfg;
    run.seed = cfg.seed + static_cast<std::uint64_t>(r);
    accuracies.push_back(pretrain_and_probe(ds, run, dir / ("seed-" + std::to_string(run.seed))));
  }
  return summarize(std::move(accuracies));
}

int cmd_ablate(const ExperimentArgs& a, std::ostream& out) {
  if (a.runs < 1) throw Error(ErrorKind::kConfigError, "--runs must be at least 1");
  const std::vector<std::string> components = parse_components(a.components);
  const Dataset ds = resolve(a.common);
  const TrainConfig cfg = bind_to_data(resolve_config(a.common), ds);
  StagedOutput output(a.common.out, a.common.force);
  RunManifest manifest = begin_manifest("ablate", a.common, config_digest(cfg), cfg.seed);

  std::string table = "variant,removed,accuracy_mean,accuracy_std,runs\n";
  auto run_variant = [&](const std::string& name, const std::string& removed, const TrainConfig& variant) {
    const ProbeResult r = repeated(ds, variant, a.runs, output.path() / name);
    table += name + "," + removed + "," + fmt(r.accuracy_mean) + "," + fmt(r.accuracy_std) + "," +
             std::to_string(a.runs) + "\n";
    out << name << ": " << fmt(r.accuracy_mean) << "\n";
  };
  run_variant("full", "", cfg);
  for (const auto& c : components) run_variant("without-" + c, c, ablated(cfg, c));
  write_file(output.path() / "ablation.csv", table);
  finish(output, manifest);
  return kExitOk;
}

int cmd_sweep(const ExperimentArgs& a, std::ostream& out) {
  if (a.runs < 1) throw Error(ErrorKind::kConfigError, "--runs must be at least 1");
  std::vector<double> values = default_grid(a.param);
  if (!a.values.empty()) {
    values.clear();
    for (const auto& item : split_list(a.values)) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size()) throw Error(ErrorKind::kConfigError, "--values: cannot parse '" + item + "'");
      values.push_back(v);
    }
    if (values.empty()) throw Error(ErrorKind::kConfigError, "--values is empty");
  }
  const Dataset ds = resolve(a.common);
  const TrainConfig base = bind_to_data(resolve_config(a.common), ds);
  // Every rate is validated before the first run starts.
  std::vector<TrainConfig> variants;
  for (double v : values) {
    TrainConfig c = base;
    (a.param == "p_f" ? c.p_f : c.p_s) = v;
    validate_train_config(c);
    variants.push_back(c);
  }
  StagedOutput output(a.common.out, a.common.force);
  RunManifest manifest = begin_manifest("sweep", a.common, config_digest(base), base.seed);

  std::string csv = "value,mean,std\n";
  std::vector<double> means, stds;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const ProbeResult r = repeated(ds, variants[i], a.runs, output.path() / (a.param + "-" + fmt(values[i])));
    csv += fmt(values[i]) + "," + fmt(r.accuracy_mean) + "," + fmt(r.accuracy_std) + "\n";
    means.push_back(r.accuracy_mean);
    stds.push_back(r.accuracy_std);
    out << a.param << "=" << fmt(values[i]) << ": " << fmt(r.accuracy_mean) << "\n";
  }
  write_file(output.path() / "sweep.csv", csv);
  write_file(output.path() / "sweep.svg",
             line_svg(values, means, stds, a.param, "probe accuracy (%)", "accuracy vs " + a.param));
  finish(output, manifest);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph masked autoencoder pretraining and evaluation"};
  app.require_subcommand(1);

  CommonArgs pretrain_args;
  CLI::App* pretrain_cmd = app.add_subcommand("pretrain", "Pretrain an encoder, write checkpoint and metrics");
  add_common(pretrain_cmd, pretrain_args, true);

  CheckpointArgs probe_args;
  CLI::App* probe_cmd = app.add_subcommand("probe", "Linear-probe a checkpoint on a labelled dataset");
  add_common(probe_cmd, probe_args.common, false);
  probe_cmd->add_option("--checkpoint", probe_args.checkpoint, "Checkpoint file")->required();

  ExperimentArgs ablate_args;
  CLI::App* ablate_cmd = app.add_subcommand("ablate", "Remove components one at a time and compare");
  add_common(ablate_cmd, ablate_args.common, true);
  ablate_cmd->add_option("--components", ablate_args.components, "Subset of AM,SR,BS,CA")
      ->default_str("AM,SR,BS,CA");
  ablate_args.components = "AM,SR,BS,CA";
  ablate_cmd->add_option("--runs", ablate_args.runs, "Seeds per variant")->capture_default_str();

  ExperimentArgs sweep_args;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Probe accuracy across mask rates");
  add_common(sweep_cmd, sweep_args.common, true);
  sweep_cmd->add_option("--param", sweep_args.param, "p_f or p_s")->required();
  sweep_cmd->add_option("--values", sweep_args.values, "Comma-separated rates (default grid when omitted)");
  sweep_cmd->add_option("--runs", sweep_args.runs, "Seeds per value")->capture_default_str();

  CheckpointArgs plot_args;
  CLI::App* plot_cmd = app.add_subcommand("plot-embeddings", "2-D projection of node embeddings");
  add_common(plot_cmd, plot_args.common, false);
  plot_cmd->add_option("--checkpoint", plot_args.checkpoint, "Checkpoint file")->required();
  plot_cmd->add_option("--projection", plot_args.projection, "pca or identity")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (pretrain_cmd->parsed()) return cmd_pretrain(pretrain_args, out);
    if (probe_cmd->parsed()) return cmd_probe(probe_args, out);
    if (ablate_cmd->parsed()) return cmd_ablate(ablate_args, out);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_args, out);
    if (plot_cmd->parsed()) return cmd_plot(plot_args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ugmae
