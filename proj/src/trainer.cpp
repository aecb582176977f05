#include "ugmae/trainer.hpp"

#include <cmath>

#include "ugmae/config.hpp"

namespace ugmae {

void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.p_f > 0.0 && cfg.p_f <= 1.0)) throw Error(ErrorKind::kInvalidRate, "p_f must lie in (0, 1]");
  if (!(cfg.p_s >= 0.0 && cfg.p_s < 1.0)) throw Error(ErrorKind::kInvalidRate, "p_s must lie in [0, 1)");
  if (cfg.epochs < 1) throw Error(ErrorKind::kConfigError, "epochs must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw Error(ErrorKind::kConfigError, "learning_rate must be > 0");
  if (!(cfg.weight_decay >= 0.0)) throw Error(ErrorKind::kConfigError, "weight_decay must be >= 0");
  if (cfg.optimizer != "adam") throw Error(ErrorKind::kConfigError, "optimizer must be \"adam\"");
  if (!(cfg.tau >= 0.0 && cfg.tau <= 1.0)) throw Error(ErrorKind::kConfigError, "tau must lie in [0, 1]");
  if (cfg.checkpoint_every < 0) throw Error(ErrorKind::kConfigError, "checkpoint_every must be >= 0");
  validate_loss_config(cfg.loss);
}

TrainingState init_training(const Graph& graph, const TrainConfig& cfg_in) {
  validate_graph(graph);
  TrainConfig cfg = cfg_in;
  if (cfg.backbone.feature_dim <= 0) cfg.backbone.feature_dim = static_cast<int>(graph.feature_dim());
  if (cfg.backbone.feature_dim != graph.feature_dim())
    throw Error(ErrorKind::kShapeMismatch, "configured feature_dim differs from the data");
  validate_train_config(cfg);

  TrainingState state{cfg, {}, Adam(AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.weight_decay}), Rng(cfg.seed), 0};
  state.model.backbone = Backbone(cfg.backbone, state.rng);
  state.model.sampler = AdaptiveSampler(cfg.backbone.feature_dim, cfg.sampler, state.rng);
  state.model.shadow = init_shadow(tracked_parameters(state.model.backbone), cfg.tau);
  return state;
}

StepPlan draw_step_plan(const Graph& graph, const std::optional<Vec>& probabilities, const TrainConfig& cfg, Rng& rng) {
  StepPlan plan;
  plan.mask.p_f = cfg.p_f;
  plan.mask.p_s = cfg.p_s;
  plan.mask.masked_nodes = probabilities ? sample_feature_mask(*probabilities, cfg.p_f, rng)
                                         : sample_uniform_mask(graph.num_nodes, cfg.p_f, rng);
  plan.mask.masked_edges = sample_structure_mask(graph, cfg.p_s, rng);
  plan.visible_edges = apply_structure_mask(graph, plan.mask);
  plan.negatives = sample_negatives(graph.num_nodes, plan.visible_edges, rng);
  return plan;
}

LossTerms build_losses(const TrainConfig& cfg, const Graph& graph, const StepPlan& plan, LossBindings bindings,
                       const Variable& log_probabilities) {
  ParamBinding& live = bindings.live;
  ParamBinding& shadow = bindings.shadow;
  Tape<Real>& tape = live.tape();
  const BackboneConfig& bb = cfg.backbone;
  const LossConfig& lc = cfg.loss;
  const int n = graph.num_nodes;
  const std::span<const Edge> all_edges(graph.edges);
  const std::span<const Edge> visible(plan.visible_edges);
  const std::span<const int> masked(plan.mask.masked_nodes);

  const Variable x = tape.constant(graph.features);
  const Variable x_masked = replace_rows(x, masked, live("token/fmask"));

  // feature branch over the full arc set
  const Variable h1 = encode(bb, live, n, all_edges, x_masked);
  const Variable z1 = decode(bb, live, n, all_edges, remask(h1, masked, live("token/dm")));
  // structure branch over the visible arcs
  const Variable h2 = encode(bb, live, n, visible, x);
  const Variable z2 = decode(bb, live, n, visible, h2);
  // momentum passes with the shadow state from the start of the step
  const Variable h1_star = momentum_encode(bb, shadow, n, all_edges, x_masked);
  const Variable h2_star = momentum_encode(bb, shadow, n, visible, x);
  const Variable z1_star = momentum_decode(bb, shadow, n, all_edges, h1_star);

  const Variable h1_proj = project(bb, live, h1);
  const Variable h2_proj = project(bb, live, h2);

  LossTerms terms;
  terms.fr = feature_reconstruction_loss(x, z1, masked, lc.alpha, lc.epsilon);
  if (log_probabilities.valid()) {
    Vec rewards = terms.fr.per_node.value().col(0);
    if (lc.sample_baseline) rewards.array() -= rewards.mean();
    terms.sample = sampling_loss(log_probabilities, masked, rewards);
  } else {
    terms.sample = tape.constant(Mat::Zero(1, 1));
  }
  terms.sr = structure_reconstruction_loss(z2, visible, std::span<const int>(plan.negatives), lc.margin);
  terms.bs = bootstrapping_similarity_loss(h1_proj, h2_proj, h1_star, h2_star, lc.epsilon);
  terms.ca = consistency_loss(z1, z1_star, masked, lc.beta, lc.epsilon);

  const LossWeights& w = lc.weights;
  terms.total = affine(terms.fr.loss, w.fr) + affine(terms.sample, w.sample) + affine(terms.sr, w.sr) +
                affine(terms.bs, w.bs) + affine(terms.ca, w.ca);
  return terms;
}

LossReport to_report(const LossTerms& terms) {
  LossReport r;
  r.fr = terms.fr.loss.scalar();
  r.sample = terms.sample.scalar();
  r.sr = terms.sr.scalar();
  r.bs = terms.bs.scalar();
  r.ca = terms.ca.scalar();
  r.total = terms.total.scalar();
  return r;
}

LossReport train_step(TrainingState& state, const Graph& graph) {
  const TrainConfig& cfg = state.config;
  Model& model = state.model;

  Tape<Real> tape;
  Parameters backbone_grads = model.backbone.params.zeros_like();
  Parameters sampler_grads = model.sampler.params.zeros_like();
  ParamBinding live(tape, model.backbone.params, &backbone_grads);
  ParamBinding sampler(tape, model.sampler.params, &sampler_grads);
  ParamBinding shadow(tape, model.shadow.params);

  Variable log_p;
  std::optional<Vec> probabilities;
  if (cfg.adaptive_mask) {
    log_p = log_scores(model.sampler, sampler, tape.constant(graph.features));
    probabilities = log_p.value().col(0).array().exp().matrix();
  }
  const StepPlan plan = draw_step_plan(graph, probabilities, cfg, state.rng);
  const LossTerms terms = build_losses(cfg, graph, plan, {live, shadow}, log_p);

  LossReport report = to_report(terms);
  const double expected_total = combine(report, cfg.loss);  // throws NonFiniteLoss
  if (!std::isfinite(report.total) || !std::isfinite(expected_total))
    throw Error(ErrorKind::kNonFiniteLoss, "total loss is not finite at epoch " + std::to_string(state.epoch + 1));

  tape.backward(terms.total);
  state.optimizer.step(model.backbone.params, backbone_grads);
  if (cfg.adaptive_mask) state.optimizer.step(model.sampler.params, sampler_grads);
  ema_update(model.shadow, model.backbone.params);
  ++state.epoch;
  return report;
}

Checkpoint make_checkpoint(const TrainingState& state) {
  Checkpoint ckpt;
  ckpt.config_json = config_to_json(state.config).dump();
  ckpt.config_digest = config_digest(state.config);
  ckpt.live = state.model.backbone.params;
  ckpt.shadow = state.model.shadow.params;
  ckpt.sampler = state.model.sampler.params;
  ckpt.optimizer = state.optimizer.state();
  ckpt.epoch = state.epoch;
  ckpt.rng_state = state.rng.state();
  return ckpt;
}

namespace {

void require_congruent(const Parameters& expected, const Parameters& actual, const char* what) {
  if (!expected.congruent(actual))
    throw Error(ErrorKind::kIncompatibleCheckpoint, std::string(what) + " parameters do not match the configuration");
}

}  // namespace

TrainingState restore_training(const Checkpoint& ckpt) {
  const TrainConfig cfg = config_from_json(nlohmann::json::parse(ckpt.config_json));
  TrainingState state{cfg, {}, Adam(AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.weight_decay}), Rng(cfg.seed), 0};
  Rng scratch(cfg.seed);
  state.model.backbone = Backbone(cfg.backbone, scratch);
  state.model.sampler = AdaptiveSampler(cfg.backbone.feature_dim, cfg.sampler, scratch);
  require_congruent(state.model.backbone.params, ckpt.live, "backbone");
  require_congruent(state.model.sampler.params, ckpt.sampler, "sampler");
  require_congruent(tracked_parameters(state.model.backbone), ckpt.shadow, "shadow");
  state.model.backbone.params = ckpt.live;
  state.model.sampler.params = ckpt.sampler;
  state.model.shadow = EmaShadow{ckpt.shadow, cfg.tau};
  state.optimizer.load_state(ckpt.optimizer);
  state.rng.set_state(ckpt.rng_state);
  state.epoch = static_cast<int>(ckpt.epoch);
  return state;
}

Checkpoint pretrain(const Graph& graph, const TrainConfig& cfg, const PretrainOptions& options) {
  TrainingState state = options.resume != nullptr ? restore_training(*options.resume) : init_training(graph, cfg);
  if (options.resume != nullptr) {
    // The run continues under the caller's epoch budget.
    state.config.epochs = cfg.epochs;
    validate_graph(graph);
    if (graph.feature_dim() != state.config.backbone.feature_dim)
      throw Error(ErrorKind::kIncompatibleCheckpoint, "checkpoint feature_dim differs from the data");
  }
  while (state.epoch < state.config.epochs) {
    const LossReport report = train_step(state, graph);
    if (options.on_epoch) options.on_epoch(state.epoch, report);
    if (options.on_checkpoint && state.config.checkpoint_every > 0 && state.epoch % state.config.checkpoint_every == 0)
      options.on_checkpoint(make_checkpoint(state));
  }
  return make_checkpoint(state);
}

Checkpoint pretrain(std::span<const Graph> graphs, const TrainConfig& cfg, const PretrainOptions& options) {
  if (graphs.empty()) throw Error(ErrorKind::kInsufficientData, "pretraining needs at least one graph");
  if (graphs.size() == 1) return pretrain(graphs.front(), cfg, options);
  return pretrain(disjoint_union(graphs), cfg, options);
}

Backbone backbone_from_checkpoint(const Checkpoint& ckpt) {
  const TrainConfig cfg = config_from_json(nlohmann::json::parse(ckpt.config_json));
  Rng scratch(cfg.seed);
  Backbone b(cfg.backbone, scratch);
  require_congruent(b.params, ckpt.live, "backbone");
  b.params = ckpt.live;
  return b;
}

}  // namespace ugmae
