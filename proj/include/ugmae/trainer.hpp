#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ugmae/backbone.hpp"
#include "ugmae/mask_gen.hpp"
#include "ugmae/momentum.hpp"
#include "ugmae/objectives.hpp"
#include "ugmae/optimizer.hpp"

namespace ugmae {

struct TrainConfig {
  double p_f = 0.5;
  double p_s = 0.3;
  int epochs = 500;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  std::string optimizer = "adam";
  std::uint64_t seed = 0;
  LossConfig loss;
  double tau = 0.996;
  BackboneConfig backbone;  // feature_dim is taken from the data when 0
  SamplerConfig sampler;
  int checkpoint_every = 0;  // 0 disables intermediate checkpoints
  bool adaptive_mask = true;  // false: uniform masking, sampler frozen
};

void validate_train_config(const TrainConfig& cfg);

/// Random choices of one step, fixed before any loss is evaluated.
struct StepPlan {
  MaskPlan mask;
  std::vector<Edge> visible_edges;
  std::vector<int> negatives;  // one per visible arc
};

struct Model {
  Backbone backbone;
  AdaptiveSampler sampler;
  EmaShadow shadow;
};

/// Everything that evolves during pretraining.
struct TrainingState {
  TrainConfig config;
  Model model;
  Adam optimizer;
  Rng rng;
  int epoch = 0;
};

TrainingState init_training(const Graph& graph, const TrainConfig& cfg);

/// Tape nodes of every objective for one plan.
struct LossTerms {
  FeatureLoss<Real> fr;
  Variable sample;
  Variable sr;
  Variable bs;
  Variable ca;
  Variable total;
};

/// Bindings through which the losses see each parameter family. The shadow
/// binding may be trainable (for audits); momentum outputs are detached anyway.
struct LossBindings {
  ParamBinding& live;
  ParamBinding& shadow;
};

/// Samples masked nodes (adaptive or uniform), masked arcs and negatives.
StepPlan draw_step_plan(const Graph& graph, const std::optional<Vec>& probabilities, const TrainConfig& cfg, Rng& rng);

/// Builds all losses on one tape. `log_probabilities` is the sampler output,
/// or an invalid Var when adaptive masking is off.
LossTerms build_losses(const TrainConfig& cfg, const Graph& graph, const StepPlan& plan, LossBindings bindings,
                       const Variable& log_probabilities);

LossReport to_report(const LossTerms& terms);

/// One optimisation step: plan, losses, backward, Adam on backbone + sampler,
/// then the EMA update of the shadow.
LossReport train_step(TrainingState& state, const Graph& graph);

struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;
  std::string config_json;
  std::string config_digest;
  Parameters live;
  Parameters shadow;
  Parameters sampler;
  Parameters optimizer;
  std::int64_t epoch = 0;
  std::string rng_state;
};

Checkpoint make_checkpoint(const TrainingState& state);
TrainingState restore_training(const Checkpoint& ckpt);

struct PretrainOptions {
  const Checkpoint* resume = nullptr;
  std::function<void(int epoch, const LossReport&)> on_epoch;
  /// Called every config.checkpoint_every epochs when set.
  std::function<void(const Checkpoint&)> on_checkpoint;
};

/// Full-graph pretraining up to cfg.epochs.
Checkpoint pretrain(const Graph& graph, const TrainConfig& cfg, const PretrainOptions& options = {});

/// Several graphs are pretrained as one disjoint union.
Checkpoint pretrain(std::span<const Graph> graphs, const TrainConfig& cfg, const PretrainOptions& options = {});

/// Backbone rebuilt from a checkpoint.
Backbone backbone_from_checkpoint(const Checkpoint& ckpt);

}  // namespace ugmae
