#include "ugmae/backbone.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace ugmae {

Architecture parse_architecture(std::string_view name) {
  if (name == "attention" || name == "gat") return Architecture::kAttention;
  if (name == "sum" || name == "gin") return Architecture::kSum;
  if (name == "mean" || name == "gcn") return Architecture::kMean;
  if (name == "feature-only" || name == "mlp") return Architecture::kFeatureOnly;
  throw Error(ErrorKind::kConfigError, "unknown architecture '" + std::string(name) + "'");
}

std::string_view to_string(Architecture arch) {
  switch (arch) {
    case Architecture::kAttention: return "attention";
    case Architecture::kSum: return "sum";
    case Architecture::kMean: return "mean";
    case Architecture::kFeatureOnly: return "feature-only";
  }
  return "attention";
}

Activation parse_activation(std::string_view name) {
  if (name == "elu") return Activation::kElu;
  if (name == "relu") return Activation::kRelu;
  if (name == "leaky_relu") return Activation::kLeakyRelu;
  if (name == "tanh") return Activation::kTanh;
  throw Error(ErrorKind::kConfigError, "unknown activation '" + std::string(name) + "'");
}

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::kElu: return "elu";
    case Activation::kRelu: return "relu";
    case Activation::kLeakyRelu: return "leaky_relu";
    case Activation::kTanh: return "tanh";
  }
  return "elu";
}

namespace {

struct LayerShape {
  std::string prefix;
  int in = 0;
  int out = 0;
  int heads = 1;
  bool activate = false;
};

std::vector<LayerShape> encoder_layers(const BackboneConfig& cfg) {
  std::vector<LayerShape> layers;
  for (int i = 0; i < cfg.num_layers; ++i) {
    const bool last = i + 1 == cfg.num_layers;
    layers.push_back({"encoder/layer" + std::to_string(i), i == 0 ? cfg.feature_dim : cfg.hidden_dim, cfg.hidden_dim,
                      last ? 1 : cfg.heads, true});
  }
  return layers;
}

std::vector<LayerShape> decoder_layers(const BackboneConfig& cfg) {
  std::vector<LayerShape> layers;
  for (int i = 0; i < cfg.decoder_layers; ++i) {
    const bool last = i + 1 == cfg.decoder_layers;
    layers.push_back({"decoder/layer" + std::to_string(i), cfg.hidden_dim, last ? cfg.feature_dim : cfg.hidden_dim,
                      last ? 1 : cfg.heads, !last});
  }
  return layers;
}

void validate_config(const BackboneConfig& cfg) {
  if (cfg.feature_dim < 1 || cfg.hidden_dim < 1 || cfg.num_layers < 1 || cfg.decoder_layers < 1 || cfg.heads < 1)
    throw Error(ErrorKind::kConfigError, "backbone dimensions and depths must be positive");
  if (cfg.arch == Architecture::kAttention && (cfg.num_layers > 1 || cfg.decoder_layers > 1) &&
      cfg.hidden_dim % cfg.heads != 0)
    throw Error(ErrorKind::kConfigError, "hidden_dim must be divisible by the attention head count");
}

void init_layer(const LayerShape& layer, Architecture arch, Parameters& params, Rng& rng) {
  const std::string& p = layer.prefix;
  switch (arch) {
    case Architecture::kAttention: {
      const int per_head = layer.out / layer.heads;
      params.add(p + "/weight", uniform_fan_in(layer.in, layer.out, layer.in, rng));
      params.add(p + "/attn_src", uniform_fan_in(per_head, layer.heads, per_head, rng));
      params.add(p + "/attn_dst", uniform_fan_in(per_head, layer.heads, per_head, rng));
      params.add(p + "/bias", Mat::Zero(1, layer.out));
      break;
    }
    case Architecture::kSum:
      params.add(p + "/weight0", uniform_fan_in(layer.in, layer.out, layer.in, rng));
      params.add(p + "/bias0", Mat::Zero(1, layer.out));
      params.add(p + "/weight1", uniform_fan_in(layer.out, layer.out, layer.out, rng));
      params.add(p + "/bias1", Mat::Zero(1, layer.out));
      break;
    case Architecture::kMean:
    case Architecture::kFeatureOnly:
      params.add(p + "/weight", uniform_fan_in(layer.in, layer.out, layer.in, rng));
      params.add(p + "/bias", Mat::Zero(1, layer.out));
      break;
  }
}

Variable activate(const Variable& x, const BackboneConfig& cfg) {
  switch (cfg.activation) {
    case Activation::kElu: return elu(x, 1.0);
    case Activation::kRelu: return relu(x);
    case Activation::kLeakyRelu: return leaky_relu(x, 0.01);
    case Activation::kTanh: return tanh(x);
  }
  return x;
}

/// Arc list plus per-arc aggregation weights for one forward pass.
struct MessageGraph {
  std::shared_ptr<const EdgeIndex> index;
  Mat weights;  // E x 1; unused by attention layers
};

MessageGraph build_message_graph(const BackboneConfig& cfg, int num_nodes, std::span<const Edge> edges) {
  MessageGraph mg;
  for (const Edge& e : edges)
    if (e.src < 0 || e.src >= num_nodes || e.dst < 0 || e.dst >= num_nodes)
      throw Error(ErrorKind::kInvalidEdge, "arc endpoint outside node range");
  switch (cfg.arch) {
    case Architecture::kFeatureOnly:
      mg.index = make_edge_index(num_nodes, {}, false);
      break;
    case Architecture::kAttention:
    case Architecture::kSum:
      mg.index = make_edge_index(num_nodes, edges, true);
      mg.weights = Mat::Ones(static_cast<Index>(mg.index->size()), 1);
      break;
    case Architecture::kMean: {
      mg.index = make_edge_index(num_nodes, edges, true);
      std::vector<Real> degree(static_cast<std::size_t>(num_nodes), 0.0);
      for (int d : mg.index->dst) degree[static_cast<std::size_t>(d)] += 1.0;
      mg.weights.resize(static_cast<Index>(mg.index->size()), 1);
      for (std::size_t e = 0; e < mg.index->size(); ++e)
        mg.weights(static_cast<Index>(e), 0) = 1.0 / std::sqrt(degree[static_cast<std::size_t>(mg.index->src[e])] *
                                                               degree[static_cast<std::size_t>(mg.index->dst[e])]);
      break;
    }
  }
  return mg;
}

Variable apply_layer(const BackboneConfig& cfg, const LayerShape& layer, ParamBinding& params, const MessageGraph& mg,
                     const Variable& x) {
  Tape<Real>& tape = x.tape();
  const std::string& p = layer.prefix;
  Variable out;
  switch (cfg.arch) {
    case Architecture::kFeatureOnly:
      out = add_row(matmul(x, params(p + "/weight")), params(p + "/bias"));
      break;
    case Architecture::kMean: {
      const Variable weights = tape.constant(mg.weights);
      out = add_row(propagate(matmul(x, params(p + "/weight")), mg.index, weights), params(p + "/bias"));
      break;
    }
    case Architecture::kSum: {
      const Variable weights = tape.constant(mg.weights);
      const Variable pooled = propagate(x, mg.index, weights);
      const Variable inner = activate(add_row(matmul(pooled, params(p + "/weight0")), params(p + "/bias0")), cfg);
      out = add_row(matmul(inner, params(p + "/weight1")), params(p + "/bias1"));
      break;
    }
    case Architecture::kAttention: {
      const int per_head = layer.out / layer.heads;
      const Variable projected = matmul(x, params(p + "/weight"));
      const Variable attn_src = params(p + "/attn_src");
      const Variable attn_dst = params(p + "/attn_dst");
      std::vector<Variable> heads;
      for (int h = 0; h < layer.heads; ++h) {
        const Variable wh = slice_cols(projected, h * per_head, per_head);
        const Variable score_src = matmul(wh, slice_cols(attn_src, h, 1));
        const Variable score_dst = matmul(wh, slice_cols(attn_dst, h, 1));
        const Variable logits = leaky_relu(gather_rows(score_src, std::span<const int>(mg.index->src)) +
                                               gather_rows(score_dst, std::span<const int>(mg.index->dst)),
                                           cfg.negative_slope);
        heads.push_back(propagate(wh, mg.index, edge_softmax(logits, mg.index)));
      }
      out = add_row(heads.size() == 1 ? heads.front() : concat_cols(heads), params(p + "/bias"));
      break;
    }
  }
  return layer.activate ? activate(out, cfg) : out;
}

Variable run_stack(const BackboneConfig& cfg, const std::vector<LayerShape>& layers, ParamBinding& params,
                   int num_nodes, std::span<const Edge> edges, const Variable& input) {
  if (input.rows() != num_nodes) throw Error(ErrorKind::kShapeMismatch, "input rows differ from node count");
  if (input.cols() != layers.front().in)
    throw Error(ErrorKind::kShapeMismatch, "input width " + std::to_string(input.cols()) + " differs from expected " +
                                               std::to_string(layers.front().in));
  const MessageGraph mg = build_message_graph(cfg, num_nodes, edges);
  Variable h = input;
  for (const LayerShape& layer : layers) h = apply_layer(cfg, layer, params, mg, h);
  return h;
}

}  // namespace

Backbone::Backbone(const BackboneConfig& cfg, Rng& rng) : config(cfg) {
  validate_config(cfg);
  for (const LayerShape& layer : encoder_layers(cfg)) init_layer(layer, cfg.arch, params, rng);
  for (const LayerShape& layer : decoder_layers(cfg)) init_layer(layer, cfg.arch, params, rng);
  params.add("proj/weight0", uniform_fan_in(cfg.hidden_dim, cfg.hidden_dim, cfg.hidden_dim, rng));
  params.add("proj/bias0", Mat::Zero(1, cfg.hidden_dim));
  params.add("proj/weight1", uniform_fan_in(cfg.hidden_dim, cfg.hidden_dim, cfg.hidden_dim, rng));
  params.add("proj/bias1", Mat::Zero(1, cfg.hidden_dim));
  params.add("token/fmask", Mat::Zero(1, cfg.feature_dim));
  params.add("token/dm", Mat::Zero(1, cfg.hidden_dim));
}

Variable encode(const BackboneConfig& cfg, ParamBinding& params, int num_nodes, std::span<const Edge> edges,
                const Variable& features) {
  return run_stack(cfg, encoder_layers(cfg), params, num_nodes, edges, features);
}

Variable decode(const BackboneConfig& cfg, ParamBinding& params, int num_nodes, std::span<const Edge> edges,
                const Variable& hidden) {
  return run_stack(cfg, decoder_layers(cfg), params, num_nodes, edges, hidden);
}

Variable remask(const Variable& hidden, std::span<const int> masked_nodes, const Variable& dm_token) {
  return replace_rows(hidden, masked_nodes, dm_token);
}

Variable project(const BackboneConfig& cfg, ParamBinding& params, const Variable& hidden) {
  if (hidden.cols() != cfg.hidden_dim) throw Error(ErrorKind::kShapeMismatch, "projection input width != hidden_dim");
  const Variable inner = activate(add_row(matmul(hidden, params("proj/weight0")), params("proj/bias0")), cfg);
  return add_row(matmul(inner, params("proj/weight1")), params("proj/bias1"));
}

Mat encode(const Backbone& b, int num_nodes, std::span<const Edge> edges, const Mat& features) {
  Tape<Real> tape;
  ParamBinding params(tape, b.params);
  return encode(b.config, params, num_nodes, edges, tape.constant(features)).value();
}

Mat decode(const Backbone& b, int num_nodes, std::span<const Edge> edges, const Mat& hidden) {
  Tape<Real> tape;
  ParamBinding params(tape, b.params);
  return decode(b.config, params, num_nodes, edges, tape.constant(hidden)).value();
}

Mat project(const Backbone& b, const Mat& hidden) {
  Tape<Real> tape;
  ParamBinding params(tape, b.params);
  return project(b.config, params, tape.constant(hidden)).value();
}

Mat remask(const Mat& hidden, std::span<const int> masked_nodes, const Eigen::Ref<const Eigen::RowVectorXd>& dm_token) {
  if (dm_token.size() != hidden.cols()) throw Error(ErrorKind::kShapeMismatch, "[DM] token length != hidden width");
  Tape<Real> tape;
  return remask(tape.constant(hidden), masked_nodes, tape.constant(Mat(dm_token))).value();
}

}  // namespace ugmae
