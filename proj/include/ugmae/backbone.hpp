#pragma once

#include <span>
#include <string>

#include "ugmae/graph.hpp"
#include "ugmae/parameters.hpp"

namespace ugmae {

/// Message-passing family used for every encoder/decoder layer.
enum class Architecture {
  kAttention,    // multi-head attention aggregation (GAT-style)
  kSum,          // sum aggregation + two-layer MLP (GIN-style)
  kMean,         // symmetric-normalised mean aggregation (GCN-style)
  kFeatureOnly,  // per-node affine map, ignores edges (MLP)
};

enum class Activation { kElu, kRelu, kLeakyRelu, kTanh };

Architecture parse_architecture(std::string_view name);
std::string_view to_string(Architecture arch);
Activation parse_activation(std::string_view name);
std::string_view to_string(Activation act);

struct BackboneConfig {
  Architecture arch = Architecture::kAttention;
  int feature_dim = 0;  // 0 = take the width of the training data
  int hidden_dim = 64;
  int num_layers = 2;      // encoder depth
  int decoder_layers = 1;  // decoder depth
  int heads = 4;           // attention heads in hidden layers; output layers use one
  Activation activation = Activation::kElu;
  double negative_slope = 0.2;  // leaky slope inside attention scores
};

/// Encoder f_E, decoder f_D, the two mask tokens and the shared projection.
///
/// Parameter names:
///   encoder/layer<i>/..., decoder/layer<i>/...   message-passing layers
///   proj/weight0, proj/bias0, proj/weight1, proj/bias1
///   token/fmask (1 x feature_dim), token/dm (1 x hidden_dim)
struct Backbone {
  BackboneConfig config;
  Parameters params;

  Backbone() = default;
  Backbone(const BackboneConfig& cfg, Rng& rng);
};

using Variable = Var<Real>;
using ParamBinding = Binding<Real>;

/// H = f_E(edges, X). `params` resolves encoder/... names.
Variable encode(const BackboneConfig& cfg, ParamBinding& params, int num_nodes, std::span<const Edge> edges,
                const Variable& features);

/// Z = f_D(edges, H). `params` resolves decoder/... names.
Variable decode(const BackboneConfig& cfg, ParamBinding& params, int num_nodes, std::span<const Edge> edges,
                const Variable& hidden);

/// Rows of H at masked_nodes replaced by the [DM] token.
Variable remask(const Variable& hidden, std::span<const int> masked_nodes, const Variable& dm_token);

/// Two-layer projection proj(H) with one hidden nonlinearity.
Variable project(const BackboneConfig& cfg, ParamBinding& params, const Variable& hidden);

// Value-level conveniences running on a throwaway tape with constant parameters.
Mat encode(const Backbone& b, int num_nodes, std::span<const Edge> edges, const Mat& features);
Mat decode(const Backbone& b, int num_nodes, std::span<const Edge> edges, const Mat& hidden);
Mat project(const Backbone& b, const Mat& hidden);
Mat remask(const Mat& hidden, std::span<const int> masked_nodes, const Eigen::Ref<const Eigen::RowVectorXd>& dm_token);

}  // namespace ugmae
