#pragma once

#include <span>
#include <vector>

#include "ugmae/backbone.hpp"
#include "ugmae/graph.hpp"
#include "ugmae/rng.hpp"

namespace ugmae {

struct SamplerConfig {
  int model_dim = 16;  // attention width
  int heads = 2;
};

/// Node scorer P = softmax(FFN(MHA(X))). The attention runs over the full node
/// set without graph structure. Parameter names all start with "sampler/".
struct AdaptiveSampler {
  SamplerConfig config;
  int feature_dim = 0;
  Parameters params;

  AdaptiveSampler() = default;
  AdaptiveSampler(int feature_dim, const SamplerConfig& cfg, Rng& rng);
};

/// log P as an N x 1 column.
Variable log_scores(const AdaptiveSampler& sampler, ParamBinding& params, const Variable& features);

/// P over nodes; entries positive and summing to one.
Vec score_nodes(const AdaptiveSampler& sampler, const Mat& features);

/// k = mask_count(N, p_f) distinct nodes drawn without replacement from P
/// (Gumbel top-k), returned sorted.
std::vector<int> sample_feature_mask(const Vec& probabilities, double p_f, Rng& rng);

/// Uniform k-subset; the fallback used when adaptive masking is disabled.
std::vector<int> sample_uniform_mask(int num_nodes, double p_f, Rng& rng);

/// Independent Bernoulli(p_s) per index, sorted.
std::vector<int> sample_structure_mask(std::size_t num_edges, double p_s, Rng& rng);

/// One Bernoulli(p_s) draw per undirected edge, applied to both stored arcs.
/// Self-loops are never masked. Arcs without a stored reverse draw on their own.
std::vector<int> sample_structure_mask(const Graph& g, double p_s, Rng& rng);

/// -sum_{v in masked} log P^v * reward_v with rewards as constants.
Variable sampling_loss(const Variable& log_probabilities, std::span<const int> masked_nodes, const Vec& rewards);
Real sampling_loss(const Vec& probabilities, std::span<const int> masked_nodes, const Vec& rewards);

}  // namespace ugmae
