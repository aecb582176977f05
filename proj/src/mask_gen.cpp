#include "ugmae/mask_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ugmae {

AdaptiveSampler::AdaptiveSampler(int feature_dim_, const SamplerConfig& cfg, Rng& rng)
    : config(cfg), feature_dim(feature_dim_) {
  if (feature_dim < 1 || cfg.model_dim < 1 || cfg.heads < 1 || cfg.model_dim % cfg.heads != 0)
    throw Error(ErrorKind::kConfigError, "sampler model_dim must be a positive multiple of heads");
  const int d = feature_dim, m = cfg.model_dim;
  params.add("sampler/mha/query", uniform_fan_in(d, m, d, rng));
  params.add("sampler/mha/key", uniform_fan_in(d, m, d, rng));
  params.add("sampler/mha/value", uniform_fan_in(d, m, d, rng));
  params.add("sampler/mha/out_weight", uniform_fan_in(m, m, m, rng));
  params.add("sampler/mha/out_bias", Mat::Zero(1, m));
  params.add("sampler/ffn/weight0", uniform_fan_in(m, m, m, rng));
  params.add("sampler/ffn/bias0", Mat::Zero(1, m));
  params.add("sampler/ffn/weight1", uniform_fan_in(m, 1, m, rng));
  params.add("sampler/ffn/bias1", Mat::Zero(1, 1));
}

Variable log_scores(const AdaptiveSampler& sampler, ParamBinding& params, const Variable& features) {
  const auto& x = features.value();
  if (x.rows() < 1) throw Error(ErrorKind::kShapeMismatch, "score_nodes needs at least one node");
  if (x.cols() != sampler.feature_dim) throw Error(ErrorKind::kShapeMismatch, "sampler input width != feature_dim");
  if (!x.allFinite()) throw Error(ErrorKind::kNonFiniteInput, "node features contain NaN or Inf");

  const int m = sampler.config.model_dim;
  const int heads = sampler.config.heads;
  const int per_head = m / heads;
  const Real scale = 1.0 / std::sqrt(static_cast<Real>(per_head));

  const Variable q = matmul(features, params("sampler/mha/query"));
  const Variable k = matmul(features, params("sampler/mha/key"));
  const Variable v = matmul(features, params("sampler/mha/value"));
  std::vector<Variable> outputs;
  for (int h = 0; h < heads; ++h) {
    const Variable qh = slice_cols(q, h * per_head, per_head);
    const Variable kh = slice_cols(k, h * per_head, per_head);
    const Variable vh = slice_cols(v, h * per_head, per_head);
    outputs.push_back(matmul(row_softmax(affine(matmul_nt(qh, kh), scale)), vh));
  }
  const Variable attended = heads == 1 ? outputs.front() : concat_cols(outputs);
  const Variable mixed = add_row(matmul(attended, params("sampler/mha/out_weight")), params("sampler/mha/out_bias"));
  const Variable hidden = elu(add_row(matmul(mixed, params("sampler/ffn/weight0")), params("sampler/ffn/bias0")), 1.0);
  const Variable logits = add_row(matmul(hidden, params("sampler/ffn/weight1")), params("sampler/ffn/bias1"));
  return log_softmax(logits);
}

Vec score_nodes(const AdaptiveSampler& sampler, const Mat& features) {
  Tape<Real> tape;
  ParamBinding params(tape, sampler.params);
  return log_scores(sampler, params, tape.constant(features)).value().col(0).array().exp().matrix();
}

namespace {

void check_feature_rate(double p_f) {
  if (!(p_f > 0.0 && p_f <= 1.0)) throw Error(ErrorKind::kInvalidRate, "p_f must lie in (0, 1]");
}

std::vector<int> top_k(const std::vector<double>& keys, int k) {
  std::vector<int> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&keys](int a, int b) {
    const auto ka = keys[static_cast<std::size_t>(a)], kb = keys[static_cast<std::size_t>(b)];
    return ka > kb || (ka == kb && a < b);
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

std::vector<int> sample_feature_mask(const Vec& probabilities, double p_f, Rng& rng) {
  check_feature_rate(p_f);
  const auto n = static_cast<int>(probabilities.size());
  if (n < 1) throw Error(ErrorKind::kShapeMismatch, "empty probability vector");
  if ((probabilities.array() < 0.0).any() || !probabilities.allFinite() || std::abs(probabilities.sum() - 1.0) > 1e-6)
    throw Error(ErrorKind::kNonFiniteInput, "probabilities do not form a distribution");
  // Perturbing log-probabilities with i.i.d. Gumbel noise and keeping the k
  // largest keys reproduces sequential draws without replacement.
  std::vector<double> keys(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) keys[static_cast<std::size_t>(v)] = std::log(probabilities(v)) + rng.gumbel();
  return top_k(keys, mask_count(n, p_f));
}

std::vector<int> sample_uniform_mask(int num_nodes, double p_f, Rng& rng) {
  check_feature_rate(p_f);
  if (num_nodes < 1) throw Error(ErrorKind::kShapeMismatch, "empty node set");
  std::vector<double> keys(static_cast<std::size_t>(num_nodes));
  for (auto& key : keys) key = rng.gumbel();
  return top_k(keys, mask_count(num_nodes, p_f));
}

std::vector<int> sample_structure_mask(std::size_t num_edges, double p_s, Rng& rng) {
  if (!(p_s >= 0.0 && p_s < 1.0)) throw Error(ErrorKind::kInvalidRate, "p_s must lie in [0, 1)");
  std::vector<int> masked;
  for (std::size_t e = 0; e < num_edges; ++e)
    if (rng.bernoulli(p_s)) masked.push_back(static_cast<int>(e));
  return masked;
}

std::vector<int> sample_structure_mask(const Graph& g, double p_s, Rng& rng) {
  if (!(p_s >= 0.0 && p_s < 1.0)) throw Error(ErrorKind::kInvalidRate, "p_s must lie in [0, 1)");
  const std::vector<int> reverse = reverse_arcs(g);
  std::vector<char> masked(g.edges.size(), 0);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (g.edges[e].src == g.edges[e].dst) continue;
    const int partner = reverse[e];
    if (partner >= 0 && static_cast<std::size_t>(partner) < e) continue;  // decided with its partner
    if (rng.bernoulli(p_s)) {
      masked[e] = 1;
      if (partner >= 0) masked[static_cast<std::size_t>(partner)] = 1;
    }
  }
  std::vector<int> out;
  for (std::size_t e = 0; e < masked.size(); ++e)
    if (masked[e]) out.push_back(static_cast<int>(e));
  return out;
}

Variable sampling_loss(const Variable& log_probabilities, std::span<const int> masked_nodes, const Vec& rewards) {
  if (rewards.size() != static_cast<Index>(masked_nodes.size()))
    throw Error(ErrorKind::kShapeMismatch, "one reward per masked node required");
  const Variable picked = gather_rows(log_probabilities, masked_nodes);
  if (!picked.value().allFinite())
    throw Error(ErrorKind::kNumericalUnderflow, "masked node with zero probability");
  const Variable weights = log_probabilities.tape().constant(Mat(rewards));
  return affine(sum(hadamard(picked, weights)), -1.0);
}

Real sampling_loss(const Vec& probabilities, std::span<const int> masked_nodes, const Vec& rewards) {
  Tape<Real> tape;
  const Variable log_p = tape.constant(Mat(probabilities.array().log().matrix()));
  return sampling_loss(log_p, masked_nodes, rewards).scalar();
}

}  // namespace ugmae
