#pragma once

// The five training objectives and their weighted combination.
//
//   feature reconstruction   mean over masked nodes of (1 - cos(x_v, z_v))^alpha
//   structure reconstruction sum over visible arcs of max(0, margin - <z_i,z_j> + <z_i,z_j'>)
//   bootstrapping similarity -mean over nodes of cos(h1'_v, h2*_v) + cos(h1*_v, h2'_v)
//   consistency              mean over masked nodes of (1 - cos(z_v, z*_v))^beta
//   sampling                 see mask_gen.hpp
//
// Cosines use an epsilon guard: when either row norm is below epsilon the
// cosine is defined as 0, so zero rows give finite losses. Momentum inputs are
// detached on entry. The hinge uses subgradient 0 at its kink.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ugmae/autodiff.hpp"
#include "ugmae/graph.hpp"
#include "ugmae/rng.hpp"

namespace ugmae {

struct LossWeights {
  double fr = 1.0;
  double sample = 1.0;
  double sr = 1.0;
  double bs = 1.0;
  double ca = 1.0;
};

struct LossConfig {
  double alpha = 2.0;
  double beta = 1.0;
  double margin = 1.0;
  double epsilon = 1e-8;
  LossWeights weights;
  bool sample_baseline = false;  // subtract the mean reward before weighting log P
};

struct LossReport {
  double fr = 0.0;
  double sample = 0.0;
  double sr = 0.0;
  double bs = 0.0;
  double ca = 0.0;
  double total = 0.0;

  bool operator==(const LossReport&) const = default;
};

/// Epsilon-guarded cosine of two vectors.
template <typename A, typename B>
typename A::Scalar guarded_cosine(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& z,
                                  typename A::Scalar eps = typename A::Scalar(1e-8)) {
  using Scalar = typename A::Scalar;
  const Scalar nx = x.norm(), nz = z.norm();
  if (nx < eps || nz < eps) return Scalar(0);
  return std::clamp(x.dot(z) / (nx * nz), Scalar(-1), Scalar(1));
}

/// (1 - cos(x, z))^gamma.
template <typename A, typename B>
typename A::Scalar scaled_cosine_error(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& z,
                                       typename A::Scalar gamma, typename A::Scalar eps = typename A::Scalar(1e-8)) {
  using Scalar = typename A::Scalar;
  if (x.size() != z.size()) throw Error(ErrorKind::kShapeMismatch, "scaled_cosine_error: lengths differ");
  if (gamma < Scalar(1)) throw Error(ErrorKind::kConfigError, "scaling exponent must be >= 1");
  return std::pow(Scalar(1) - guarded_cosine(x, z, eps), gamma);
}

/// Row-wise (1 - cos)^gamma, N x 1.
template <typename Scalar>
Var<Scalar> scaled_cosine_rows(const Var<Scalar>& a, const Var<Scalar>& b, Scalar gamma, Scalar eps) {
  if (gamma < Scalar(1)) throw Error(ErrorKind::kConfigError, "scaling exponent must be >= 1");
  return pow(affine(cosine_rows(a, b, eps), Scalar(-1), Scalar(1)), gamma);
}

template <typename Scalar>
struct FeatureLoss {
  Var<Scalar> loss;      // 1 x 1
  Var<Scalar> per_node;  // |masked| x 1, aligned with masked_nodes
};

template <typename Scalar>
FeatureLoss<Scalar> feature_reconstruction_loss(const Var<Scalar>& target, const Var<Scalar>& reconstruction,
                                                std::span<const int> masked_nodes, Scalar alpha, Scalar eps) {
  if (masked_nodes.empty()) throw Error(ErrorKind::kEmptyMaskSet, "feature reconstruction over empty mask set");
  detail::require_same_shape(target, reconstruction, "feature_reconstruction_loss");
  const Var<Scalar> per_node =
      scaled_cosine_rows(gather_rows(target, masked_nodes), gather_rows(reconstruction, masked_nodes), alpha, eps);
  return {mean(per_node), per_node};
}

/// One negative per arc, uniform over V \ {src, dst}.
inline std::vector<int> sample_negatives(int num_nodes, std::span<const Edge> edges, Rng& rng) {
  if (num_nodes < 3) throw Error(ErrorKind::kCannotSampleNegative, "negative sampling needs at least 3 nodes");
  std::vector<int> negatives;
  negatives.reserve(edges.size());
  for (const Edge& e : edges) {
    const int lo = std::min(e.src, e.dst), hi = std::max(e.src, e.dst);
    const int excluded = lo == hi ? 1 : 2;
    // Draw from a compacted range, then step over the excluded ids in order.
    int j = static_cast<int>(rng.index(static_cast<std::uint64_t>(num_nodes - excluded)));
    if (j >= lo) ++j;
    if (excluded == 2 && j >= hi) ++j;
    negatives.push_back(j);
  }
  return negatives;
}

template <typename Scalar>
Var<Scalar> structure_reconstruction_loss(const Var<Scalar>& reconstruction, std::span<const Edge> visible_edges,
                                          std::span<const int> negatives, Scalar margin = Scalar(1)) {
  const auto n = static_cast<int>(reconstruction.rows());
  if (n < 3) throw Error(ErrorKind::kCannotSampleNegative, "structure loss needs at least 3 nodes");
  if (negatives.size() != visible_edges.size())
    throw Error(ErrorKind::kShapeMismatch, "exactly one negative per visible arc required");
  Tape<Scalar>& tape = reconstruction.tape();
  if (visible_edges.empty()) return tape.constant(Matrix<Scalar>::Zero(1, 1));
  std::vector<int> src, dst;
  src.reserve(visible_edges.size());
  dst.reserve(visible_edges.size());
  for (std::size_t e = 0; e < visible_edges.size(); ++e) {
    const Edge& arc = visible_edges[e];
    if (negatives[e] == arc.src || negatives[e] == arc.dst || negatives[e] < 0 || negatives[e] >= n)
      throw Error(ErrorKind::kCannotSampleNegative, "negative coincides with an endpoint or is out of range");
    src.push_back(arc.src);
    dst.push_back(arc.dst);
  }
  const Var<Scalar> zi = gather_rows(reconstruction, std::span<const int>(src));
  const Var<Scalar> zj = gather_rows(reconstruction, std::span<const int>(dst));
  const Var<Scalar> zn = gather_rows(reconstruction, negatives);
  return sum(relu(affine(dot_rows(zi, zj), Scalar(-1), margin) + dot_rows(zi, zn)));
}

template <typename Scalar>
Var<Scalar> bootstrapping_similarity_loss(const Var<Scalar>& h1_projected, const Var<Scalar>& h2_projected,
                                          const Var<Scalar>& h1_momentum, const Var<Scalar>& h2_momentum, Scalar eps) {
  detail::require_same_shape(h1_projected, h2_projected, "bootstrapping_similarity_loss");
  detail::require_same_shape(h1_projected, h1_momentum, "bootstrapping_similarity_loss");
  detail::require_same_shape(h1_projected, h2_momentum, "bootstrapping_similarity_loss");
  const Var<Scalar> cross = cosine_rows(h1_projected, detach(h2_momentum), eps) +
                            cosine_rows(detach(h1_momentum), h2_projected, eps);
  return affine(mean(cross), Scalar(-1));
}

template <typename Scalar>
Var<Scalar> consistency_loss(const Var<Scalar>& reconstruction, const Var<Scalar>& momentum_reconstruction,
                             std::span<const int> masked_nodes, Scalar beta, Scalar eps) {
  if (masked_nodes.empty()) throw Error(ErrorKind::kEmptyMaskSet, "consistency loss over empty mask set");
  detail::require_same_shape(reconstruction, momentum_reconstruction, "consistency_loss");
  const Var<Scalar> teacher = detach(momentum_reconstruction);
  return mean(scaled_cosine_rows(gather_rows(reconstruction, masked_nodes), gather_rows(teacher, masked_nodes), beta, eps));
}

/// Weighted sum of the component losses; throws NonFiniteLoss on NaN/Inf.
inline double combine(const LossReport& report, const LossConfig& cfg) {
  const double parts[] = {report.fr, report.sample, report.sr, report.bs, report.ca};
  for (double p : parts)
    if (!std::isfinite(p)) throw Error(ErrorKind::kNonFiniteLoss, "component loss is not finite");
  const LossWeights& w = cfg.weights;
  return w.fr * report.fr + w.sample * report.sample + w.sr * report.sr + w.bs * report.bs + w.ca * report.ca;
}

void validate_loss_config(const LossConfig& cfg);

// Value-level conveniences over plain matrices.
Real feature_reconstruction_loss(const Mat& target, const Mat& reconstruction, std::span<const int> masked_nodes,
                                 Real alpha, Real eps = 1e-8);
Real structure_reconstruction_loss(const Mat& reconstruction, std::span<const Edge> visible_edges,
                                   std::span<const int> negatives, Real margin = 1.0);
Real bootstrapping_similarity_loss(const Mat& h1_projected, const Mat& h2_projected, const Mat& h1_momentum,
                                   const Mat& h2_momentum, Real eps = 1e-8);
Real consistency_loss(const Mat& reconstruction, const Mat& momentum_reconstruction, std::span<const int> masked_nodes,
                      Real beta, Real eps = 1e-8);

}  // namespace ugmae
