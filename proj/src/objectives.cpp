#include "ugmae/objectives.hpp"

#include "ugmae/parameters.hpp"

namespace ugmae {

void validate_loss_config(const LossConfig& cfg) {
  if (!(cfg.alpha >= 1.0)) throw Error(ErrorKind::kConfigError, "loss.alpha must be >= 1");
  if (!(cfg.beta >= 1.0)) throw Error(ErrorKind::kConfigError, "loss.beta must be >= 1");
  if (!(cfg.epsilon > 0.0)) throw Error(ErrorKind::kConfigError, "loss.epsilon must be > 0");
  const LossWeights& w = cfg.weights;
  for (double x : {w.fr, w.sample, w.sr, w.bs, w.ca})
    if (!(x >= 0.0) || !std::isfinite(x)) throw Error(ErrorKind::kConfigError, "loss weights must be finite and >= 0");
}

Real feature_reconstruction_loss(const Mat& target, const Mat& reconstruction, std::span<const int> masked_nodes,
                                 Real alpha, Real eps) {
  Tape<Real> tape;
  return feature_reconstruction_loss(tape.constant(target), tape.constant(reconstruction), masked_nodes, alpha, eps)
      .loss.scalar();
}

Real structure_reconstruction_loss(const Mat& reconstruction, std::span<const Edge> visible_edges,
                                   std::span<const int> negatives, Real margin) {
  Tape<Real> tape;
  return structure_reconstruction_loss(tape.constant(reconstruction), visible_edges, negatives, margin).scalar();
}

Real bootstrapping_similarity_loss(const Mat& h1_projected, const Mat& h2_projected, const Mat& h1_momentum,
                                   const Mat& h2_momentum, Real eps) {
  Tape<Real> tape;
  return bootstrapping_similarity_loss(tape.constant(h1_projected), tape.constant(h2_projected),
                                       tape.constant(h1_momentum), tape.constant(h2_momentum), eps)
      .scalar();
}

Real consistency_loss(const Mat& reconstruction, const Mat& momentum_reconstruction, std::span<const int> masked_nodes,
                      Real beta, Real eps) {
  Tape<Real> tape;
  return consistency_loss(tape.constant(reconstruction), tape.constant(momentum_reconstruction), masked_nodes, beta, eps)
      .scalar();
}

}  // namespace ugmae
