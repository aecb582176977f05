#include "ugmae/momentum.hpp"

namespace ugmae {

Parameters tracked_parameters(const Backbone& backbone) {
  Parameters out = backbone.params.subset("encoder/");
  for (const auto& [name, value] : backbone.params.subset("decoder/")) out.add(name, value);
  return out;
}

EmaShadow init_shadow(const Parameters& source, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorKind::kConfigError, "tau must lie in [0, 1]");
  return EmaShadow{source, tau};
}

void ema_update(EmaShadow& shadow, const Parameters& source, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorKind::kConfigError, "tau must lie in [0, 1]");
  for (const auto& [name, value] : shadow.params) {
    if (!source.contains(name)) throw Error(ErrorKind::kShapeMismatch, "source lacks shadow parameter " + name);
    const Mat& live = source.at(name);
    if (live.rows() != value.rows() || live.cols() != value.cols())
      throw Error(ErrorKind::kShapeMismatch, "shape of " + name + " differs between shadow and source");
  }
  const double keep = tau;
  const double take = 1.0 - tau;
  for (auto& [name, value] : shadow.params) {
    const Mat& live = source.at(name);
    for (Index j = 0; j < value.cols(); ++j)
      for (Index i = 0; i < value.rows(); ++i) value(i, j) = keep * value(i, j) + take * live(i, j);
  }
}

Variable momentum_encode(const BackboneConfig& cfg, ParamBinding& shadow, int num_nodes, std::span<const Edge> edges,
                         const Variable& features) {
  return detach(encode(cfg, shadow, num_nodes, edges, features));
}

Variable momentum_decode(const BackboneConfig& cfg, ParamBinding& shadow, int num_nodes, std::span<const Edge> edges,
                         const Variable& hidden) {
  return detach(decode(cfg, shadow, num_nodes, edges, hidden));
}

Mat momentum_encode(const BackboneConfig& cfg, const EmaShadow& shadow, int num_nodes, std::span<const Edge> edges,
                    const Mat& features) {
  Tape<Real> tape;
  ParamBinding params(tape, shadow.params);
  return momentum_encode(cfg, params, num_nodes, edges, tape.constant(features)).value();
}

Mat momentum_decode(const BackboneConfig& cfg, const EmaShadow& shadow, int num_nodes, std::span<const Edge> edges,
                    const Mat& hidden) {
  Tape<Real> tape;
  ParamBinding params(tape, shadow.params);
  return momentum_decode(cfg, params, num_nodes, edges, tape.constant(hidden)).value();
}

}  // namespace ugmae
