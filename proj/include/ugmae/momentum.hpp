#pragma once

#include <span>

#include "ugmae/backbone.hpp"

namespace ugmae {

/// Exponential-moving-average copy of the encoder and decoder parameters.
/// Shadow values are only ever read as constants; no optimizer touches them.
struct EmaShadow {
  Parameters params;
  double tau = 0.996;
};

/// Encoder and decoder parameters of a backbone, the subset the shadow tracks.
Parameters tracked_parameters(const Backbone& backbone);

EmaShadow init_shadow(const Parameters& source, double tau);

/// theta* <- tau * theta* + (1 - tau) * theta for every shadow entry. `source`
/// must contain every shadow name with an identical shape (extra names are
/// ignored).
void ema_update(EmaShadow& shadow, const Parameters& source, double tau);
inline void ema_update(EmaShadow& shadow, const Parameters& source) { ema_update(shadow, source, shadow.tau); }

/// Momentum passes: the ordinary forward with shadow parameters, output
/// detached from every parameter.
Variable momentum_encode(const BackboneConfig& cfg, ParamBinding& shadow, int num_nodes, std::span<const Edge> edges,
                         const Variable& features);
Variable momentum_decode(const BackboneConfig& cfg, ParamBinding& shadow, int num_nodes, std::span<const Edge> edges,
                         const Variable& hidden);

Mat momentum_encode(const BackboneConfig& cfg, const EmaShadow& shadow, int num_nodes, std::span<const Edge> edges,
                    const Mat& features);
Mat momentum_decode(const BackboneConfig& cfg, const EmaShadow& shadow, int num_nodes, std::span<const Edge> edges,
                    const Mat& hidden);

}  // namespace ugmae
