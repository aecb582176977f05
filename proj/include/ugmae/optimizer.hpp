#pragma once

#include <cstdint>

#include "ugmae/parameters.hpp"

namespace ugmae {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // L2 term added to the gradient
};

/// Adam with per-parameter moment estimates and step counts, keyed by name.
class Adam {
 public:
  Adam() = default;
  explicit Adam(const AdamConfig& cfg) : cfg_(cfg) {}

  /// Updates every entry of `params` that has a gradient in `grads`.
  void step(Parameters& params, const Parameters& grads);

  const AdamConfig& config() const { return cfg_; }

  /// Moments and step counts as one named set:
  ///   m/<name>, v/<name>, t/<name> (1 x 1 step count).
  Parameters state() const;
  void load_state(const Parameters& state);

 private:
  struct Slot {
    Mat m;
    Mat v;
    std::int64_t t = 0;
  };
  AdamConfig cfg_;
  std::map<std::string, Slot, std::less<>> slots_;
};

}  // namespace ugmae
