#include "ugmae/optimizer.hpp"

#include <cmath>

namespace ugmae {

void Adam::step(Parameters& params, const Parameters& grads) {
  for (auto& [name, value] : params) {
    if (!grads.contains(name)) continue;
    const Mat& g_raw = grads.at(name);
    if (g_raw.rows() != value.rows() || g_raw.cols() != value.cols())
      throw Error(ErrorKind::kShapeMismatch, "gradient shape differs for " + name);
    Slot& slot = slots_[name];
    if (slot.m.size() == 0) {
      slot.m = Mat::Zero(value.rows(), value.cols());
      slot.v = Mat::Zero(value.rows(), value.cols());
    }
    const Mat g = cfg_.weight_decay != 0.0 ? Mat(g_raw + cfg_.weight_decay * value) : g_raw;
    ++slot.t;
    slot.m = cfg_.beta1 * slot.m + (1.0 - cfg_.beta1) * g;
    slot.v = cfg_.beta2 * slot.v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    const double bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(slot.t));
    const double bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(slot.t));
    const double step_size = cfg_.learning_rate / bias1;
    value.array() -= step_size * slot.m.array() / ((slot.v.array() / bias2).sqrt() + cfg_.epsilon);
  }
}

Parameters Adam::state() const {
  Parameters out;
  for (const auto& [name, slot] : slots_) {
    out.add("m/" + name, slot.m);
    out.add("v/" + name, slot.v);
    out.add("t/" + name, Mat::Constant(1, 1, static_cast<double>(slot.t)));
  }
  return out;
}

void Adam::load_state(const Parameters& state) {
  slots_.clear();
  for (const auto& [key, value] : state) {
    if (key.size() < 2 || key[1] != '/') throw Error(ErrorKind::kFormatError, "bad optimizer state key " + key);
    Slot& slot = slots_[key.substr(2)];
    switch (key[0]) {
      case 'm': slot.m = value; break;
      case 'v': slot.v = value; break;
      case 't': slot.t = static_cast<std::int64_t>(value(0, 0)); break;
      default: throw Error(ErrorKind::kFormatError, "bad optimizer state key " + key);
    }
  }
}

}  // namespace ugmae
