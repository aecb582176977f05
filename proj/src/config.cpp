#include "ugmae/config.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace ugmae {

using nlohmann::json;

json config_to_json(const TrainConfig& cfg) {
  const LossConfig& l = cfg.loss;
  const BackboneConfig& b = cfg.backbone;
  return json{
      {"p_f", cfg.p_f},
      {"p_s", cfg.p_s},
      {"epochs", cfg.epochs},
      {"learning_rate", cfg.learning_rate},
      {"weight_decay", cfg.weight_decay},
      {"optimizer", cfg.optimizer},
      {"seed", cfg.seed},
      {"tau", cfg.tau},
      {"checkpoint_every", cfg.checkpoint_every},
      {"adaptive_mask", cfg.adaptive_mask},
      {"loss",
       {{"alpha", l.alpha},
        {"beta", l.beta},
        {"margin", l.margin},
        {"epsilon", l.epsilon},
        {"sample_baseline", l.sample_baseline},
        {"weights",
         {{"fr", l.weights.fr}, {"sample", l.weights.sample}, {"sr", l.weights.sr}, {"bs", l.weights.bs},
          {"ca", l.weights.ca}}}}},
      {"backbone",
       {{"arch", std::string(to_string(b.arch))},
        {"feature_dim", b.feature_dim},
        {"hidden_dim", b.hidden_dim},
        {"num_layers", b.num_layers},
        {"decoder_layers", b.decoder_layers},
        {"heads", b.heads},
        {"activation", std::string(to_string(b.activation))},
        {"negative_slope", b.negative_slope}}},
      {"sampler", {{"model_dim", cfg.sampler.model_dim}, {"heads", cfg.sampler.heads}}},
  };
}

namespace {

/// Reads known keys of one JSON object and rejects everything else.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw Error(ErrorKind::kConfigError, where("") + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = object_.find(key);
    if (it == object_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::invalid_argument("expected boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw std::invalid_argument("expected integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::invalid_argument("expected number");
      } else {
        if (!it->is_string()) throw std::invalid_argument("expected string");
      }
      out = it->template get<T>();
    } catch (const std::exception& e) {
      throw Error(ErrorKind::kConfigError, where(key) + ": " + e.what());
    }
  }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    auto it = object_.find(key);
    static const json kEmpty = json::object();
    return ObjectReader(it == object_.end() ? kEmpty : *it, where(key));
  }

  void finish() const {
    for (const auto& [key, _] : object_.items())
      if (!seen_.contains(key)) throw Error(ErrorKind::kConfigError, "unknown key " + where(key));
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

TrainConfig config_from_json(const json& root) {
  TrainConfig cfg;
  ObjectReader top(root, "");
  top.read("p_f", cfg.p_f);
  top.read("p_s", cfg.p_s);
  top.read("epochs", cfg.epochs);
  top.read("learning_rate", cfg.learning_rate);
  top.read("weight_decay", cfg.weight_decay);
  top.read("optimizer", cfg.optimizer);
  top.read("seed", cfg.seed);
  top.read("tau", cfg.tau);
  top.read("checkpoint_every", cfg.checkpoint_every);
  top.read("adaptive_mask", cfg.adaptive_mask);

  ObjectReader loss = top.child("loss");
  loss.read("alpha", cfg.loss.alpha);
  loss.read("beta", cfg.loss.beta);
  loss.read("margin", cfg.loss.margin);
  loss.read("epsilon", cfg.loss.epsilon);
  loss.read("sample_baseline", cfg.loss.sample_baseline);
  ObjectReader weights = loss.child("weights");
  weights.read("fr", cfg.loss.weights.fr);
  weights.read("sample", cfg.loss.weights.sample);
  weights.read("sr", cfg.loss.weights.sr);
  weights.read("bs", cfg.loss.weights.bs);
  weights.read("ca", cfg.loss.weights.ca);
  weights.finish();
  loss.finish();

  ObjectReader backbone = top.child("backbone");
  std::string arch(to_string(cfg.backbone.arch));
  std::string activation(to_string(cfg.backbone.activation));
  backbone.read("arch", arch);
  backbone.read("feature_dim", cfg.backbone.feature_dim);
  backbone.read("hidden_dim", cfg.backbone.hidden_dim);
  backbone.read("num_layers", cfg.backbone.num_layers);
  backbone.read("decoder_layers", cfg.backbone.decoder_layers);
  backbone.read("heads", cfg.backbone.heads);
  backbone.read("activation", activation);
  backbone.read("negative_slope", cfg.backbone.negative_slope);
  backbone.finish();
  try {
    cfg.backbone.arch = parse_architecture(arch);
    cfg.backbone.activation = parse_activation(activation);
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfigError, "backbone: " + std::string(e.what()));
  }

  ObjectReader sampler = top.child("sampler");
  sampler.read("model_dim", cfg.sampler.model_dim);
  sampler.read("heads", cfg.sampler.heads);
  sampler.finish();
  top.finish();

  try {
    validate_train_config(cfg);
  } catch (const Error& e) {
    throw Error(ErrorKind::kConfigError, e.what());
  }
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open config file " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kConfigError, path.string() + ": " + e.what());
  }
  return config_from_json(root);
}

std::string sha1_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha1(), nullptr) != 1)
    throw Error(ErrorKind::kIoError, "SHA-1 computation failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string config_digest(const TrainConfig& cfg) { return sha1_hex(config_to_json(cfg).dump()); }

}  // namespace ugmae
