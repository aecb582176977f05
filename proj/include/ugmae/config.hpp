#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "ugmae/trainer.hpp"

namespace ugmae {

/// JSON form of TrainConfig. Every key is optional on input (defaults apply);
/// unknown keys raise ConfigError naming the full field path.
///
/// {
///   "p_f": 0.5, "p_s": 0.3, "epochs": 500, "learning_rate": 0.001,
///   "weight_decay": 0.0, "optimizer": "adam", "seed": 0, "tau": 0.996,
///   "checkpoint_every": 0, "adaptive_mask": true,
///   "loss": {"alpha": 2, "beta": 1, "margin": 1, "epsilon": 1e-8,
///            "sample_baseline": false,
///            "weights": {"fr": 1, "sample": 1, "sr": 1, "bs": 1, "ca": 1}},
///   "backbone": {"arch": "attention", "feature_dim": 0, "hidden_dim": 64,
///                "num_layers": 2, "decoder_layers": 1, "heads": 4,
///                "activation": "elu", "negative_slope": 0.2},
///   "sampler": {"model_dim": 16, "heads": 2}
/// }
nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const nlohmann::json& json);
TrainConfig load_train_config(const std::filesystem::path& path);

/// SHA-1 (hex) of the canonical serialisation. Identical configs share a digest.
std::string config_digest(const TrainConfig& cfg);
std::string sha1_hex(std::string_view bytes);

}  // namespace ugmae
