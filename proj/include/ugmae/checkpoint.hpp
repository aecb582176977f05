#pragma once

// Checkpoint container, one binary file, all integers little-endian:
//
//   magic        8 bytes  "UGMAECKP"
//   version      u32
//   digest       str      SHA-1 hex of the config
//   config       str      config JSON
//   epoch        i64
//   rng state    str
//   count        u32
//   count x record:
//     name       str
//     dtype      u8       1 = fp32, 2 = fp64
//     rows, cols u32, u32
//     payload    rows*cols values, row-major, little-endian IEEE-754
//
// where str = u32 byte length followed by the bytes. Record names:
//   encoder/..., decoder/..., proj/..., token/...   live backbone
//   sampler/...                                      mask sampler
//   shadow/<name>                                    momentum copies
//   optim/<m|v|t>/<name>                             Adam state

#include <filesystem>
#include <iosfwd>

#include "ugmae/trainer.hpp"

namespace ugmae {

enum class PayloadType : std::uint8_t { kFloat32 = 1, kFloat64 = 2 };

/// Parameter records in the checkpoint record layout.
void write_parameter_records(std::ostream& out, const Parameters& params, PayloadType type);
Parameters read_parameter_records(std::istream& in);

/// Writes atomically (temporary file, then rename). fp64 payloads make
/// save/load bit-exact for the double-precision trainer.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path,
                     PayloadType type = PayloadType::kFloat64);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ugmae
