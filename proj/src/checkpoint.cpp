#include "ugmae/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ugmae {

namespace {

constexpr char kMagic[8] = {'U', 'G', 'M', 'A', 'E', 'C', 'K', 'P'};

template <typename U>
void put_le(std::ostream& out, U value) {
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes, sizeof(U));
}

template <typename U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(U));
  if (!in) throw Error(ErrorKind::kFormatError, "truncated checkpoint");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void put_string(std::ostream& out, std::string_view s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto size = get_le<std::uint32_t>(in);
  std::string s(size, '\0');
  in.read(s.data(), size);
  if (!in) throw Error(ErrorKind::kFormatError, "truncated checkpoint string");
  return s;
}

void put_named(Parameters& out, const std::string& prefix, const Parameters& params) {
  for (const auto& [name, value] : params) out.add(prefix + name, value);
}

Parameters take_prefix(const Parameters& all, std::string_view prefix) {
  Parameters out;
  for (const auto& [name, value] : all)
    if (name.starts_with(prefix)) out.add(name.substr(prefix.size()), value);
  return out;
}

}  // namespace

void write_parameter_records(std::ostream& out, const Parameters& params, PayloadType type) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, value] : params) {
    put_string(out, name);
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(type));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(value.rows()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(value.cols()));
    for (Index i = 0; i < value.rows(); ++i) {
      for (Index j = 0; j < value.cols(); ++j) {
        if (type == PayloadType::kFloat32)
          put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(value(i, j))));
        else
          put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(value(i, j)));
      }
    }
  }
}

Parameters read_parameter_records(std::istream& in) {
  Parameters params;
  const auto count = get_le<std::uint32_t>(in);
  for (std::uint32_t r = 0; r < count; ++r) {
    std::string name = get_string(in);
    const auto type = get_le<std::uint8_t>(in);
    if (type != 1 && type != 2) throw Error(ErrorKind::kFormatError, "unknown payload type for " + name);
    const auto rows = get_le<std::uint32_t>(in);
    const auto cols = get_le<std::uint32_t>(in);
    Mat value(rows, cols);
    for (Index i = 0; i < value.rows(); ++i) {
      for (Index j = 0; j < value.cols(); ++j) {
        if (type == 1)
          value(i, j) = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(in)));
        else
          value(i, j) = std::bit_cast<double>(get_le<std::uint64_t>(in));
      }
    }
    params.add(std::move(name), std::move(value));
  }
  return params;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path, PayloadType type) {
  Parameters records;
  put_named(records, "", ckpt.live);
  put_named(records, "", ckpt.sampler);
  put_named(records, "shadow/", ckpt.shadow);
  put_named(records, "optim/", ckpt.optimizer);

  std::ostringstream buffer(std::ios::binary);
  buffer.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(buffer, Checkpoint::kFormatVersion);
  put_string(buffer, ckpt.config_digest);
  put_string(buffer, ckpt.config_json);
  put_le<std::uint64_t>(buffer, static_cast<std::uint64_t>(ckpt.epoch));
  put_string(buffer, ckpt.rng_state);
  write_parameter_records(buffer, records, type);

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIoError, "cannot write " + tmp.string());
    const std::string bytes = buffer.str();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::kIoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorKind::kFormatError, path.string() + " is not a checkpoint");
  const auto version = get_le<std::uint32_t>(in);
  if (version != Checkpoint::kFormatVersion)
    throw Error(ErrorKind::kIncompatibleCheckpoint, "unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.config_digest = get_string(in);
  ckpt.config_json = get_string(in);
  ckpt.epoch = static_cast<std::int64_t>(get_le<std::uint64_t>(in));
  ckpt.rng_state = get_string(in);
  const Parameters records = read_parameter_records(in);
  for (const auto& [name, value] : records) {
    if (name.starts_with("shadow/") || name.starts_with("optim/")) continue;
    if (name.starts_with("sampler/"))
      ckpt.sampler.add(name, value);
    else
      ckpt.live.add(name, value);
  }
  ckpt.shadow = take_prefix(records, "shadow/");
  ckpt.optimizer = take_prefix(records, "optim/");
  return ckpt;
}

}  // namespace ugmae
