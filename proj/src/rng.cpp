#include "ugmae/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ugmae/error.hpp"

namespace ugmae {

namespace {
constexpr double kTwoPowMinus53 = 1.0 / 9007199254740992.0;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * kTwoPowMinus53; }

double Rng::uniform_open() {
  return (static_cast<double>(next() >> 11) + 0.5) * kTwoPowMinus53;
}

double Rng::normal() {
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::gumbel() { return -std::log(-std::log(uniform_open())); }

std::uint64_t Rng::index(std::uint64_t n) {
  if (n == 0) throw Error(ErrorKind::kInvalidRate, "Rng::index requires n > 0");
  // Largest multiple of n that fits; draws at or above it are rejected.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t draw = next();
  while (draw >= limit) draw = next();
  return draw % n;
}

std::string Rng::state() const {
  std::ostringstream out;
  out << engine_;
  return out.str();
}

void Rng::set_state(const std::string& state) {
  std::istringstream in(state);
  in >> engine_;
  if (in.fail()) throw Error(ErrorKind::kFormatError, "malformed rng state");
}

}  // namespace ugmae
