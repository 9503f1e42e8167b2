#include "cqisim/rng.hpp"

#include <cmath>
#include <numbers>

namespace cqisim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
  // FNV-1a over the stream name
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(seed) ^ h);
}

RngStream::RngStream(std::uint64_t seed, std::string_view name)
    : engine_(derive_seed(seed, name)) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const std::complex<double> w = complex_normal();
  has_spare_ = true;
  spare_ = w.imag() * std::numbers::sqrt2;
  return w.real() * std::numbers::sqrt2;
}

std::complex<double> RngStream::complex_normal() {
  // Box-Muller; u1 in (0, 1]
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace cqisim
