#ifndef CQISIM_RNG_HPP_
#define CQISIM_RNG_HPP_

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace cqisim {

/// Named deterministic random stream.
///
/// The engine is seeded from (seed, name) so that every consumer (a UE's
/// fading, link success draws, predictor init) owns an independent stream
/// whose output does not depend on how many draws other consumers make.
/// Uniform and Gaussian variates are produced here rather than through the
/// std distributions, whose output is implementation-defined.
class RngStream {
 public:
  RngStream() : RngStream(0, "default") {}
  RngStream(std::uint64_t seed, std::string_view name);

  /// Uniform in [0, 1).
  double uniform();
  /// Standard normal.
  double normal();
  /// Circularly-symmetric complex Gaussian with E|w|^2 = 1.
  std::complex<double> complex_normal();

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);

}  // namespace cqisim

#endif  // CQISIM_RNG_HPP_
