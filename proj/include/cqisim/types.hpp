#ifndef CQISIM_TYPES_HPP_
#define CQISIM_TYPES_HPP_

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cqisim {

using UeId = int;
using SlotIndex = std::int64_t;
using Vec2 = Eigen::Vector2d;

constexpr int kMinCqi = 1;
constexpr int kMaxCqi = 15;

/// Wideband 4-bit CQI report, always within [1, 15].
class CqiValue {
 public:
  constexpr CqiValue() = default;
  constexpr explicit CqiValue(int value) : value_(value) {
    if (value < kMinCqi || value > kMaxCqi) {
      throw std::out_of_range("CQI out of range: " + std::to_string(value));
    }
  }

  constexpr int value() const { return value_; }

  friend constexpr auto operator<=>(CqiValue, CqiValue) = default;

 private:
  int value_ = kMinCqi;
};

}  // namespace cqisim

#endif  // CQISIM_TYPES_HPP_
