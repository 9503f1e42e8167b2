#ifndef CQISIM_CHANNEL_HPP_
#define CQISIM_CHANNEL_HPP_

#include <array>
#include <complex>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "cqisim/rng.hpp"
#include "cqisim/types.hpp"

namespace cqisim {

constexpr double kSpeedOfLight = 299792458.0;

enum class FadingModel {
  /// First-order Gauss-Markov: g' = rho*g + sqrt(1-rho^2)*w.
  kAr1,
  /// Clarke/Jakes sum of sinusoids with random arrival angles and phases.
  kSumOfSinusoids,
};

std::string_view to_string(FadingModel model);
FadingModel fading_model_from_string(std::string_view name);

struct ChannelParams {
  double tx_psd = 1e-9;                         // W/Hz, 20 dBm over 100 MHz
  double noise_psd = 1.9952623149688787e-20;    // W/Hz, -174 dBm/Hz + 7 dB NF
  double interferer_tx_psd = 1e-11;             // W/Hz, 20 dB below the BS
  double carrier_freq = 28e9;                   // Hz
  double pathloss_exponent = 2.0;
  double reference_loss_db = 30.0;              // includes array gain
  double reference_distance = 1.0;              // m
  double min_distance = 1.0;                    // m
  double shadowing_std_db = 4.0;
  double fading_shape_const = 0.03;
  FadingModel fading_model = FadingModel::kSumOfSinusoids;
  int fading_paths = 16;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

struct FadingPath {
  double arrival_cos = 1.0;  // cos of the angle of arrival
  double phase = 0.0;        // rad

  friend bool operator==(const FadingPath&, const FadingPath&) = default;
};

struct FadingState {
  std::complex<double> complex_gain{1.0, 0.0};
  double correlation = 1.0;
  RngStream rng;
  std::vector<FadingPath> paths;  // sum-of-sinusoids model only

  friend bool operator==(const FadingState&, const FadingState&) = default;
};

struct UeState {
  UeId id = 0;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  FadingState fading;
  double shadowing_db = 0.0;  // static per-run draw
  bool is_moving = false;

  double speed() const { return velocity.norm(); }

  friend bool operator==(const UeState&, const UeState&) = default;
};

/// Spectral-efficiency row of the 4-bit CQI table (256QAM table of TS 38.214).
struct CqiTableRow {
  int cqi;
  int modulation_order;
  double code_rate_x1024;
  double spectral_efficiency;
};

std::span<const CqiTableRow, 15> cqi_table();
double cqi_spectral_efficiency(CqiValue cqi);
/// Writes cqi,modulation_order,code_rate,spectral_efficiency.
void write_cqi_table_csv(std::ostream& out);

UeState advance_mobility(UeState ue, double dt);

double path_loss_db(double distance, const ChannelParams& params);

/// Per-slot correlation exp(-2*pi*f_d*dt*c_f) with f_d = v*f_c/c.
double fading_correlation(double speed, double dt, const ChannelParams& params);

/// Draws a stationary initial fading state from `rng`.
FadingState init_fading(RngStream rng, const ChannelParams& params);

FadingState fading_step(FadingState state, double dt, double speed,
                        const ChannelParams& params);

/// Received PSD at `at` from a transmitter at `from` with the given PSD,
/// shadowing and fading.
double received_psd(double transmit_psd, const Vec2& from, const Vec2& at,
                    double shadowing_db, std::complex<double> gain,
                    const ChannelParams& params);

/// Linear SINR as a PSD ratio. Interferers transmit co-channel from their
/// own positions with `interferer_tx_psd`.
double compute_sinr(const UeState& target, std::span<const UeState> interferers,
                    const Vec2& bs_position, const ChannelParams& params);

CqiValue sinr_to_cqi(double sinr);

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace cqisim

#endif  // CQISIM_CHANNEL_HPP_
