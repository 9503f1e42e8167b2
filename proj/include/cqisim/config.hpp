#ifndef CQISIM_CONFIG_HPP_
#define CQISIM_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "cqisim/channel.hpp"
#include "cqisim/controller.hpp"
#include "cqisim/mac.hpp"

namespace cqisim {

enum class ScenarioKind { kSingleUser, kMultiUser };
enum class PredictorVariant { kLstm, kFnn, kDelayed, kIdeal };

std::string_view to_string(ScenarioKind kind);
std::string_view to_string(PredictorVariant variant);
/// Accepts lstm, fnn, delayed (alias none) and ideal.
PredictorVariant predictor_variant_from_string(std::string_view name);

/// Every experiment knob. Defaults reproduce the reference setup: 20 dBm over
/// 100 MHz, numerology 1, tau = 0.5 ms, round robin over a full buffer, and the
/// training parameters batch 20, pretrain 20, 30 LSTM units, K = 200, N = 40.
struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::kSingleUser;

  // geometry, meters
  double bs_x = 0.0;
  double bs_y = 0.0;
  double moving_start_x = -250.0;
  double moving_start_y = 25.0;
  double speed_mps = 30.0;
  double heading_deg = 0.0;
  int interferer_count = 4;
  double interferer_distance_m = 50.0;
  int multi_user_count = 4;

  // radio
  double tx_power_dbm = 20.0;
  double bandwidth_hz = 100e6;
  double noise_figure_db = 7.0;
  double interferer_power_offset_db = -20.0;
  double carrier_freq_hz = 28e9;
  double pathloss_exponent = 2.0;
  double reference_loss_db = 30.0;
  double reference_distance_m = 1.0;
  double min_distance_m = 1.0;
  double shadowing_std_db = 4.0;
  double fading_shape_const = 0.03;
  FadingModel fading_model = FadingModel::kSumOfSinusoids;
  int fading_paths = 16;

  // MAC
  int numerology = 1;
  double tau_s = 0.5e-3;
  int total_rbs = 133;
  double overhead_fraction = 0.14;
  double bler_steepness_per_db = 2.0;
  double mcs_margin_db = -1.0986122886681098;  // -ln(9)/2
  int initial_cqi = 7;

  // predictor
  PredictorVariant variant = PredictorVariant::kLstm;
  int input_window = 40;
  int mse_window = 200;
  int batch_size = 20;
  int fc_units = 30;
  int lstm_units = 30;
  int fnn_hidden = 64;
  double learning_rate = 1e-3;
  int pretrain_steps = 20;
  bool reinit_on_switch = false;

  double duration_s = 30.0;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;

  ChannelParams channel_params() const;
  LinkAdaptationTable link_table() const;
  SlotClock clock() const { return SlotClock{0, numerology}; }
  int delay_slots() const;
  SlotIndex total_slots() const;
  /// Slots excluded from metrics: N + pretrain_steps * batch_size.
  SlotIndex warmup_slots() const;
  ControllerConfig controller_config() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// JSON object with the keys above; absent keys keep their defaults, unknown
/// keys are rejected.
ScenarioConfig parse_config(std::string_view text);
std::string serialize_config(const ScenarioConfig& config);
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace cqisim

#endif  // CQISIM_CONFIG_HPP_
