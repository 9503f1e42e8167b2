#include "cqisim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <variant>

#include "json.hpp"

namespace cqisim {

namespace {

using Json = nlohmann::json;

using Member = std::variant<double ScenarioConfig::*, int ScenarioConfig::*,
                            bool ScenarioConfig::*, std::uint64_t ScenarioConfig::*>;

const std::vector<std::pair<std::string_view, Member>>& numeric_fields() {
  using C = ScenarioConfig;
  static const std::vector<std::pair<std::string_view, Member>> fields{
      {"bs_x", &C::bs_x},
      {"bs_y", &C::bs_y},
      {"moving_start_x", &C::moving_start_x},
      {"moving_start_y", &C::moving_start_y},
      {"speed_mps", &C::speed_mps},
      {"heading_deg", &C::heading_deg},
      {"interferer_count", &C::interferer_count},
      {"interferer_distance_m", &C::interferer_distance_m},
      {"multi_user_count", &C::multi_user_count},
      {"tx_power_dbm", &C::tx_power_dbm},
      {"bandwidth_hz", &C::bandwidth_hz},
      {"noise_figure_db", &C::noise_figure_db},
      {"interferer_power_offset_db", &C::interferer_power_offset_db},
      {"carrier_freq_hz", &C::carrier_freq_hz},
      {"pathloss_exponent", &C::pathloss_exponent},
      {"reference_loss_db", &C::reference_loss_db},
      {"reference_distance_m", &C::reference_distance_m},
      {"min_distance_m", &C::min_distance_m},
      {"shadowing_std_db", &C::shadowing_std_db},
      {"fading_shape_const", &C::fading_shape_const},
      {"fading_paths", &C::fading_paths},
      {"numerology", &C::numerology},
      {"tau_s", &C::tau_s},
      {"total_rbs", &C::total_rbs},
      {"overhead_fraction", &C::overhead_fraction},
      {"bler_steepness_per_db", &C::bler_steepness_per_db},
      {"mcs_margin_db", &C::mcs_margin_db},
      {"initial_cqi", &C::initial_cqi},
      {"input_window", &C::input_window},
      {"mse_window", &C::mse_window},
      {"batch_size", &C::batch_size},
      {"fc_units", &C::fc_units},
      {"lstm_units", &C::lstm_units},
      {"fnn_hidden", &C::fnn_hidden},
      {"learning_rate", &C::learning_rate},
      {"pretrain_steps", &C::pretrain_steps},
      {"reinit_on_switch", &C::reinit_on_switch},
      {"duration_s", &C::duration_s},
      {"seed", &C::seed},
  };
  return fields;
}

[[noreturn]] void bad_key(std::string_view key, std::string_view what) {
  throw std::invalid_argument(std::string(key) + ": " + std::string(what));
}

void assign(ScenarioConfig& config, std::string_view key, const Member& member,
            const Json& value) {
  std::visit(
      [&](auto ptr) {
        using T = std::remove_reference_t<decltype(config.*ptr)>;
        if constexpr (std::is_same_v<T, bool>) {
          if (!value.is_boolean()) bad_key(key, "expected true or false");
          config.*ptr = value.get<bool>();
        } else if constexpr (std::is_same_v<T, double>) {
          if (!value.is_number()) bad_key(key, "expected a number");
          config.*ptr = value.get<double>();
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
          if (!value.is_number_unsigned()) bad_key(key, "expected a non-negative integer");
          config.*ptr = value.get<std::uint64_t>();
        } else {
          if (!value.is_number_integer()) bad_key(key, "expected an integer");
          config.*ptr = value.get<int>();
        }
      },
      member);
}

void require(bool ok, std::string_view key, std::string_view what) {
  if (!ok) bad_key(key, what);
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  return kind == ScenarioKind::kSingleUser ? "single_user" : "multi_user";
}

std::string_view to_string(PredictorVariant variant) {
  switch (variant) {
    case PredictorVariant::kLstm:
      return "lstm";
    case PredictorVariant::kFnn:
      return "fnn";
    case PredictorVariant::kDelayed:
      return "delayed";
    case PredictorVariant::kIdeal:
      return "ideal";
  }
  return "unknown";
}

PredictorVariant predictor_variant_from_string(std::string_view name) {
  if (name == "lstm") return PredictorVariant::kLstm;
  if (name == "fnn") return PredictorVariant::kFnn;
  if (name == "delayed" || name == "none") return PredictorVariant::kDelayed;
  if (name == "ideal") return PredictorVariant::kIdeal;
  throw std::invalid_argument("variant: expected lstm, fnn, delayed or ideal, got '" +
                              std::string(name) + "'");
}

void ScenarioConfig::validate() const {
  require(std::isfinite(bs_x) && std::isfinite(bs_y), "bs_x", "must be finite");
  require(std::isfinite(moving_start_x) && std::isfinite(moving_start_y), "moving_start_x",
          "must be finite");
  require(std::isfinite(speed_mps) && speed_mps >= 0, "speed_mps", "speed must be >= 0");
  require(std::isfinite(heading_deg), "heading_deg", "must be finite");
  require(interferer_count >= 0, "interferer_count", "must be >= 0");
  require(interferer_distance_m > 0, "interferer_distance_m", "must be > 0");
  require(multi_user_count >= 1, "multi_user_count", "must be >= 1");
  require(bandwidth_hz > 0, "bandwidth_hz", "must be > 0");
  require(std::isfinite(tx_power_dbm), "tx_power_dbm", "must be finite");
  require(std::isfinite(noise_figure_db), "noise_figure_db", "must be finite");
  require(std::isfinite(interferer_power_offset_db), "interferer_power_offset_db",
          "must be finite");
  require(numerology >= 0 && numerology <= 6, "numerology", "must be in [0, 6]");
  require(std::isfinite(tau_s) && tau_s >= 0, "tau_s", "tau must be >= 0");
  require(total_rbs >= 1, "total_rbs", "must be >= 1");
  require(overhead_fraction >= 0 && overhead_fraction < 1, "overhead_fraction",
          "must be in [0, 1)");
  require(bler_steepness_per_db > 0, "bler_steepness_per_db", "must be > 0");
  require(std::isfinite(mcs_margin_db), "mcs_margin_db", "must be finite");
  require(initial_cqi >= kMinCqi && initial_cqi <= kMaxCqi, "initial_cqi", "must be in [1, 15]");
  require(input_window >= 1, "input_window", "must be >= 1");
  require(mse_window >= 1, "mse_window", "must be >= 1");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(fc_units >= 1, "fc_units", "must be >= 1");
  require(lstm_units >= 1, "lstm_units", "must be >= 1");
  require(fnn_hidden >= 1, "fnn_hidden", "must be >= 1");
  require(std::isfinite(learning_rate) && learning_rate >= 0, "learning_rate", "must be >= 0");
  require(pretrain_steps >= 0, "pretrain_steps", "must be >= 0");
  require(std::isfinite(duration_s) && duration_s > 0, "duration_s", "must be > 0");
  try {
    channel_params().validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("channel: ") + e.what());
  }
}

ChannelParams ScenarioConfig::channel_params() const {
  ChannelParams p;
  p.tx_psd = std::pow(10.0, (tx_power_dbm - 30.0) / 10.0) / bandwidth_hz;
  p.noise_psd = std::pow(10.0, (-174.0 + noise_figure_db - 30.0) / 10.0);
  p.interferer_tx_psd = p.tx_psd * std::pow(10.0, interferer_power_offset_db / 10.0);
  p.carrier_freq = carrier_freq_hz;
  p.pathloss_exponent = pathloss_exponent;
  p.reference_loss_db = reference_loss_db;
  p.reference_distance = reference_distance_m;
  p.min_distance = min_distance_m;
  p.shadowing_std_db = shadowing_std_db;
  p.fading_shape_const = fading_shape_const;
  p.fading_model = fading_model;
  p.fading_paths = fading_paths;
  return p;
}

LinkAdaptationTable ScenarioConfig::link_table() const {
  return LinkAdaptationTable::standard(mcs_margin_db, overhead_fraction, bler_steepness_per_db);
}

int ScenarioConfig::delay_slots() const {
  return delay_in_slots(tau_s, clock().slot_duration());
}

SlotIndex ScenarioConfig::total_slots() const {
  return static_cast<SlotIndex>(std::llround(duration_s / clock().slot_duration()));
}

SlotIndex ScenarioConfig::warmup_slots() const {
  return static_cast<SlotIndex>(input_window) +
         static_cast<SlotIndex>(pretrain_steps) * static_cast<SlotIndex>(batch_size);
}

ControllerConfig ScenarioConfig::controller_config() const {
  ControllerConfig c;
  c.variant = variant == PredictorVariant::kFnn ? neural::Variant::kFnn : neural::Variant::kLstm;
  c.dims = {input_window, fc_units, lstm_units, fnn_hidden};
  c.optimizer.learning_rate = learning_rate;
  c.mse_window = mse_window;
  c.batch_size = batch_size;
  c.pretrain_steps = pretrain_steps;
  c.delay_slots = delay_slots();
  c.reinit_on_switch = reinit_on_switch;
  c.initial_cqi = CqiValue(initial_cqi);
  return c;
}

ScenarioConfig parse_config(std::string_view text) {
  ScenarioConfig config;
  bool blank = true;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) blank = false;
  }
  if (blank) return config;

  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object()) {
    throw std::invalid_argument("malformed config: top level must be an object");
  }

  for (const auto& [key, value] : doc.items()) {
    if (key == "scenario") {
      if (!value.is_string()) bad_key(key, "expected single_user or multi_user");
      const auto name = value.get<std::string>();
      if (name == "single_user") {
        config.scenario = ScenarioKind::kSingleUser;
      } else if (name == "multi_user") {
        config.scenario = ScenarioKind::kMultiUser;
      } else {
        bad_key(key, "expected single_user or multi_user");
      }
      continue;
    }
    if (key == "variant") {
      if (!value.is_string()) bad_key(key, "expected a string");
      config.variant = predictor_variant_from_string(value.get<std::string>());
      continue;
    }
    if (key == "fading_model") {
      if (!value.is_string()) bad_key(key, "expected ar1 or sum_of_sinusoids");
      try {
        config.fading_model = fading_model_from_string(value.get<std::string>());
      } catch (const std::invalid_argument&) {
        bad_key(key, "expected ar1 or sum_of_sinusoids");
      }
      continue;
    }
    bool known = false;
    for (const auto& [name, member] : numeric_fields()) {
      if (name == key) {
        assign(config, key, member, value);
        known = true;
        break;
      }
    }
    if (!known) bad_key(key, "unknown key");
  }
  config.validate();
  return config;
}

std::string serialize_config(const ScenarioConfig& config) {
  Json doc = Json::object();
  doc["scenario"] = std::string(to_string(config.scenario));
  doc["variant"] = std::string(to_string(config.variant));
  doc["fading_model"] = std::string(to_string(config.fading_model));
  for (const auto& [name, member] : numeric_fields()) {
    std::visit([&](auto ptr) { doc[std::string(name)] = config.*ptr; }, member);
  }
  return doc.dump(2) + "\n";
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace cqisim
