#include "cqisim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace cqisim {

namespace {

// TS 38.214 Table 5.2.2.1-3.
constexpr std::array<CqiTableRow, 15> kCqiTable{{
    {1, 2, 78, 0.1523},    {2, 2, 193, 0.3770},   {3, 2, 449, 0.8770},
    {4, 4, 378, 1.4766},   {5, 4, 490, 1.9141},   {6, 4, 616, 2.4063},
    {7, 6, 466, 2.7305},   {8, 6, 567, 3.3223},   {9, 6, 666, 3.9023},
    {10, 6, 772, 4.5234},  {11, 6, 873, 5.1152},  {12, 8, 711, 5.5547},
    {13, 8, 797, 6.2266},  {14, 8, 885, 6.9141},  {15, 8, 948, 7.4063},
}};

const std::array<double, 15>& cqi_sinr_thresholds() {
  static const std::array<double, 15> thresholds = [] {
    std::array<double, 15> t{};
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = std::exp2(kCqiTable[i].spectral_efficiency) - 1.0;
    }
    return t;
  }();
  return thresholds;
}

void require(bool ok, const char* field, const char* what) {
  if (!ok) {
    throw std::invalid_argument(std::string(field) + " " + what);
  }
}

}  // namespace

std::string_view to_string(FadingModel model) {
  switch (model) {
    case FadingModel::kAr1:
      return "ar1";
    case FadingModel::kSumOfSinusoids:
      return "sum_of_sinusoids";
  }
  return "unknown";
}

FadingModel fading_model_from_string(std::string_view name) {
  if (name == "ar1") return FadingModel::kAr1;
  if (name == "sum_of_sinusoids") return FadingModel::kSumOfSinusoids;
  throw std::invalid_argument("fading_model must be ar1 or sum_of_sinusoids");
}

void ChannelParams::validate() const {
  require(tx_psd > 0, "tx_psd", "must be > 0");
  require(noise_psd > 0, "noise_psd", "must be > 0");
  require(interferer_tx_psd >= 0, "interferer_tx_psd", "must be >= 0");
  require(carrier_freq > 0, "carrier_freq", "must be > 0");
  require(pathloss_exponent >= 2, "pathloss_exponent", "must be >= 2");
  require(std::isfinite(reference_loss_db), "reference_loss_db", "must be finite");
  require(reference_distance > 0, "reference_distance", "must be > 0");
  require(min_distance > 0, "min_distance", "must be > 0");
  require(shadowing_std_db >= 0, "shadowing_std_db", "must be >= 0");
  require(fading_shape_const > 0, "fading_shape_const", "must be > 0");
  require(fading_paths >= 1, "fading_paths", "must be >= 1");
}

std::span<const CqiTableRow, 15> cqi_table() { return kCqiTable; }

double cqi_spectral_efficiency(CqiValue cqi) {
  return kCqiTable[static_cast<std::size_t>(cqi.value() - 1)].spectral_efficiency;
}

void write_cqi_table_csv(std::ostream& out) {
  out << "cqi,modulation_order,code_rate,spectral_efficiency\n";
  for (const auto& row : kCqiTable) {
    out << row.cqi << ',' << row.modulation_order << ',' << row.code_rate_x1024 / 1024.0
        << ',' << row.spectral_efficiency << '\n';
  }
}

UeState advance_mobility(UeState ue, double dt) {
  ue.position += ue.velocity * dt;
  return ue;
}

double path_loss_db(double distance, const ChannelParams& params) {
  const double d = std::max(distance, params.min_distance);
  return params.reference_loss_db +
         10.0 * params.pathloss_exponent * std::log10(d / params.reference_distance);
}

double fading_correlation(double speed, double dt, const ChannelParams& params) {
  const double doppler = speed * params.carrier_freq / kSpeedOfLight;
  return std::exp(-2.0 * std::numbers::pi * doppler * dt * params.fading_shape_const);
}

FadingState init_fading(RngStream rng, const ChannelParams& params) {
  FadingState state;
  state.rng = std::move(rng);
  if (params.fading_model == FadingModel::kAr1) {
    state.complex_gain = state.rng.complex_normal();
    return state;
  }
  const double two_pi = 2.0 * std::numbers::pi;
  state.paths.resize(static_cast<std::size_t>(params.fading_paths));
  std::complex<double> sum{0.0, 0.0};
  for (auto& path : state.paths) {
    path.arrival_cos = std::cos(two_pi * state.rng.uniform());
    path.phase = two_pi * state.rng.uniform();
    sum += std::polar(1.0, path.phase);
  }
  state.complex_gain = sum / std::sqrt(static_cast<double>(state.paths.size()));
  return state;
}

FadingState fading_step(FadingState state, double dt, double speed,
                        const ChannelParams& params) {
  const double rho = fading_correlation(speed, dt, params);
  state.correlation = rho;
  if (params.fading_model == FadingModel::kAr1 || state.paths.empty()) {
    const std::complex<double> w = state.rng.complex_normal();
    state.complex_gain = rho * state.complex_gain + std::sqrt(1.0 - rho * rho) * w;
    return state;
  }
  const double doppler =
      params.fading_shape_const * speed * params.carrier_freq / kSpeedOfLight;
  const double two_pi = 2.0 * std::numbers::pi;
  std::complex<double> sum{0.0, 0.0};
  for (auto& path : state.paths) {
    path.phase = std::fmod(path.phase + two_pi * doppler * path.arrival_cos * dt, two_pi);
    sum += std::polar(1.0, path.phase);
  }
  state.complex_gain = sum / std::sqrt(static_cast<double>(state.paths.size()));
  return state;
}

double received_psd(double transmit_psd, const Vec2& from, const Vec2& at,
                    double shadowing_db, std::complex<double> gain,
                    const ChannelParams& params) {
  const double loss_db = path_loss_db((at - from).norm(), params) + shadowing_db;
  return transmit_psd * from_db(-loss_db) * std::norm(gain);
}

double compute_sinr(const UeState& target, std::span<const UeState> interferers,
                    const Vec2& bs_position, const ChannelParams& params) {
  const double rx = received_psd(params.tx_psd, bs_position, target.position,
                                 target.shadowing_db, target.fading.complex_gain, params);
  double denominator = params.noise_psd;
  for (const auto& other : interferers) {
    denominator += received_psd(params.interferer_tx_psd, other.position, target.position,
                                other.shadowing_db, other.fading.complex_gain, params);
  }
  // floor keeps log2(1+sinr) and the dB conversion well defined in deep fades
  return std::max(rx / denominator, 1e-30);
}

CqiValue sinr_to_cqi(double sinr) {
  const auto& thresholds = cqi_sinr_thresholds();
  const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), sinr);
  const auto index = static_cast<int>(it - thresholds.begin());
  return CqiValue(std::max(index, kMinCqi));
}

}  // namespace cqisim
