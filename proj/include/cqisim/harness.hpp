#ifndef CQISIM_HARNESS_HPP_
#define CQISIM_HARNESS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cqisim/config.hpp"
#include "cqisim/mac.hpp"

namespace cqisim {

/// Scalar type of the predictors embedded in simulations.
using SimScalar = float;

struct ScenarioWorld {
  ScenarioConfig config;
  World world;
  std::vector<UeId> moving_ues;
};

/// single_user: UE 0 moves along (moving_start) + t*(v cos h, v sin h) past the
/// BS, UEs 1..4 are static interferers on a circle around the BS.
/// multi_user: `multi_user_count` moving UEs with headings spread evenly over
/// 360 degrees, each on the single-user path rotated by its heading.
ScenarioWorld build_scenario(const ScenarioConfig& config);

struct TraceRow {
  SlotIndex slot = 0;
  UeId ue = 0;
  int true_cqi = 0;
  int delayed_cqi = 0;
  std::optional<int> pred_cqi;
  int used_cqi = 0;
  int mcs = 0;
  std::int64_t tbs_bits = 0;
  bool success = false;
  double sinr_db = 0.0;
  std::optional<double> mse_pred;
  std::optional<double> mse_delay;
  std::string mode;    // pretrain|train|frozen, or none without a predictor
  std::string source;  // prediction|delayed|ideal
};

struct UeMetrics {
  UeId ue = 0;
  double accuracy = 0.0;
  double throughput_bps = 0.0;
  double mse_pred_mean = 0.0;   // NaN without a predictor
  double mse_delay_mean = 0.0;  // NaN without a predictor
  int mode_switches = 0;
  int divergences = 0;
  long train_steps = 0;
  long evaluated_slots = 0;
};

struct MetricsRow {
  PredictorVariant variant = PredictorVariant::kLstm;
  double speed_mps = 0.0;
  std::uint64_t seed = 0;
  /// Moving UE id, or -1 when averaged over several moving UEs.
  UeId ue_id = 0;
  double accuracy = 0.0;
  double accuracy_std = 0.0;  // across moving UEs
  double throughput_bps = 0.0;
  double mse_pred_mean = 0.0;
  double mse_delay_mean = 0.0;
  int mode_switches = 0;
  int divergences = 0;
  std::vector<UeMetrics> per_ue;
};

struct RunOutput {
  MetricsRow metrics;
  std::vector<TraceRow> trace;
};

/// Accuracy and throughput cover slots from warmup_slots() on; accuracy counts
/// every such slot of every moving UE, scheduled or not.
RunOutput run_scenario(ScenarioWorld scenario, bool record_trace = false);

struct SweepResult {
  std::vector<MetricsRow> rows;  // ordered by (speed, seed, variant)
};

/// Runs are independent; `threads` workers share them and the rows are the
/// same for any thread count.
SweepResult sweep(const ScenarioConfig& base, std::span<const double> speeds,
                  std::span<const std::uint64_t> seeds,
                  std::span<const PredictorVariant> variants, unsigned threads = 1);

struct AggregateRow {
  PredictorVariant variant;
  double speed_mps;
  int runs;
  double accuracy_mean;
  double accuracy_std_seeds;
  double accuracy_std_ues;
  double throughput_mean_bps;
  double throughput_std_bps;
};

/// Per (speed, variant) mean and sample std across seeds, in first-seen order.
std::vector<AggregateRow> aggregate(std::span<const MetricsRow> rows);

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);
void write_per_ue_csv(std::ostream& out, std::span<const MetricsRow> rows);
void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows);

}  // namespace cqisim

#endif  // CQISIM_HARNESS_HPP_
