#include "cqisim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "cqisim/controller.hpp"

namespace cqisim {

namespace {

Vec2 rotate(const Vec2& v, double radians) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

UeState make_ue(UeId id, const Vec2& position, const Vec2& velocity, bool moving,
                const ScenarioConfig& config, const ChannelParams& channel) {
  UeState ue;
  ue.id = id;
  ue.position = position;
  ue.velocity = velocity;
  ue.is_moving = moving;
  const std::string tag = std::to_string(id);
  ue.fading = init_fading(RngStream(config.seed, "fading/" + tag), channel);
  RngStream shadow(config.seed, "shadowing/" + tag);
  ue.shadowing_db = channel.shadowing_std_db * shadow.normal();
  return ue;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  std::ostringstream s;
  s << std::setprecision(10) << x;
  return s.str();
}

double mean_or_nan(double sum, long n) {
  return n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

struct UeTally {
  long evaluated = 0;
  long matches = 0;
  std::int64_t delivered_bits = 0;
  double mse_pred_sum = 0.0;
  double mse_delay_sum = 0.0;
  long mse_count = 0;
};

}  // namespace

ScenarioWorld build_scenario(const ScenarioConfig& config) {
  config.validate();
  ScenarioWorld out;
  out.config = config;
  World& w = out.world;
  w.clock = config.clock();
  w.bs_position = Vec2(config.bs_x, config.bs_y);
  w.channel = config.channel_params();
  w.link = config.link_table();
  w.feedback = CqiFeedbackQueue(config.delay_slots(), CqiValue(config.initial_cqi));
  w.total_rbs = config.total_rbs;

  const Vec2 start(config.moving_start_x, config.moving_start_y);
  const double heading = deg_to_rad(config.heading_deg);
  UeId next_id = 0;
  if (config.scenario == ScenarioKind::kSingleUser) {
    const Vec2 velocity = rotate(Vec2(config.speed_mps, 0.0), heading);
    w.ues.push_back(make_ue(next_id, start, velocity, true, config, w.channel));
    out.moving_ues.push_back(next_id++);
  } else {
    for (int k = 0; k < config.multi_user_count; ++k) {
      const double angle = heading + 2.0 * std::numbers::pi * k / config.multi_user_count;
      const Vec2 position = w.bs_position + rotate(start - w.bs_position, angle);
      const Vec2 velocity = rotate(Vec2(config.speed_mps, 0.0), angle);
      w.ues.push_back(make_ue(next_id, position, velocity, true, config, w.channel));
      out.moving_ues.push_back(next_id++);
    }
  }
  for (int k = 0; k < config.interferer_count; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / config.interferer_count;
    const Vec2 position =
        w.bs_position + config.interferer_distance_m * Vec2(std::cos(angle), std::sin(angle));
    w.ues.push_back(make_ue(next_id++, position, Vec2::Zero(), false, config, w.channel));
  }
  for (const auto& ue : w.ues) {
    w.link_rng.emplace_back(config.seed, "link/" + std::to_string(ue.id));
  }
  return out;
}

RunOutput run_scenario(ScenarioWorld scenario, bool record_trace) {
  const ScenarioConfig& config = scenario.config;
  World& world = scenario.world;
  const SlotIndex total = config.total_slots();
  SlotIndex warmup = config.warmup_slots();
  if (warmup >= total) warmup = 0;

  const bool learning =
      config.variant == PredictorVariant::kLstm || config.variant == PredictorVariant::kFnn;
  const ControllerConfig controller = config.controller_config();
  std::map<UeId, PerUePredictor<SimScalar>> predictors;
  if (learning) {
    for (UeId ue : scenario.moving_ues) {
      predictors.emplace(ue, PerUePredictor<SimScalar>(
                                 ue, controller,
                                 RngStream(config.seed, "predictor/" + std::to_string(ue))));
    }
  }

  struct SlotNote {
    CqiValue delayed;
    std::optional<CqiValue> prediction;
    std::string mode = "none";
    std::string source;
    std::optional<double> mse_pred;
    std::optional<double> mse_delay;
  };
  std::map<UeId, SlotNote> notes;

  const CqiSelector selector = [&](UeId ue, SlotIndex now) -> CqiValue {
    SlotNote& note = notes[ue];
    note = SlotNote{};
    note.delayed = world.feedback.delayed_cqi(ue, now);
    if (config.variant == PredictorVariant::kIdeal) {
      note.source = "ideal";
      return world.feedback.latest(ue);
    }
    const auto it = predictors.find(ue);
    if (it == predictors.end()) {
      note.source = "delayed";
      return note.delayed;
    }
    auto& p = it->second;
    const bool arrived = now - controller.delay_slots >= 0;
    p.tick(now, arrived ? std::optional<CqiValue>(note.delayed) : std::nullopt);
    const Selection sel = p.select_cqi_for_scheduling(now, note.delayed);
    note.prediction = sel.prediction;
    note.mode = std::string(to_string(p.mode()));
    note.source = std::string(to_string(sel.source));
    if (p.mode() != PredictorMode::kPretrain) {
      note.mse_pred = p.mse_pred();
      note.mse_delay = p.mse_delay();
    }
    return sel.cqi;
  };

  std::map<UeId, UeTally> tallies;
  RunOutput out;
  for (SlotIndex t = 0; t < total; ++t) {
    const SlotResult slot = run_slot(world, selector);
    for (const auto& r : slot.ues) {
      const SlotNote& note = notes[r.ue];
      if (record_trace) {
        TraceRow row;
        row.slot = t;
        row.ue = r.ue;
        row.true_cqi = r.true_cqi.value();
        row.delayed_cqi = note.delayed.value();
        if (note.prediction) row.pred_cqi = note.prediction->value();
        row.used_cqi = r.used_cqi.value();
        row.mcs = r.mcs;
        row.tbs_bits = r.tbs_bits;
        row.success = r.success;
        row.sinr_db = r.sinr_db;
        row.mse_pred = note.mse_pred;
        row.mse_delay = note.mse_delay;
        row.mode = note.mode;
        row.source = note.source;
        out.trace.push_back(std::move(row));
      }
      if (t < warmup) continue;
      UeTally& tally = tallies[r.ue];
      ++tally.evaluated;
      if (r.used_cqi == r.true_cqi) ++tally.matches;
      tally.delivered_bits += r.delivered_bits;
      if (note.mse_pred && note.mse_delay) {
        tally.mse_pred_sum += *note.mse_pred;
        tally.mse_delay_sum += *note.mse_delay;
        ++tally.mse_count;
      }
    }
  }

  const double horizon = static_cast<double>(total - warmup) * world.clock.slot_duration();
  MetricsRow& m = out.metrics;
  m.variant = config.variant;
  m.speed_mps = config.speed_mps;
  m.seed = config.seed;
  m.ue_id = scenario.moving_ues.size() == 1 ? scenario.moving_ues.front() : -1;
  for (UeId ue : scenario.moving_ues) {
    const UeTally& tally = tallies[ue];
    UeMetrics u;
    u.ue = ue;
    u.evaluated_slots = tally.evaluated;
    u.accuracy = tally.evaluated > 0
                     ? static_cast<double>(tally.matches) / static_cast<double>(tally.evaluated)
                     : 0.0;
    u.throughput_bps = static_cast<double>(tally.delivered_bits) / horizon;
    u.mse_pred_mean = mean_or_nan(tally.mse_pred_sum, tally.mse_count);
    u.mse_delay_mean = mean_or_nan(tally.mse_delay_sum, tally.mse_count);
    if (const auto it = predictors.find(ue); it != predictors.end()) {
      u.mode_switches = it->second.mode_switches();
      u.divergences = it->second.divergences();
      u.train_steps = it->second.train_steps();
    }
    m.per_ue.push_back(u);
  }

  const auto n = static_cast<double>(m.per_ue.size());
  m.mse_pred_mean = 0.0;
  m.mse_delay_mean = 0.0;
  for (const auto& u : m.per_ue) {
    m.accuracy += u.accuracy / n;
    m.throughput_bps += u.throughput_bps / n;
    m.mse_pred_mean += u.mse_pred_mean / n;
    m.mse_delay_mean += u.mse_delay_mean / n;
    m.mode_switches += u.mode_switches;
    m.divergences += u.divergences;
  }
  double var = 0.0;
  for (const auto& u : m.per_ue) var += (u.accuracy - m.accuracy) * (u.accuracy - m.accuracy);
  m.accuracy_std = std::sqrt(var / n);
  return out;
}

SweepResult sweep(const ScenarioConfig& base, std::span<const double> speeds,
                  std::span<const std::uint64_t> seeds,
                  std::span<const PredictorVariant> variants, unsigned threads) {
  std::vector<ScenarioConfig> jobs;
  jobs.reserve(speeds.size() * seeds.size() * variants.size());
  for (double speed : speeds) {
    for (std::uint64_t seed : seeds) {
      for (PredictorVariant variant : variants) {
        ScenarioConfig config = base;
        config.speed_mps = speed;
        config.seed = seed;
        config.variant = variant;
        jobs.push_back(config);
      }
    }
  }

  SweepResult result;
  result.rows.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        result.rows[i] = run_scenario(build_scenario(jobs[i])).metrics;
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const unsigned count =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::vector<AggregateRow> aggregate(std::span<const MetricsRow> rows) {
  struct Acc {
    std::vector<double> accuracy;
    std::vector<double> throughput;
    double accuracy_std_ues = 0.0;
  };
  std::vector<std::pair<std::pair<double, PredictorVariant>, Acc>> groups;
  for (const auto& row : rows) {
    const auto key = std::make_pair(row.speed_mps, row.variant);
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, Acc{}});
      it = std::prev(groups.end());
    }
    it->second.accuracy.push_back(row.accuracy);
    it->second.throughput.push_back(row.throughput_bps);
    it->second.accuracy_std_ues += row.accuracy_std;
  }

  const auto mean = [](const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
  };
  const auto sample_std = [](const std::vector<double>& xs, double mu) {
    if (xs.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : xs) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
  };

  std::vector<AggregateRow> out;
  for (const auto& [key, acc] : groups) {
    AggregateRow row;
    row.speed_mps = key.first;
    row.variant = key.second;
    row.runs = static_cast<int>(acc.accuracy.size());
    row.accuracy_mean = mean(acc.accuracy);
    row.accuracy_std_seeds = sample_std(acc.accuracy, row.accuracy_mean);
    row.accuracy_std_ues = acc.accuracy_std_ues / row.runs;
    row.throughput_mean_bps = mean(acc.throughput);
    row.throughput_std_bps = sample_std(acc.throughput, row.throughput_mean_bps);
    out.push_back(row);
  }
  return out;
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << "variant,speed_mps,seed,ue_id,accuracy,throughput_bps,mse_pred_mean,"
         "mse_delay_mean,mode_switches\n";
  for (const auto& r : rows) {
    out << to_string(r.variant) << ',' << format_double(r.speed_mps) << ',' << r.seed << ','
        << (r.ue_id < 0 ? std::string("all") : std::to_string(r.ue_id)) << ','
        << format_double(r.accuracy) << ',' << format_double(r.throughput_bps) << ','
        << format_double(r.mse_pred_mean) << ',' << format_double(r.mse_delay_mean) << ','
        << r.mode_switches << '\n';
  }
}

void write_per_ue_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << "variant,speed_mps,seed,ue_id,accuracy,throughput_bps,mse_pred_mean,"
         "mse_delay_mean,mode_switches\n";
  for (const auto& r : rows) {
    for (const auto& u : r.per_ue) {
      out << to_string(r.variant) << ',' << format_double(r.speed_mps) << ',' << r.seed << ','
          << u.ue << ',' << format_double(u.accuracy) << ',' << format_double(u.throughput_bps)
          << ',' << format_double(u.mse_pred_mean) << ',' << format_double(u.mse_delay_mean)
          << ',' << u.mode_switches << '\n';
    }
  }
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows) {
  out << "variant,speed_mps,runs,accuracy_mean,accuracy_std_seeds,accuracy_std_ues,"
         "throughput_mean_bps,throughput_std_bps\n";
  for (const auto& r : rows) {
    out << to_string(r.variant) << ',' << format_double(r.speed_mps) << ',' << r.runs << ','
        << format_double(r.accuracy_mean) << ',' << format_double(r.accuracy_std_seeds) << ','
        << format_double(r.accuracy_std_ues) << ',' << format_double(r.throughput_mean_bps)
        << ',' << format_double(r.throughput_std_bps) << '\n';
  }
}

}  // namespace cqisim
