// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   acceptance [--threads N] [--csv-dir DIR] [--skip-sweeps]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cqisim/config.hpp"
#include "cqisim/controller.hpp"
#include "cqisim/harness.hpp"
#include "cqisim/mac.hpp"
#include "cqisim/neural.hpp"

using namespace cqisim;

namespace {

// Tolerances and grid, fixed here.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradEps = 1e-5;
constexpr int kGradPoints = 20;
constexpr double kGradSeconds = 10.0;
constexpr int kMseWindows = 1000;
constexpr double kMseRelTolerance = 1e-12;
constexpr int kMonteCarloSlots = 10000;
constexpr double kSigmas = 3.0;
constexpr double kFnnMarginPp = 2.0;
constexpr double kTieFraction = 0.01;
constexpr double kSweepSeconds = 600.0;
constexpr int kFairnessTrials = 500;
const std::vector<double> kSpeeds{10, 20, 30, 40, 50, 60, 70};
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};
const std::vector<PredictorVariant> kVariants{PredictorVariant::kLstm, PredictorVariant::kFnn,
                                              PredictorVariant::kDelayed,
                                              PredictorVariant::kIdeal};

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail
            << std::endl;
  if (!o.pass) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- 1 ----

Outcome gradient_oracle() {
  using namespace neural;
  const auto start = std::chrono::steady_clock::now();
  const NetDims dims{3, 2, 2, 2};
  std::mt19937_64 gen(20);
  std::uniform_int_distribution<int> cqi(1, 15);
  double worst = 0.0;
  int points = 0;
  for (auto variant : {Variant::kLstm, Variant::kFnn}) {
    for (int point = 0; point < kGradPoints; ++point) {
      RngStream rng(static_cast<std::uint64_t>(1000 + point), "gradient-point");
      auto net = PredictorNet<double>::init(variant, dims, rng);
      auto params = net.params();
      for (auto& t : params.tensors()) {
        for (Eigen::Index k = 0; k < t.size(); ++k) t.data[k] = 0.8 * rng.normal();
      }
      net.set_params(params);
      TrainBatch<double> batch;
      batch.inputs.resize(dims.input_window, 4);
      batch.targets.resize(4);
      for (int c = 0; c < 4; ++c) {
        for (int r = 0; r < dims.input_window; ++r) batch.inputs(r, c) = normalize_cqi(cqi(gen));
        batch.targets(c) = normalize_cqi(cqi(gen));
      }
      worst = std::max(worst, gradient_check(net, batch, kGradEps));
      ++points;
    }
  }
  const double elapsed = seconds_since(start);
  return {worst < kGradTolerance && elapsed < kGradSeconds,
          fmt("max rel err %.3g < %.0e over %d points (LSTM+FNN, N=3, widths 2), %.2f s < %.0f s",
              worst, kGradTolerance, points, elapsed, kGradSeconds)};
}

// ---- 2 ----

/// Dense walk over every slot t-K..t; absent slots contribute zero.
double mse_oracle(const std::map<SlotIndex, double>& errors, SlotIndex k, SlotIndex now) {
  double total = 0.0;
  for (SlotIndex i = now - k; i <= now; ++i) {
    const auto it = errors.find(i);
    const double e = it == errors.end() ? 0.0 : it->second;
    total += e * e * static_cast<double>(i - (now - k) + 1) / static_cast<double>(k);
  }
  return total;
}

Outcome weighted_mse_oracle_check() {
  ErrorWindow hand(2);
  hand.record(10, 1.0, 1.0);
  hand.record(11, 2.0, 2.0);
  hand.record(12, 3.0, 3.0);
  const double hand_value = weighted_mse(hand, ErrorKind::kPrediction, 12);
  bool pass = hand_value == 18.0;

  std::mt19937_64 gen(55);
  int integer_mismatch = 0;
  double worst_rel = 0.0;
  for (int trial = 0; trial < kMseWindows; ++trial) {
    const bool integer = trial % 2 == 0;
    const int k = 1 + static_cast<int>(gen() % 300);
    ErrorWindow w(k);
    std::map<SlotIndex, double> pred, delay;
    SlotIndex t = static_cast<SlotIndex>(gen() % 100);
    const int length = 1 + static_cast<int>(gen() % 500);
    for (int n = 0; n < length; ++n) {
      t += 1 + static_cast<SlotIndex>(gen() % 4 == 0);
      auto draw = [&]() -> double {
        if (integer) return static_cast<double>(static_cast<int>(gen() % 29) - 14);
        return std::normal_distribution<double>(0.0, 2.5)(gen);
      };
      std::optional<double> ep;
      if (gen() % 6 != 0) ep = draw();
      const double et = draw();
      if (ep) pred[t] = *ep;
      delay[t] = et;
      w.record(t, ep, et);
    }
    for (const auto& [kind, errors] : {std::pair{ErrorKind::kPrediction, &pred},
                                       std::pair{ErrorKind::kDelay, &delay}}) {
      const double got = weighted_mse(w, kind, t);
      const double want = mse_oracle(*errors, k, t);
      if (integer) {
        integer_mismatch += got != want;
      } else {
        worst_rel = std::max(worst_rel, std::abs(got - want) / std::max(std::abs(want), 1e-300));
      }
    }
  }
  pass = pass && integer_mismatch == 0 && worst_rel <= kMseRelTolerance;
  return {pass, fmt("hand K=2 (1,2,3) -> %.17g; %d windows: %d integer mismatches (bitwise), "
                    "max rel err %.3g <= %.0e otherwise",
                    hand_value, kMseWindows, integer_mismatch, worst_rel, kMseRelTolerance)};
}

// ---- 3 ----

World static_world(int n, double distance) {
  World w;
  w.channel.fading_model = FadingModel::kAr1;
  w.channel.shadowing_std_db = 0.0;
  w.channel.interferer_tx_psd = 0.0;
  w.link = LinkAdaptationTable::standard(ten_percent_bler_margin_db(2.0));
  w.feedback = CqiFeedbackQueue(1, CqiValue(7));
  for (int i = 0; i < n; ++i) {
    UeState ue;
    ue.id = i;
    ue.position = {distance, 0.0};
    w.ues.push_back(ue);
    w.link_rng.emplace_back(7, "link/" + std::to_string(i));
  }
  return w;
}

Outcome throughput_oracle() {
  // Hand trace: UE 0 at CQI 7 (64QAM, 466/1024 -> MCS 11) in slot 0, UE 1 at
  // CQI 10 (64QAM, 772/1024 -> MCS 17) in slot 1, 133 RBs, 57 dB SINR.
  //   floor(133*12*14*6*466/1024*0.86) = 52468
  //   floor(133*12*14*6*772/1024*0.86) = 86921
  constexpr std::int64_t kSlot0Ue0 = 52468;
  constexpr std::int64_t kSlot1Ue1 = 86921;
  World w = static_world(2, 10.0);
  const CqiSelector selector = [](UeId ue, SlotIndex) { return CqiValue(ue == 0 ? 7 : 10); };
  const SlotResult s0 = run_slot(w, selector);
  const SlotResult s1 = run_slot(w, selector);
  const bool hand = s0.for_ue(0).delivered_bits == kSlot0Ue0 && s0.for_ue(1).delivered_bits == 0 &&
                    s1.for_ue(0).delivered_bits == 0 && s1.for_ue(1).delivered_bits == kSlot1Ue1;

  World mc = static_world(1, 1.0);
  mc.channel.reference_loss_db = 0.0;
  const int cqi = 9;
  const int mcs = cqi_to_mcs(CqiValue(cqi), mc.link);
  mc.channel.tx_psd = mc.channel.noise_psd * from_db(mc.link.row(mcs).required_sinr_db + 0.5);
  std::vector<SlotResult> results;
  results.reserve(kMonteCarloSlots);
  for (int s = 0; s < kMonteCarloSlots; ++s) {
    results.push_back(run_slot(mc, [&](UeId, SlotIndex) { return CqiValue(cqi); }));
  }
  const double T = mc.clock.slot_duration();
  const double tbs = static_cast<double>(results.front().ues[0].tbs_bits);
  const double bler = bler_probability(mcs, mc.channel.tx_psd / mc.channel.noise_psd, mc.link);
  const double measured = accumulate_throughput(results, 0, kMonteCarloSlots * T);
  const double expected = tbs * (1.0 - bler) / T;
  const double sigma = tbs * std::sqrt(bler * (1.0 - bler) / kMonteCarloSlots) / T;
  const double z = std::abs(measured - expected) / sigma;
  return {hand && z <= kSigmas,
          fmt("hand trace %lld/%lld bits (want %lld/%lld); Monte-Carlo %d slots B=%.4f: "
              "%.6g vs %.6g bit/s, |z|=%.2f <= %.0f",
              static_cast<long long>(s0.for_ue(0).delivered_bits),
              static_cast<long long>(s1.for_ue(1).delivered_bits),
              static_cast<long long>(kSlot0Ue0), static_cast<long long>(kSlot1Ue1),
              kMonteCarloSlots, bler, measured, expected, z, kSigmas)};
}

// ---- 4 ----

struct ControllerAudit {
  long ticks = 0;
  long frozen = 0;
  long train = 0;
  long violations = 0;
  std::string first;

  void fail(const std::string& what) {
    if (violations++ == 0) first = what;
  }
};

/// Plays the scenario slot order over a true-CQI sequence and checks every tick
/// against an independent bookkeeping of E_p and E_t.
template <typename Scalar>
void audit_controller(const ControllerConfig& cfg, const std::vector<int>& truth,
                      std::uint64_t seed, ControllerAudit& audit) {
  PerUePredictor<Scalar> p(0, cfg, RngStream(seed, "predictor/0"));
  const int d = cfg.delay_slots;
  std::map<SlotIndex, int> predictions;
  std::map<SlotIndex, double> ep, et;
  for (SlotIndex t = 0; t < static_cast<SlotIndex>(truth.size()); ++t) {
    const SlotIndex arrived = t - d;
    const CqiValue delayed =
        arrived >= 0 ? CqiValue(truth[static_cast<std::size_t>(arrived)]) : cfg.initial_cqi;
    if (arrived >= 0) {
      const int real = truth[static_cast<std::size_t>(arrived)];
      const int stale =
          arrived - d >= 0 ? truth[static_cast<std::size_t>(arrived - d)] : cfg.initial_cqi.value();
      et[arrived] = stale - real;
      if (auto it = predictions.find(arrived); it != predictions.end()) {
        ep[arrived] = it->second - real;
      }
    }
    const bool was_pretraining = p.mode() == PredictorMode::kPretrain;
    auto before = p.net().params();
    p.tick(t, arrived >= 0 ? std::optional<CqiValue>(delayed) : std::nullopt);
    if (was_pretraining) before = p.net().params();
    const PredictorMode mode = p.mode();
    const Selection sel = p.select_cqi_for_scheduling(t, delayed);
    if (sel.prediction) predictions[t] = sel.prediction->value();

    const auto& entries = p.window().entries();
    if (!entries.empty() && entries.back().slot > t - d) {
      audit.fail(fmt("slot %lld scored before its feedback arrived", static_cast<long long>(t)));
    }
    if (mode == PredictorMode::kPretrain) {
      if (sel.source != CqiSource::kDelayed) audit.fail("pretraining slot used a prediction");
      continue;
    }
    ++audit.ticks;
    const double mp = mse_oracle(ep, cfg.mse_window, arrived);
    const double md = mse_oracle(et, cfg.mse_window, arrived);
    if (p.mse_pred() != mp || p.mse_delay() != md) {
      audit.fail(fmt("slot %lld: controller MSE (%g, %g) vs oracle (%g, %g)",
                     static_cast<long long>(t), p.mse_pred(), p.mse_delay(), mp, md));
    }
    const bool frozen = mode == PredictorMode::kFrozen;
    const bool uses_prediction = sel.source == CqiSource::kPrediction;
    if (frozen != (mp <= md) || uses_prediction != frozen) {
      audit.fail(fmt("slot %lld: mode %s source %s with MSE_pred %g MSE_delay %g",
                     static_cast<long long>(t), std::string(to_string(mode)).c_str(),
                     std::string(to_string(sel.source)).c_str(), mp, md));
    }
    if (frozen) {
      ++audit.frozen;
      if (!(p.net().params() == before)) {
        audit.fail(fmt("frozen slot %lld changed parameters", static_cast<long long>(t)));
      }
      if (!sel.prediction || sel.cqi != *sel.prediction) audit.fail("frozen slot not predicted");
    } else {
      ++audit.train;
      if (sel.cqi != delayed) audit.fail("train slot did not use the delayed CQI");
    }
  }
}

Outcome controller_state_machine() {
  ControllerAudit audit;
  // scripted random walks on a small net
  ControllerConfig small;
  small.dims = {6, 4, 4, 8};
  small.mse_window = 20;
  small.batch_size = 4;
  small.pretrain_steps = 5;
  small.optimizer.learning_rate = 1e-2;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 gen(seed);
    std::vector<int> walk;
    int c = 8;
    for (int i = 0; i < 1500; ++i) {
      if (gen() % 4 == 0) c = std::clamp(c + static_cast<int>(gen() % 3) - 1, 1, 15);
      walk.push_back(c);
    }
    audit_controller<double>(small, walk, seed, audit);
    auto fnn = small;
    fnn.variant = neural::Variant::kFnn;
    audit_controller<double>(fnn, walk, seed, audit);
  }
  // a simulated CQI sequence with the default controller
  ScenarioConfig sim;
  sim.variant = PredictorVariant::kDelayed;
  sim.speed_mps = 50.0;
  sim.duration_s = 5.0;
  const auto run = run_scenario(build_scenario(sim), true);
  std::vector<int> truth;
  for (const auto& row : run.trace) {
    if (row.ue == 0) truth.push_back(row.true_cqi);
  }
  audit_controller<SimScalar>(sim.controller_config(), truth, 1, audit);

  return {audit.violations == 0 && audit.frozen > 0 && audit.train > 0,
          fmt("%ld post-pretraining ticks (%ld frozen, %ld train), %ld violations%s%s",
              audit.ticks, audit.frozen, audit.train, audit.violations,
              audit.violations ? "; first: " : "", audit.first.c_str())};
}

// ---- 5, 6, 7 ----

struct Means {
  std::map<std::pair<double, PredictorVariant>, double> accuracy;
  std::map<std::pair<double, PredictorVariant>, double> throughput;
};

Means speed_means(const std::vector<AggregateRow>& summary) {
  Means m;
  for (const auto& row : summary) {
    m.accuracy[{row.speed_mps, row.variant}] = row.accuracy_mean;
    m.throughput[{row.speed_mps, row.variant}] = row.throughput_mean_bps;
  }
  return m;
}

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = (static_cast<double>(i + j) / 2.0) + 1.0;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

Outcome accuracy_trend(const Means& m, double sweep_seconds, unsigned threads) {
  std::vector<double> delayed;
  for (double v : kSpeeds) delayed.push_back(m.accuracy.at({v, PredictorVariant::kDelayed}));
  bool non_increasing = true;
  for (std::size_t i = 1; i < delayed.size(); ++i) non_increasing &= delayed[i] <= delayed[i - 1];
  const double rho = spearman(kSpeeds, delayed);

  std::string gaps;
  bool lstm_beats_delayed = true;
  for (double v : kSpeeds) {
    if (v < 30) continue;
    const double gap = m.accuracy.at({v, PredictorVariant::kLstm}) -
                       m.accuracy.at({v, PredictorVariant::kDelayed});
    lstm_beats_delayed &= gap >= 0.0;
    gaps += fmt(" %g:%+.2f", v, 100 * gap);
  }
  double lstm_fnn = 0.0;
  int high = 0;
  for (double v : kSpeeds) {
    if (v < 40) continue;
    lstm_fnn += m.accuracy.at({v, PredictorVariant::kLstm}) -
                m.accuracy.at({v, PredictorVariant::kFnn});
    ++high;
  }
  const double lstm_fnn_pp = 100.0 * lstm_fnn / high;
  const bool fast = sweep_seconds < kSweepSeconds;
  return {non_increasing && lstm_beats_delayed && lstm_fnn_pp >= kFnnMarginPp && fast,
          fmt("delayed non-increasing=%s (Spearman %.3f); LSTM-delayed pp at >=30 m/s:%s "
              "(need all >= 0); LSTM-FNN %+.2f pp at >=40 m/s (need >= %.1f); sweep %.0f s "
              "on %u thread(s) (need < %.0f s)",
              non_increasing ? "yes" : "no", rho, gaps.c_str(), lstm_fnn_pp, kFnnMarginPp,
              sweep_seconds, threads, kSweepSeconds)};
}

Outcome throughput_trend(const Means& m) {
  bool pass = true;
  std::string detail;
  for (double v : kSpeeds) {
    if (v < 40) continue;
    const double ideal = m.throughput.at({v, PredictorVariant::kIdeal});
    const double lstm = m.throughput.at({v, PredictorVariant::kLstm});
    const double delayed = m.throughput.at({v, PredictorVariant::kDelayed});
    const bool ok = ideal >= lstm * (1.0 - kTieFraction) && lstm >= delayed * (1.0 - kTieFraction);
    pass &= ok;
    detail += fmt(" %g:%.2f/%.2f/%.2f%s", v, ideal / 1e6, lstm / 1e6, delayed / 1e6,
                  ok ? "" : "(x)");
  }
  return {pass, "ideal/LSTM/delayed Mbit/s:" + detail + " (ties within 1%)"};
}

// ---- 8 ----

Outcome fairness() {
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<int> n_dist(1, 8);
  std::uniform_int_distribution<int> m_dist(1, 100);
  int bad = 0;
  for (int trial = 0; trial < kFairnessTrials; ++trial) {
    const int n = n_dist(gen);
    const int m = m_dist(gen);
    std::vector<UeId> ues(static_cast<std::size_t>(n));
    std::iota(ues.begin(), ues.end(), 0);
    std::map<UeId, int> counts;
    if (trial % 10 == 0) {
      // through the full slot loop
      World w = static_world(n, 20.0);
      for (int s = 0; s < n * m; ++s) {
        const SlotResult r = run_slot(w, [](UeId, SlotIndex) { return CqiValue(4); });
        for (const auto& e : r.ues) counts[e.ue] += e.allocated_rbs > 0;
      }
    } else {
      std::size_t cursor = static_cast<std::size_t>(gen() % static_cast<unsigned>(n));
      for (int s = 0; s < n * m; ++s) {
        const auto g = schedule_round_robin(ues, 133, cursor);
        for (const auto& [ue, rbs] : g.allocation) counts[ue] += rbs > 0;
        cursor = g.cursor;
      }
    }
    for (UeId ue : ues) bad += counts[ue] != m;
  }
  return {bad == 0, fmt("%d trials with n in [1,8], m in [1,100]: %d UEs off their m slots",
                        kFairnessTrials, bad)};
}

std::string metrics_csv(const SweepResult& result) {
  std::ostringstream out;
  write_metrics_csv(out, result.rows);
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string csv_dir;
  app.add_option("--threads", threads, "Sweep worker threads")->check(CLI::PositiveNumber);
  app.add_option("--csv-dir", csv_dir, "Also write the sweep CSVs here");
  bool skip_sweeps = false;
  app.add_flag("--skip-sweeps", skip_sweeps, "Only the oracle criteria (1-4, 8)");
  CLI11_PARSE(app, argc, argv);

  report(1, "gradient oracle", gradient_oracle());
  report(2, "weighted MSE oracle", weighted_mse_oracle_check());
  report(3, "throughput oracle", throughput_oracle());
  report(4, "controller state machine", controller_state_machine());
  report(8, "round-robin fairness", fairness());

  if (skip_sweeps) {
    std::cout << "SKIP [5] [6] [7] (--skip-sweeps)" << std::endl;
    return failures == 0 ? 0 : 1;
  }

  const ScenarioConfig base;
  auto start = std::chrono::steady_clock::now();
  const SweepResult first = sweep(base, kSpeeds, kSeeds, kVariants, threads);
  const double first_seconds = seconds_since(start);
  const auto summary = aggregate(first.rows);
  const Means means = speed_means(summary);
  report(5, "accuracy versus speed", accuracy_trend(means, first_seconds, threads));
  report(6, "throughput versus speed", throughput_trend(means));

  start = std::chrono::steady_clock::now();
  const SweepResult second = sweep(base, kSpeeds, kSeeds, kVariants, threads);
  const double second_seconds = seconds_since(start);
  const std::string a = metrics_csv(first);
  const std::string b = metrics_csv(second);
  report(7, "determinism",
         {a == b, fmt("two default sweeps (%zu rows, %zu bytes, %.0f s and %.0f s): %s",
                      first.rows.size(), a.size(), first_seconds, second_seconds,
                      a == b ? "byte-identical" : "differ")});

  if (!csv_dir.empty()) {
    std::filesystem::create_directories(csv_dir);
    std::ofstream(std::filesystem::path(csv_dir) / "sweep.csv") << a;
    std::ofstream summary_out(std::filesystem::path(csv_dir) / "summary.csv");
    write_aggregate_csv(summary_out, summary);
  }

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
