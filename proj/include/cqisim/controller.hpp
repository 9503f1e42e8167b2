#ifndef CQISIM_CONTROLLER_HPP_
#define CQISIM_CONTROLLER_HPP_

// Per-UE online-learning controller. Each tick the BS learns CQI_real(t - tau),
// scores the prediction and the delayed CQI it used for that slot, compares
// their recency-weighted MSEs and either freezes the model and schedules with
// its prediction, or keeps training and schedules with the delayed CQI.

#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "cqisim/neural.hpp"
#include "cqisim/rng.hpp"
#include "cqisim/types.hpp"

namespace cqisim {

struct ErrorEntry {
  SlotIndex slot = 0;
  std::optional<double> prediction_error;  // CQI_pred(t) - CQI_real(t)
  std::optional<double> delay_error;       // CQI_real(t - tau) - CQI_real(t)
};

/// The most recent K+1 evaluated slots.
class ErrorWindow {
 public:
  explicit ErrorWindow(int k = 200) : k_(k) {
    if (k < 1) throw std::invalid_argument("mse_window must be >= 1");
  }

  int k() const { return k_; }
  const std::deque<ErrorEntry>& entries() const { return entries_; }

  void record(SlotIndex slot, std::optional<double> prediction_error,
              std::optional<double> delay_error) {
    if (!entries_.empty() && entries_.back().slot >= slot) {
      throw std::invalid_argument("error window slots must be strictly increasing");
    }
    entries_.push_back({slot, prediction_error, delay_error});
    while (entries_.front().slot < slot - k_) entries_.pop_front();
  }

 private:
  int k_;
  std::deque<ErrorEntry> entries_;
};

enum class ErrorKind { kPrediction, kDelay };

/// sum_{i=t-K}^{t} E(i)^2 * (i + 1 - (t - K)) / K; slots without an entry add 0.
inline double weighted_mse(const ErrorWindow& window, ErrorKind which, SlotIndex now) {
  const SlotIndex k = window.k();
  const SlotIndex oldest = now - k;
  double sum = 0.0;
  for (const auto& e : window.entries()) {
    if (e.slot < oldest || e.slot > now) continue;
    const auto& err = which == ErrorKind::kPrediction ? e.prediction_error : e.delay_error;
    if (!err) continue;
    sum += (*err) * (*err) * static_cast<double>(e.slot + 1 - oldest) / static_cast<double>(k);
  }
  return sum;
}

enum class PredictorMode { kPretrain, kTrain, kFrozen };
enum class CqiSource { kPrediction, kDelayed };

inline std::string_view to_string(PredictorMode m) {
  switch (m) {
    case PredictorMode::kPretrain:
      return "pretrain";
    case PredictorMode::kTrain:
      return "train";
    case PredictorMode::kFrozen:
      return "frozen";
  }
  return "unknown";
}

inline std::string_view to_string(CqiSource s) {
  return s == CqiSource::kPrediction ? "prediction" : "delayed";
}

struct ModeDecision {
  PredictorMode mode;
  CqiSource source;
};

/// Ties go to the prediction.
inline ModeDecision decide_mode(double mse_pred, double mse_delay) {
  if (mse_pred <= mse_delay) return {PredictorMode::kFrozen, CqiSource::kPrediction};
  return {PredictorMode::kTrain, CqiSource::kDelayed};
}

struct ControllerConfig {
  neural::Variant variant = neural::Variant::kLstm;
  neural::NetDims dims;
  neural::AdamConfig optimizer;
  int mse_window = 200;
  int batch_size = 20;
  int pretrain_steps = 20;
  int delay_slots = 1;
  bool reinit_on_switch = false;
  CqiValue initial_cqi{7};
};

struct Selection {
  CqiValue cqi;
  CqiSource source = CqiSource::kDelayed;
  std::optional<CqiValue> prediction;
  double raw_prediction = 0.0;
};

template <typename Scalar>
class PerUePredictor {
 public:
  using Net = neural::PredictorNet<Scalar>;

  PerUePredictor(UeId ue, const ControllerConfig& config, RngStream init_rng)
      : ue_(ue),
        config_(config),
        init_rng_(std::move(init_rng)),
        net_(Net::init(config.variant, config.dims, init_rng_, config.optimizer)),
        window_(config.mse_window),
        pretrain_remaining_(config.pretrain_steps) {
    if (config.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (config.pretrain_steps < 0) throw std::invalid_argument("pretrain_steps must be >= 0");
    if (config.delay_slots < 0) throw std::invalid_argument("delay_slots must be >= 0");
  }

  UeId ue() const { return ue_; }
  const ControllerConfig& config() const { return config_; }
  PredictorMode mode() const { return mode_; }
  CqiSource source() const { return source_; }
  const Net& net() const { return net_; }
  Net& net() { return net_; }
  const ErrorWindow& window() const { return window_; }
  const std::vector<int>& cqi_history() const { return history_; }
  int pretrain_remaining() const { return pretrain_remaining_; }
  double mse_pred() const { return mse_pred_; }
  double mse_delay() const { return mse_delay_; }
  int mode_switches() const { return mode_switches_; }
  int divergences() const { return divergences_; }
  long train_steps() const { return train_steps_; }
  std::optional<SlotIndex> last_feedback_slot() const { return last_feedback_; }
  std::optional<CqiValue> pending_prediction(SlotIndex slot) const {
    const auto it = pending_.find(slot);
    if (it == pending_.end()) return std::nullopt;
    return it->second;
  }

  /// Stores E_p (when a prediction exists) and E_t for `slot`.
  void record_feedback(SlotIndex slot, CqiValue real_cqi, std::optional<CqiValue> prediction,
                       CqiValue delayed_used) {
    std::optional<double> ep;
    if (prediction) ep = static_cast<double>(prediction->value() - real_cqi.value());
    const double et = static_cast<double>(delayed_used.value() - real_cqi.value());
    window_.record(slot, ep, et);
    history_.push_back(real_cqi.value());
    last_feedback_ = slot;
    trim_history();
  }

  /// Feedback for `slot` arriving at the BS, scored against the bookkeeping
  /// kept by select_cqi_for_scheduling.
  void on_feedback(SlotIndex slot, CqiValue real_cqi) {
    std::optional<CqiValue> prediction;
    if (auto it = pending_.find(slot); it != pending_.end()) {
      prediction = it->second;
    }
    pending_.erase(pending_.begin(), pending_.upper_bound(slot));
    auto used = delayed_used_.find(slot);
    const CqiValue delayed = used != delayed_used_.end() ? used->second : delayed_from_history(real_cqi);
    delayed_used_.erase(delayed_used_.begin(), delayed_used_.upper_bound(slot));
    record_feedback(slot, real_cqi, prediction, delayed);
  }

  /// Runs the remaining pretraining steps once enough history exists.
  void pretrain() {
    if (mode_ != PredictorMode::kPretrain) return;
    if (!history_covers_batch()) return;
    const auto batch = freshest_batch();
    while (pretrain_remaining_ > 0) {
      guarded_train_step(batch);
      --pretrain_remaining_;
    }
    mode_ = PredictorMode::kTrain;
    source_ = CqiSource::kDelayed;
  }

  /// Re-evaluates both weighted MSEs at the latest evaluated slot and switches
  /// mode. Stays in Pretrain (delayed source) until pretraining completes.
  ModeDecision decide_mode() {
    if (mode_ == PredictorMode::kPretrain || !last_feedback_) {
      return {mode_, source_};
    }
    mse_pred_ = weighted_mse(window_, ErrorKind::kPrediction, *last_feedback_);
    mse_delay_ = weighted_mse(window_, ErrorKind::kDelay, *last_feedback_);
    const ModeDecision next = cqisim::decide_mode(mse_pred_, mse_delay_);
    if (next.mode != mode_) {
      ++mode_switches_;
      if (next.mode == PredictorMode::kTrain && config_.reinit_on_switch) {
        net_ = Net::init(config_.variant, config_.dims, init_rng_, config_.optimizer);
      }
    }
    mode_ = next.mode;
    source_ = next.source;
    return next;
  }

  /// Arrival of slot t - tau feedback, pretraining, and the mode decision, in
  /// that order.
  void tick(SlotIndex now, std::optional<CqiValue> arriving) {
    const SlotIndex arrived = now - config_.delay_slots;
    if (arriving && arrived >= 0) on_feedback(arrived, *arriving);
    pretrain();
    decide_mode();
  }

  /// CQI handed to the scheduler for slot `now`. `delayed` is CQI_delay(now)
  /// as seen in the feedback queue.
  Selection select_cqi_for_scheduling(SlotIndex now, CqiValue delayed) {
    if (mode_ == PredictorMode::kTrain && history_covers_batch()) {
      guarded_train_step(freshest_batch());
    }
    Selection sel{delayed, CqiSource::kDelayed, std::nullopt, 0.0};
    delayed_used_[now] = delayed;
    const auto n = static_cast<std::size_t>(config_.dims.input_window);
    if (history_.size() < n) {
      return sel;
    }
    sel.raw_prediction = net_.forward(std::span<const int>(history_).last(n));
    sel.prediction = neural::quantize_prediction(sel.raw_prediction);
    pending_[now] = *sel.prediction;
    if (source_ == CqiSource::kPrediction) {
      sel.cqi = *sel.prediction;
      sel.source = CqiSource::kPrediction;
    }
    return sel;
  }

 private:
  std::size_t batch_history_needed() const {
    return static_cast<std::size_t>(config_.dims.input_window + config_.batch_size - 1 +
                                    config_.delay_slots);
  }

  bool history_covers_batch() const { return history_.size() >= batch_history_needed(); }

  neural::TrainBatch<Scalar> freshest_batch() const {
    return neural::make_sliding_batch<Scalar>(history_, config_.dims.input_window,
                                              config_.batch_size, config_.delay_slots);
  }

  void guarded_train_step(const neural::TrainBatch<Scalar>& batch) {
    Net checkpoint = net_;
    try {
      net_.train_step(batch);
      ++train_steps_;
    } catch (const neural::DivergenceError&) {
      net_ = std::move(checkpoint);
      ++divergences_;
    }
  }

  /// CQI_real(slot - tau) for a report arriving before `slot` is appended.
  CqiValue delayed_from_history(CqiValue arriving) const {
    const auto d = static_cast<std::size_t>(config_.delay_slots);
    if (d == 0) return arriving;
    if (history_.size() < d) return config_.initial_cqi;
    return CqiValue(history_[history_.size() - d]);
  }

  void trim_history() {
    const std::size_t keep = std::max(batch_history_needed(),
                                      static_cast<std::size_t>(config_.dims.input_window));
    if (history_.size() > 2 * keep + 64) {
      history_.erase(history_.begin(),
                     history_.begin() + static_cast<std::ptrdiff_t>(history_.size() - keep));
    }
  }

  UeId ue_;
  ControllerConfig config_;
  RngStream init_rng_;
  Net net_;
  ErrorWindow window_;
  PredictorMode mode_ = PredictorMode::kPretrain;
  CqiSource source_ = CqiSource::kDelayed;
  int pretrain_remaining_;
  std::vector<int> history_;
  std::map<SlotIndex, CqiValue> pending_;
  std::map<SlotIndex, CqiValue> delayed_used_;
  std::optional<SlotIndex> last_feedback_;
  double mse_pred_ = 0.0;
  double mse_delay_ = 0.0;
  int mode_switches_ = 0;
  int divergences_ = 0;
  long train_steps_ = 0;
};

}  // namespace cqisim

#endif  // CQISIM_CONTROLLER_HPP_
