#ifndef CQISIM_MAC_HPP_
#define CQISIM_MAC_HPP_

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "cqisim/channel.hpp"
#include "cqisim/rng.hpp"
#include "cqisim/types.hpp"

namespace cqisim {

constexpr int kSubcarriersPerRb = 12;
constexpr int kSymbolsPerSlot = 14;

struct SlotClock {
  SlotIndex slot_index = 0;
  int numerology = 1;

  double slot_duration() const { return 1e-3 / static_cast<double>(1 << numerology); }
};

/// Per-UE time-stamped CQI reports, released to the scheduler `delay_slots` late.
class CqiFeedbackQueue {
 public:
  explicit CqiFeedbackQueue(int delay_slots = 1, CqiValue initial_cqi = CqiValue(7));

  int delay_slots() const { return delay_slots_; }
  CqiValue initial_cqi() const { return initial_cqi_; }

  /// Throws std::invalid_argument unless `slot` is past the UE's last report.
  void push(UeId ue, SlotIndex slot, CqiValue cqi);

  /// Report at now - delay_slots, else the most recent earlier report, else the
  /// initial CQI.
  CqiValue delayed_cqi(UeId ue, SlotIndex now) const;

  /// Newest report regardless of delay (the ideal-feedback oracle).
  CqiValue latest(UeId ue) const;

  /// Drops reports that can no longer be returned by delayed_cqi at or after `now`.
  void prune(SlotIndex now);

 private:
  int delay_slots_;
  CqiValue initial_cqi_;
  std::map<UeId, std::vector<std::pair<SlotIndex, CqiValue>>> history_;
};

/// round(tau / slot_duration).
int delay_in_slots(double tau, double slot_duration);

struct McsRow {
  int mcs_index;
  int modulation_order;
  double code_rate;  // fraction, not x1024
  double required_sinr_db;

  double spectral_efficiency() const { return modulation_order * code_rate; }
};

struct LinkAdaptationTable {
  std::vector<McsRow> rows;
  double overhead_fraction = 0.14;
  double bler_steepness = 2.0;  // per dB

  /// MCS table 5.1.3.1-2 (256QAM). Requirements are the inverse-Shannon SINR of
  /// each row's efficiency plus `margin_db`.
  static LinkAdaptationTable standard(double margin_db, double overhead_fraction = 0.14,
                                      double bler_steepness = 2.0);

  const McsRow& row(int mcs) const;
  int max_mcs() const { return static_cast<int>(rows.size()) - 1; }
};

/// Margin at which a UE sitting exactly on its CQI threshold sees 10% BLER.
double ten_percent_bler_margin_db(double bler_steepness);

int cqi_to_mcs(CqiValue cqi, const LinkAdaptationTable& table);

std::int64_t mcs_to_tbs(int mcs, int num_rbs, const LinkAdaptationTable& table,
                        const SlotClock& slot);

double bler_probability(int mcs, double actual_sinr, const LinkAdaptationTable& table);

struct RoundRobinGrant {
  std::map<UeId, int> allocation;
  std::size_t cursor = 0;
};

RoundRobinGrant schedule_round_robin(std::span<const UeId> backlogged_ues, int total_rbs,
                                     std::size_t cursor);

struct UeSlotResult {
  UeId ue = 0;
  CqiValue true_cqi;
  CqiValue used_cqi;
  double sinr_db = 0.0;
  int allocated_rbs = 0;
  int mcs = 0;
  std::int64_t tbs_bits = 0;
  double bler = 0.0;
  bool success = false;
  std::int64_t delivered_bits = 0;
};

struct SlotResult {
  SlotIndex slot_index = 0;
  std::vector<UeSlotResult> ues;

  const UeSlotResult& for_ue(UeId ue) const;
};

/// Entire simulated radio state of one scenario.
struct World {
  SlotClock clock;
  Vec2 bs_position = Vec2::Zero();
  std::vector<UeState> ues;
  ChannelParams channel;
  LinkAdaptationTable link;
  CqiFeedbackQueue feedback;
  int total_rbs = 133;
  std::size_t rr_cursor = 0;
  /// One success stream per UE; a uniform is consumed every slot whether or not
  /// the UE is scheduled, so variants see common random numbers.
  std::vector<RngStream> link_rng;
};

/// Picks the CQI used for link adaptation; called once per UE per slot after
/// that slot's true CQI has been enqueued.
using CqiSelector = std::function<CqiValue(UeId, SlotIndex)>;

SlotResult run_slot(World& world, const CqiSelector& cqi_source);

double accumulate_throughput(std::span<const SlotResult> results, UeId ue, double horizon);

}  // namespace cqisim

#endif  // CQISIM_MAC_HPP_
