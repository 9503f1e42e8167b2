#include "cqisim/mac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cqisim {

namespace {

struct McsEntry {
  int modulation_order;
  double code_rate_x1024;
};

// TS 38.214 Table 5.1.3.1-2.
constexpr std::array<McsEntry, 28> kMcsTable{{
    {2, 120},   {2, 193}, {2, 308}, {2, 449}, {2, 602}, {4, 378},   {4, 434},
    {4, 490},   {4, 553}, {4, 616}, {4, 658}, {6, 466}, {6, 517},   {6, 567},
    {6, 616},   {6, 666}, {6, 719}, {6, 772}, {6, 822}, {6, 873},   {8, 682.5},
    {8, 711},   {8, 754}, {8, 797}, {8, 841}, {8, 885}, {8, 916.5}, {8, 948},
}};

// The CQI table lists efficiencies rounded to four decimals.
constexpr double kEfficiencyTolerance = 1e-4;

}  // namespace

CqiFeedbackQueue::CqiFeedbackQueue(int delay_slots, CqiValue initial_cqi)
    : delay_slots_(delay_slots), initial_cqi_(initial_cqi) {
  if (delay_slots < 0) {
    throw std::invalid_argument("delay_slots must be >= 0");
  }
}

void CqiFeedbackQueue::push(UeId ue, SlotIndex slot, CqiValue cqi) {
  auto& reports = history_[ue];
  if (!reports.empty() && reports.back().first >= slot) {
    throw std::invalid_argument("CQI report slots must be strictly increasing (ue " +
                                std::to_string(ue) + ", slot " + std::to_string(slot) + ")");
  }
  reports.emplace_back(slot, cqi);
}

CqiValue CqiFeedbackQueue::delayed_cqi(UeId ue, SlotIndex now) const {
  const auto found = history_.find(ue);
  if (found == history_.end()) {
    return initial_cqi_;
  }
  const SlotIndex visible = now - delay_slots_;
  const auto& reports = found->second;
  const auto it = std::upper_bound(
      reports.begin(), reports.end(), visible,
      [](SlotIndex slot, const auto& report) { return slot < report.first; });
  if (it == reports.begin()) {
    return initial_cqi_;
  }
  return std::prev(it)->second;
}

CqiValue CqiFeedbackQueue::latest(UeId ue) const {
  const auto found = history_.find(ue);
  if (found == history_.end() || found->second.empty()) return initial_cqi_;
  return found->second.back().second;
}

void CqiFeedbackQueue::prune(SlotIndex now) {
  const SlotIndex visible = now - delay_slots_;
  for (auto& [ue, reports] : history_) {
    // keep the newest report at or before `visible`
    auto it = std::upper_bound(
        reports.begin(), reports.end(), visible,
        [](SlotIndex slot, const auto& report) { return slot < report.first; });
    if (it == reports.begin()) continue;
    reports.erase(reports.begin(), std::prev(it));
  }
}

int delay_in_slots(double tau, double slot_duration) {
  if (tau < 0) {
    throw std::invalid_argument("tau must be >= 0");
  }
  return static_cast<int>(std::lround(tau / slot_duration));
}

double ten_percent_bler_margin_db(double bler_steepness) {
  return -std::log(9.0) / bler_steepness;
}

LinkAdaptationTable LinkAdaptationTable::standard(double margin_db, double overhead_fraction,
                                                  double bler_steepness) {
  LinkAdaptationTable table;
  table.overhead_fraction = overhead_fraction;
  table.bler_steepness = bler_steepness;
  table.rows.reserve(kMcsTable.size());
  for (std::size_t i = 0; i < kMcsTable.size(); ++i) {
    McsRow row;
    row.mcs_index = static_cast<int>(i);
    row.modulation_order = kMcsTable[i].modulation_order;
    row.code_rate = kMcsTable[i].code_rate_x1024 / 1024.0;
    row.required_sinr_db = to_db(std::exp2(row.spectral_efficiency()) - 1.0) + margin_db;
    table.rows.push_back(row);
  }
  return table;
}

const McsRow& LinkAdaptationTable::row(int mcs) const {
  if (mcs < 0 || mcs > max_mcs()) {
    throw std::out_of_range("MCS index out of range: " + std::to_string(mcs));
  }
  return rows[static_cast<std::size_t>(mcs)];
}

int cqi_to_mcs(CqiValue cqi, const LinkAdaptationTable& table) {
  const double target = cqi_spectral_efficiency(cqi) + kEfficiencyTolerance;
  int best = 0;
  for (const auto& row : table.rows) {
    if (row.spectral_efficiency() <= target) {
      best = std::max(best, row.mcs_index);
    }
  }
  return best;
}

std::int64_t mcs_to_tbs(int mcs, int num_rbs, const LinkAdaptationTable& table,
                        const SlotClock& /*slot*/) {
  if (num_rbs < 0) {
    throw std::invalid_argument("num_rbs must be >= 0");
  }
  const McsRow& row = table.row(mcs);
  const double bits = static_cast<double>(num_rbs) * kSubcarriersPerRb * kSymbolsPerSlot *
                      row.modulation_order * row.code_rate * (1.0 - table.overhead_fraction);
  return static_cast<std::int64_t>(std::floor(bits));
}

double bler_probability(int mcs, double actual_sinr, const LinkAdaptationTable& table) {
  const double excess_db = to_db(actual_sinr) - table.row(mcs).required_sinr_db;
  return 1.0 / (1.0 + std::exp(table.bler_steepness * excess_db));
}

RoundRobinGrant schedule_round_robin(std::span<const UeId> backlogged_ues, int total_rbs,
                                     std::size_t cursor) {
  if (total_rbs < 1) {
    throw std::invalid_argument("total_rbs must be >= 1");
  }
  RoundRobinGrant grant;
  grant.cursor = cursor;
  if (backlogged_ues.empty()) {
    return grant;
  }
  const std::size_t n = backlogged_ues.size();
  grant.allocation[backlogged_ues[cursor % n]] = total_rbs;
  grant.cursor = (cursor + 1) % n;
  return grant;
}

const UeSlotResult& SlotResult::for_ue(UeId ue) const {
  for (const auto& entry : ues) {
    if (entry.ue == ue) return entry;
  }
  throw std::out_of_range("no slot entry for ue " + std::to_string(ue));
}

SlotResult run_slot(World& world, const CqiSelector& cqi_source) {
  const double dt = world.clock.slot_duration();
  const SlotIndex now = world.clock.slot_index;

  for (auto& ue : world.ues) {
    ue = advance_mobility(std::move(ue), dt);
    ue.fading = fading_step(std::move(ue.fading), dt, ue.speed(), world.channel);
  }

  SlotResult result;
  result.slot_index = now;
  result.ues.reserve(world.ues.size());
  std::vector<UeState> others;
  others.reserve(world.ues.size());
  std::vector<double> sinr_linear;
  sinr_linear.reserve(world.ues.size());
  for (const auto& ue : world.ues) {
    others.clear();
    for (const auto& other : world.ues) {
      if (other.id != ue.id) others.push_back(other);
    }
    UeSlotResult entry;
    entry.ue = ue.id;
    const double sinr = compute_sinr(ue, others, world.bs_position, world.channel);
    sinr_linear.push_back(sinr);
    entry.sinr_db = to_db(sinr);
    entry.true_cqi = sinr_to_cqi(sinr);
    world.feedback.push(ue.id, now, entry.true_cqi);
    result.ues.push_back(entry);
  }

  std::vector<UeId> backlogged;
  backlogged.reserve(world.ues.size());
  for (const auto& ue : world.ues) backlogged.push_back(ue.id);
  const RoundRobinGrant grant =
      schedule_round_robin(backlogged, world.total_rbs, world.rr_cursor);
  world.rr_cursor = grant.cursor;

  for (std::size_t i = 0; i < result.ues.size(); ++i) {
    UeSlotResult& entry = result.ues[i];
    entry.used_cqi = cqi_source(entry.ue, now);
    entry.mcs = cqi_to_mcs(entry.used_cqi, world.link);
    const double draw = world.link_rng[i].uniform();
    const auto granted = grant.allocation.find(entry.ue);
    if (granted == grant.allocation.end()) continue;
    entry.allocated_rbs = granted->second;
    entry.tbs_bits = mcs_to_tbs(entry.mcs, entry.allocated_rbs, world.link, world.clock);
    entry.bler = bler_probability(entry.mcs, sinr_linear[i], world.link);
    entry.success = draw >= entry.bler;
    entry.delivered_bits = entry.success ? entry.tbs_bits : 0;
  }

  world.feedback.prune(now + 1);
  ++world.clock.slot_index;
  return result;
}

double accumulate_throughput(std::span<const SlotResult> results, UeId ue, double horizon) {
  if (horizon <= 0) {
    throw std::invalid_argument("horizon must be > 0");
  }
  std::int64_t delivered = 0;
  for (const auto& slot : results) {
    for (const auto& entry : slot.ues) {
      if (entry.ue == ue) delivered += entry.delivered_bits;
    }
  }
  return static_cast<double>(delivered) / horizon;
}

}  // namespace cqisim
