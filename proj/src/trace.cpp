#include "cqisim/trace.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cqisim/controller.hpp"

namespace cqisim {

namespace {

constexpr std::string_view kTraceHeader =
    "slot,ue_id,true_cqi,delayed_cqi,pred_cqi,used_cqi,mcs,tbs_bits,success,sinr_db,"
    "mse_pred,mse_delay,mode,source";

template <typename T>
void put_optional(std::ostream& out, const std::optional<T>& v) {
  if (v) out << *v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream s(line);
  while (std::getline(s, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

long long to_int(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("trace line " + std::to_string(line) + ": bad integer '" + s +
                                "'");
  }
}

double to_double(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("trace line " + std::to_string(line) + ": bad number '" + s +
                                "'");
  }
}

}  // namespace

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows) {
  out << kTraceHeader << '\n';
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.slot << ',' << r.ue << ',' << r.true_cqi << ',' << r.delayed_cqi << ',';
    put_optional(out, r.pred_cqi);
    out << ',' << r.used_cqi << ',' << r.mcs << ',' << r.tbs_bits << ',' << (r.success ? 1 : 0)
        << ',' << r.sinr_db << ',';
    put_optional(out, r.mse_pred);
    out << ',';
    put_optional(out, r.mse_delay);
    out << ',' << r.mode << ',' << r.source << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw std::invalid_argument("trace: missing or unexpected header");
  }
  std::vector<TraceRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 14) {
      throw std::invalid_argument("trace line " + std::to_string(number) + ": expected 14 fields");
    }
    TraceRow r;
    r.slot = to_int(f[0], number);
    r.ue = static_cast<UeId>(to_int(f[1], number));
    r.true_cqi = static_cast<int>(to_int(f[2], number));
    r.delayed_cqi = static_cast<int>(to_int(f[3], number));
    if (!f[4].empty()) r.pred_cqi = static_cast<int>(to_int(f[4], number));
    r.used_cqi = static_cast<int>(to_int(f[5], number));
    r.mcs = static_cast<int>(to_int(f[6], number));
    r.tbs_bits = to_int(f[7], number);
    r.success = to_int(f[8], number) != 0;
    r.sinr_db = to_double(f[9], number);
    if (!f[10].empty()) r.mse_pred = to_double(f[10], number);
    if (!f[11].empty()) r.mse_delay = to_double(f[11], number);
    r.mode = f[12];
    r.source = f[13];
    // Range-checks the CQI columns.
    (void)CqiValue(r.true_cqi);
    (void)CqiValue(r.delayed_cqi);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<OfflinePrediction> replay_offline(std::span<const TraceRow> trace,
                                              const ScenarioConfig& config,
                                              std::span<const UeId> ues) {
  std::set<UeId> selected(ues.begin(), ues.end());
  if (selected.empty()) {
    for (const auto& r : trace) {
      if (r.mode != "none") selected.insert(r.ue);
    }
  }
  if (selected.empty()) {
    for (const auto& r : trace) selected.insert(r.ue);
  }

  std::map<UeId, std::vector<const TraceRow*>> by_ue;
  for (const auto& r : trace) {
    if (selected.contains(r.ue)) by_ue[r.ue].push_back(&r);
  }

  ControllerConfig controller = config.controller_config();
  if (config.variant != PredictorVariant::kFnn) controller.variant = neural::Variant::kLstm;

  std::vector<OfflinePrediction> out;
  for (auto& [ue, rows] : by_ue) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const TraceRow* a, const TraceRow* b) { return a->slot < b->slot; });
    PerUePredictor<SimScalar> predictor(ue, controller,
                                        RngStream(config.seed, "predictor/" + std::to_string(ue)));
    // Delayed CQI recomputed from the recorded true CQIs, so traces exported by
    // any variant replay identically.
    std::map<SlotIndex, int> truth;
    for (const TraceRow* r : rows) truth[r->slot] = r->true_cqi;
    const int d = controller.delay_slots;
    for (const TraceRow* r : rows) {
      const SlotIndex now = r->slot;
      CqiValue delayed = controller.initial_cqi;
      if (auto it = truth.upper_bound(now - d); it != truth.begin()) {
        delayed = CqiValue(std::prev(it)->second);
      }
      const bool arrived = now - d >= 0 && truth.contains(now - d);
      predictor.tick(now, arrived ? std::optional<CqiValue>(delayed) : std::nullopt);
      const Selection sel = predictor.select_cqi_for_scheduling(now, delayed);
      OfflinePrediction p;
      p.slot = now;
      p.ue = ue;
      p.true_cqi = r->true_cqi;
      p.delayed_cqi = delayed.value();
      if (sel.prediction) p.predicted = sel.prediction->value();
      p.mode = std::string(to_string(predictor.mode()));
      out.push_back(std::move(p));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.slot != b.slot ? a.slot < b.slot : a.ue < b.ue;
  });
  return out;
}

void write_offline_csv(std::ostream& out, std::span<const OfflinePrediction> rows) {
  out << "slot,ue_id,true,delayed,predicted,mode\n";
  for (const auto& r : rows) {
    out << r.slot << ',' << r.ue << ',' << r.true_cqi << ',' << r.delayed_cqi << ',';
    put_optional(out, r.predicted);
    out << ',' << r.mode << '\n';
  }
}

}  // namespace cqisim
