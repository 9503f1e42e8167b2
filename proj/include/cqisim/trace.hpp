#ifndef CQISIM_TRACE_HPP_
#define CQISIM_TRACE_HPP_

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cqisim/config.hpp"
#include "cqisim/harness.hpp"

namespace cqisim {

/// slot,ue_id,true_cqi,delayed_cqi,pred_cqi,used_cqi,mcs,tbs_bits,success,sinr_db,
/// mse_pred,mse_delay,mode,source. Absent values are written as empty fields.
void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows);
std::vector<TraceRow> read_trace_csv(std::istream& in);

struct OfflinePrediction {
  SlotIndex slot = 0;
  UeId ue = 0;
  int true_cqi = 0;
  int delayed_cqi = 0;
  std::optional<int> predicted;
  std::string mode;
};

/// Replays the online train/freeze procedure on recorded true CQIs, one
/// controller per UE. An empty `ues` selects every UE that had a predictor in
/// the trace, or every UE when none had.
std::vector<OfflinePrediction> replay_offline(std::span<const TraceRow> trace,
                                              const ScenarioConfig& config,
                                              std::span<const UeId> ues = {});

/// slot,ue_id,true,delayed,predicted,mode
void write_offline_csv(std::ostream& out, std::span<const OfflinePrediction> rows);

}  // namespace cqisim

#endif  // CQISIM_TRACE_HPP_
