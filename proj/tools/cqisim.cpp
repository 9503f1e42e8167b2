// Command-line front end: simulate, sweep, predict-offline, --dump-cqi-table.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cqisim/channel.hpp"
#include "cqisim/config.hpp"
#include "cqisim/harness.hpp"
#include "cqisim/trace.hpp"

namespace {

using namespace cqisim;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream s(text);
  while (std::getline(s, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_speeds(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(std::stod(item));
  if (out.empty()) throw std::invalid_argument("--speeds: empty list");
  return out;
}

/// "1..5" or "1,2,7".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = std::stoull(text.substr(0, dots));
    const auto hi = std::stoull(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("--seeds: empty range " + text);
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  for (const auto& item : split_list(text)) out.push_back(std::stoull(item));
  if (out.empty()) throw std::invalid_argument("--seeds: empty list");
  return out;
}

std::vector<PredictorVariant> parse_variants(const std::string& text) {
  std::vector<PredictorVariant> out;
  for (const auto& item : split_list(text)) out.push_back(predictor_variant_from_string(item));
  if (out.empty()) throw std::invalid_argument("--variants: empty list");
  return out;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  fn(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slot-level NR downlink link adaptation with online CQI prediction"};
  app.require_subcommand(0, 1);

  bool dump_table = false;
  app.add_flag("--dump-cqi-table", dump_table,
               "Print cqi,modulation_order,code_rate,spectral_efficiency and exit");

  std::string config_path;
  std::string out_path;
  std::string trace_path;

  auto* simulate = app.add_subcommand("simulate", "Run one scenario");
  simulate->add_option("--config", config_path, "JSON scenario config")->required();
  simulate->add_option("--export-trace", trace_path, "Write the per-slot trace CSV here");
  simulate->add_option("--out", out_path, "Metrics CSV (default stdout)");

  std::string speeds_text = "10,20,30,40,50,60,70";
  std::string seeds_text = "1..5";
  std::string variants_text = "lstm,fnn,delayed,ideal";
  std::string summary_path;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid of speeds x seeds x variants");
  sweep_cmd->add_option("--config", config_path, "JSON base config")->required();
  sweep_cmd->add_option("--speeds", speeds_text, "Comma-separated speeds in m/s");
  sweep_cmd->add_option("--seeds", seeds_text, "Seed range a..b or comma list");
  sweep_cmd->add_option("--variants", variants_text, "Comma-separated variants");
  sweep_cmd->add_option("--out", out_path, "Metrics CSV (default stdout)");
  sweep_cmd->add_option("--summary", summary_path, "Per speed and variant means");
  sweep_cmd->add_option("--threads", threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);

  std::vector<int> offline_ues;
  auto* offline = app.add_subcommand("predict-offline", "Replay the predictor on a trace");
  offline->add_option("--trace", trace_path, "Trace CSV from simulate --export-trace")->required();
  offline->add_option("--config", config_path, "JSON config for the predictor settings");
  offline->add_option("--ue", offline_ues, "UE ids to replay (default: predicted UEs)");
  offline->add_option("--out", out_path, "Predictions CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (dump_table) {
      write_cqi_table_csv(std::cout);
      return 0;
    }
    if (*simulate) {
      const ScenarioConfig config = load_config(config_path);
      const RunOutput run = run_scenario(build_scenario(config), !trace_path.empty());
      if (!trace_path.empty()) {
        with_output(trace_path, [&](std::ostream& o) { write_trace_csv(o, run.trace); });
      }
      const std::vector<MetricsRow> rows{run.metrics};
      with_output(out_path, [&](std::ostream& o) { write_metrics_csv(o, rows); });
      return 0;
    }
    if (*sweep_cmd) {
      const ScenarioConfig config = load_config(config_path);
      const auto speeds = parse_speeds(speeds_text);
      const auto seeds = parse_seeds(seeds_text);
      const auto variants = parse_variants(variants_text);
      const SweepResult result = sweep(config, speeds, seeds, variants, threads);
      with_output(out_path, [&](std::ostream& o) { write_metrics_csv(o, result.rows); });
      if (!summary_path.empty()) {
        const auto summary = aggregate(result.rows);
        with_output(summary_path, [&](std::ostream& o) { write_aggregate_csv(o, summary); });
      }
      return 0;
    }
    if (*offline) {
      const ScenarioConfig config =
          config_path.empty() ? ScenarioConfig{} : load_config(config_path);
      std::ifstream in(trace_path);
      if (!in) throw std::runtime_error("cannot open trace " + trace_path);
      const auto trace = read_trace_csv(in);
      const auto predictions = replay_offline(trace, config, offline_ues);
      with_output(out_path, [&](std::ostream& o) { write_offline_csv(o, predictions); });
      return 0;
    }
    std::cout << app.help();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
