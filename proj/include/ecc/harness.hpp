#pragma once

// Experiment plumbing: JSON configuration, campaign execution, metric
// aggregation and the CSV / summary / SVG outputs.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ecc/agent.hpp"
#include "ecc/config.hpp"
#include "ecc/forecaster.hpp"
#include "ecc/policies.hpp"

namespace ecc {

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ForecasterSettings {
  ForecastMode mode = ForecastMode::Lstm;
  int window = 10;
  int hidden = 20;
  int warmup_episodes = 30;
  int epochs = 20;
  int batch = 32;
  double lr = 5e-3;
};

enum class CampaignMode { Train, Infer, Sweep, AblateLstm };
const char* to_string(CampaignMode m);

struct Campaign {
  CampaignMode mode = CampaignMode::Infer;
  std::vector<std::string> policies{"RP", "LOP", "COO", "EEO", "RRO", "MLEO", "DECOFFEE"};
  std::string sweep_axis = "arrival_prob";
  std::vector<double> sweep_values{0.1, 0.3, 0.5, 0.7, 0.9};
  int repetitions = 20;  // inference episodes per cell
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string out_dir = "out";
  /// Train DECOFFEE again at every sweep point instead of once per seed at
  /// the base configuration. Forced for axes that change the cost or the
  /// network shape.
  bool retrain_per_point = false;
};

struct ExperimentConfig {
  SystemConfig system;
  std::string topology_kind = "full";  // full | ring | explicit
  int ring_degree = 2;
  Topology topology;
  AgentHyper agent;
  ForecasterSettings forecaster;
  Campaign campaign;
};

ExperimentConfig default_experiment(bool paper_scale);
/// Missing fields keep the values of `base`.
ExperimentConfig experiment_from_json(const std::string& text, const ExperimentConfig& base);
ExperimentConfig load_experiment(const std::string& path, bool paper_scale);
std::string experiment_to_json(const ExperimentConfig& cfg);
/// Config-level violations plus campaign-level ones.
std::vector<Violation> validate_experiment(const ExperimentConfig& cfg);

/// Applies one sweep point; rebuilds the topology when the agent count changes.
ExperimentConfig with_sweep_point(const ExperimentConfig& cfg, const std::string& axis, double value);
bool axis_needs_retraining(const std::string& axis);

// ---------------------------------------------------------------------------

struct EpisodeTrace {
  std::vector<WorkloadOutcome> outcomes;
  long decided_local = 0;
  long decided_horizontal = 0;
  long decided_vertical = 0;
};

/// Runs one episode under `policy` and flushes the system afterwards.
EpisodeTrace run_episode(const SystemConfig& cfg, const Topology& topo, Policy& policy, std::uint64_t seed);

struct MetricsRow {
  std::string policy;
  std::string sweep_axis;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  double mean_delay_s = 0.0;  // processed workloads only
  double drop_rate_pct = 0.0;
  double total_energy_j = 0.0;  // per episode
  double frac_local = 0.0;
  double frac_horizontal = 0.0;
  double frac_vertical = 0.0;
  double mean_cost = 0.0;  // not part of the CSV
};

MetricsRow aggregate(const std::vector<EpisodeTrace>& episodes, const SystemConfig& cfg);

extern const char* const kMetricsHeader;
std::string format_row(const MetricsRow& r);
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);

/// Collects A_k traces from episodes driven by the random policy.
std::vector<Trace> collect_load_traces(const SystemConfig& cfg, const Topology& topo, int episodes,
                                       std::uint64_t seed);

LoadForecast build_forecast(const ExperimentConfig& cfg, std::uint64_t seed, ForecastMode mode,
                            ForecastReport* report = nullptr);

struct TrainedPolicy {
  std::unique_ptr<DecoffeePolicy> policy;
  TrainingLog log;
  std::vector<QNetwork> nets;
};

/// Names DECOFFEE, DECOFFEE-DELAY (w_d = 1), EA-DECOFFEE (w_e = 1),
/// DECOFFEE-NOLSTM and DECOFFEE-ORACLE are recognised.
bool is_learning_policy(const std::string& name);
TrainedPolicy train_policy(const ExperimentConfig& cfg, const std::string& name, std::uint64_t seed);

/// (policy, sweep value, seed) cell: `repetitions` inference episodes.
MetricsRow evaluate(const ExperimentConfig& cfg, Policy& policy, const std::string& label, double sweep_value,
                    std::uint64_t seed);

struct CampaignResult {
  std::vector<MetricsRow> rows;
  std::vector<std::string> files;  // written outputs
};

using ProgressFn = std::function<void(const std::string&)>;

CampaignResult run_campaign(const ExperimentConfig& cfg, const ProgressFn& progress = {});

std::string summary_text(const std::vector<MetricsRow>& rows);

/// One SVG per metric; returns the written paths. Throws on empty input.
std::vector<std::string> write_plots(const std::vector<MetricsRow>& rows, const std::string& out_dir);
std::string svg_line_chart(const std::vector<MetricsRow>& rows, const std::string& metric);

}  // namespace ecc
