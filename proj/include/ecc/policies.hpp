#pragma once

// Placement policies behind one interface: the six fixed heuristics and the
// greedy wrapper around trained per-agent networks.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecc/agent.hpp"
#include "ecc/environment.hpp"
#include "ecc/forecaster.hpp"
#include "ecc/telemetry.hpp"

namespace ecc {

enum class PolicyKind { RP, LOP, COO, EEO, RRO, MLEO, Decoffee };

const char* to_string(PolicyKind k);
std::optional<PolicyKind> parse_policy_kind(const std::string& name);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  /// Called at the start of every episode.
  virtual void reset(std::uint64_t seed) { (void)seed; }
  /// Telemetry window the policy expects.
  virtual int window() const { return 1; }
  virtual PlacementDecision decide(int ea, const Workload& w, const Environment& env,
                                   const Telemetry& telemetry) = 0;
  /// Decisions for every agent in the current slot (none where no arrival).
  virtual std::vector<PlacementDecision> decide_slot(const Environment& env, const Telemetry& telemetry);
};

std::unique_ptr<Policy> make_baseline(PolicyKind kind, const SystemConfig& cfg, const Topology& topo);

/// Predicted slots from arrival to completion of `w` under `option`, with
/// every other stack frozen at its current state.
int mleo_estimate(int ea, const Workload& w, const PlacementDecision& option, const Environment& env);

class DecoffeePolicy : public Policy {
 public:
  DecoffeePolicy(std::string name, std::vector<QNetwork> nets, LoadForecast forecast, const SystemConfig& cfg,
                 const Topology& topo);

  std::string name() const override { return name_; }
  int window() const override { return forecast_.network() ? forecast_.network()->window : 1; }
  PlacementDecision decide(int ea, const Workload& w, const Environment& env, const Telemetry& telemetry) override;
  std::vector<PlacementDecision> decide_slot(const Environment& env, const Telemetry& telemetry) override;

 private:
  std::string name_;
  std::vector<QNetwork> nets_;
  std::vector<ActionCodec> codecs_;
  LoadForecast forecast_;
};

}  // namespace ecc
