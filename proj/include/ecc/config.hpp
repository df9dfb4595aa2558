#pragma once

// Domain types shared by every part of the simulator: system configuration,
// edge topology, workloads, placement decisions and per-workload outcomes.
//
// Node indices follow one convention everywhere: edge agents are 1..N and the
// cloud is N+1. Configuration is stored in the customary mixed units (Mbit,
// GHz, Mbps); conversion to bits/cycles/seconds happens in units.hpp only.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PowerProfile {
  double p_priv = 0.1;       // W, waiting in the private stack
  double p_off = 0.1;        // W, waiting in the offloading stack
  double p_pub = 0.1;        // W, waiting in a public stack
  double p_tran = 0.2;       // W, link transfer
  double p_exec_edge = 1.0;  // W, edge CPU (private and public)
  double p_exec_cloud = 2.0; // W, cloud CPU
};

struct CostWeights {
  double w_d = 0.5;
  double w_e = 0.5;
};

struct SystemConfig {
  int n_agents = 4;
  double slot_duration = 0.1;  // s
  int horizon = 60;            // slots per episode
  int drain_slots = 10;        // trailing slots without arrivals
  double arrival_prob = 0.7;
  std::vector<double> size_set;  // Mbit
  double density = 0.297;        // gigacycles per Mbit
  int timeout = 20;              // slots
  double rate_horizontal = 30.0; // Mbps
  double rate_vertical = 10.0;   // Mbps
  double cpu_private = 5.0;      // GHz
  double cpu_public_edge = 5.0;  // GHz
  double cpu_public_cloud = 30.0;// GHz
  PowerProfile powers;
  CostWeights weights;
  double drop_penalty = 40.0;
  std::uint64_t rng_seed = 1;

  int cloud() const { return n_agents + 1; }
  int node_count() const { return n_agents + 1; }
  int last_arrival_slot() const { return horizon - drain_slots; }
};

/// Symmetric 0/1 adjacency between edge agents. The cloud is implicit and
/// reachable from every agent.
class Topology {
 public:
  Topology() = default;
  explicit Topology(std::vector<std::vector<int>> g) : g_(std::move(g)) {}

  static Topology full(int n);
  /// Ring lattice where each agent links to `k` neighbours on each side.
  static Topology ring(int n, int k);

  int size() const { return static_cast<int>(g_.size()); }
  bool connected(int a, int b) const;  // 1-based edge-agent ids
  std::vector<int> neighbours(int ea) const;
  const std::vector<std::vector<int>>& matrix() const { return g_; }

 private:
  std::vector<std::vector<int>> g_;
};

/// The Table-IV style defaults scaled down for desk runs (N = 4, T = 60).
SystemConfig desk_config();
/// Full-scale defaults (N = 20, T = 110).
SystemConfig paper_scale_config();
std::vector<double> default_size_set();

struct Violation {
  std::string field;
  std::string rule;
};

std::vector<Violation> validate_config(const SystemConfig& cfg, const Topology& topo);

// ---------------------------------------------------------------------------

struct Workload {
  std::uint64_t id = 0;      // 0 = no arrival
  int source = 0;            // edge agent
  int arrival_slot = 0;
  std::int64_t size_bits = 0;
  double density = 0.0;      // cycles per bit
  int deadline_slot = 0;     // arrival_slot + timeout - 1
  bool arrived = false;

  bool null() const { return id == 0; }
};

struct PlacementDecision {
  bool local = false;
  bool offload = false;
  int destination = 0;  // 0 = none

  static PlacementDecision none() { return {}; }
  static PlacementDecision run_local() { return {true, false, 0}; }
  static PlacementDecision offload_to(int k) { return {false, true, k}; }

  bool is_none() const { return !local && !offload; }
  friend bool operator==(const PlacementDecision&, const PlacementDecision&) = default;
};

/// Checks the single-destination and connectivity rules for a decision made
/// by `source`. Returns an empty string when valid.
std::string decision_error(const PlacementDecision& d, int source, const SystemConfig& cfg,
                           const Topology& topo);

enum class Status { Processed, Dropped };
enum class PathKind { Local, Horizontal, Vertical };

struct StageDurations {
  int wait_priv = 0;
  int exec_priv = 0;
  int wait_off = 0;
  int transfer = 0;
  int wait_pub = 0;
  int exec_pub = 0;

  friend bool operator==(const StageDurations&, const StageDurations&) = default;
};

struct WorkloadOutcome {
  std::uint64_t id = 0;
  int source = 0;
  int arrival_slot = 0;
  std::int64_t size_bits = 0;
  Status status = Status::Processed;
  int completion_slot = 0;
  int total_delay = 0;  // slots, arrival to resolution inclusive
  double total_energy = 0.0;
  PathKind path = PathKind::Local;
  int destination = 0;  // 0 for local
  StageDurations stages;

  friend bool operator==(const WorkloadOutcome&, const WorkloadOutcome&) = default;
};

const char* to_string(Status s);
const char* to_string(PathKind p);

}  // namespace ecc
