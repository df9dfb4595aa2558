#pragma once

// Time-slotted edge-cloud continuum engine.
//
// Every edge agent owns a private stack (served by a dedicated CPU), an
// offloading stack (served by its outgoing links) and one public stack per
// peer it can receive work from. The cloud owns one public stack per edge
// agent. All stacks are FIFO. Public CPUs are shared equally among the
// stacks that are active at slot start.
//
// Per slot t, step() runs in this order:
//   1. placements for this slot's arrivals (private/offload schedules);
//   2. deliveries whose transfer ended at t-1 join their public stack;
//   3. A_k(t) is frozen for every host;
//   4. each active stack's head consumes its share of the host CPU;
//   5. public workloads whose deadline is t are dropped;
//   6. private and offload-stage resolutions scheduled for t are recorded;
//   7. the clock advances and the next slot's arrivals are sampled.

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "ecc/config.hpp"
#include "ecc/random.hpp"

namespace ecc {

/// max{0, latest - t + 1}: slots a new workload waits behind earlier work.
int wait_slots(int latest_completion, int t);
/// Same, taking the full completion history of the stack.
int wait_slots(std::span<const int> completions, int t);

struct LocalSchedule {
  int wait = 0;
  int exec = 0;
  int completion = 0;
  bool dropped = false;
};

struct OffloadSchedule {
  int wait = 0;
  int transfer = 0;
  int completion = 0;  // last transfer slot, or the deadline when dropped
  bool dropped = false;
};

/// Completion slot of a workload entering the private stack at `w.arrival_slot`.
LocalSchedule schedule_local(const Workload& w, int wait, const SystemConfig& cfg);
/// Offload-completion slot of a workload entering the offloading stack. The
/// workload is dropped when the transfer cannot finish before its deadline
/// slot, leaving no slot to be processed in.
OffloadSchedule schedule_offload(const Workload& w, int wait, int destination,
                                 const SystemConfig& cfg);

/// The three-case local energy expression, in Joules.
double local_energy(int wait, int exec, int timeout, const SystemConfig& cfg);
/// Offload energy from realized stage durations; `cloud_host` selects the
/// execution power.
double offload_energy(const StageDurations& s, bool cloud_host, const SystemConfig& cfg);
/// Dispatch on the path. Durations are the realized ones stored in the ledger.
double workload_energy(PathKind path, const StageDurations& s, const SystemConfig& cfg);

/// Per-slot activity of one public stack (source n at host k).
struct StackFlow {
  int source = 0;
  int host = 0;
  std::int64_t inserted = 0;
  std::int64_t processed = 0;
  std::int64_t dropped = 0;
  std::int64_t length = 0;  // at the end of the slot
};

struct SlotReport {
  int slot = 0;
  std::vector<Workload> arrivals;  // non-null arrivals of this slot
  std::vector<WorkloadOutcome> resolved;
  std::vector<int> active;  // A_k(t), index k-1, k = 1..N+1
  std::vector<StackFlow> flows;
};

class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Environment {
 public:
  Environment(SystemConfig cfg, Topology topo, std::uint64_t seed);

  /// Starts a fresh episode at slot 1.
  void reset(std::uint64_t seed);

  const SystemConfig& config() const { return cfg_; }
  const Topology& topology() const { return topo_; }

  int clock() const { return clock_; }
  /// True once every slot of the horizon has been stepped.
  bool finished() const { return clock_ > cfg_.horizon; }
  /// No workload anywhere in the system.
  bool idle() const;

  /// Arrival of each edge agent (index n-1) for the current slot.
  const std::vector<Workload>& arrivals() const { return arrivals_; }

  /// Advances one slot. `decisions[n-1]` is agent n's placement and must be
  /// none exactly when agent n has no arrival.
  SlotReport step(std::span<const PlacementDecision> decisions);

  /// Steps with no further arrivals until the system is empty. Used after the
  /// horizon so every admitted workload gets an outcome.
  std::vector<WorkloadOutcome> drain();

  // Views at the start of the current slot.
  int private_wait(int ea) const;
  int offload_wait(int ea) const;
  /// l_{n,k}: bits left in public stack `source` at `host` after the last slot.
  std::int64_t public_length(int source, int host) const;
  /// A_k of the last stepped slot (zeros before slot 1).
  const std::vector<int>& last_active() const { return last_active_; }
  /// A_k(t) for the current slot, known before any decision is taken.
  std::vector<int> upcoming_active() const;
  /// A_k(t+1) assuming this slot's arrivals are not placed anywhere.
  std::vector<int> lookahead_active() const;

  const std::vector<WorkloadOutcome>& ledger() const { return ledger_; }
  std::int64_t arrived_count() const { return arrived_; }
  std::int64_t in_flight() const;

  /// Bits per slot a public stack at `host` gets when `active` stacks share it.
  std::int64_t share_bits(int host, double cycles_per_bit, int active) const;

 private:
  struct PrivateEntry {
    Workload w;
    LocalSchedule plan;
  };
  struct OffloadEntry {
    Workload w;
    int destination = 0;
    OffloadSchedule plan;
  };
  struct PublicEntry {
    Workload w;
    int destination = 0;
    int wait_off = 0;
    int transfer = 0;
    int delivered_slot = 0;
    int start_slot = 0;  // 0 until it becomes the head
    std::int64_t residual = 0;
  };
  struct PublicStack {
    std::deque<PublicEntry> queue;
    std::int64_t length = 0;
    int latest_completion = 0;
  };

  PublicStack& stack(int source, int host) { return public_[host - 1][source - 1]; }
  const PublicStack& stack(int source, int host) const { return public_[host - 1][source - 1]; }

  void sample_arrivals();
  void place(const Workload& w, const PlacementDecision& d);
  WorkloadOutcome local_outcome(const PrivateEntry& e) const;
  WorkloadOutcome public_outcome(const PublicEntry& e, Status s, int slot) const;
  WorkloadOutcome transfer_drop_outcome(const OffloadEntry& e) const;
  void record(WorkloadOutcome o, SlotReport& report);

  SystemConfig cfg_;
  Topology topo_;
  double cycles_per_bit_;
  Rng rng_;
  int clock_ = 1;
  std::uint64_t next_id_ = 1;
  std::int64_t arrived_ = 0;

  std::vector<Workload> arrivals_;
  std::vector<std::deque<PrivateEntry>> private_;
  std::vector<int> private_latest_;
  std::vector<std::deque<OffloadEntry>> offload_;
  std::vector<int> offload_latest_;
  std::vector<std::vector<PublicStack>> public_;  // [host-1][source-1]
  std::vector<int> last_active_;
  std::vector<WorkloadOutcome> ledger_;
};

}  // namespace ecc
