#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ecc/environment.hpp"

namespace ecc {

/// Sliding W x (N+1) window of active-stack counts. Row i (0-based) holds
/// A_j of slot t - W + i, where t is the slot after the last update, so the
/// last row is always the most recently observed slot. Slots before the
/// episode read as zero.
class LoadMatrix {
 public:
  LoadMatrix() = default;
  LoadMatrix(int window, int nodes);

  int window() const { return window_; }
  int nodes() const { return nodes_; }

  void push(const std::vector<int>& loads);
  void clear();

  int at(int row, int node_index) const { return data_[row * nodes_ + node_index]; }
  /// Column `node_index` from oldest to newest.
  std::vector<int> column(int node_index) const;
  const std::vector<int>& data() const { return data_; }

 private:
  int window_ = 0;
  int nodes_ = 0;
  std::vector<int> data_;  // row-major
};

struct PeerView {
  /// Bits left at the end of the previous slot in the public stacks holding
  /// this agent's offloads: other edge agents in ascending id, then the cloud.
  std::vector<std::int64_t> lengths;
  LoadMatrix loads;
};

class TelemetryError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Shared observability service. It rebuilds every public stack length from
/// the per-slot flows the hosts report, the same way an agent could from
/// offloaded, processed and dropped bit counts.
class Telemetry {
 public:
  Telemetry(int n_agents, int window);

  void reset();
  /// Consumes the report of slot `report.slot`. Must be called exactly once
  /// per slot, in order.
  void update(const SlotReport& report);

  int last_slot() const { return last_slot_; }
  const LoadMatrix& loads() const { return loads_; }
  PeerView peer_view(int ea) const;
  std::int64_t length(int source, int host) const { return lengths_[host - 1][source - 1]; }

 private:
  int n_;
  LoadMatrix loads_;
  std::vector<std::vector<std::int64_t>> lengths_;  // [host-1][source-1]
  int last_slot_ = 0;
};

}  // namespace ecc
