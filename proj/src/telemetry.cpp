#include "ecc/telemetry.hpp"

#include <algorithm>
#include <string>

namespace ecc {

LoadMatrix::LoadMatrix(int window, int nodes)
    : window_(window), nodes_(nodes), data_(static_cast<std::size_t>(window) * nodes, 0) {
  if (window < 1 || nodes < 1) throw std::invalid_argument("load window needs W >= 1 and nodes >= 1");
}

void LoadMatrix::push(const std::vector<int>& loads) {
  if (static_cast<int>(loads.size()) != nodes_) throw std::invalid_argument("load vector size mismatch");
  std::copy(data_.begin() + nodes_, data_.end(), data_.begin());
  std::copy(loads.begin(), loads.end(), data_.end() - nodes_);
}

void LoadMatrix::clear() { std::fill(data_.begin(), data_.end(), 0); }

std::vector<int> LoadMatrix::column(int node_index) const {
  std::vector<int> col(window_);
  for (int i = 0; i < window_; ++i) col[i] = at(i, node_index);
  return col;
}

Telemetry::Telemetry(int n_agents, int window)
    : n_(n_agents), loads_(window, n_agents + 1),
      lengths_(n_agents + 1, std::vector<std::int64_t>(n_agents, 0)) {}

void Telemetry::reset() {
  loads_.clear();
  for (auto& row : lengths_) std::fill(row.begin(), row.end(), 0);
  last_slot_ = 0;
}

void Telemetry::update(const SlotReport& report) {
  if (report.slot <= last_slot_)
    throw TelemetryError("telemetry already updated for slot " + std::to_string(report.slot));
  if (report.slot != last_slot_ + 1)
    throw TelemetryError("telemetry skipped slot " + std::to_string(last_slot_ + 1));
  loads_.push(report.active);
  for (const auto& f : report.flows) {
    auto& l = lengths_[f.host - 1][f.source - 1];
    l = std::max<std::int64_t>(0, l + f.inserted - f.dropped - f.processed);
  }
  last_slot_ = report.slot;
}

PeerView Telemetry::peer_view(int ea) const {
  PeerView v;
  v.lengths.reserve(n_);
  for (int k = 1; k <= n_ + 1; ++k)
    if (k != ea) v.lengths.push_back(lengths_[k - 1][ea - 1]);
  v.loads = loads_;
  return v;
}

}  // namespace ecc
