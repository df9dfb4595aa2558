#include "ecc/environment.hpp"

#include <algorithm>
#include <sstream>

#include "ecc/units.hpp"

namespace ecc {

int wait_slots(int latest_completion, int t) { return std::max(0, latest_completion - t + 1); }

int wait_slots(std::span<const int> completions, int t) {
  int latest = 0;
  for (int c : completions) latest = std::max(latest, c);
  return wait_slots(latest, t);
}

LocalSchedule schedule_local(const Workload& w, int wait, const SystemConfig& cfg) {
  if (w.null()) throw EnvironmentError("cannot place a null workload");
  LocalSchedule s;
  s.wait = wait;
  s.exec = units::exec_slots(units::cycles(w.size_bits, w.density), units::hertz(cfg.cpu_private),
                             cfg.slot_duration);
  const int t = w.arrival_slot;
  const int finish = t + wait + s.exec - 1;
  s.completion = std::min(finish, t + cfg.timeout - 1);
  s.dropped = finish > t + cfg.timeout - 1;
  return s;
}

OffloadSchedule schedule_offload(const Workload& w, int wait, int destination,
                                 const SystemConfig& cfg) {
  if (w.null()) throw EnvironmentError("cannot offload a null workload");
  if (destination == w.source) throw EnvironmentError("cannot offload to the source itself");
  const double rate = destination == cfg.cloud() ? cfg.rate_vertical : cfg.rate_horizontal;
  OffloadSchedule s;
  s.wait = wait;
  s.transfer = units::transfer_slots(w.size_bits, units::bits_per_second(rate), cfg.slot_duration);
  const int t = w.arrival_slot;
  const int deadline = t + cfg.timeout - 1;
  const int finish = t + wait + s.transfer - 1;
  s.completion = std::min(finish, deadline);
  // Delivery happens at completion + 1, which must still be inside the deadline.
  s.dropped = finish >= deadline;
  return s;
}

double local_energy(int wait, int exec, int timeout, const SystemConfig& cfg) {
  if (wait < 0 || exec < 0 || timeout < 0) throw std::invalid_argument("negative duration");
  const double d = cfg.slot_duration;
  const auto& p = cfg.powers;
  if (timeout < wait) return d * (p.p_priv * timeout);
  if (timeout < wait + exec) return d * (p.p_priv * wait + p.p_exec_edge * (timeout - wait));
  return d * (p.p_priv * wait + p.p_exec_edge * exec);
}

double offload_energy(const StageDurations& s, bool cloud_host, const SystemConfig& cfg) {
  if (s.wait_off < 0 || s.transfer < 0 || s.wait_pub < 0 || s.exec_pub < 0)
    throw std::invalid_argument("negative duration");
  const auto& p = cfg.powers;
  const double p_exec = cloud_host ? p.p_exec_cloud : p.p_exec_edge;
  return cfg.slot_duration *
         (p.p_off * s.wait_off + p.p_tran * s.transfer + p.p_pub * s.wait_pub + p_exec * s.exec_pub);
}

double workload_energy(PathKind path, const StageDurations& s, const SystemConfig& cfg) {
  if (path == PathKind::Local) {
    if (s.wait_priv < 0 || s.exec_priv < 0) throw std::invalid_argument("negative duration");
    // Realized durations never exceed the timeout, so the full-execution case applies.
    return local_energy(s.wait_priv, s.exec_priv, s.wait_priv + s.exec_priv, cfg);
  }
  return offload_energy(s, path == PathKind::Vertical, cfg);
}

// ---------------------------------------------------------------------------

Environment::Environment(SystemConfig cfg, Topology topo, std::uint64_t seed)
    : cfg_(std::move(cfg)), topo_(std::move(topo)),
      cycles_per_bit_(units::cycles_per_bit(cfg_.density)) {
  const auto violations = validate_config(cfg_, topo_);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "invalid configuration:";
    for (const auto& v : violations) os << ' ' << v.field << " (" << v.rule << ')';
    throw ConfigError(os.str());
  }
  reset(seed);
}

void Environment::reset(std::uint64_t seed) {
  const int n = cfg_.n_agents;
  rng_.seed(seed);
  clock_ = 1;
  next_id_ = 1;
  arrived_ = 0;
  private_.assign(n, {});
  private_latest_.assign(n, 0);
  offload_.assign(n, {});
  offload_latest_.assign(n, 0);
  public_.assign(n + 1, std::vector<PublicStack>(n));
  last_active_.assign(n + 1, 0);
  ledger_.clear();
  sample_arrivals();
}

void Environment::sample_arrivals() {
  const int n = cfg_.n_agents;
  arrivals_.assign(n, Workload{});
  if (clock_ > cfg_.last_arrival_slot()) return;
  for (int ea = 1; ea <= n; ++ea) {
    // Both draws are taken every slot so the arrival stream does not depend
    // on which branch a previous slot took.
    const double u = uniform01(rng_);
    const auto pick = uniform_index(rng_, cfg_.size_set.size());
    if (u >= cfg_.arrival_prob) continue;
    Workload w;
    w.id = next_id_++;
    w.source = ea;
    w.arrival_slot = clock_;
    w.size_bits = units::bits(cfg_.size_set[pick]);
    w.density = cycles_per_bit_;
    w.deadline_slot = clock_ + cfg_.timeout - 1;
    w.arrived = true;
    arrivals_[ea - 1] = w;
    ++arrived_;
  }
}

bool Environment::idle() const { return in_flight() == 0; }

std::int64_t Environment::in_flight() const {
  std::int64_t count = 0;
  for (const auto& q : private_) count += static_cast<std::int64_t>(q.size());
  for (const auto& q : offload_) count += static_cast<std::int64_t>(q.size());
  for (const auto& host : public_)
    for (const auto& s : host) count += static_cast<std::int64_t>(s.queue.size());
  return count;
}

int Environment::private_wait(int ea) const { return wait_slots(private_latest_[ea - 1], clock_); }

int Environment::offload_wait(int ea) const { return wait_slots(offload_latest_[ea - 1], clock_); }

std::int64_t Environment::public_length(int source, int host) const {
  if (source == host) return 0;
  return stack(source, host).length;
}

std::int64_t Environment::share_bits(int host, double cycles_per_bit, int active) const {
  const double ghz = host == cfg_.cloud() ? cfg_.cpu_public_cloud : cfg_.cpu_public_edge;
  return units::bits_per_slot(units::hertz(ghz), cfg_.slot_duration, cycles_per_bit, active);
}

std::vector<int> Environment::upcoming_active() const {
  const int n = cfg_.n_agents;
  std::vector<int> active(n + 1, 0);
  for (int host = 1; host <= n + 1; ++host) {
    for (int src = 1; src <= n; ++src) {
      if (src == host) continue;
      bool on = !stack(src, host).queue.empty();
      if (!on) {
        for (const auto& e : offload_[src - 1]) {
          if (e.destination == host && !e.plan.dropped && e.plan.completion + 1 == clock_) on = true;
        }
      }
      active[host - 1] += on ? 1 : 0;
    }
  }
  return active;
}

std::vector<int> Environment::lookahead_active() const {
  Environment copy = *this;
  for (auto& a : copy.arrivals_) a = Workload{};
  const std::vector<PlacementDecision> none(cfg_.n_agents);
  copy.step(none);
  return copy.upcoming_active();
}

void Environment::place(const Workload& w, const PlacementDecision& d) {
  const int ea = w.source;
  if (d.local) {
    PrivateEntry e{w, schedule_local(w, private_wait(ea), cfg_)};
    private_latest_[ea - 1] = std::max(private_latest_[ea - 1], e.plan.completion);
    private_[ea - 1].push_back(e);
    return;
  }
  OffloadEntry e{w, d.destination, schedule_offload(w, offload_wait(ea), d.destination, cfg_)};
  offload_latest_[ea - 1] = std::max(offload_latest_[ea - 1], e.plan.completion);
  offload_[ea - 1].push_back(e);
}

WorkloadOutcome Environment::local_outcome(const PrivateEntry& e) const {
  WorkloadOutcome o;
  o.id = e.w.id;
  o.source = e.w.source;
  o.arrival_slot = e.w.arrival_slot;
  o.size_bits = e.w.size_bits;
  o.status = e.plan.dropped ? Status::Dropped : Status::Processed;
  o.completion_slot = e.plan.completion;
  o.total_delay = e.plan.completion - e.w.arrival_slot + 1;
  o.path = PathKind::Local;
  o.stages.wait_priv = std::min(e.plan.wait, cfg_.timeout);
  o.stages.exec_priv = std::clamp(cfg_.timeout - e.plan.wait, 0, e.plan.exec);
  o.total_energy = workload_energy(o.path, o.stages, cfg_);
  return o;
}

WorkloadOutcome Environment::transfer_drop_outcome(const OffloadEntry& e) const {
  WorkloadOutcome o;
  o.id = e.w.id;
  o.source = e.w.source;
  o.arrival_slot = e.w.arrival_slot;
  o.size_bits = e.w.size_bits;
  o.status = Status::Dropped;
  o.completion_slot = e.plan.completion;
  o.total_delay = e.plan.completion - e.w.arrival_slot + 1;
  o.path = e.destination == cfg_.cloud() ? PathKind::Vertical : PathKind::Horizontal;
  o.destination = e.destination;
  o.stages.wait_off = std::min(e.plan.wait, cfg_.timeout);
  o.stages.transfer = std::clamp(cfg_.timeout - e.plan.wait, 0, e.plan.transfer);
  o.total_energy = workload_energy(o.path, o.stages, cfg_);
  return o;
}

WorkloadOutcome Environment::public_outcome(const PublicEntry& e, Status s, int slot) const {
  WorkloadOutcome o;
  o.id = e.w.id;
  o.source = e.w.source;
  o.arrival_slot = e.w.arrival_slot;
  o.size_bits = e.w.size_bits;
  o.status = s;
  o.completion_slot = slot;
  o.total_delay = slot - e.w.arrival_slot + 1;
  o.path = e.destination == cfg_.cloud() ? PathKind::Vertical : PathKind::Horizontal;
  o.destination = e.destination;
  o.stages.wait_off = e.wait_off;
  o.stages.transfer = e.transfer;
  if (e.start_slot > 0) {
    o.stages.wait_pub = e.start_slot - e.delivered_slot;
    o.stages.exec_pub = slot - e.start_slot + 1;
  } else {
    o.stages.wait_pub = slot - e.delivered_slot + 1;
  }
  o.total_energy = workload_energy(o.path, o.stages, cfg_);
  return o;
}

void Environment::record(WorkloadOutcome o, SlotReport& report) {
  ledger_.push_back(o);
  report.resolved.push_back(std::move(o));
}

SlotReport Environment::step(std::span<const PlacementDecision> decisions) {
  const int n = cfg_.n_agents;
  const int t = clock_;
  if (static_cast<int>(decisions.size()) != n)
    throw EnvironmentError("expected one decision per edge agent");
  if (t > cfg_.horizon + cfg_.timeout)
    throw EnvironmentError("stepping past the drain limit of the episode");

  SlotReport report;
  report.slot = t;

  // 1. placements
  for (int ea = 1; ea <= n; ++ea) {
    const Workload& w = arrivals_[ea - 1];
    const PlacementDecision& d = decisions[ea - 1];
    if (w.null()) {
      if (!d.is_none()) {
        std::ostringstream os;
        os << "decision given for EA " << ea << " which has no arrival in slot " << t;
        throw EnvironmentError(os.str());
      }
      continue;
    }
    if (d.is_none()) {
      std::ostringstream os;
      os << "EA " << ea << " has an arrival in slot " << t << " but no decision";
      throw EnvironmentError(os.str());
    }
    if (auto err = decision_error(d, ea, cfg_, topo_); !err.empty())
      throw EnvironmentError("EA " + std::to_string(ea) + ": " + err);
    report.arrivals.push_back(w);
    place(w, d);
  }

  // 2. deliveries and transfer-stage drops
  std::vector<std::vector<std::int64_t>> inserted(n + 1, std::vector<std::int64_t>(n, 0));
  for (int ea = 1; ea <= n; ++ea) {
    auto& q = offload_[ea - 1];
    while (!q.empty()) {
      const OffloadEntry& e = q.front();
      if (!e.plan.dropped && e.plan.completion + 1 == t) {
        PublicEntry p;
        p.w = e.w;
        p.destination = e.destination;
        p.wait_off = e.plan.wait;
        p.transfer = e.plan.transfer;
        p.delivered_slot = t;
        p.residual = e.w.size_bits;
        auto& s = stack(ea, e.destination);
        s.queue.push_back(p);
        s.length += p.residual;
        inserted[e.destination - 1][ea - 1] += p.residual;
        q.pop_front();
      } else if (e.plan.dropped && e.plan.completion == t) {
        record(transfer_drop_outcome(e), report);
        q.pop_front();
      } else {
        break;
      }
    }
  }

  // 3. active sets, frozen for the slot
  report.active.assign(n + 1, 0);
  for (int host = 1; host <= n + 1; ++host)
    for (int src = 1; src <= n; ++src)
      if (src != host && !stack(src, host).queue.empty()) ++report.active[host - 1];

  // 4. processor sharing, 5. deadline sweep
  for (int host = 1; host <= n + 1; ++host) {
    const int a = report.active[host - 1];
    for (int src = 1; src <= n; ++src) {
      if (src == host) continue;
      auto& s = stack(src, host);
      StackFlow flow{src, host, inserted[host - 1][src - 1], 0, 0, 0};
      if (!s.queue.empty()) {
        PublicEntry& head = s.queue.front();
        if (head.start_slot == 0) head.start_slot = std::max(t, s.latest_completion + 1);
        const std::int64_t budget = share_bits(host, head.w.density, a);
        const std::int64_t used = std::min(budget, head.residual);
        head.residual -= used;
        flow.processed = used;
        if (head.residual == 0) {
          s.latest_completion = t;
          record(public_outcome(head, Status::Processed, t), report);
          s.queue.pop_front();
        }
      }
      for (auto it = s.queue.begin(); it != s.queue.end();) {
        if (it->w.deadline_slot == t) {
          flow.dropped += it->residual;
          s.latest_completion = std::max(s.latest_completion, t);
          record(public_outcome(*it, Status::Dropped, t), report);
          it = s.queue.erase(it);
        } else {
          ++it;
        }
      }
      s.length = s.length - flow.processed - flow.dropped;
      flow.length = s.length;
      if (flow.inserted || flow.processed || flow.dropped || flow.length) report.flows.push_back(flow);
    }
  }

  // 6. private resolutions
  for (int ea = 1; ea <= n; ++ea) {
    auto& q = private_[ea - 1];
    while (!q.empty() && q.front().plan.completion == t) {
      record(local_outcome(q.front()), report);
      q.pop_front();
    }
  }

  last_active_ = report.active;
  ++clock_;
  sample_arrivals();
  return report;
}

std::vector<WorkloadOutcome> Environment::drain() {
  std::vector<WorkloadOutcome> out;
  const std::vector<PlacementDecision> none(cfg_.n_agents);
  while (!idle()) {
    for (const auto& w : arrivals_)
      if (!w.null()) throw EnvironmentError("drain() called while arrivals are pending");
    auto r = step(none);
    out.insert(out.end(), r.resolved.begin(), r.resolved.end());
  }
  return out;
}

}  // namespace ecc
