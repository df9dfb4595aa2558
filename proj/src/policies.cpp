#include "ecc/policies.hpp"

#include <algorithm>
#include <limits>

#include "ecc/units.hpp"

namespace ecc {

const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::RP: return "RP";
    case PolicyKind::LOP: return "LOP";
    case PolicyKind::COO: return "COO";
    case PolicyKind::EEO: return "EEO";
    case PolicyKind::RRO: return "RRO";
    case PolicyKind::MLEO: return "MLEO";
    case PolicyKind::Decoffee: return "DECOFFEE";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy_kind(const std::string& name) {
  for (auto k : {PolicyKind::RP, PolicyKind::LOP, PolicyKind::COO, PolicyKind::EEO, PolicyKind::RRO,
                 PolicyKind::MLEO, PolicyKind::Decoffee})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

std::vector<PlacementDecision> Policy::decide_slot(const Environment& env, const Telemetry& telemetry) {
  const auto& arrivals = env.arrivals();
  std::vector<PlacementDecision> out(arrivals.size());
  for (std::size_t i = 0; i < arrivals.size(); ++i)
    if (!arrivals[i].null()) out[i] = decide(static_cast<int>(i) + 1, arrivals[i], env, telemetry);
  return out;
}

namespace {

class RandomPolicy : public Policy {
 public:
  RandomPolicy(const SystemConfig& cfg, const Topology& topo) : cfg_(cfg), topo_(topo), rng_(0) {}
  std::string name() const override { return "RP"; }
  void reset(std::uint64_t seed) override { rng_.seed(derive_seed(seed, 0x52)); }
  PlacementDecision decide(int ea, const Workload&, const Environment&, const Telemetry&) override {
    const auto peers = topo_.neighbours(ea);
    // local, cloud, and (if any peer is reachable) horizontal
    const auto pick = uniform_index(rng_, peers.empty() ? 2 : 3);
    if (pick == 0) return PlacementDecision::run_local();
    if (pick == 1) return PlacementDecision::offload_to(cfg_.cloud());
    return PlacementDecision::offload_to(peers[uniform_index(rng_, peers.size())]);
  }

 private:
  SystemConfig cfg_;
  Topology topo_;
  Rng rng_;
};

class LocalOnly : public Policy {
 public:
  std::string name() const override { return "LOP"; }
  PlacementDecision decide(int, const Workload&, const Environment&, const Telemetry&) override {
    return PlacementDecision::run_local();
  }
};

class CloudOnly : public Policy {
 public:
  explicit CloudOnly(const SystemConfig& cfg) : cloud_(cfg.cloud()) {}
  std::string name() const override { return "COO"; }
  PlacementDecision decide(int, const Workload&, const Environment&, const Telemetry&) override {
    return PlacementDecision::offload_to(cloud_);
  }

 private:
  int cloud_;
};

class EdgeOnly : public Policy {
 public:
  EdgeOnly(const SystemConfig& cfg, const Topology& topo) : cloud_(cfg.cloud()), topo_(topo), rng_(0) {}
  std::string name() const override { return "EEO"; }
  void reset(std::uint64_t seed) override { rng_.seed(derive_seed(seed, 0x45)); }
  PlacementDecision decide(int ea, const Workload&, const Environment&, const Telemetry&) override {
    const auto peers = topo_.neighbours(ea);
    if (peers.empty()) return PlacementDecision::offload_to(cloud_);
    return PlacementDecision::offload_to(peers[uniform_index(rng_, peers.size())]);
  }

 private:
  int cloud_;
  Topology topo_;
  Rng rng_;
};

class RoundRobin : public Policy {
 public:
  RoundRobin(const SystemConfig& cfg, const Topology& topo) {
    for (int ea = 1; ea <= cfg.n_agents; ++ea) {
      std::vector<PlacementDecision> cycle{PlacementDecision::run_local(),
                                           PlacementDecision::offload_to(cfg.cloud())};
      for (int k : topo.neighbours(ea)) cycle.push_back(PlacementDecision::offload_to(k));
      cycles_.push_back(std::move(cycle));
    }
    cursor_.assign(cfg.n_agents, 0);
  }
  std::string name() const override { return "RRO"; }
  void reset(std::uint64_t) override { std::fill(cursor_.begin(), cursor_.end(), 0); }
  PlacementDecision decide(int ea, const Workload&, const Environment&, const Telemetry&) override {
    const auto& cycle = cycles_[ea - 1];
    std::size_t& c = cursor_[ea - 1];
    const PlacementDecision d = cycle[c];
    c = (c + 1) % cycle.size();
    return d;
  }

 private:
  std::vector<std::vector<PlacementDecision>> cycles_;
  std::vector<std::size_t> cursor_;
};

class MinLatency : public Policy {
 public:
  MinLatency(const SystemConfig& cfg, const Topology& topo) {
    for (int ea = 1; ea <= cfg.n_agents; ++ea) {
      std::vector<PlacementDecision> opts{PlacementDecision::run_local()};
      for (int k : topo.neighbours(ea)) opts.push_back(PlacementDecision::offload_to(k));
      opts.push_back(PlacementDecision::offload_to(cfg.cloud()));
      options_.push_back(std::move(opts));
    }
  }
  std::string name() const override { return "MLEO"; }
  PlacementDecision decide(int ea, const Workload& w, const Environment& env, const Telemetry&) override {
    const auto& opts = options_[ea - 1];
    int best = std::numeric_limits<int>::max();
    PlacementDecision pick = opts.front();
    for (const auto& o : opts) {
      const int e = mleo_estimate(ea, w, o, env);
      if (e < best) {
        best = e;
        pick = o;
      }
    }
    return pick;
  }

 private:
  std::vector<std::vector<PlacementDecision>> options_;
};

int ceil_div(std::int64_t a, std::int64_t b) { return static_cast<int>((a + b - 1) / b); }

}  // namespace

std::unique_ptr<Policy> make_baseline(PolicyKind kind, const SystemConfig& cfg, const Topology& topo) {
  switch (kind) {
    case PolicyKind::RP: return std::make_unique<RandomPolicy>(cfg, topo);
    case PolicyKind::LOP: return std::make_unique<LocalOnly>();
    case PolicyKind::COO: return std::make_unique<CloudOnly>(cfg);
    case PolicyKind::EEO: return std::make_unique<EdgeOnly>(cfg, topo);
    case PolicyKind::RRO: return std::make_unique<RoundRobin>(cfg, topo);
    case PolicyKind::MLEO: return std::make_unique<MinLatency>(cfg, topo);
    case PolicyKind::Decoffee: break;
  }
  throw std::invalid_argument("not a fixed baseline: " + std::string(to_string(kind)));
}

int mleo_estimate(int ea, const Workload& w, const PlacementDecision& option, const Environment& env) {
  const SystemConfig& cfg = env.config();
  if (w.null()) throw std::invalid_argument("estimate for a null workload");
  if (option.local) {
    const int exec = units::exec_slots(units::cycles(w.size_bits, w.density), units::hertz(cfg.cpu_private),
                                       cfg.slot_duration);
    return env.private_wait(ea) + exec;
  }
  const int k = option.destination;
  const double rate = k == cfg.cloud() ? cfg.rate_vertical : cfg.rate_horizontal;
  const int transfer = units::transfer_slots(w.size_bits, units::bits_per_second(rate), cfg.slot_duration);
  // Public share frozen at the last observed active count, our own stack
  // counted once at least.
  const int active = std::max(1, env.last_active()[k - 1]);
  const std::int64_t share = std::max<std::int64_t>(1, env.share_bits(k, w.density, active));
  const int wait_pub = ceil_div(env.public_length(ea, k), share);
  const int exec = ceil_div(w.size_bits, share);
  return env.offload_wait(ea) + transfer + wait_pub + exec;
}

DecoffeePolicy::DecoffeePolicy(std::string name, std::vector<QNetwork> nets, LoadForecast forecast,
                               const SystemConfig& cfg, const Topology& topo)
    : name_(std::move(name)), nets_(std::move(nets)), forecast_(std::move(forecast)) {
  if (static_cast<int>(nets_.size()) != cfg.n_agents) throw std::invalid_argument("one network per agent required");
  for (int ea = 1; ea <= cfg.n_agents; ++ea) {
    codecs_.emplace_back(ea, cfg, topo);
    if (nets_[ea - 1].inputs() != state_size(cfg.n_agents) || nets_[ea - 1].actions() != cfg.n_agents + 1)
      throw std::invalid_argument("network shape does not match the system size");
  }
}

PlacementDecision DecoffeePolicy::decide(int ea, const Workload& w, const Environment& env,
                                         const Telemetry& telemetry) {
  if (w.null()) return PlacementDecision::none();
  const auto loads = forecast_.next_loads(telemetry, env);
  const auto obs = build_state(ea, env, telemetry, loads);
  return infer_action(nets_[ea - 1], codecs_[ea - 1], obs.vec());
}

std::vector<PlacementDecision> DecoffeePolicy::decide_slot(const Environment& env, const Telemetry& telemetry) {
  const auto& arrivals = env.arrivals();
  std::vector<PlacementDecision> out(arrivals.size());
  bool any = false;
  for (const auto& w : arrivals) any = any || !w.null();
  if (!any) return out;
  const auto loads = forecast_.next_loads(telemetry, env);
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    if (arrivals[i].null()) continue;
    const int ea = static_cast<int>(i) + 1;
    const auto obs = build_state(ea, env, telemetry, loads);
    out[i] = infer_action(nets_[i], codecs_[i], obs.vec());
  }
  return out;
}

}  // namespace ecc
