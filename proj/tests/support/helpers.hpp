#pragma once

#include <cstdint>
#include <vector>

#include "ecc/environment.hpp"
#include "ecc/random.hpp"
#include "support/oracle_sim.hpp"

namespace testing_support {

/// Uniform feasible decision for every agent with an arrival.
inline std::vector<ecc::PlacementDecision> random_decisions(const ecc::Environment& env, ecc::Rng& rng) {
  const auto& cfg = env.config();
  std::vector<ecc::PlacementDecision> d(cfg.n_agents);
  for (int ea = 1; ea <= cfg.n_agents; ++ea) {
    if (env.arrivals()[ea - 1].null()) continue;
    std::vector<ecc::PlacementDecision> options{ecc::PlacementDecision::run_local(),
                                                ecc::PlacementDecision::offload_to(cfg.cloud())};
    for (int k : env.topology().neighbours(ea)) options.push_back(ecc::PlacementDecision::offload_to(k));
    d[ea - 1] = options[ecc::uniform_index(rng, options.size())];
  }
  return d;
}

struct Recorded {
  std::vector<oracle::Placed> placed;
  std::vector<ecc::SlotReport> reports;
};

/// Runs the horizon with random decisions, then drains.
inline Recorded run_random(ecc::Environment& env, ecc::Rng& rng) {
  Recorded r;
  while (!env.finished()) {
    const auto d = random_decisions(env, rng);
    for (int ea = 1; ea <= env.config().n_agents; ++ea)
      if (!env.arrivals()[ea - 1].null()) r.placed.push_back({env.arrivals()[ea - 1], d[ea - 1]});
    r.reports.push_back(env.step(d));
  }
  const std::vector<ecc::PlacementDecision> none(env.config().n_agents);
  while (!env.idle()) r.reports.push_back(env.step(none));
  return r;
}

/// Small configuration whose rates, frequencies and densities make every
/// per-slot capacity an exact integer, so the oracle can run on integers.
struct OracleCase {
  ecc::SystemConfig cfg;
  ecc::Topology topo;
  oracle::Params params;
};

inline OracleCase random_oracle_case(std::uint64_t seed) {
  ecc::Rng rng(ecc::derive_seed(seed, 77));
  auto pick = [&](std::initializer_list<int> xs) { return *(xs.begin() + ecc::uniform_index(rng, xs.size())); };
  OracleCase c;
  auto& cfg = c.cfg;
  cfg = ecc::desk_config();
  cfg.n_agents = 1 + static_cast<int>(ecc::uniform_index(rng, 3));
  cfg.horizon = 5 + static_cast<int>(ecc::uniform_index(rng, 26));
  cfg.drain_slots = static_cast<int>(ecc::uniform_index(rng, 4));
  if (cfg.drain_slots >= cfg.horizon) cfg.drain_slots = 0;
  cfg.arrival_prob = ecc::uniform01(rng);
  cfg.timeout = 2 + static_cast<int>(ecc::uniform_index(rng, 19));
  const int rho = pick({250, 297, 400, 500});
  cfg.density = rho / 1000.0;
  cfg.cpu_private = pick({1, 2, 3, 5});
  cfg.cpu_public_edge = pick({1, 2, 5});
  cfg.cpu_public_cloud = cfg.cpu_public_edge + pick({1, 5, 25});
  cfg.rate_vertical = pick({4, 10, 15});
  cfg.rate_horizontal = cfg.rate_vertical + pick({5, 20});
  cfg.size_set.clear();
  const int sizes = 1 + static_cast<int>(ecc::uniform_index(rng, 4));
  for (int i = 0; i < sizes; ++i) cfg.size_set.push_back((5 + static_cast<int>(ecc::uniform_index(rng, 46))) / 10.0);
  std::vector<std::vector<int>> g(cfg.n_agents, std::vector<int>(cfg.n_agents, 0));
  for (int i = 0; i < cfg.n_agents; ++i)
    for (int j = i + 1; j < cfg.n_agents; ++j) g[i][j] = g[j][i] = ecc::uniform01(rng) < 0.6 ? 1 : 0;
  c.topo = ecc::Topology(g);

  auto& p = c.params;
  p.n = cfg.n_agents;
  p.timeout = cfg.timeout;
  p.slot = cfg.slot_duration;
  p.rho = rho;
  // GHz * 0.1 s and Mbps * 0.1 s as exact integers
  p.priv_cycles = static_cast<std::int64_t>(cfg.cpu_private) * 100000000;
  p.edge_cycles = static_cast<std::int64_t>(cfg.cpu_public_edge) * 100000000;
  p.cloud_cycles = static_cast<std::int64_t>(cfg.cpu_public_cloud) * 100000000;
  p.h_bits = static_cast<std::int64_t>(cfg.rate_horizontal) * 100000;
  p.v_bits = static_cast<std::int64_t>(cfg.rate_vertical) * 100000;
  p.p = cfg.powers;
  return c;
}

}  // namespace testing_support
