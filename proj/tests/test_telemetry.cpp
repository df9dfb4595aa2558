#include <doctest.h>

#include "ecc/telemetry.hpp"
#include "support/helpers.hpp"

using namespace ecc;

TEST_CASE("load window indexing") {
  LoadMatrix m(3, 2);
  CHECK(m.column(0) == std::vector<int>{0, 0, 0});
  m.push({2, 5});
  CHECK(m.column(0) == std::vector<int>{0, 0, 2});  // zero padding before the episode
  m.push({0, 5});
  m.push({1, 5});
  CHECK(m.column(0) == std::vector<int>{2, 0, 1});
  CHECK(m.at(2, 1) == 5);
  CHECK_THROWS_AS(m.push({1}), std::invalid_argument);
  CHECK_THROWS_AS(LoadMatrix(0, 2), std::invalid_argument);
}

TEST_CASE("window property on random streams") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 1 + static_cast<int>(uniform_index(rng, 8));
    const int nodes = 1 + static_cast<int>(uniform_index(rng, 5));
    LoadMatrix m(w, nodes);
    std::vector<std::vector<int>> history;
    for (int t = 1; t <= 30; ++t) {
      std::vector<int> a(nodes);
      for (auto& x : a) x = static_cast<int>(uniform_index(rng, 6));
      history.push_back(a);
      m.push(a);
      // row i holds the loads of slot t - w + 1 + i, zero before slot 1
      for (int i = 0; i < w; ++i) {
        const int s = t - w + 1 + i;
        for (int j = 0; j < nodes; ++j) CHECK(m.at(i, j) == (s >= 1 ? history[s - 1][j] : 0));
      }
    }
  }
}

TEST_CASE("update ordering is enforced") {
  Telemetry tel(2, 3);
  SlotReport r;
  r.slot = 1;
  r.active = {0, 0, 0};
  tel.update(r);
  CHECK_THROWS_AS(tel.update(r), TelemetryError);
  r.slot = 3;
  CHECK_THROWS_AS(tel.update(r), TelemetryError);
  r.slot = 2;
  tel.update(r);
  CHECK(tel.last_slot() == 2);
  tel.reset();
  CHECK(tel.last_slot() == 0);
}

TEST_CASE("peer view after one processed slot") {
  auto cfg = desk_config();
  cfg.n_agents = 3;
  cfg.size_set = {3.0};
  cfg.arrival_prob = 1.0;
  Environment env(cfg, Topology::full(3), 1);
  Telemetry tel(3, 4);
  CHECK(tel.peer_view(1).lengths == std::vector<std::int64_t>{0, 0, 0});
  tel.update(env.step(std::vector<PlacementDecision>{PlacementDecision::offload_to(3), PlacementDecision::run_local(),
                                                     PlacementDecision::run_local()}));
  tel.update(env.step(std::vector<PlacementDecision>(3, PlacementDecision::run_local())));
  // hosts 2, 3 and the cloud, in that order
  CHECK(tel.peer_view(1).lengths == std::vector<std::int64_t>{0, 3000000 - 1683501, 0});
  CHECK(tel.peer_view(2).lengths == std::vector<std::int64_t>{0, 0, 0});
  CHECK(tel.loads().column(2).back() == 1);
}

TEST_CASE("reconstructed lengths equal the engine every slot") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto cfg = desk_config();
    cfg.arrival_prob = 0.3 + 0.02 * static_cast<double>(seed);
    cfg.timeout = 6 + static_cast<int>(seed % 10);
    Environment env(cfg, seed % 2 ? Topology::full(4) : Topology::ring(4, 1), seed);
    Telemetry tel(cfg.n_agents, 5);
    Rng rng(seed);
    const std::vector<PlacementDecision> none(cfg.n_agents);
    while (!env.finished() || !env.idle()) {
      const auto d = env.finished() ? none : testing_support::random_decisions(env, rng);
      tel.update(env.step(d));
      for (int n = 1; n <= cfg.n_agents; ++n) {
        const auto v = tel.peer_view(n);
        REQUIRE(v.lengths.size() == static_cast<std::size_t>(cfg.n_agents));
        int i = 0;
        for (int k = 1; k <= cfg.cloud(); ++k) {
          if (k == n) continue;
          CHECK(v.lengths[i] >= 0);
          CHECK(v.lengths[i++] == env.public_length(n, k));
        }
      }
      CHECK(std::vector<int>(tel.loads().data().end() - cfg.node_count(), tel.loads().data().end()) ==
            env.last_active());
    }
  }
}
