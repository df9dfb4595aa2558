#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "ecc/agent.hpp"
#include "support/helpers.hpp"

using namespace ecc;
using nn::Tensor2;

namespace {

// No trunk, constant heads: V = v, A = adv regardless of input.
QNetwork constant_net(int inputs, double v, std::vector<double> adv) {
  Rng rng(1);
  auto net = QNetwork::create(inputs, static_cast<int>(adv.size()), {}, rng);
  net.value.weight.setZero();
  net.value.bias(0, 0) = v;
  net.advantage.weight.setZero();
  for (std::size_t a = 0; a < adv.size(); ++a) net.advantage.bias(0, a) = adv[a];
  return net;
}

bool same_params(const QNetwork& a, const QNetwork& b) {
  const auto pa = a.parameters(), pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (*pa[i] != *pb[i]) return false;
  return true;
}

Experience random_experience(int dim, int actions, Rng& rng) {
  Experience e;
  for (int i = 0; i < dim; ++i) {
    e.state.push_back(uniform01(rng));
    e.next_state.push_back(uniform01(rng));
  }
  e.action = static_cast<int>(uniform_index(rng, actions));
  e.cost = uniform_real(rng, 0, 4);
  e.terminal = uniform01(rng) < 0.1;
  return e;
}

AgentHyper small_hyper() {
  AgentHyper h;
  h.hidden = {16};
  h.batch = 8;
  h.replay_capacity = 500;
  h.copy_every = 20;
  return h;
}

}  // namespace

TEST_CASE("action codec") {
  const auto cfg = desk_config();
  const ActionCodec c(2, cfg, Topology::full(4));
  CHECK(c.size() == 5);
  CHECK(c.decode(0) == PlacementDecision::run_local());
  CHECK(c.decode(1) == PlacementDecision::offload_to(1));
  CHECK(c.decode(2) == PlacementDecision::offload_to(3));
  CHECK(c.decode(3) == PlacementDecision::offload_to(4));
  CHECK(c.decode(4) == PlacementDecision::offload_to(5));
  for (int a = 0; a < 5; ++a) CHECK(c.encode(c.decode(a)) == a);
  CHECK(c.feasible_count() == 5);
  CHECK_THROWS(c.decode(5));
  CHECK_THROWS(c.encode(PlacementDecision::offload_to(2)));

  const ActionCodec r(1, cfg, Topology::ring(4, 1));  // neighbours 2 and 4
  CHECK(r.mask() == std::vector<std::uint8_t>{1, 1, 0, 1, 1});
  CHECK(r.feasible_count() == 4);
  CHECK_FALSE(r.feasible(2));
  CHECK_THROWS(ActionCodec(5, cfg, Topology::full(4)));
}

TEST_CASE("observations") {
  auto cfg = desk_config();
  cfg.size_set = {2.0, 4.0};
  cfg.arrival_prob = 1.0;
  Environment env(cfg, Topology::full(4), 2);
  Telemetry tel(4, 1);
  const std::vector<double> loads{1, 0, 2, 0, 4};

  SUBCASE("cold start") {
    const auto o = build_state(1, env, tel, loads);
    REQUIRE(o.features.size() == static_cast<std::size_t>(state_size(4)));
    CHECK(o.features[0] == static_cast<double>(env.arrivals()[0].size_bits) / 4e6);
    for (int i = 1; i < 7; ++i) CHECK(o.features[i] == 0.0);
    CHECK(o.features[7] == 0.25);
    CHECK(o.features[9] == 0.5);
    CHECK(o.features[11] == 1.0);
  }
  SUBCASE("private wait after a two-slot local job") {
    std::vector<PlacementDecision> d(4, PlacementDecision::run_local());
    const bool two_slots = env.arrivals()[0].size_bits == 2000000;
    tel.update(env.step(d));
    const auto o = build_state(1, env, tel, loads);
    // 2 Mbit runs for 2 slots, 4 Mbit for 3
    CHECK(o.wait_private == (two_slots ? 1 : 2));
    CHECK(o.features[1] == o.wait_private / 20.0);
  }
  SUBCASE("no arrival still yields an observation") {
    auto quiet = cfg;
    quiet.arrival_prob = 0.0;
    Environment e2(quiet, Topology::full(4), 1);
    const auto o = build_state(3, e2, tel, loads);
    CHECK(o.eta == 0);
    CHECK(o.features[0] == 0.0);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_state(1, env, tel, std::vector<double>(4)), ForecastError);
    tel.update(env.step(std::vector<PlacementDecision>(4, PlacementDecision::run_local())));
    tel.reset();
    CHECK_THROWS_AS(build_state(1, env, tel, loads), TelemetryError);
  }
}

TEST_CASE("dueling q-values") {
  const std::vector<double> x{0.3};
  CHECK(q_values(constant_net(1, 2, {1, 3}), x, {1, 1}) == std::vector<double>{1, 3});
  CHECK(q_values(constant_net(1, 2, {4, 4, 4}), x, {1, 1, 1}) == std::vector<double>{2, 2, 2});
  const auto q = q_values(constant_net(1, 2, {1, 3, 10}), x, {1, 1, 0});
  CHECK(q[0] == 1);
  CHECK(q[1] == 3);
  CHECK(std::isinf(q[2]));
  CHECK_THROWS(q_values(constant_net(1, 2, {1, 3}), x, {0, 0}));
}

TEST_CASE("dueling identity over random passes") {
  Rng rng(17);
  double worst = 0.0;
  QNetwork net;
  std::vector<std::uint8_t> mask;
  for (int i = 0; i < 10000; ++i) {
    if (i % 100 == 0) {  // fresh network and mask every hundred passes
      const int k = 2 + static_cast<int>(uniform_index(rng, 6));
      net = QNetwork::create(6, k, {12, 8}, rng);
      for (auto& l : net.trunk) l.bias = nn::uniform_tensor(1, l.outputs(), 0.5, rng);
      mask.assign(k, 1);
      for (int a = 1; a < k; ++a) mask[a] = uniform01(rng) < 0.6;
    }
    const Tensor2 x = nn::uniform_tensor(1, 6, 3.0, rng);
    const auto out = net.forward(x, mask);
    double s = 0.0;
    int f = 0;
    for (int a = 0; a < net.actions(); ++a) {
      if (!mask[a]) {
        CHECK(std::isinf(out.q(0, a)));
        continue;
      }
      s += out.q(0, a) - out.value(0, 0);
      ++f;
    }
    worst = std::max(worst, std::abs(s / f));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("greedy and exploratory selection") {
  CHECK(argmin_feasible(std::vector<double>{5, 3, 7}, {1, 1, 1}) == 1);
  CHECK(argmin_feasible(std::vector<double>{3, 3, 7}, {1, 1, 1}) == 0);
  CHECK(argmin_feasible(std::vector<double>{5, 3, 7}, {1, 0, 1}) == 0);

  // eps = 1 is uniform over the feasible actions
  const auto net = constant_net(2, 0, {0, -5, 0, 0, 0});
  const std::vector<std::uint8_t> mask{1, 1, 0, 1, 1};
  Rng rng(4);
  std::vector<int> counts(5, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) counts[select_action(net, std::vector<double>{0, 0}, mask, 1.0, rng)]++;
  CHECK(counts[2] == 0);
  double chi2 = 0.0;
  for (int a : {0, 1, 3, 4}) chi2 += std::pow(counts[a] - draws / 4.0, 2) / (draws / 4.0);
  CHECK(chi2 < 16.27);  // 3 dof, p = 0.001
  // eps = 0 is greedy
  CHECK(select_action(net, std::vector<double>{0, 0}, mask, 0.0, rng) == 1);
  CHECK_THROWS(select_action(net, std::vector<double>{0, 0}, mask, 1.5, rng));
}

TEST_CASE("epsilon schedule") {
  CHECK(epsilon(1, 2000) == 1.0);
  CHECK(epsilon(501, 2000) == 0.5);
  CHECK(epsilon(1000, 2000) == doctest::Approx(0.001));
  CHECK(epsilon(1001, 2000) == 0.0);
  CHECK(epsilon(2000, 2000) == 0.0);
  // the decay only covers episodes up to N_E / 2
  CHECK(epsilon(1, 1) == 0.0);
  CHECK(epsilon(1, 2) == 1.0);
  CHECK(epsilon(2, 3) == 0.0);
  CHECK_THROWS(epsilon(0, 10));
  CHECK_THROWS(epsilon(11, 10));
}

TEST_CASE("workload cost") {
  auto cfg = desk_config();
  WorkloadOutcome o;
  o.id = 3;
  o.status = Status::Dropped;
  CHECK(workload_cost(o, cfg) == 40.0);
  o.status = Status::Processed;
  o.total_delay = 2;
  o.total_energy = 0.2;
  CHECK(workload_cost(o, cfg) == doctest::Approx(1.1));
  cfg.weights = {1.0, 0.0};
  CHECK(workload_cost(o, cfg) == 2.0);
  // linear in the weights
  cfg.weights = {1.5, 2.5};
  const double base = workload_cost(o, cfg);
  cfg.weights = {3.0, 5.0};
  CHECK(workload_cost(o, cfg) == doctest::Approx(2 * base));
  CHECK_THROWS(workload_cost(WorkloadOutcome{}, cfg));
}

TEST_CASE("double-DQN target") {
  const std::vector<std::uint8_t> all{1, 1, 1};
  CHECK(td_target(7, 0.99, true, std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}, all) == 7);
  // the online net picks index 1, the target scores it at 2
  CHECK(td_target(1, 0.99, false, std::vector<double>{4, 0.5, 9}, std::vector<double>{1, 2, 0}, all) ==
        doctest::Approx(2.98));
  // identical networks: c + gamma * min Q
  Rng rng(6);
  auto net = QNetwork::create(4, 3, {8}, rng);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> s(4);
    for (auto& v : s) v = uniform01(rng);
    const auto q = q_values(net, s, all);
    CHECK(td_target(1.5, 0.9, false, q, q, all) == doctest::Approx(1.5 + 0.9 * *std::min_element(q.begin(), q.end())));
  }
}

TEST_CASE("replay buffer") {
  ReplayBuffer buf(5);
  Rng rng(1);
  for (int i = 0; i < 8; ++i) {
    auto e = random_experience(3, 2, rng);
    e.workload = i;
    buf.push(e);
  }
  CHECK(buf.size() == 5);
  CHECK(buf.at(0).workload == 3);  // oldest evicted first
  CHECK(buf.at(4).workload == 7);
  CHECK_THROWS(buf.sample(6, rng));
  CHECK_THROWS(ReplayBuffer(0));

  // distinct indices, each equally likely
  ReplayBuffer big(20);
  for (int i = 0; i < 20; ++i) big.push(random_experience(2, 2, rng));
  std::vector<int> hits(20, 0);
  for (int r = 0; r < 5000; ++r) {
    auto idx = big.sample(4, rng);
    std::sort(idx.begin(), idx.end());
    CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
    for (auto i : idx) hits[i]++;
  }
  double chi2 = 0.0;
  for (int h : hits) chi2 += std::pow(h - 1000.0, 2) / 1000.0;
  CHECK(chi2 < 43.82);  // 19 dof, p = 0.001
}

TEST_CASE("per-agent isolation") {
  const auto cfg = desk_config();
  const auto topo = Topology::full(4);
  const auto hyper = small_hyper();
  DecoffeeAgent a(1, cfg, topo, hyper, 10), b(2, cfg, topo, hyper, 20), b_alone(2, cfg, topo, hyper, 20);
  Rng rng(3);
  for (int i = 0; i < 40; ++i) {
    a.replay().push(random_experience(state_size(4), 5, rng));
    const auto e = random_experience(state_size(4), 5, rng);
    b.replay().push(e);
    b_alone.replay().push(e);
  }
  const QNetwork b_before = b.online();
  for (int i = 0; i < 25; ++i) CHECK(a.update());
  CHECK(same_params(b.online(), b_before));
  for (int i = 0; i < 10; ++i) {
    a.update();
    b.update();
    b_alone.update();
  }
  CHECK(same_params(b.online(), b_alone.online()));
  CHECK_FALSE(same_params(b.online(), b_before));
  // the target only moves on an explicit sync
  CHECK(same_params(b.target(), b_before));
  b.sync_target();
  CHECK(same_params(b.target(), b.online()));
}

TEST_CASE("no updates below a full batch") {
  const auto hyper = small_hyper();
  DecoffeeAgent a(1, desk_config(), Topology::full(4), hyper, 1);
  Rng rng(1);
  const QNetwork before = a.online();
  for (int i = 0; i < hyper.batch - 1; ++i) {
    a.replay().push(random_experience(state_size(4), 5, rng));
    CHECK_FALSE(a.update());
  }
  CHECK(same_params(a.online(), before));
  CHECK(a.iterations() == 0);
}

TEST_CASE("masked destinations are never chosen") {
  auto cfg = desk_config();
  const auto topo = Topology::ring(4, 1);
  Rng rng(12);
  long picks = 0;
  for (int ea = 1; ea <= 4; ++ea) {
    const ActionCodec codec(ea, cfg, topo);
    DecoffeeAgent agent(ea, cfg, topo, small_hyper(), 100 + ea);
    for (int i = 0; i < 25000; ++i) {
      std::vector<double> obs(state_size(4));
      for (auto& v : obs) v = uniform_real(rng, -2, 2);
      const int a = agent.act(obs, i % 3 == 0 ? 1.0 : (i % 3 == 1 ? 0.5 : 0.0));
      CHECK(codec.feasible(a));
      const auto d = infer_action(agent.online(), codec, obs);
      CHECK(decision_error(d, ea, cfg, topo).empty());
      CHECK(infer_action(agent.online(), codec, obs) == d);
      ++picks;
    }
  }
  CHECK(picks == 100000);
}

TEST_CASE("empty training leaves the networks untouched") {
  auto cfg = desk_config();
  cfg.arrival_prob = 0.0;
  auto hyper = small_hyper();
  hyper.episodes = 1;
  const auto topo = Topology::full(4);
  const auto out = train_agents(cfg, topo, hyper, LoadForecast::none(5), 9);
  CHECK(out.log.updates == 0);
  CHECK(out.log.mean_cost == std::vector<double>{0.0});
  for (int ea = 1; ea <= 4; ++ea) {
    const DecoffeeAgent fresh(ea, cfg, topo, hyper, derive_seed(9, 1000 + ea));
    CHECK(same_params(out.nets[ea - 1], fresh.online()));
    CHECK(out.replays[ea - 1].size() == 0);
  }
}

TEST_CASE("every resolved workload yields one matching tuple") {
  auto cfg = desk_config();
  cfg.arrival_prob = 0.8;
  cfg.timeout = 8;
  const auto topo = Topology::ring(4, 1);
  auto hyper = small_hyper();
  hyper.episodes = 1;
  hyper.replay_capacity = 100000;
  hyper.batch = 100000;  // keep every tuple, no updates
  const std::uint64_t seed = 5;
  const auto out = train_agents(cfg, topo, hyper, LoadForecast::none(5), seed);
  CHECK(out.log.updates == 0);

  std::map<std::uint64_t, std::pair<int, Experience>> tuples;
  for (int ea = 1; ea <= 4; ++ea)
    for (std::size_t i = 0; i < out.replays[ea - 1].size(); ++i) {
      const auto& e = out.replays[ea - 1].at(i);
      CHECK(tuples.emplace(e.workload, std::make_pair(ea, e)).second);
    }

  // replay the same episode from the recorded actions
  Environment env(cfg, topo, derive_seed(seed, 1));
  env.reset(derive_seed(seed, 0x5eed0001ULL));
  Telemetry tel(4, 1);
  const std::vector<double> loads(5, 0.0);
  std::vector<std::vector<std::uint64_t>> awaiting(4);
  long checked = 0;
  auto check_cost = [&](const WorkloadOutcome& o) {
    const auto it = tuples.find(o.id);
    REQUIRE(it != tuples.end());
    CHECK(it->second.second.cost == workload_cost(o, cfg) * hyper.cost_scale);
    ++checked;
  };
  while (!env.finished()) {
    std::vector<PlacementDecision> d(4);
    for (int ea = 1; ea <= 4; ++ea) {
      const auto obs = build_state(ea, env, tel, loads);
      for (auto id : awaiting[ea - 1]) CHECK(tuples.at(id).second.next_state == obs.features);
      awaiting[ea - 1].clear();
      const auto& w = env.arrivals()[ea - 1];
      if (w.null()) continue;
      const auto& [owner, e] = tuples.at(w.id);
      CHECK(owner == ea);
      CHECK(e.state == obs.features);
      CHECK(e.terminal == (env.clock() == cfg.horizon));
      if (e.terminal)
        CHECK(e.next_state == std::vector<double>(obs.features.size(), 0.0));
      else
        awaiting[ea - 1].push_back(w.id);
      d[ea - 1] = ActionCodec(ea, cfg, topo).decode(e.action);
    }
    const auto r = env.step(d);
    tel.update(r);
    for (const auto& o : r.resolved) check_cost(o);
  }
  for (const auto& o : env.drain()) check_cost(o);
  CHECK(env.arrived_count() > 100);
  CHECK(static_cast<std::int64_t>(tuples.size()) == env.arrived_count());
  CHECK(checked == env.arrived_count());
}

TEST_CASE("training is reproducible and syncs on the iteration grid") {
  auto cfg = desk_config();
  cfg.horizon = 30;
  cfg.drain_slots = 5;
  auto hyper = small_hyper();
  hyper.episodes = 4;
  const auto topo = Topology::full(4);
  const auto a = train_agents(cfg, topo, hyper, LoadForecast::none(5), 3);
  const auto b = train_agents(cfg, topo, hyper, LoadForecast::none(5), 3);
  for (int i = 0; i < 4; ++i) CHECK(same_params(a.nets[i], b.nets[i]));
  CHECK(a.log.mean_cost == b.log.mean_cost);
  CHECK(a.log.updates > 0);
  for (const auto& s : a.log.syncs) CHECK(s.iteration % hyper.copy_every == 0);
  for (std::size_t e = 0; e < a.log.epsilon.size(); ++e)
    CHECK(a.log.epsilon[e] == epsilon(static_cast<int>(e) + 1, hyper.episodes));

  hyper.copy_unit = CopyUnit::Episodes;
  hyper.copy_every = 2;
  const auto c = train_agents(cfg, topo, hyper, LoadForecast::none(5), 3);
  REQUIRE(c.log.syncs.size() == 8);
  for (const auto& s : c.log.syncs) CHECK(s.episode % 2 == 0);
}

TEST_CASE("policy files") {
  Rng rng(2);
  auto net = QNetwork::create(state_size(4), 5, {6, 4}, rng);
  const auto dir = std::filesystem::temp_directory_path() / "ecc_policy_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "agent_2.json").string();
  save_policy(path, net, 2, 4);
  const auto back = load_policy(path, 2, 4, {6, 4});
  CHECK(same_params(back, net));
  CHECK_THROWS(load_policy(path, 3, 4, {6, 4}));
  CHECK_THROWS(load_policy(path, 2, 4, {6, 5}));
  std::filesystem::remove_all(dir);
}
