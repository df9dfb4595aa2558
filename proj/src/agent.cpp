#include "ecc/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ecc/nn/checkpoint.hpp"
#include "json.hpp"
#include "ecc/units.hpp"

namespace ecc {

using nn::Tensor2;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double max_size_bits(const SystemConfig& cfg) {
  double m = 0.0;
  for (double s : cfg.size_set) m = std::max(m, s);
  return std::max(1.0, static_cast<double>(units::bits(m)));
}
}  // namespace

// --- codec ------------------------------------------------------------------

ActionCodec::ActionCodec(int ea, const SystemConfig& cfg, const Topology& topo) : ea_(ea), n_(cfg.n_agents) {
  if (ea < 1 || ea > n_) throw std::invalid_argument("codec: agent id out of range");
  mask_.assign(n_ + 1, 0);
  mask_[0] = 1;
  mask_[n_] = 1;
  for (int a = 1; a < n_; ++a) mask_[a] = topo.connected(ea, decode(a).destination) ? 1 : 0;
  feasible_ = static_cast<int>(std::count(mask_.begin(), mask_.end(), 1));
}

PlacementDecision ActionCodec::decode(int a) const {
  if (a < 0 || a > n_) throw std::out_of_range("action index out of range");
  if (a == 0) return PlacementDecision::run_local();
  if (a == n_) return PlacementDecision::offload_to(n_ + 1);
  // skip ourselves among the edge agents
  return PlacementDecision::offload_to(a < ea_ ? a : a + 1);
}

int ActionCodec::encode(const PlacementDecision& d) const {
  if (d.local && !d.offload && d.destination == 0) return 0;
  if (!d.local && d.offload) {
    if (d.destination == n_ + 1) return n_;
    if (d.destination >= 1 && d.destination <= n_ && d.destination != ea_)
      return d.destination < ea_ ? d.destination : d.destination - 1;
  }
  throw std::invalid_argument("decision has no action index");
}

// --- observation ------------------------------------------------------------

AgentObservation build_state(int ea, const Environment& env, const Telemetry& telemetry,
                             std::span<const double> predicted_loads) {
  const SystemConfig& cfg = env.config();
  const int n = cfg.n_agents;
  if (static_cast<int>(predicted_loads.size()) != n + 1) throw ForecastError("forecaster shape mismatch");
  if (telemetry.last_slot() != env.clock() - 1) throw TelemetryError("telemetry is not current");

  AgentObservation o;
  const Workload& w = env.arrivals()[ea - 1];
  o.eta = w.null() ? 0 : w.size_bits;
  o.wait_private = env.private_wait(ea);
  o.wait_offload = env.offload_wait(ea);
  o.lengths = telemetry.peer_view(ea).lengths;
  o.loads.assign(predicted_loads.begin(), predicted_loads.end());

  const double hmax = max_size_bits(cfg);
  const double tmax = cfg.timeout;
  o.features.reserve(state_size(n));
  o.features.push_back(static_cast<double>(o.eta) / hmax);
  o.features.push_back(o.wait_private / tmax);
  o.features.push_back(o.wait_offload / tmax);
  for (auto l : o.lengths) o.features.push_back(static_cast<double>(l) / hmax);
  for (double l : o.loads) o.features.push_back(l / n);
  return o;
}

// --- Q-network --------------------------------------------------------------

QNetwork QNetwork::create(int inputs, int actions, const std::vector<int>& hidden, Rng& rng) {
  QNetwork q;
  int width = inputs;
  for (int h : hidden) {
    if (h <= 0) throw nn::ShapeError("hidden widths must be positive");
    q.trunk.push_back(nn::DenseLayer::create(width, h, nn::Activation::Relu, rng));
    width = h;
  }
  q.value = nn::DenseLayer::create(width, 1, nn::Activation::Identity, rng);
  q.advantage = nn::DenseLayer::create(width, actions, nn::Activation::Identity, rng);
  return q;
}

int QNetwork::inputs() const { return trunk.empty() ? value.inputs() : trunk.front().inputs(); }

QOutput QNetwork::forward(const Tensor2& x, const std::vector<std::uint8_t>& mask, QNetworkCache* cache) const {
  const int k = actions();
  if (static_cast<int>(mask.size()) != k) throw nn::ShapeError("action mask width mismatch");
  if (cache) {
    cache->trunk.assign(trunk.size(), {});
    cache->mask = mask;
  }
  Tensor2 h = x;
  for (std::size_t i = 0; i < trunk.size(); ++i) h = trunk[i].forward(h, cache ? &cache->trunk[i] : nullptr);

  QOutput out;
  out.value = value.forward(h, cache ? &cache->value : nullptr);
  out.advantage = advantage.forward(h, cache ? &cache->advantage : nullptr);

  int feasible = 0;
  for (auto m : mask) feasible += m;
  if (feasible == 0) throw std::invalid_argument("no feasible action");
  out.q.resize(x.rows(), k);
  for (Eigen::Index b = 0; b < x.rows(); ++b) {
    double mean = 0.0;
    for (int a = 0; a < k; ++a)
      if (mask[a]) mean += out.advantage(b, a);
    mean /= feasible;
    for (int a = 0; a < k; ++a) out.q(b, a) = mask[a] ? out.value(b, 0) + out.advantage(b, a) - mean : kInf;
  }
  return out;
}

QNetworkGrads QNetwork::zero_grads() const {
  QNetworkGrads g;
  g.trunk.resize(trunk.size());
  for (std::size_t i = 0; i < trunk.size(); ++i) g.trunk[i].zero_like(trunk[i].weight, trunk[i].bias);
  g.value.zero_like(value.weight, value.bias);
  g.advantage.zero_like(advantage.weight, advantage.bias);
  return g;
}

void QNetwork::backward(const QNetworkCache& cache, const Tensor2& dq, QNetworkGrads& grads) const {
  const int k = actions();
  nn::require_shape(dq, cache.value.output.rows(), k, "q gradient");
  const auto& mask = cache.mask;
  int feasible = 0;
  for (auto m : mask) feasible += m;

  Tensor2 dv(dq.rows(), 1);
  Tensor2 da = Tensor2::Zero(dq.rows(), k);
  for (Eigen::Index b = 0; b < dq.rows(); ++b) {
    double s = 0.0;
    for (int a = 0; a < k; ++a)
      if (mask[a]) s += dq(b, a);
    dv(b, 0) = s;
    for (int a = 0; a < k; ++a)
      if (mask[a]) da(b, a) = dq(b, a) - s / feasible;
  }
  if (grads.trunk.size() != trunk.size()) grads.trunk.resize(trunk.size());
  Tensor2 dh = value.backward(cache.value, dv, grads.value);
  dh += advantage.backward(cache.advantage, da, grads.advantage);
  for (std::size_t i = trunk.size(); i-- > 0;) dh = trunk[i].backward(cache.trunk[i], dh, grads.trunk[i]);
}

std::vector<const Tensor2*> QNetworkGrads::pointers() const {
  std::vector<const Tensor2*> p;
  for (const auto& g : trunk) {
    p.push_back(&g.weight);
    p.push_back(&g.bias);
  }
  p.push_back(&value.weight);
  p.push_back(&value.bias);
  p.push_back(&advantage.weight);
  p.push_back(&advantage.bias);
  return p;
}

std::vector<nn::NamedParam> QNetwork::parameters() {
  std::vector<nn::NamedParam> p;
  for (std::size_t i = 0; i < trunk.size(); ++i) {
    p.push_back({"trunk." + std::to_string(i) + ".weight", &trunk[i].weight});
    p.push_back({"trunk." + std::to_string(i) + ".bias", &trunk[i].bias});
  }
  p.push_back({"value.weight", &value.weight});
  p.push_back({"value.bias", &value.bias});
  p.push_back({"advantage.weight", &advantage.weight});
  p.push_back({"advantage.bias", &advantage.bias});
  return p;
}

std::vector<const Tensor2*> QNetwork::parameters() const {
  std::vector<const Tensor2*> p;
  for (const auto& l : trunk) {
    p.push_back(&l.weight);
    p.push_back(&l.bias);
  }
  p.push_back(&value.weight);
  p.push_back(&value.bias);
  p.push_back(&advantage.weight);
  p.push_back(&advantage.bias);
  return p;
}

std::vector<double> q_values(const QNetwork& net, std::span<const double> obs,
                             const std::vector<std::uint8_t>& mask) {
  Tensor2 x(1, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) x(0, i) = obs[i];
  const auto out = net.forward(x, mask);
  return std::vector<double>(out.q.data(), out.q.data() + out.q.size());
}

int argmin_feasible(std::span<const double> q, const std::vector<std::uint8_t>& mask) {
  int best = -1;
  for (std::size_t a = 0; a < q.size(); ++a) {
    if (!mask[a]) continue;
    if (best < 0 || q[a] < q[best]) best = static_cast<int>(a);
  }
  if (best < 0) throw std::invalid_argument("no feasible action");
  return best;
}

int select_action(const QNetwork& net, std::span<const double> obs, const std::vector<std::uint8_t>& mask,
                  double eps, Rng& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("epsilon outside [0, 1]");
  if (eps > 0.0 && uniform01(rng) < eps) {
    std::vector<int> feasible;
    for (std::size_t a = 0; a < mask.size(); ++a)
      if (mask[a]) feasible.push_back(static_cast<int>(a));
    return feasible[uniform_index(rng, feasible.size())];
  }
  const auto q = q_values(net, obs, mask);
  return argmin_feasible(q, mask);
}

double epsilon(int episode, int n_episodes) {
  if (n_episodes < 1 || episode < 1 || episode > n_episodes)
    throw std::invalid_argument("episode outside 1..N_E");
  if (2 * episode <= n_episodes) return 1.0 - 2.0 * (episode - 1) / n_episodes;
  return 0.0;
}

double workload_cost(const WorkloadOutcome& o, const SystemConfig& cfg) {
  if (o.id == 0) throw std::invalid_argument("cost of a null workload");
  if (o.status == Status::Dropped) return cfg.drop_penalty;
  return cfg.weights.w_d * o.total_delay + cfg.weights.w_e * o.total_energy;
}

double td_target(double cost, double gamma, bool terminal, std::span<const double> q_online_next,
                 std::span<const double> q_target_next, const std::vector<std::uint8_t>& mask) {
  if (terminal) return cost;
  const int a = argmin_feasible(q_online_next, mask);
  return cost + gamma * q_target_next[a];
}

// --- replay -----------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(Experience e) {
  if (data_.size() == capacity_) data_.pop_front();
  data_.push_back(std::move(e));
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (n > data_.size()) throw std::invalid_argument("replay underflow");
  // Floyd's subset sampling
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t j = data_.size() - n; j < data_.size(); ++j) {
    const std::size_t t = uniform_index(rng, j + 1);
    if (std::find(out.begin(), out.end(), t) == out.end())
      out.push_back(t);
    else
      out.push_back(j);
  }
  return out;
}

// --- agent ------------------------------------------------------------------

DecoffeeAgent::DecoffeeAgent(int ea, const SystemConfig& cfg, const Topology& topo, const AgentHyper& hyper,
                             std::uint64_t seed)
    : codec_(ea, cfg, topo),
      hyper_(hyper),
      adam_(nn::AdamConfig{hyper.lr, 0.9, 0.999, 1e-8}),
      replay_(static_cast<std::size_t>(hyper.replay_capacity)),
      rng_(seed) {
  Rng init(derive_seed(seed, 0x1417));
  online_ = QNetwork::create(state_size(cfg.n_agents), cfg.n_agents + 1, hyper.hidden, init);
  target_ = online_;
}

int DecoffeeAgent::act(std::span<const double> obs, double eps) {
  return select_action(online_, obs, codec_.mask(), eps, rng_);
}

bool DecoffeeAgent::update() {
  const auto batch = static_cast<std::size_t>(hyper_.batch);
  if (replay_.size() < batch) return false;
  const auto idx = replay_.sample(batch, rng_);
  const auto d = static_cast<Eigen::Index>(online_.inputs());
  const auto bsz = static_cast<Eigen::Index>(batch);
  Tensor2 s(bsz, d), s2(bsz, d);
  for (Eigen::Index b = 0; b < bsz; ++b) {
    const Experience& e = replay_.at(idx[b]);
    for (Eigen::Index i = 0; i < d; ++i) {
      s(b, i) = e.state[i];
      s2(b, i) = e.next_state[i];
    }
  }
  const auto& mask = codec_.mask();
  const auto q_on = online_.forward(s2, mask).q;
  const auto q_tg = target_.forward(s2, mask).q;

  QNetworkCache cache;
  const auto out = online_.forward(s, mask, &cache);
  Tensor2 dq = Tensor2::Zero(bsz, online_.actions());
  for (Eigen::Index b = 0; b < bsz; ++b) {
    const Experience& e = replay_.at(idx[b]);
    const double y = td_target(e.cost, hyper_.gamma, e.terminal,
                               std::span<const double>(q_on.row(b).data(), q_on.cols()),
                               std::span<const double>(q_tg.row(b).data(), q_tg.cols()), mask);
    dq(b, e.action) = 2.0 * (out.q(b, e.action) - y) / static_cast<double>(bsz);
  }
  QNetworkGrads grads = online_.zero_grads();
  online_.backward(cache, dq, grads);
  auto named = online_.parameters();
  std::vector<Tensor2*> params;
  for (auto& p : named) params.push_back(p.value);
  const auto gp = grads.pointers();
  adam_.step(params, gp);
  ++iterations_;
  return true;
}

// --- training loop ----------------------------------------------------------

namespace {

struct Pending {
  std::vector<double> state;
  int action = 0;
  bool has_next = false;
  std::vector<double> next_state;
  bool has_cost = false;
  double cost = 0.0;
  bool terminal = false;
};

void check_hyper(const AgentHyper& h) {
  if (h.episodes < 1) throw std::invalid_argument("episodes must be at least 1");
  if (h.batch < 1 || h.replay_capacity < h.batch) throw std::invalid_argument("need 1 <= batch <= replay capacity");
  if (h.copy_every < 1) throw std::invalid_argument("copy period must be at least 1");
  if (!(h.gamma >= 0.0 && h.gamma <= 1.0)) throw std::invalid_argument("gamma outside [0, 1]");
  if (!(h.lr > 0.0) || !(h.cost_scale > 0.0)) throw std::invalid_argument("lr and cost scale must be positive");
  if (h.forecast_horizon < 1) throw std::invalid_argument("forecast horizon must be at least 1");
}

}  // namespace

TrainedAgents train_agents(const SystemConfig& cfg, const Topology& topo, const AgentHyper& hyper,
                           const LoadForecast& forecast, std::uint64_t seed, const UpdateHook& hook) {
  check_hyper(hyper);
  const int n = cfg.n_agents;
  std::vector<DecoffeeAgent> agents;
  agents.reserve(n);
  for (int ea = 1; ea <= n; ++ea) agents.emplace_back(ea, cfg, topo, hyper, derive_seed(seed, 1000 + ea));

  Environment env(cfg, topo, derive_seed(seed, 1));
  const int window = forecast.network() ? forecast.network()->window : 1;
  Telemetry telemetry(n, window);
  TrainingLog log;

  std::vector<std::map<std::uint64_t, Pending>> pending(n);
  std::vector<std::vector<std::uint64_t>> awaiting(n);

  auto try_finish = [&](int ea, std::uint64_t id) {
    auto& book = pending[ea - 1];
    auto it = book.find(id);
    const Pending& p = it->second;
    if (!p.has_cost || !p.has_next) return;
    agents[ea - 1].replay().push({p.state, p.action, p.cost, p.next_state, p.terminal, id});
    book.erase(it);
  };

  for (int episode = 1; episode <= hyper.episodes; ++episode) {
    env.reset(derive_seed(seed, 0x5eed0000ULL + static_cast<std::uint64_t>(episode)));
    telemetry.reset();
    for (auto& p : pending) p.clear();
    for (auto& a : awaiting) a.clear();
    const double eps = epsilon(episode, hyper.episodes);
    double cost_sum = 0.0;
    long cost_n = 0;

    auto resolve = [&](const WorkloadOutcome& o) {
      const double c = workload_cost(o, cfg);
      cost_sum += c;
      ++cost_n;
      auto& book = pending[o.source - 1];
      auto it = book.find(o.id);
      if (it == book.end()) throw std::logic_error("resolution for a workload with no decision");
      it->second.has_cost = true;
      it->second.cost = c * hyper.cost_scale;
      try_finish(o.source, o.id);
    };

    std::vector<PlacementDecision> decisions(n);
    while (!env.finished()) {
      const int t = env.clock();
      const auto loads = forecast.next_loads(telemetry, env);
      for (int ea = 1; ea <= n; ++ea) {
        const auto obs = build_state(ea, env, telemetry, loads);
        for (auto id : awaiting[ea - 1]) {
          Pending& p = pending[ea - 1].at(id);
          p.next_state = obs.features;
          p.has_next = true;
          try_finish(ea, id);
        }
        awaiting[ea - 1].clear();

        const Workload& w = env.arrivals()[ea - 1];
        decisions[ea - 1] = PlacementDecision::none();
        if (w.null()) continue;
        DecoffeeAgent& agent = agents[ea - 1];
        const int a = agent.act(obs.vec(), eps);
        decisions[ea - 1] = agent.codec().decode(a);
        Pending p;
        p.state = obs.features;
        p.action = a;
        // s' of the last slot lies outside the episode
        p.terminal = (t == cfg.horizon);
        if (p.terminal) {
          p.has_next = true;
          p.next_state.assign(obs.features.size(), 0.0);
        } else {
          awaiting[ea - 1].push_back(w.id);
        }
        pending[ea - 1].emplace(w.id, std::move(p));
      }
      const auto report = env.step(decisions);
      telemetry.update(report);
      for (const auto& o : report.resolved) resolve(o);

      for (auto& agent : agents) {
        if (!agent.update()) continue;
        ++log.updates;
        if (hook) hook(agent, episode, agent.iterations());
        if (hyper.copy_unit == CopyUnit::Iterations && agent.iterations() % hyper.copy_every == 0) {
          agent.sync_target();
          log.syncs.push_back({agent.id(), episode, agent.iterations()});
        }
      }
    }
    for (const auto& o : env.drain()) resolve(o);

    if (hyper.copy_unit == CopyUnit::Episodes && episode % hyper.copy_every == 0) {
      for (auto& agent : agents) {
        agent.sync_target();
        log.syncs.push_back({agent.id(), episode, agent.iterations()});
      }
    }
    double fill = 0.0;
    for (const auto& agent : agents)
      fill += static_cast<double>(agent.replay().size()) / static_cast<double>(agent.replay().capacity());
    log.mean_cost.push_back(cost_n ? cost_sum / cost_n : 0.0);
    log.epsilon.push_back(eps);
    log.buffer_fill.push_back(fill / n);
  }

  TrainedAgents out;
  for (auto& agent : agents) {
    out.nets.push_back(agent.online());
    out.replays.push_back(std::move(agent.replay()));
  }
  out.log = std::move(log);
  return out;
}

PlacementDecision infer_action(const QNetwork& net, const ActionCodec& codec, std::span<const double> obs) {
  const auto q = q_values(net, obs, codec.mask());
  return codec.decode(argmin_feasible(q, codec.mask()));
}

void save_policy(const std::string& path, QNetwork& net, int ea, int n_agents) {
  std::ostringstream meta;
  meta << "{\"kind\":\"q-network\",\"agent\":" << ea << ",\"n_agents\":" << n_agents << ",\"hidden\":[";
  for (std::size_t i = 0; i < net.trunk.size(); ++i) meta << (i ? "," : "") << net.trunk[i].outputs();
  meta << "]}";
  nn::save_checkpoint(path, net.parameters(), meta.str());
}

QNetwork load_policy(const std::string& path, int ea, int n_agents, const std::vector<int>& hidden) {
  Rng rng(0);
  QNetwork net = QNetwork::create(state_size(n_agents), n_agents + 1, hidden, rng);
  const std::string meta = nn::load_checkpoint(path, net.parameters());
  const auto doc = nlohmann::json::parse(meta);
  if (doc.value("agent", 0) != ea || doc.value("n_agents", 0) != n_agents)
    throw nn::CheckpointError("checkpoint belongs to another agent or system size");
  return net;
}

}  // namespace ecc
