#pragma once

// Per-edge-agent learner: observation assembly, action codec, dueling
// Q-network, replay of delayed experiences and the multi-agent training loop.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecc/config.hpp"
#include "ecc/environment.hpp"
#include "ecc/forecaster.hpp"
#include "ecc/nn/adam.hpp"
#include "ecc/nn/dense.hpp"
#include "ecc/telemetry.hpp"

namespace ecc {

/// Index 0 runs locally, 1..N-1 offload to the other edge agents in
/// ascending id, N offloads to the cloud. Unconnected peers are masked.
class ActionCodec {
 public:
  ActionCodec() = default;
  ActionCodec(int ea, const SystemConfig& cfg, const Topology& topo);

  int size() const { return static_cast<int>(mask_.size()); }
  int agent() const { return ea_; }
  bool feasible(int a) const { return a >= 0 && a < size() && mask_[a] != 0; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  int feasible_count() const { return feasible_; }

  PlacementDecision decode(int a) const;
  int encode(const PlacementDecision& d) const;

 private:
  int ea_ = 0;
  int n_ = 0;
  std::vector<std::uint8_t> mask_;
  int feasible_ = 0;
};

inline int state_size(int n_agents) { return 2 * n_agents + 4; }

struct AgentObservation {
  std::int64_t eta = 0;               // bits of this slot's arrival, 0 if none
  int wait_private = 0;               // slots
  int wait_offload = 0;               // slots
  std::vector<std::int64_t> lengths;  // public stacks holding our work, N entries
  std::vector<double> loads;          // predicted A for the next slot, N+1 entries
  std::vector<double> features;       // normalized, in the order above

  std::span<const double> vec() const { return features; }
};

/// Observation of `ea` at the start of the current slot. Telemetry must hold
/// every slot before it.
AgentObservation build_state(int ea, const Environment& env, const Telemetry& telemetry,
                             std::span<const double> predicted_loads);

// ---------------------------------------------------------------------------

struct QNetworkCache {
  std::vector<nn::DenseCache> trunk;
  nn::DenseCache value, advantage;
  std::vector<std::uint8_t> mask;
};

struct QNetworkGrads {
  std::vector<nn::DenseGrads> trunk;
  nn::DenseGrads value, advantage;
  std::vector<const nn::Tensor2*> pointers() const;
};

struct QOutput {
  nn::Tensor2 value;      // B x 1
  nn::Tensor2 advantage;  // B x K
  nn::Tensor2 q;          // B x K, masked entries +inf
};

/// Shared ReLU trunk with a scalar value head and a K-way advantage head.
/// Q = V + A - mean of A over the feasible actions.
struct QNetwork {
  std::vector<nn::DenseLayer> trunk;
  nn::DenseLayer value;
  nn::DenseLayer advantage;

  static QNetwork create(int inputs, int actions, const std::vector<int>& hidden, Rng& rng);

  int inputs() const;
  int actions() const { return advantage.outputs(); }

  QOutput forward(const nn::Tensor2& x, const std::vector<std::uint8_t>& mask,
                  QNetworkCache* cache = nullptr) const;
  /// `dq` is dLoss/dQ (B x K); entries at masked actions are ignored.
  void backward(const QNetworkCache& cache, const nn::Tensor2& dq, QNetworkGrads& grads) const;
  QNetworkGrads zero_grads() const;

  std::vector<nn::NamedParam> parameters();
  std::vector<const nn::Tensor2*> parameters() const;
};

std::vector<double> q_values(const QNetwork& net, std::span<const double> obs,
                             const std::vector<std::uint8_t>& mask);

/// Lowest-index minimum over feasible entries.
int argmin_feasible(std::span<const double> q, const std::vector<std::uint8_t>& mask);

/// Uniform feasible action with probability eps, else the greedy one.
int select_action(const QNetwork& net, std::span<const double> obs, const std::vector<std::uint8_t>& mask,
                  double eps, Rng& rng);

/// Linear decay from 1 to 0 over the first half of training.
double epsilon(int episode, int n_episodes);

/// Drop penalty for dropped workloads, weighted delay plus energy otherwise.
double workload_cost(const WorkloadOutcome& o, const SystemConfig& cfg);

/// Double-DQN target: the online values pick a', the target values score it.
double td_target(double cost, double gamma, bool terminal, std::span<const double> q_online_next,
                 std::span<const double> q_target_next, const std::vector<std::uint8_t>& mask);

// ---------------------------------------------------------------------------

struct Experience {
  std::vector<double> state;
  int action = 0;
  double cost = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
  std::uint64_t workload = 0;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);

  void push(Experience e);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Experience& at(std::size_t i) const { return data_[i]; }
  /// `n` distinct indices, uniform.
  std::vector<std::size_t> sample(std::size_t n, Rng& rng) const;
  void clear() { data_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<Experience> data_;
};

enum class CopyUnit { Iterations, Episodes };

struct AgentHyper {
  std::vector<int> hidden{128, 128};
  double lr = 5e-4;
  double gamma = 0.99;
  int replay_capacity = 10000;
  int batch = 64;
  int copy_every = 500;
  CopyUnit copy_unit = CopyUnit::Iterations;
  int episodes = 300;
  /// Costs are multiplied by this before they reach the replay buffer.
  double cost_scale = 0.1;
  /// Predicted loads are for slot t + forecast_horizon.
  int forecast_horizon = 1;
};

class DecoffeeAgent {
 public:
  DecoffeeAgent(int ea, const SystemConfig& cfg, const Topology& topo, const AgentHyper& hyper,
                std::uint64_t seed);

  int id() const { return codec_.agent(); }
  const ActionCodec& codec() const { return codec_; }
  const QNetwork& online() const { return online_; }
  const QNetwork& target() const { return target_; }
  QNetwork& online() { return online_; }
  const ReplayBuffer& replay() const { return replay_; }
  ReplayBuffer& replay() { return replay_; }
  long iterations() const { return iterations_; }

  int act(std::span<const double> obs, double eps);

  /// One minibatch step when the buffer holds at least a batch. Returns
  /// false (and changes nothing) otherwise.
  bool update();
  void sync_target() { target_ = online_; }

 private:
  ActionCodec codec_;
  AgentHyper hyper_;
  QNetwork online_, target_;
  nn::Adam adam_;
  ReplayBuffer replay_;
  Rng rng_;
  long iterations_ = 0;
};

struct TrainingLog {
  std::vector<double> mean_cost;    // per episode, raw cost units
  std::vector<double> epsilon;      // per episode
  std::vector<double> buffer_fill;  // per episode, mean over agents, in [0, 1]
  struct Sync {
    int agent;
    int episode;
    long iteration;
  };
  std::vector<Sync> syncs;
  long updates = 0;
};

/// Called after every gradient step; lets tests watch the target network.
using UpdateHook = std::function<void(const DecoffeeAgent& agent, int episode, long iteration)>;

struct TrainedAgents {
  std::vector<QNetwork> nets;  // index ea-1
  std::vector<ReplayBuffer> replays;  // final buffers, index ea-1
  TrainingLog log;
};

TrainedAgents train_agents(const SystemConfig& cfg, const Topology& topo, const AgentHyper& hyper,
                           const LoadForecast& forecast, std::uint64_t seed, const UpdateHook& hook = {});

/// Greedy decision of a trained network; never mutates it.
PlacementDecision infer_action(const QNetwork& net, const ActionCodec& codec, std::span<const double> obs);

void save_policy(const std::string& path, QNetwork& net, int ea, int n_agents);
QNetwork load_policy(const std::string& path, int ea, int n_agents, const std::vector<int>& hidden);

}  // namespace ecc
