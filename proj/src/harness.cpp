#include "ecc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ecc/nn/checkpoint.hpp"
#include "json.hpp"

namespace ecc {

using nlohmann::json;

const char* to_string(CampaignMode m) {
  switch (m) {
    case CampaignMode::Train: return "train";
    case CampaignMode::Infer: return "infer";
    case CampaignMode::Sweep: return "sweep";
    case CampaignMode::AblateLstm: return "ablate-lstm";
  }
  return "?";
}

ExperimentConfig default_experiment(bool paper_scale) {
  ExperimentConfig e;
  if (paper_scale) {
    e.system = paper_scale_config();
    // The published adjacency is not recoverable; a degree-4 ring lattice
    // stands in for it.
    e.topology_kind = "ring";
    e.ring_degree = 2;
    e.topology = Topology::ring(e.system.n_agents, e.ring_degree);
    e.agent.hidden = {1024, 1024, 1024};
    e.agent.episodes = 2000;
    e.campaign.repetitions = 200;
  } else {
    e.system = desk_config();
    e.topology = Topology::full(e.system.n_agents);
  }
  return e;
}

// --- JSON -------------------------------------------------------------------

namespace {

template <typename T>
void read(const json& j, const char* key, T& out, std::set<std::string>& seen) {
  seen.insert(key);
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw HarnessError(std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& seen, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!seen.count(it.key())) throw HarnessError("unknown config field '" + where + it.key() + "'");
}

ForecastMode parse_mode(const std::string& s) {
  if (s == "lstm") return ForecastMode::Lstm;
  if (s == "none") return ForecastMode::None;
  if (s == "oracle") return ForecastMode::Oracle;
  throw HarnessError("forecaster.mode must be lstm, none or oracle");
}

CampaignMode parse_campaign_mode(const std::string& s) {
  for (auto m : {CampaignMode::Train, CampaignMode::Infer, CampaignMode::Sweep, CampaignMode::AblateLstm})
    if (s == to_string(m)) return m;
  throw HarnessError("campaign.mode must be train, infer, sweep or ablate-lstm");
}

Topology build_topology(const std::string& kind, int n, int degree, const Topology& explicit_g) {
  if (kind == "full") return Topology::full(n);
  if (kind == "ring") return Topology::ring(n, degree);
  if (kind == "explicit") return explicit_g;
  throw HarnessError("topology must be full, ring or explicit");
}

}  // namespace

ExperimentConfig experiment_from_json(const std::string& text, const ExperimentConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw HarnessError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw HarnessError("config must be a JSON object");
  ExperimentConfig e = base;
  SystemConfig& s = e.system;
  std::set<std::string> seen;
  read(j, "n_agents", s.n_agents, seen);
  read(j, "slot_duration", s.slot_duration, seen);
  read(j, "horizon", s.horizon, seen);
  read(j, "drain_slots", s.drain_slots, seen);
  read(j, "arrival_prob", s.arrival_prob, seen);
  read(j, "size_set", s.size_set, seen);
  read(j, "density", s.density, seen);
  read(j, "timeout", s.timeout, seen);
  read(j, "rate_horizontal", s.rate_horizontal, seen);
  read(j, "rate_vertical", s.rate_vertical, seen);
  read(j, "cpu_private", s.cpu_private, seen);
  read(j, "cpu_public_edge", s.cpu_public_edge, seen);
  read(j, "cpu_public_cloud", s.cpu_public_cloud, seen);
  read(j, "drop_penalty", s.drop_penalty, seen);
  read(j, "rng_seed", s.rng_seed, seen);
  seen.insert("powers");
  if (j.contains("powers")) {
    const json& p = j["powers"];
    std::set<std::string> ps;
    read(p, "p_priv", s.powers.p_priv, ps);
    read(p, "p_off", s.powers.p_off, ps);
    read(p, "p_pub", s.powers.p_pub, ps);
    read(p, "p_tran", s.powers.p_tran, ps);
    read(p, "p_exec_edge", s.powers.p_exec_edge, ps);
    read(p, "p_exec_cloud", s.powers.p_exec_cloud, ps);
    reject_unknown(p, ps, "powers.");
  }
  seen.insert("weights");
  if (j.contains("weights")) {
    std::set<std::string> ws;
    read(j["weights"], "w_d", s.weights.w_d, ws);
    read(j["weights"], "w_e", s.weights.w_e, ws);
    reject_unknown(j["weights"], ws, "weights.");
  }

  read(j, "topology", e.topology_kind, seen);
  read(j, "ring_degree", e.ring_degree, seen);
  seen.insert("g");
  Topology explicit_g = e.topology;
  if (j.contains("g")) {
    std::vector<std::vector<int>> g;
    read(j, "g", g, seen);
    explicit_g = Topology(std::move(g));
    if (!j.contains("topology")) e.topology_kind = "explicit";
  }
  e.topology = build_topology(e.topology_kind, s.n_agents, e.ring_degree, explicit_g);

  seen.insert("agent");
  if (j.contains("agent")) {
    const json& a = j["agent"];
    std::set<std::string> as;
    read(a, "hidden", e.agent.hidden, as);
    read(a, "lr", e.agent.lr, as);
    read(a, "gamma", e.agent.gamma, as);
    read(a, "replay_capacity", e.agent.replay_capacity, as);
    read(a, "batch", e.agent.batch, as);
    read(a, "copy_every", e.agent.copy_every, as);
    std::string unit = e.agent.copy_unit == CopyUnit::Iterations ? "iterations" : "episodes";
    read(a, "copy_unit", unit, as);
    if (unit == "iterations")
      e.agent.copy_unit = CopyUnit::Iterations;
    else if (unit == "episodes")
      e.agent.copy_unit = CopyUnit::Episodes;
    else
      throw HarnessError("agent.copy_unit must be iterations or episodes");
    read(a, "episodes", e.agent.episodes, as);
    read(a, "cost_scale", e.agent.cost_scale, as);
    read(a, "forecast_horizon", e.agent.forecast_horizon, as);
    reject_unknown(a, as, "agent.");
  }

  seen.insert("forecaster");
  if (j.contains("forecaster")) {
    const json& f = j["forecaster"];
    std::set<std::string> fs;
    std::string mode = to_string(e.forecaster.mode);
    read(f, "mode", mode, fs);
    e.forecaster.mode = parse_mode(mode);
    read(f, "window", e.forecaster.window, fs);
    read(f, "hidden", e.forecaster.hidden, fs);
    read(f, "warmup_episodes", e.forecaster.warmup_episodes, fs);
    read(f, "epochs", e.forecaster.epochs, fs);
    read(f, "batch", e.forecaster.batch, fs);
    read(f, "lr", e.forecaster.lr, fs);
    reject_unknown(f, fs, "forecaster.");
  }

  seen.insert("campaign");
  if (j.contains("campaign")) {
    const json& c = j["campaign"];
    std::set<std::string> cs;
    std::string mode = to_string(e.campaign.mode);
    read(c, "mode", mode, cs);
    e.campaign.mode = parse_campaign_mode(mode);
    read(c, "policies", e.campaign.policies, cs);
    read(c, "sweep_axis", e.campaign.sweep_axis, cs);
    read(c, "sweep_values", e.campaign.sweep_values, cs);
    read(c, "repetitions", e.campaign.repetitions, cs);
    read(c, "seeds", e.campaign.seeds, cs);
    read(c, "out_dir", e.campaign.out_dir, cs);
    read(c, "retrain_per_point", e.campaign.retrain_per_point, cs);
    reject_unknown(c, cs, "campaign.");
  }
  reject_unknown(j, seen, "");
  return e;
}

ExperimentConfig load_experiment(const std::string& path, bool paper_scale) {
  std::ifstream in(path);
  if (!in) throw HarnessError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return experiment_from_json(ss.str(), default_experiment(paper_scale));
}

std::string experiment_to_json(const ExperimentConfig& e) {
  const SystemConfig& s = e.system;
  json j;
  j["n_agents"] = s.n_agents;
  j["slot_duration"] = s.slot_duration;
  j["horizon"] = s.horizon;
  j["drain_slots"] = s.drain_slots;
  j["arrival_prob"] = s.arrival_prob;
  j["size_set"] = s.size_set;
  j["density"] = s.density;
  j["timeout"] = s.timeout;
  j["rate_horizontal"] = s.rate_horizontal;
  j["rate_vertical"] = s.rate_vertical;
  j["cpu_private"] = s.cpu_private;
  j["cpu_public_edge"] = s.cpu_public_edge;
  j["cpu_public_cloud"] = s.cpu_public_cloud;
  j["drop_penalty"] = s.drop_penalty;
  j["rng_seed"] = s.rng_seed;
  j["powers"] = {{"p_priv", s.powers.p_priv},         {"p_off", s.powers.p_off},
                 {"p_pub", s.powers.p_pub},           {"p_tran", s.powers.p_tran},
                 {"p_exec_edge", s.powers.p_exec_edge}, {"p_exec_cloud", s.powers.p_exec_cloud}};
  j["weights"] = {{"w_d", s.weights.w_d}, {"w_e", s.weights.w_e}};
  j["topology"] = e.topology_kind;
  j["ring_degree"] = e.ring_degree;
  j["g"] = e.topology.matrix();
  j["agent"] = {{"hidden", e.agent.hidden},
                {"lr", e.agent.lr},
                {"gamma", e.agent.gamma},
                {"replay_capacity", e.agent.replay_capacity},
                {"batch", e.agent.batch},
                {"copy_every", e.agent.copy_every},
                {"copy_unit", e.agent.copy_unit == CopyUnit::Iterations ? "iterations" : "episodes"},
                {"episodes", e.agent.episodes},
                {"cost_scale", e.agent.cost_scale},
                {"forecast_horizon", e.agent.forecast_horizon}};
  j["forecaster"] = {{"mode", to_string(e.forecaster.mode)},
                     {"window", e.forecaster.window},
                     {"hidden", e.forecaster.hidden},
                     {"warmup_episodes", e.forecaster.warmup_episodes},
                     {"epochs", e.forecaster.epochs},
                     {"batch", e.forecaster.batch},
                     {"lr", e.forecaster.lr}};
  j["campaign"] = {{"mode", to_string(e.campaign.mode)},
                   {"policies", e.campaign.policies},
                   {"sweep_axis", e.campaign.sweep_axis},
                   {"sweep_values", e.campaign.sweep_values},
                   {"repetitions", e.campaign.repetitions},
                   {"seeds", e.campaign.seeds},
                   {"out_dir", e.campaign.out_dir},
                   {"retrain_per_point", e.campaign.retrain_per_point}};
  return j.dump(2);
}

namespace {
const std::vector<std::string> kAxes{"arrival_prob", "n_agents", "cpu", "timeout", "rate_h", "weights"};
}

bool is_learning_policy(const std::string& name) {
  return name == "DECOFFEE" || name == "DECOFFEE-DELAY" || name == "EA-DECOFFEE" || name == "DECOFFEE-NOLSTM" ||
         name == "DECOFFEE-ORACLE";
}

std::vector<Violation> validate_experiment(const ExperimentConfig& e) {
  auto v = validate_config(e.system, e.topology);
  const Campaign& c = e.campaign;
  if (c.policies.empty()) v.push_back({"campaign.policies", "at least one policy required"});
  for (const auto& p : c.policies)
    if (!is_learning_policy(p) && !parse_policy_kind(p)) v.push_back({"campaign.policies", "unknown policy " + p});
  if (std::find(kAxes.begin(), kAxes.end(), c.sweep_axis) == kAxes.end())
    v.push_back({"campaign.sweep_axis", "unknown sweep axis " + c.sweep_axis});
  if (c.sweep_values.empty()) v.push_back({"campaign.sweep_values", "at least one sweep point required"});
  for (double x : c.sweep_values)
    if (!std::isfinite(x)) v.push_back({"campaign.sweep_values", "sweep points must be finite"});
  if (!std::is_sorted(c.sweep_values.begin(), c.sweep_values.end()))
    v.push_back({"campaign.sweep_values", "sweep points must be ordered"});
  if (c.repetitions < 1) v.push_back({"campaign.repetitions", "must be >= 1"});
  if (c.seeds.empty()) v.push_back({"campaign.seeds", "at least one seed required"});
  std::set<std::uint64_t> uniq(c.seeds.begin(), c.seeds.end());
  if (uniq.size() != c.seeds.size()) v.push_back({"campaign.seeds", "seeds must be distinct"});
  if (e.agent.episodes < 1) v.push_back({"agent.episodes", "must be >= 1"});
  if (e.agent.batch < 1 || e.agent.replay_capacity < e.agent.batch)
    v.push_back({"agent.batch", "1 <= batch <= replay_capacity required"});
  if (e.agent.copy_every < 1) v.push_back({"agent.copy_every", "must be >= 1"});
  if (!(e.agent.gamma >= 0 && e.agent.gamma <= 1)) v.push_back({"agent.gamma", "0 <= gamma <= 1 required"});
  if (!(e.agent.lr > 0)) v.push_back({"agent.lr", "must be > 0"});
  if (!(e.agent.cost_scale > 0)) v.push_back({"agent.cost_scale", "must be > 0"});
  if (e.agent.forecast_horizon < 1) v.push_back({"agent.forecast_horizon", "must be >= 1"});
  if (e.forecaster.window < 1) v.push_back({"forecaster.window", "must be >= 1"});
  if (e.forecaster.hidden < 1) v.push_back({"forecaster.hidden", "must be >= 1"});
  if (e.forecaster.warmup_episodes < 1) v.push_back({"forecaster.warmup_episodes", "must be >= 1"});
  if (e.forecaster.epochs < 0) v.push_back({"forecaster.epochs", "must be >= 0"});
  if (e.forecaster.mode == ForecastMode::Lstm &&
      e.system.horizon <= e.forecaster.window + e.agent.forecast_horizon)
    v.push_back({"forecaster.window", "horizon must exceed window + forecast horizon"});
  return v;
}

ExperimentConfig with_sweep_point(const ExperimentConfig& cfg, const std::string& axis, double value) {
  ExperimentConfig e = cfg;
  SystemConfig& s = e.system;
  if (axis == "arrival_prob") {
    s.arrival_prob = value;
  } else if (axis == "n_agents") {
    if (value != std::floor(value)) throw HarnessError("n_agents sweep points must be integers");
    s.n_agents = static_cast<int>(value);
    if (e.topology_kind == "explicit") throw HarnessError("cannot sweep n_agents with an explicit G");
    e.topology = build_topology(e.topology_kind, s.n_agents, e.ring_degree, e.topology);
  } else if (axis == "cpu") {
    s.cpu_private = value;
    s.cpu_public_edge = value;
  } else if (axis == "timeout") {
    if (value != std::floor(value)) throw HarnessError("timeout sweep points must be integers");
    s.timeout = static_cast<int>(value);
  } else if (axis == "rate_h") {
    s.rate_horizontal = value;
  } else if (axis == "weights") {
    s.weights.w_d = value;
    s.weights.w_e = 1.0 - value;
  } else {
    throw HarnessError("unknown sweep axis " + axis);
  }
  return e;
}

bool axis_needs_retraining(const std::string& axis) { return axis == "n_agents" || axis == "weights"; }

// --- episodes and metrics ---------------------------------------------------

EpisodeTrace run_episode(const SystemConfig& cfg, const Topology& topo, Policy& policy, std::uint64_t seed) {
  Environment env(cfg, topo, seed);
  Telemetry telemetry(cfg.n_agents, policy.window());
  policy.reset(seed);
  EpisodeTrace trace;
  while (!env.finished()) {
    const auto decisions = policy.decide_slot(env, telemetry);
    for (const auto& d : decisions) {
      if (d.is_none()) continue;
      if (d.local)
        ++trace.decided_local;
      else if (d.destination == cfg.cloud())
        ++trace.decided_vertical;
      else
        ++trace.decided_horizontal;
    }
    telemetry.update(env.step(decisions));
  }
  env.drain();
  trace.outcomes = env.ledger();
  if (static_cast<std::int64_t>(trace.outcomes.size()) != env.arrived_count())
    throw std::logic_error("episode ledger does not cover every arrival");
  return trace;
}

MetricsRow aggregate(const std::vector<EpisodeTrace>& episodes, const SystemConfig& cfg) {
  MetricsRow r;
  double delay_sum = 0.0, energy_sum = 0.0, cost_sum = 0.0;
  long processed = 0, dropped = 0, total = 0;
  long dl = 0, dh = 0, dv = 0;
  for (const auto& ep : episodes) {
    for (const auto& o : ep.outcomes) {
      ++total;
      energy_sum += o.total_energy;
      cost_sum += workload_cost(o, cfg);
      if (o.status == Status::Processed) {
        ++processed;
        delay_sum += o.total_delay * cfg.slot_duration;
      } else {
        ++dropped;
      }
    }
    dl += ep.decided_local;
    dh += ep.decided_horizontal;
    dv += ep.decided_vertical;
  }
  r.mean_delay_s = processed ? delay_sum / processed : 0.0;
  r.drop_rate_pct = total ? 100.0 * dropped / total : 0.0;
  r.total_energy_j = episodes.empty() ? 0.0 : energy_sum / episodes.size();
  r.mean_cost = total ? cost_sum / total : 0.0;
  const long decided = dl + dh + dv;
  if (decided) {
    r.frac_local = static_cast<double>(dl) / decided;
    r.frac_horizontal = static_cast<double>(dh) / decided;
    r.frac_vertical = static_cast<double>(dv) / decided;
  }
  return r;
}

const char* const kMetricsHeader =
    "policy,sweep_axis,sweep_value,seed,mean_delay_s,drop_rate_pct,total_energy_j,frac_local,frac_horizontal,"
    "frac_vertical";

std::string format_row(const MetricsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%llu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", r.policy.c_str(),
                r.sweep_axis.c_str(), r.sweep_value, static_cast<unsigned long long>(r.seed), r.mean_delay_s,
                r.drop_rate_pct, r.total_energy_j, r.frac_local, r.frac_horizontal, r.frac_vertical);
  return buf;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) out += format_row(r) + "\n";
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw HarnessError("metrics CSV header mismatch");
  std::vector<MetricsRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw HarnessError("metrics CSV line " + std::to_string(lineno) + ": expected 10 fields");
    try {
      MetricsRow r;
      r.policy = f[0];
      r.sweep_axis = f[1];
      r.sweep_value = std::stod(f[2]);
      r.seed = std::stoull(f[3]);
      r.mean_delay_s = std::stod(f[4]);
      r.drop_rate_pct = std::stod(f[5]);
      r.total_energy_j = std::stod(f[6]);
      r.frac_local = std::stod(f[7]);
      r.frac_horizontal = std::stod(f[8]);
      r.frac_vertical = std::stod(f[9]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw HarnessError("metrics CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

// --- training ---------------------------------------------------------------

std::vector<Trace> collect_load_traces(const SystemConfig& cfg, const Topology& topo, int episodes,
                                       std::uint64_t seed) {
  auto rp = make_baseline(PolicyKind::RP, cfg, topo);
  std::vector<Trace> traces;
  for (int e = 1; e <= episodes; ++e) {
    const auto s = derive_seed(seed, static_cast<std::uint64_t>(e));
    Environment env(cfg, topo, s);
    Telemetry telemetry(cfg.n_agents, 1);
    rp->reset(s);
    Trace tr;
    while (!env.finished()) {
      const auto report = env.step(rp->decide_slot(env, telemetry));
      telemetry.update(report);
      tr.emplace_back(report.active.begin(), report.active.end());
    }
    traces.push_back(std::move(tr));
  }
  return traces;
}

LoadForecast build_forecast(const ExperimentConfig& cfg, std::uint64_t seed, ForecastMode mode,
                            ForecastReport* report) {
  const int nodes = cfg.system.node_count();
  if (mode == ForecastMode::None) return LoadForecast::none(nodes);
  if (mode == ForecastMode::Oracle) return LoadForecast::oracle(nodes);
  const auto traces =
      collect_load_traces(cfg.system, cfg.topology, cfg.forecaster.warmup_episodes, derive_seed(seed, 0xF0CA));
  auto net = std::make_shared<ForecasterNetwork>(nodes, cfg.forecaster.window, cfg.forecaster.hidden,
                                                 static_cast<double>(cfg.system.n_agents),
                                                 derive_seed(seed, 0xF0CB));
  ForecastTraining opt;
  opt.epochs = cfg.forecaster.epochs;
  opt.batch = cfg.forecaster.batch;
  opt.lr = cfg.forecaster.lr;
  // The window ends at the last observed slot t-1; the state wants t+h.
  opt.lead = cfg.agent.forecast_horizon + 1;
  opt.seed = derive_seed(seed, 0xF0CC);
  auto rep = train_forecaster(*net, traces, opt);
  if (report) *report = std::move(rep);
  return LoadForecast::lstm(std::move(net));
}

TrainedPolicy train_policy(const ExperimentConfig& cfg, const std::string& name, std::uint64_t seed) {
  if (!is_learning_policy(name)) throw HarnessError(name + " is not a learning policy");
  ExperimentConfig e = cfg;
  ForecastMode mode = cfg.forecaster.mode;
  if (name == "DECOFFEE-DELAY") e.system.weights = {1.0, 0.0};
  if (name == "EA-DECOFFEE") e.system.weights = {0.0, 1.0};
  if (name == "DECOFFEE-NOLSTM") mode = ForecastMode::None;
  if (name == "DECOFFEE-ORACLE") mode = ForecastMode::Oracle;
  auto forecast = build_forecast(e, seed, mode);
  auto trained = train_agents(e.system, e.topology, e.agent, forecast, derive_seed(seed, 0xA6E47));
  TrainedPolicy out;
  out.nets = trained.nets;
  out.log = std::move(trained.log);
  out.policy = std::make_unique<DecoffeePolicy>(name, std::move(trained.nets), forecast, e.system, e.topology);
  return out;
}

MetricsRow evaluate(const ExperimentConfig& cfg, Policy& policy, const std::string& label, double sweep_value,
                    std::uint64_t seed) {
  std::vector<EpisodeTrace> eps;
  for (int r = 1; r <= cfg.campaign.repetitions; ++r)
    eps.push_back(run_episode(cfg.system, cfg.topology, policy,
                              derive_seed(seed, 0xE7A10000ULL + static_cast<std::uint64_t>(r))));
  MetricsRow row = aggregate(eps, cfg.system);
  row.policy = label;
  row.sweep_axis = cfg.campaign.sweep_axis;
  row.sweep_value = sweep_value;
  row.seed = seed;
  return row;
}

// --- campaigns --------------------------------------------------------------

namespace {

void write_text(const std::filesystem::path& p, const std::string& text, std::vector<std::string>& files) {
  std::ofstream out(p);
  if (!out) throw HarnessError("cannot write " + p.string());
  out << text;
  if (!out) throw HarnessError("failed writing " + p.string());
  files.push_back(p.string());
}

std::string curve_csv(const TrainingLog& log) {
  std::string s = "episode,mean_cost,epsilon,buffer_fill\n";
  char buf[128];
  for (std::size_t i = 0; i < log.mean_cost.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f\n", i + 1, log.mean_cost[i], log.epsilon[i],
                  log.buffer_fill[i]);
    s += buf;
  }
  return s;
}

double base_value(const ExperimentConfig& e) {
  const auto& s = e.system;
  const auto& a = e.campaign.sweep_axis;
  if (a == "n_agents") return s.n_agents;
  if (a == "cpu") return s.cpu_private;
  if (a == "timeout") return s.timeout;
  if (a == "rate_h") return s.rate_horizontal;
  if (a == "weights") return s.weights.w_d;
  return s.arrival_prob;
}

}  // namespace

CampaignResult run_campaign(const ExperimentConfig& cfg, const ProgressFn& progress) {
  const auto violations = validate_experiment(cfg);
  if (!violations.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& v : violations) msg += "\n  " + v.field + ": " + v.rule;
    throw ConfigError(msg);
  }
  const Campaign& c = cfg.campaign;
  const std::filesystem::path out(c.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out)) throw HarnessError("cannot create output directory " + c.out_dir);

  auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };
  CampaignResult result;

  if (c.mode == CampaignMode::Train) {
    std::vector<std::string> names;
    for (const auto& p : c.policies)
      if (is_learning_policy(p)) names.push_back(p);
    if (names.empty()) names.push_back("DECOFFEE");
    std::string summary = "policy,seed,first20_mean_cost,final50_mean_cost,updates\n";
    for (const auto& name : names) {
      for (auto seed : c.seeds) {
        say("training " + name + " seed " + std::to_string(seed));
        auto tp = train_policy(cfg, name, seed);
        const std::string tag = name + "_seed" + std::to_string(seed);
        write_text(out / ("curve_" + tag + ".csv"), curve_csv(tp.log), result.files);
        const auto dir = out / tag;
        std::filesystem::create_directories(dir, ec);
        for (int ea = 1; ea <= cfg.system.n_agents; ++ea) {
          const auto p = dir / ("agent_" + std::to_string(ea) + ".json");
          save_policy(p.string(), tp.nets[ea - 1], ea, cfg.system.n_agents);
          result.files.push_back(p.string());
        }
        const auto& mc = tp.log.mean_cost;
        auto mean_of = [&](std::size_t from, std::size_t to) {
          double s = 0.0;
          for (std::size_t i = from; i < to; ++i) s += mc[i];
          return to > from ? s / (to - from) : 0.0;
        };
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%llu,%.6f,%.6f,%ld\n", name.c_str(),
                      static_cast<unsigned long long>(seed), mean_of(0, std::min<std::size_t>(20, mc.size())),
                      mean_of(mc.size() > 50 ? mc.size() - 50 : 0, mc.size()), tp.log.updates);
        summary += buf;
      }
    }
    write_text(out / "training_summary.csv", summary, result.files);
    return result;
  }

  std::vector<std::string> policies = c.policies;
  std::vector<double> values = c.sweep_values;
  if (c.mode == CampaignMode::Infer) values = {base_value(cfg)};
  if (c.mode == CampaignMode::AblateLstm) policies = {"DECOFFEE", "DECOFFEE-NOLSTM", "DECOFFEE-ORACLE"};
  const bool retrain = c.retrain_per_point || axis_needs_retraining(c.sweep_axis);

  // rows[policy][value][seed]
  std::vector<std::vector<std::vector<MetricsRow>>> grid(
      policies.size(), std::vector<std::vector<MetricsRow>>(values.size(), std::vector<MetricsRow>(c.seeds.size())));

  for (std::size_t si = 0; si < c.seeds.size(); ++si) {
    const auto seed = c.seeds[si];
    std::map<std::string, TrainedPolicy> trained;  // once per seed unless retraining
    for (std::size_t vi = 0; vi < values.size(); ++vi) {
      const ExperimentConfig point = with_sweep_point(cfg, c.sweep_axis, values[vi]);
      const auto pv = validate_config(point.system, point.topology);
      if (!pv.empty()) throw ConfigError("sweep point " + std::to_string(values[vi]) + ": " + pv.front().rule);
      for (std::size_t pi = 0; pi < policies.size(); ++pi) {
        const std::string& name = policies[pi];
        MetricsRow row;
        if (is_learning_policy(name)) {
          if (retrain) {
            say("training " + name + " seed " + std::to_string(seed) + " at " + std::to_string(values[vi]));
            auto tp = train_policy(point, name, seed);
            row = evaluate(point, *tp.policy, name, values[vi], seed);
          } else {
            if (!trained.count(name)) {
              say("training " + name + " seed " + std::to_string(seed));
              trained.emplace(name, train_policy(cfg, name, seed));
            }
            // same networks and forecaster, evaluated under this point's
            // dynamics (N and G are unchanged on these axes)
            row = evaluate(point, *trained.at(name).policy, name, values[vi], seed);
          }
        } else {
          auto pol = make_baseline(*parse_policy_kind(name), point.system, point.topology);
          row = evaluate(point, *pol, name, values[vi], seed);
        }
        grid[pi][vi][si] = row;
      }
    }
  }
  for (const auto& per_policy : grid)
    for (const auto& per_value : per_policy)
      for (const auto& row : per_value) result.rows.push_back(row);

  write_text(out / "metrics.csv", metrics_csv(result.rows), result.files);
  write_text(out / "summary.txt", summary_text(result.rows), result.files);
  return result;
}

std::string summary_text(const std::vector<MetricsRow>& rows) {
  struct Acc {
    std::vector<double> delay, drop, energy;
  };
  std::vector<std::pair<std::string, double>> order;
  std::map<std::pair<std::string, double>, Acc> acc;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.policy, r.sweep_value);
    if (!acc.count(key)) order.push_back(key);
    auto& a = acc[key];
    a.delay.push_back(r.mean_delay_s);
    a.drop.push_back(r.drop_rate_pct);
    a.energy.push_back(r.total_energy_j);
  }
  auto ms = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    s = v.size() > 1 ? std::sqrt(s / (v.size() - 1)) : 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f +- %.4f", m, s);
    return std::string(buf);
  };
  std::string out;
  const std::string axis = rows.empty() ? "" : rows.front().sweep_axis;
  out += "policy  " + axis + "  seeds  delay_s  drop_pct  energy_J\n";
  for (const auto& key : order) {
    const auto& a = acc[key];
    char head[128];
    std::snprintf(head, sizeof head, "%-16s %8.3f  %zu  ", key.first.c_str(), key.second, a.delay.size());
    out += head + ms(a.delay) + "  " + ms(a.drop) + "  " + ms(a.energy) + "\n";
  }
  return out;
}

}  // namespace ecc
