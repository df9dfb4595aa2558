#include "ecc/ecc.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "ecc/harness.hpp"
#include "ecc/nn/checkpoint.hpp"

struct ecc_experiment {
  ecc::ExperimentConfig cfg;
};

struct ecc_env {
  ecc::Environment env;
};

namespace {

thread_local std::string g_error;

ecc_status fail(ecc_status s, const std::string& msg) {
  g_error = msg;
  return s;
}

template <typename F>
ecc_status guard(F&& f) {
  try {
    return f();
  } catch (const ecc::ConfigError& e) {
    return fail(ECC_ERR_CONFIG, e.what());
  } catch (const ecc::nn::CheckpointError& e) {
    return fail(ECC_ERR_IO, e.what());
  } catch (const ecc::HarnessError& e) {
    const std::string m = e.what();
    const bool io = m.rfind("cannot", 0) == 0 || m.rfind("failed", 0) == 0;
    return fail(io ? ECC_ERR_IO : ECC_ERR_ARGUMENT, m);
  } catch (const ecc::EnvironmentError& e) {
    return fail(ECC_ERR_STATE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(ECC_ERR_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(ECC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ECC_ERR_INTERNAL, "unknown error");
  }
}

ecc_status copy_out(const std::string& s, char* buf, size_t buflen) {
  if (buf && buflen) {
    const size_t n = std::min(buflen - 1, s.size());
    std::memcpy(buf, s.data(), n);
    buf[n] = '\0';
  }
  return ECC_OK;
}

}  // namespace

extern "C" {

const char* ecc_version(void) { return "1.0.0"; }

const char* ecc_last_error(void) { return g_error.c_str(); }

ecc_status ecc_experiment_load(const char* path, int paper_scale, ecc_experiment** out) {
  if (!out) return fail(ECC_ERR_ARGUMENT, "null output handle");
  *out = nullptr;
  return guard([&] {
    auto e = std::make_unique<ecc_experiment>();
    e->cfg = path ? ecc::load_experiment(path, paper_scale != 0) : ecc::default_experiment(paper_scale != 0);
    *out = e.release();
    return ECC_OK;
  });
}

ecc_status ecc_experiment_from_json(const char* json_text, int paper_scale, ecc_experiment** out) {
  if (!out || !json_text) return fail(ECC_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] {
    auto e = std::make_unique<ecc_experiment>();
    e->cfg = ecc::experiment_from_json(json_text, ecc::default_experiment(paper_scale != 0));
    *out = e.release();
    return ECC_OK;
  });
}

void ecc_experiment_free(ecc_experiment* e) { delete e; }

ecc_status ecc_experiment_validate(const ecc_experiment* e, size_t* violations) {
  if (!e || !violations) return fail(ECC_ERR_ARGUMENT, "null argument");
  return guard([&] {
    *violations = ecc::validate_experiment(e->cfg).size();
    return ECC_OK;
  });
}

ecc_status ecc_experiment_violation(const ecc_experiment* e, size_t index, char* buf, size_t buflen) {
  if (!e) return fail(ECC_ERR_ARGUMENT, "null handle");
  return guard([&] {
    const auto v = ecc::validate_experiment(e->cfg);
    if (index >= v.size()) return fail(ECC_ERR_ARGUMENT, "violation index out of range");
    return copy_out(v[index].field + ": " + v[index].rule, buf, buflen);
  });
}

ecc_status ecc_experiment_set_seed(ecc_experiment* e, uint64_t seed) {
  if (!e) return fail(ECC_ERR_ARGUMENT, "null handle");
  e->cfg.campaign.seeds = {seed};
  return ECC_OK;
}

ecc_status ecc_experiment_set_output(ecc_experiment* e, const char* out_dir) {
  if (!e || !out_dir || !*out_dir) return fail(ECC_ERR_ARGUMENT, "null handle or empty path");
  e->cfg.campaign.out_dir = out_dir;
  return ECC_OK;
}

ecc_status ecc_experiment_set_policies(ecc_experiment* e, const char* policies) {
  if (!e || !policies) return fail(ECC_ERR_ARGUMENT, "null argument");
  std::vector<std::string> names;
  std::stringstream ss(policies);
  std::string name;
  while (std::getline(ss, name, ','))
    if (!name.empty()) names.push_back(name);
  if (names.empty()) return fail(ECC_ERR_ARGUMENT, "no policy names given");
  e->cfg.campaign.policies = names;
  return ECC_OK;
}

ecc_status ecc_experiment_to_json(const ecc_experiment* e, char* buf, size_t buflen, size_t* needed) {
  if (!e) return fail(ECC_ERR_ARGUMENT, "null handle");
  return guard([&] {
    const std::string s = ecc::experiment_to_json(e->cfg);
    if (needed) *needed = s.size() + 1;
    return copy_out(s, buf, buflen);
  });
}

ecc_status ecc_experiment_run(ecc_experiment* e, const char* mode, ecc_progress_fn progress, void* user,
                              size_t* rows) {
  if (!e || !mode) return fail(ECC_ERR_ARGUMENT, "null argument");
  return guard([&] {
    const std::string m = mode;
    ecc::ExperimentConfig cfg = e->cfg;
    if (m == "train")
      cfg.campaign.mode = ecc::CampaignMode::Train;
    else if (m == "infer")
      cfg.campaign.mode = ecc::CampaignMode::Infer;
    else if (m == "sweep")
      cfg.campaign.mode = ecc::CampaignMode::Sweep;
    else if (m == "ablate-lstm")
      cfg.campaign.mode = ecc::CampaignMode::AblateLstm;
    else
      return fail(ECC_ERR_ARGUMENT, "unknown campaign mode " + m);
    ecc::ProgressFn fn;
    if (progress) fn = [&](const std::string& s) { progress(s.c_str(), user); };
    const auto result = ecc::run_campaign(cfg, fn);
    if (rows) *rows = result.rows.size();
    return ECC_OK;
  });
}

ecc_status ecc_plot(const char* csv_path, const char* out_dir, size_t* files) {
  if (!csv_path || !out_dir) return fail(ECC_ERR_ARGUMENT, "null argument");
  return guard([&] {
    std::ifstream in(csv_path);
    if (!in) return fail(ECC_ERR_IO, std::string("cannot read ") + csv_path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto rows = ecc::parse_metrics_csv(ss.str());
    if (rows.empty()) return fail(ECC_ERR_ARGUMENT, "metrics CSV has no rows; nothing to plot");
    const auto written = ecc::write_plots(rows, out_dir);
    if (files) *files = written.size();
    return ECC_OK;
  });
}

ecc_status ecc_env_create(const ecc_experiment* e, uint64_t seed, ecc_env** out) {
  if (!e || !out) return fail(ECC_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] {
    const auto v = ecc::validate_config(e->cfg.system, e->cfg.topology);
    if (!v.empty()) return fail(ECC_ERR_CONFIG, v.front().field + ": " + v.front().rule);
    *out = new ecc_env{ecc::Environment(e->cfg.system, e->cfg.topology, seed)};
    return ECC_OK;
  });
}

void ecc_env_free(ecc_env* env) { delete env; }

ecc_status ecc_env_clock(const ecc_env* env, int* slot) {
  if (!env || !slot) return fail(ECC_ERR_ARGUMENT, "null argument");
  *slot = env->env.clock();
  return ECC_OK;
}

ecc_status ecc_env_finished(const ecc_env* env, int* finished) {
  if (!env || !finished) return fail(ECC_ERR_ARGUMENT, "null argument");
  *finished = env->env.finished() ? 1 : 0;
  return ECC_OK;
}

ecc_status ecc_env_arrival(const ecc_env* env, int ea, int64_t* size_bits) {
  if (!env || !size_bits) return fail(ECC_ERR_ARGUMENT, "null argument");
  const auto& arr = env->env.arrivals();
  if (ea < 1 || ea > static_cast<int>(arr.size())) return fail(ECC_ERR_ARGUMENT, "agent id out of range");
  *size_bits = arr[ea - 1].null() ? 0 : arr[ea - 1].size_bits;
  return ECC_OK;
}

ecc_status ecc_env_step(ecc_env* env, const int* actions, size_t count) {
  if (!env || (!actions && count)) return fail(ECC_ERR_ARGUMENT, "null argument");
  return guard([&] {
    const int n = env->env.config().n_agents;
    if (count != static_cast<size_t>(n)) return fail(ECC_ERR_ARGUMENT, "one action per edge agent required");
    std::vector<ecc::PlacementDecision> d(n);
    for (int i = 0; i < n; ++i) {
      if (actions[i] == -1)
        d[i] = ecc::PlacementDecision::none();
      else if (actions[i] == 0)
        d[i] = ecc::PlacementDecision::run_local();
      else if (actions[i] > 0)
        d[i] = ecc::PlacementDecision::offload_to(actions[i]);
      else
        return fail(ECC_ERR_ARGUMENT, "action code below -1");
    }
    env->env.step(d);
    return ECC_OK;
  });
}

ecc_status ecc_env_drain(ecc_env* env) {
  if (!env) return fail(ECC_ERR_ARGUMENT, "null handle");
  return guard([&] {
    env->env.drain();
    return ECC_OK;
  });
}

ecc_status ecc_env_counts(const ecc_env* env, int64_t* arrived, int64_t* processed, int64_t* dropped) {
  if (!env) return fail(ECC_ERR_ARGUMENT, "null handle");
  int64_t p = 0, d = 0;
  for (const auto& o : env->env.ledger()) (o.status == ecc::Status::Processed ? p : d)++;
  if (arrived) *arrived = env->env.arrived_count();
  if (processed) *processed = p;
  if (dropped) *dropped = d;
  return ECC_OK;
}

}  // extern "C"
