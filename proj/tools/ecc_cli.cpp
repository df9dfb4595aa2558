// Command-line front end. Talks to the simulator through the C API only.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ecc/ecc.h"

namespace {

int report(ecc_status s, const char* what) {
  if (s == ECC_OK) return 0;
  std::fprintf(stderr, "error: %s: %s\n", what, ecc_last_error());
  return 1;
}

void progress(const char* msg, void*) { std::fprintf(stderr, "%s\n", msg); }

struct Options {
  std::string config;
  bool seed_given = false;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<std::string> policies;
  bool paper_scale = false;
  std::string csv;
};

int load(const Options& o, ecc_experiment** e) {
  if (int rc = report(ecc_experiment_load(o.config.empty() ? nullptr : o.config.c_str(), o.paper_scale, e),
                      "loading config"))
    return rc;
  if (o.seed_given && report(ecc_experiment_set_seed(*e, o.seed), "seed")) return 1;
  if (!o.out.empty() && report(ecc_experiment_set_output(*e, o.out.c_str()), "output")) return 1;
  if (!o.policies.empty()) {
    std::string joined;
    for (const auto& p : o.policies) joined += (joined.empty() ? "" : ",") + p;
    if (report(ecc_experiment_set_policies(*e, joined.c_str()), "policies")) return 1;
  }
  return 0;
}

int validate(const Options& o) {
  ecc_experiment* e = nullptr;
  if (int rc = load(o, &e)) return rc;
  size_t n = 0;
  int rc = report(ecc_experiment_validate(e, &n), "validate");
  if (!rc) {
    for (size_t i = 0; i < n; ++i) {
      char buf[512];
      ecc_experiment_violation(e, i, buf, sizeof buf);
      std::fprintf(stderr, "violation: %s\n", buf);
    }
    if (n == 0) std::printf("configuration is valid\n");
    rc = n == 0 ? 0 : 2;
  }
  ecc_experiment_free(e);
  return rc;
}

int run(const Options& o, const char* mode) {
  ecc_experiment* e = nullptr;
  if (int rc = load(o, &e)) return rc;
  size_t rows = 0;
  const int rc = report(ecc_experiment_run(e, mode, progress, nullptr, &rows), mode);
  if (!rc) std::printf("%s finished, %zu metrics rows\n", mode, rows);
  ecc_experiment_free(e);
  return rc;
}

int plot(const Options& o) {
  const std::string out = o.out.empty() ? "out" : o.out;
  const std::string csv = o.csv.empty() ? out + "/metrics.csv" : o.csv;
  size_t files = 0;
  const int rc = report(ecc_plot(csv.c_str(), out.c_str(), &files), "plot");
  if (!rc) std::printf("wrote %zu charts to %s\n", files, out.c_str());
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge-cloud continuum offloading simulator"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file");
    sub->add_option("--seed", o.seed, "Run with this single seed")->each([&](const std::string&) {
      o.seed_given = true;
    });
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--policy", o.policies, "Policy name (repeatable)");
    sub->add_flag("--paper-scale", o.paper_scale, "Start from the full-size preset");
  };

  auto* v = app.add_subcommand("validate", "Check a configuration");
  auto* tr = app.add_subcommand("train", "Train learning agents and write curves and checkpoints");
  auto* in = app.add_subcommand("infer", "Evaluate policies at the base configuration");
  auto* sw = app.add_subcommand("sweep", "Evaluate policies across the sweep axis");
  auto* ab = app.add_subcommand("ablate-lstm", "Compare the forecaster variants");
  auto* pl = app.add_subcommand("plot", "Render SVG charts from a metrics CSV");
  for (auto* s : {v, tr, in, sw, ab, pl}) common(s);
  pl->add_option("csv", o.csv, "Metrics CSV (default <out>/metrics.csv)");

  CLI11_PARSE(app, argc, argv);

  if (v->parsed()) return validate(o);
  if (tr->parsed()) return run(o, "train");
  if (in->parsed()) return run(o, "infer");
  if (sw->parsed()) return run(o, "sweep");
  if (ab->parsed()) return run(o, "ablate-lstm");
  if (pl->parsed()) return plot(o);
  return 1;
}
