#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ecc/harness.hpp"
#include "ecc/units.hpp"
#include "support/helpers.hpp"

using namespace ecc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ecc_harness_" + name);
  fs::remove_all(p);
  return p;
}

int count_of(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

// Small and quick: few episodes, narrow nets.
ExperimentConfig tiny_experiment(const std::string& out) {
  auto e = default_experiment(false);
  e.system.horizon = 20;
  e.system.drain_slots = 4;
  e.agent.hidden = {8};
  e.agent.episodes = 3;
  e.agent.batch = 8;
  e.forecaster.window = 3;
  e.forecaster.hidden = 4;
  e.forecaster.warmup_episodes = 2;
  e.forecaster.epochs = 1;
  e.campaign.repetitions = 2;
  e.campaign.seeds = {1, 2};
  e.campaign.out_dir = out;
  return e;
}

}  // namespace

TEST_CASE("config JSON round trip and strictness") {
  auto base = default_experiment(false);
  base.system.arrival_prob = 0.35;
  base.agent.hidden = {7, 5};
  base.campaign.seeds = {9, 3};
  const auto text = experiment_to_json(base);
  const auto back = experiment_from_json(text, default_experiment(false));
  CHECK(experiment_to_json(back) == text);
  CHECK(back.system.arrival_prob == 0.35);
  CHECK(back.agent.hidden == std::vector<int>{7, 5});

  // missing fields keep the base values
  const auto partial = experiment_from_json(R"({"timeout": 7, "agent": {"lr": 0.01}})", base);
  CHECK(partial.system.timeout == 7);
  CHECK(partial.agent.lr == 0.01);
  CHECK(partial.agent.hidden == base.agent.hidden);

  CHECK_THROWS_AS(experiment_from_json(R"({"timeuot": 7})", base), HarnessError);
  CHECK_THROWS_AS(experiment_from_json(R"({"agent": {"hiden": [4]}})", base), HarnessError);
  CHECK_THROWS_AS(experiment_from_json(R"({"powers": {"p_x": 1}})", base), HarnessError);
  CHECK_THROWS_AS(experiment_from_json(R"({"timeout": "seven"})", base), HarnessError);
  CHECK_THROWS_AS(experiment_from_json("[1, 2]", base), HarnessError);
  CHECK_THROWS_AS(experiment_from_json("{", base), HarnessError);
  CHECK_THROWS_AS(experiment_from_json(R"({"campaign": {"mode": "fly"}})", base), HarnessError);
  CHECK_THROWS_AS(experiment_from_json(R"({"forecaster": {"mode": "magic"}})", base), HarnessError);
  CHECK_THROWS_AS(load_experiment("/nonexistent/config.json", false), HarnessError);

  const auto ring = experiment_from_json(R"({"topology": "ring", "ring_degree": 1})", base);
  CHECK(ring.topology.matrix() == Topology::ring(4, 1).matrix());
  const auto g = experiment_from_json(R"({"n_agents": 2, "g": [[0, 0], [0, 0]]})", base);
  CHECK(g.topology_kind == "explicit");
  CHECK(g.topology.neighbours(1).empty());

  const auto paper = default_experiment(true);
  CHECK(validate_experiment(paper).empty());
  CHECK(paper.agent.hidden == std::vector<int>{1024, 1024, 1024});
}

TEST_CASE("campaign validation") {
  auto e = default_experiment(false);
  CHECK(validate_experiment(e).empty());
  auto has = [](const std::vector<Violation>& v, const std::string& field) {
    for (const auto& x : v)
      if (x.field == field) return true;
    return false;
  };
  auto bad = e;
  bad.campaign.sweep_values = {0.5, 0.1};
  CHECK(has(validate_experiment(bad), "campaign.sweep_values"));
  bad = e;
  bad.campaign.sweep_values = {0.1, NAN};
  CHECK(has(validate_experiment(bad), "campaign.sweep_values"));
  bad = e;
  bad.campaign.seeds = {1, 1};
  CHECK(has(validate_experiment(bad), "campaign.seeds"));
  bad = e;
  bad.campaign.policies = {"LOP", "FASTEST"};
  CHECK(has(validate_experiment(bad), "campaign.policies"));
  bad = e;
  bad.campaign.sweep_axis = "colour";
  CHECK(has(validate_experiment(bad), "campaign.sweep_axis"));
  bad = e;
  bad.system.arrival_prob = 1.5;
  CHECK(has(validate_experiment(bad), "arrival_prob"));
  CHECK_THROWS_AS(run_campaign(bad), ConfigError);
}

TEST_CASE("sweep points") {
  const auto e = default_experiment(false);
  const auto six = with_sweep_point(e, "n_agents", 6);
  CHECK(six.system.n_agents == 6);
  CHECK(six.topology.matrix() == Topology::full(6).matrix());
  const auto w = with_sweep_point(e, "weights", 0.25);
  CHECK(w.system.weights.w_d == 0.25);
  CHECK(w.system.weights.w_e == 0.75);
  CHECK(with_sweep_point(e, "cpu", 8).system.cpu_public_edge == 8);
  CHECK_THROWS_AS(with_sweep_point(e, "timeout", 2.5), HarnessError);
  CHECK_THROWS_AS(with_sweep_point(e, "colour", 1), HarnessError);
  CHECK(axis_needs_retraining("weights"));
  CHECK_FALSE(axis_needs_retraining("arrival_prob"));
}

TEST_CASE("metrics CSV") {
  MetricsRow a;
  a.policy = "LOP";
  a.sweep_axis = "arrival_prob";
  a.sweep_value = 0.5;
  a.seed = 18446744073709551615ULL;
  a.mean_delay_s = 0.123456;
  a.drop_rate_pct = 12.5;
  a.total_energy_j = 3.25;
  a.frac_local = 1.0;
  MetricsRow b = a;
  b.policy = "COO";
  b.frac_local = 0.0;
  b.frac_vertical = 1.0;
  const auto text = metrics_csv({a, b});
  CHECK(text.substr(0, text.find('\n')) ==
        "policy,sweep_axis,sweep_value,seed,mean_delay_s,drop_rate_pct,total_energy_j,frac_local,frac_horizontal,"
        "frac_vertical");
  const auto rows = parse_metrics_csv(text);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].seed == a.seed);
  CHECK(rows[0].mean_delay_s == 0.123456);
  CHECK(rows[1].frac_vertical == 1.0);
  CHECK(metrics_csv(rows) == text);

  CHECK_THROWS_AS(parse_metrics_csv("policy,x\n"), HarnessError);
  CHECK_THROWS_AS(parse_metrics_csv(std::string(kMetricsHeader) + "\nLOP,1,2\n"), HarnessError);
  CHECK_THROWS_AS(parse_metrics_csv(std::string(kMetricsHeader) + "\nLOP,p,x,1,1,1,1,1,0,0\n"), HarnessError);
}

TEST_CASE("local-only single queue matches a hand-stepped FIFO") {
  auto cfg = desk_config();
  cfg.n_agents = 1;
  cfg.arrival_prob = 1.0;
  cfg.timeout = 1000;
  const Topology topo = Topology::full(1);
  auto lop = make_baseline(PolicyKind::LOP, cfg, topo);
  const auto trace = run_episode(cfg, topo, *lop, 42);

  // one arrival per slot for horizon - drain slots; serve in order
  const std::int64_t per_slot = 1683501;  // 5 GHz * 0.1 s / 297 cycles per bit
  REQUIRE(units::bits_per_slot(5e9, 0.1, 297.0, 1) == per_slot);
  auto outcomes = trace.outcomes;
  std::sort(outcomes.begin(), outcomes.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
  REQUIRE(outcomes.size() == static_cast<std::size_t>(cfg.horizon - cfg.drain_slots));
  int prev_finish = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const int arrival = static_cast<int>(i) + 1;
    const auto& o = outcomes[i];
    CHECK(o.arrival_slot == arrival);
    const int exec = static_cast<int>((o.size_bits + per_slot - 1) / per_slot);
    const int start = std::max(arrival, prev_finish + 1);
    const int finish = start + exec - 1;
    CHECK(o.status == Status::Processed);
    CHECK(o.total_delay == finish - arrival + 1);
    sum += (finish - arrival + 1) * 0.1;
    prev_finish = finish;
  }
  const auto row = aggregate({trace}, cfg);
  CHECK(row.drop_rate_pct == 0.0);
  CHECK(row.mean_delay_s == doctest::Approx(sum / outcomes.size()).epsilon(1e-12));
  CHECK(row.frac_local == 1.0);
  CHECK(row.frac_horizontal + row.frac_vertical == 0.0);
}

TEST_CASE("cloud-only costs exactly the uplink slots more on an idle system") {
  auto cfg = desk_config();
  cfg.n_agents = 1;
  cfg.arrival_prob = 1.0;
  cfg.horizon = 2;
  cfg.drain_slots = 1;
  for (double mbit : {0.1, 0.5, 0.9}) {
    cfg.size_set = {mbit};
    const Topology topo = Topology::full(1);
    auto lop = make_baseline(PolicyKind::LOP, cfg, topo);
    auto coo = make_baseline(PolicyKind::COO, cfg, topo);
    const auto l = run_episode(cfg, topo, *lop, 1);
    const auto c = run_episode(cfg, topo, *coo, 1);
    REQUIRE(l.outcomes.size() == 1);
    REQUIRE(c.outcomes.size() == 1);
    // both hosts finish a sub-megabit job in one slot; the 10 Mbps uplink
    // moves 1 Mbit a slot
    const int uplink = static_cast<int>(std::ceil(mbit * 1e6 / 1e6));
    CHECK(l.outcomes[0].total_delay == 1);
    CHECK(c.outcomes[0].total_delay == 1 + uplink);
    CHECK(c.outcomes[0].stages.transfer == uplink);
  }
}

TEST_CASE("aggregation equals recomputation from traces") {
  auto cfg = desk_config();
  cfg.arrival_prob = 0.8;
  cfg.timeout = 6;
  const auto topo = Topology::ring(4, 1);
  auto rp = make_baseline(PolicyKind::RP, cfg, topo);
  std::vector<EpisodeTrace> eps;
  for (std::uint64_t s = 1; s <= 6; ++s) eps.push_back(run_episode(cfg, topo, *rp, s));
  const auto row = aggregate(eps, cfg);

  double delay = 0, energy = 0, cost = 0;
  long done = 0, dropped = 0, all = 0, decided = 0, local = 0;
  for (const auto& ep : eps) {
    decided += ep.decided_local + ep.decided_horizontal + ep.decided_vertical;
    local += ep.decided_local;
    for (const auto& o : ep.outcomes) {
      ++all;
      energy += o.total_energy;
      if (o.status == Status::Dropped) {
        ++dropped;
        cost += cfg.drop_penalty;
      } else {
        ++done;
        delay += 0.1 * o.total_delay;
        cost += 0.5 * o.total_delay + 0.5 * o.total_energy;
      }
    }
  }
  CHECK(dropped > 0);
  CHECK(decided == all);
  CHECK(row.mean_delay_s == doctest::Approx(delay / done));
  CHECK(row.drop_rate_pct == doctest::Approx(100.0 * dropped / all));
  CHECK(row.total_energy_j == doctest::Approx(energy / eps.size()));
  CHECK(row.mean_cost == doctest::Approx(cost / all));
  CHECK(row.frac_local == doctest::Approx(static_cast<double>(local) / decided));
  CHECK(row.frac_local + row.frac_horizontal + row.frac_vertical == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(row.drop_rate_pct >= 0.0);
  CHECK(row.drop_rate_pct <= 100.0);
}

TEST_CASE("campaigns are reproducible") {
  const auto out1 = scratch("rep1"), out2 = scratch("rep2");
  auto e = tiny_experiment(out1.string());
  e.campaign.mode = CampaignMode::Sweep;
  e.campaign.policies = {"RP", "LOP", "MLEO", "DECOFFEE"};
  e.campaign.sweep_values = {0.2, 0.8};
  const auto r1 = run_campaign(e);
  e.campaign.out_dir = out2.string();
  const auto r2 = run_campaign(e);
  const auto csv1 = slurp((out1 / "metrics.csv").string());
  CHECK(csv1 == slurp((out2 / "metrics.csv").string()));
  CHECK(r1.rows.size() == 4 * 2 * 2);
  CHECK(parse_metrics_csv(csv1).size() == r1.rows.size());
  const auto summary = slurp((out1 / "summary.txt").string());
  CHECK(summary.find("+-") != std::string::npos);
  CHECK(summary.find("DECOFFEE") != std::string::npos);
  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("train campaign writes curves and checkpoints") {
  const auto out = scratch("train");
  auto e = tiny_experiment(out.string());
  e.campaign.mode = CampaignMode::Train;
  e.campaign.policies = {"DECOFFEE-NOLSTM"};
  e.campaign.seeds = {4};
  const auto r = run_campaign(e);
  const auto curve = slurp((out / "curve_DECOFFEE-NOLSTM_seed4.csv").string());
  CHECK(curve.rfind("episode,mean_cost,epsilon,buffer_fill\n", 0) == 0);
  CHECK(count_of(curve, "\n") == 1 + e.agent.episodes);
  for (int ea = 1; ea <= 4; ++ea) {
    const auto p = out / "DECOFFEE-NOLSTM_seed4" / ("agent_" + std::to_string(ea) + ".json");
    REQUIRE(fs::exists(p));
    CHECK_NOTHROW(load_policy(p.string(), ea, 4, e.agent.hidden));
  }
  CHECK(fs::exists(out / "training_summary.csv"));
  fs::remove_all(out);
}

TEST_CASE("unwritable output") {
  auto e = tiny_experiment("/proc/ecc_cannot_write_here");
  e.campaign.policies = {"LOP"};
  CHECK_THROWS_AS(run_campaign(e), HarnessError);
}

TEST_CASE("charts") {
  std::vector<MetricsRow> rows;
  for (const std::string p : {"LOP", "COO"})
    for (double x : {0.1, 0.5, 0.9})
      for (std::uint64_t seed : {1, 2}) {
        MetricsRow r;
        r.policy = p;
        r.sweep_axis = "arrival_prob";
        r.sweep_value = x;
        r.seed = seed;
        r.mean_delay_s = x + seed;
        r.drop_rate_pct = 10 * x;
        r.total_energy_j = p == "LOP" ? 1.0 : 2.0;
        r.frac_local = p == "LOP" ? 1.0 : 0.0;
        r.frac_vertical = 1.0 - r.frac_local;
        rows.push_back(r);
      }
  const auto svg = svg_line_chart(rows, "mean_delay_s");
  CHECK(count_of(svg, "<polyline") == 2);
  CHECK(count_of(svg, "<circle") == 6);
  CHECK(svg.find("(s)") != std::string::npos);
  CHECK(svg_line_chart(rows, "drop_rate_pct").find("(%)") != std::string::npos);
  CHECK(svg_line_chart(rows, "total_energy_j").find("(J)") != std::string::npos);
  CHECK(svg.find("Arrival probability") != std::string::npos);
  CHECK_THROWS_AS(svg_line_chart(rows, "mood"), HarnessError);

  const auto out = scratch("plots");
  const auto files = write_plots(rows, out.string());
  CHECK(files.size() == 6);
  for (const auto& f : files) CHECK(fs::exists(f));

  const auto empty_out = scratch("plots_empty");
  CHECK_THROWS_AS(write_plots({}, empty_out.string()), HarnessError);
  CHECK_FALSE(fs::exists(empty_out));
  fs::remove_all(out);
}
