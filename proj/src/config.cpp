#include "ecc/config.hpp"

#include <cmath>
#include <sstream>

namespace ecc {

Topology Topology::full(int n) {
  std::vector<std::vector<int>> g(n, std::vector<int>(n, 1));
  for (int i = 0; i < n; ++i) g[i][i] = 0;
  return Topology(std::move(g));
}

Topology Topology::ring(int n, int k) {
  std::vector<std::vector<int>> g(n, std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i) {
    for (int d = 1; d <= k; ++d) {
      const int j = (i + d) % n;
      if (j == i) continue;
      g[i][j] = 1;
      g[j][i] = 1;
    }
  }
  return Topology(std::move(g));
}

bool Topology::connected(int a, int b) const {
  if (a < 1 || b < 1 || a > size() || b > size()) return false;
  return g_[a - 1][b - 1] == 1;
}

std::vector<int> Topology::neighbours(int ea) const {
  std::vector<int> out;
  for (int k = 1; k <= size(); ++k)
    if (k != ea && connected(ea, k)) out.push_back(k);
  return out;
}

std::vector<double> default_size_set() {
  // 2.0, 2.1, ..., 5.0 Mbit
  std::vector<double> s;
  for (int i = 20; i <= 50; ++i) s.push_back(i / 10.0);
  return s;
}

SystemConfig desk_config() {
  SystemConfig cfg;
  cfg.size_set = default_size_set();
  return cfg;
}

SystemConfig paper_scale_config() {
  SystemConfig cfg = desk_config();
  cfg.n_agents = 20;
  cfg.horizon = 110;
  cfg.drain_slots = 10;
  return cfg;
}

namespace {

void require(std::vector<Violation>& out, bool ok, const char* field, std::string rule) {
  if (!ok) out.push_back({field, std::move(rule)});
}

}  // namespace

std::vector<Violation> validate_config(const SystemConfig& c, const Topology& topo) {
  std::vector<Violation> v;
  require(v, c.n_agents >= 1, "n_agents", "at least one edge agent required");
  require(v, c.slot_duration > 0, "slot_duration", "must be > 0");
  require(v, c.horizon >= 1, "horizon", "must be >= 1");
  require(v, c.drain_slots >= 0 && c.drain_slots < c.horizon, "drain_slots",
          "0 <= drain_slots < horizon required");
  require(v, c.arrival_prob >= 0 && c.arrival_prob <= 1, "arrival_prob", "0 <= P <= 1 required");
  require(v, !c.size_set.empty(), "size_set", "must not be empty");
  for (double s : c.size_set) {
    if (!(s > 0)) {
      v.push_back({"size_set", "sizes must be > 0"});
      break;
    }
  }
  require(v, c.density > 0, "density", "must be > 0");
  require(v, c.timeout >= 1, "timeout", "must be >= 1");
  require(v, c.rate_horizontal > 0, "rate_horizontal", "must be > 0");
  require(v, c.rate_vertical > 0, "rate_vertical", "must be > 0");
  require(v, c.rate_horizontal > c.rate_vertical, "rate_horizontal", "R^H > R^V required");
  require(v, c.cpu_private > 0, "cpu_private", "must be > 0");
  require(v, c.cpu_public_edge > 0, "cpu_public_edge", "must be > 0");
  require(v, c.cpu_public_cloud > 0, "cpu_public_cloud", "must be > 0");
  require(v, c.cpu_public_cloud > c.cpu_public_edge, "cpu_public_cloud",
          "f_cloud > f_edge required");
  const auto& p = c.powers;
  require(v, p.p_priv > 0, "powers.p_priv", "must be > 0");
  require(v, p.p_off > 0, "powers.p_off", "must be > 0");
  require(v, p.p_pub > 0, "powers.p_pub", "must be > 0");
  require(v, p.p_tran > 0, "powers.p_tran", "must be > 0");
  require(v, p.p_exec_edge > 0, "powers.p_exec_edge", "must be > 0");
  require(v, p.p_exec_cloud > 0, "powers.p_exec_cloud", "must be > 0");
  require(v, c.weights.w_d >= 0, "weights.w_d", "must be >= 0");
  require(v, c.weights.w_e >= 0, "weights.w_e", "must be >= 0");
  require(v, c.drop_penalty > 0, "drop_penalty", "C > 0 required");

  const auto& g = topo.matrix();
  const int n = c.n_agents;
  bool shape_ok = static_cast<int>(g.size()) == n;
  for (const auto& row : g) shape_ok = shape_ok && static_cast<int>(row.size()) == n;
  require(v, shape_ok, "g", "G must be N x N");
  if (shape_ok) {
    bool binary = true, symmetric = true, zero_diag = true;
    for (int i = 0; i < n; ++i) {
      zero_diag = zero_diag && g[i][i] == 0;
      for (int j = 0; j < n; ++j) {
        binary = binary && (g[i][j] == 0 || g[i][j] == 1);
        symmetric = symmetric && g[i][j] == g[j][i];
      }
    }
    require(v, binary, "g", "G entries must be 0 or 1");
    require(v, symmetric, "g", "G symmetric");
    require(v, zero_diag, "g", "G zero diagonal");
  }
  return v;
}

std::string decision_error(const PlacementDecision& d, int source, const SystemConfig& cfg,
                           const Topology& topo) {
  if (d.local && d.offload) return "local and offload flags both set";
  if (d.local && d.destination != 0) return "local decision carries a destination";
  if (!d.local && !d.offload) return d.destination == 0 ? "" : "destination without offload flag";
  if (d.offload) {
    if (d.destination < 1 || d.destination > cfg.cloud()) return "destination out of range";
    if (d.destination == source) return "cannot offload to the source itself";
    if (d.destination != cfg.cloud() && !topo.connected(source, d.destination)) {
      std::ostringstream os;
      os << "no link between EA " << source << " and EA " << d.destination;
      return os.str();
    }
  }
  return "";
}

const char* to_string(Status s) { return s == Status::Processed ? "processed" : "dropped"; }

const char* to_string(PathKind p) {
  switch (p) {
    case PathKind::Local: return "local";
    case PathKind::Horizontal: return "horizontal";
    case PathKind::Vertical: return "vertical";
  }
  return "?";
}

}  // namespace ecc
