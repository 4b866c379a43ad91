#include "sgmeta/config.hpp"

#include <json.hpp>

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace sgmeta {

using Json = nlohmann::ordered_json;

void RunConfig::validate() const {
  try {
    workspace.validate();
    if (!(dynamics.dt > 0.0) || !(dynamics.u_max > 0.0)) {
      throw std::invalid_argument("dynamics: dt and u_max must be positive");
    }
    leader_cost.validate();
    if (types.empty()) throw std::invalid_argument("follower_types: registry is empty");
    for (std::size_t i = 0; i < types.size(); ++i) {
      types[i].validate();
      for (std::size_t j = 0; j < i; ++j) {
        if (types[j].id == types[i].id) throw std::invalid_argument("follower_types: duplicate id");
      }
    }
    distribution.validate();
    if (distribution.probs.size() != types.size()) {
      throw std::invalid_argument("follower_types: distribution and registry differ in size");
    }
    meta.validate();
    plan.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

const FollowerType& RunConfig::type(int id) const {
  for (const auto& t : types) {
    if (t.id == id) return t;
  }
  throw ConfigError("unknown follower type " + std::to_string(id));
}

std::uint64_t seed_for(const RunConfig& cfg, SeedStream stream) {
  return derive_seed(cfg.seed, static_cast<std::uint64_t>(stream));
}

AdaptResult adapt_for_type(const MlpParams& w, const FollowerType& type, const RunConfig& cfg) {
  return adapt(w, type, cfg.meta, cfg.workspace, cfg.dynamics,
               derive_seed(seed_for(cfg, SeedStream::Adapt), static_cast<std::uint64_t>(type.id)));
}

JointState start_state(const Vec2& follower, const RunConfig& cfg) {
  return {default_leader_start(follower, cfg.workspace, cfg.plan), follower, wrap_angle(cfg.plan.follower_heading)};
}

namespace {

Json vec(const Vec2& v) { return Json::array({v.x(), v.y()}); }

template <int N>
Json mat(const Eigen::Matrix<double, N, N>& m) {
  Json rows = Json::array();
  for (int i = 0; i < N; ++i) {
    Json row = Json::array();
    for (int j = 0; j < N; ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

std::string norm_name(NormOrder n) { return n == NormOrder::Two ? "2" : "inf"; }

void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

std::size_t count(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError(where + ": expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

Vec2 read_vec(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": expected [x, y]");
  return {number(j[0], where), number(j[1], where)};
}

template <int N>
Eigen::Matrix<double, N, N> read_mat(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != N) throw ConfigError(where + ": expected " + std::to_string(N) + " rows");
  Eigen::Matrix<double, N, N> m;
  for (int i = 0; i < N; ++i) {
    if (!j[i].is_array() || j[i].size() != N) {
      throw ConfigError(where + ": expected " + std::to_string(N) + " columns");
    }
    for (int k = 0; k < N; ++k) m(i, k) = number(j[i][k], where);
  }
  return m;
}

template <typename F>
void opt(const Json& j, const char* key, F&& read) {
  if (j.contains(key)) read(j.at(key));
}

Json workspace_json(const Workspace& ws) {
  Json obs = Json::array();
  for (const auto& o : ws.obstacles) {
    obs.push_back({{"center", vec(o.center)},
                   {"safety_dist", o.safety_dist},
                   {"scaling", vec(o.scaling)},
                   {"norm", norm_name(o.norm)}});
  }
  return {{"bounds", {{"lo", vec(ws.bounds.lo)}, {"hi", vec(ws.bounds.hi)}}},
          {"obstacles", obs},
          {"destination", vec(ws.destination)},
          {"goal_radius", ws.goal_radius}};
}

void read_workspace(const Json& j, Workspace& ws) {
  check_keys(j, "workspace", {"bounds", "obstacles", "destination", "goal_radius"});
  opt(j, "bounds", [&](const Json& b) {
    check_keys(b, "workspace.bounds", {"lo", "hi"});
    opt(b, "lo", [&](const Json& v) { ws.bounds.lo = read_vec(v, "workspace.bounds.lo"); });
    opt(b, "hi", [&](const Json& v) { ws.bounds.hi = read_vec(v, "workspace.bounds.hi"); });
  });
  opt(j, "obstacles", [&](const Json& arr) {
    if (!arr.is_array()) throw ConfigError("workspace.obstacles: expected an array");
    ws.obstacles.clear();
    for (const auto& o : arr) {
      const std::string where = "workspace.obstacles";
      check_keys(o, where, {"center", "safety_dist", "scaling", "norm"});
      Obstacle obs;
      opt(o, "center", [&](const Json& v) { obs.center = read_vec(v, where + ".center"); });
      opt(o, "safety_dist", [&](const Json& v) { obs.safety_dist = number(v, where + ".safety_dist"); });
      opt(o, "scaling", [&](const Json& v) { obs.scaling = read_vec(v, where + ".scaling"); });
      opt(o, "norm", [&](const Json& v) {
        const std::string n = v.is_string() ? v.get<std::string>() : v.dump();
        if (n == "2") {
          obs.norm = NormOrder::Two;
        } else if (n == "inf") {
          obs.norm = NormOrder::Inf;
        } else {
          throw ConfigError(where + ".norm: expected \"2\" or \"inf\"");
        }
      });
      ws.obstacles.push_back(obs);
    }
  });
  opt(j, "destination", [&](const Json& v) { ws.destination = read_vec(v, "workspace.destination"); });
  opt(j, "goal_radius", [&](const Json& v) { ws.goal_radius = number(v, "workspace.goal_radius"); });
}

Json meta_json(const MetaConfig& m) {
  return {{"alpha", m.alpha},
          {"beta", m.beta},
          {"warmup_iters", m.warmup_iters},
          {"max_iter", m.max_iter},
          {"batch_tasks", m.batch_tasks},
          {"k_total", m.k_total},
          {"kappa", m.kappa},
          {"adapt_steps", m.adapt_steps},
          {"adapt_samples", m.adapt_samples},
          {"leader_radius", m.leader_radius},
          {"baseline_pool", m.baseline_pool},
          {"baseline_per_type", m.baseline_per_type},
          {"baseline_epochs", m.baseline_epochs},
          {"baseline_iters_per_epoch", m.baseline_iters_per_epoch},
          {"baseline_lr", m.baseline_lr}};
}

void read_meta(const Json& j, MetaConfig& m) {
  check_keys(j, "meta",
             {"alpha", "beta", "warmup_iters", "max_iter", "batch_tasks", "k_total", "kappa",
              "adapt_steps", "adapt_samples", "leader_radius", "baseline_pool", "baseline_per_type",
              "baseline_epochs", "baseline_iters_per_epoch", "baseline_lr"});
  opt(j, "alpha", [&](const Json& v) { m.alpha = number(v, "meta.alpha"); });
  opt(j, "beta", [&](const Json& v) { m.beta = number(v, "meta.beta"); });
  opt(j, "warmup_iters", [&](const Json& v) { m.warmup_iters = count(v, "meta.warmup_iters"); });
  opt(j, "max_iter", [&](const Json& v) { m.max_iter = count(v, "meta.max_iter"); });
  opt(j, "batch_tasks", [&](const Json& v) { m.batch_tasks = count(v, "meta.batch_tasks"); });
  opt(j, "k_total", [&](const Json& v) { m.k_total = count(v, "meta.k_total"); });
  opt(j, "kappa", [&](const Json& v) { m.kappa = number(v, "meta.kappa"); });
  opt(j, "adapt_steps", [&](const Json& v) { m.adapt_steps = count(v, "meta.adapt_steps"); });
  opt(j, "adapt_samples", [&](const Json& v) { m.adapt_samples = count(v, "meta.adapt_samples"); });
  opt(j, "leader_radius", [&](const Json& v) { m.leader_radius = number(v, "meta.leader_radius"); });
  opt(j, "baseline_pool", [&](const Json& v) { m.baseline_pool = count(v, "meta.baseline_pool"); });
  opt(j, "baseline_per_type", [&](const Json& v) { m.baseline_per_type = count(v, "meta.baseline_per_type"); });
  opt(j, "baseline_epochs", [&](const Json& v) { m.baseline_epochs = count(v, "meta.baseline_epochs"); });
  opt(j, "baseline_iters_per_epoch",
      [&](const Json& v) { m.baseline_iters_per_epoch = count(v, "meta.baseline_iters_per_epoch"); });
  opt(j, "baseline_lr", [&](const Json& v) { m.baseline_lr = number(v, "meta.baseline_lr"); });
}

Json plan_json(const PlanConfig& p) {
  return {{"horizon_steps", p.horizon_steps},
          {"max_time_steps", p.max_time_steps},
          {"ocp_max_iterations", p.ocp_max_iterations},
          {"ocp_tolerance", p.ocp_tolerance},
          {"pmp_max_sweeps", p.pmp_max_sweeps},
          {"pmp_tolerance", p.pmp_tolerance},
          {"hamiltonian_iterations", p.hamiltonian_iterations},
          {"leader_offset", vec(p.leader_offset)},
          {"follower_heading", p.follower_heading}};
}

void read_plan(const Json& j, PlanConfig& p) {
  check_keys(j, "plan",
             {"horizon_steps", "max_time_steps", "ocp_max_iterations", "ocp_tolerance", "pmp_max_sweeps",
              "pmp_tolerance", "hamiltonian_iterations", "leader_offset", "follower_heading"});
  opt(j, "horizon_steps", [&](const Json& v) { p.horizon_steps = integer(v, "plan.horizon_steps"); });
  opt(j, "max_time_steps", [&](const Json& v) { p.max_time_steps = integer(v, "plan.max_time_steps"); });
  opt(j, "ocp_max_iterations", [&](const Json& v) { p.ocp_max_iterations = integer(v, "plan.ocp_max_iterations"); });
  opt(j, "ocp_tolerance", [&](const Json& v) { p.ocp_tolerance = number(v, "plan.ocp_tolerance"); });
  opt(j, "pmp_max_sweeps", [&](const Json& v) { p.pmp_max_sweeps = integer(v, "plan.pmp_max_sweeps"); });
  opt(j, "pmp_tolerance", [&](const Json& v) { p.pmp_tolerance = number(v, "plan.pmp_tolerance"); });
  opt(j, "hamiltonian_iterations",
      [&](const Json& v) { p.hamiltonian_iterations = integer(v, "plan.hamiltonian_iterations"); });
  opt(j, "leader_offset", [&](const Json& v) { p.leader_offset = read_vec(v, "plan.leader_offset"); });
  opt(j, "follower_heading", [&](const Json& v) { p.follower_heading = number(v, "plan.follower_heading"); });
}

Json leader_cost_json(const LeaderCostParams& c) {
  return {{"Q1", mat<5>(c.Q1)}, {"Q2", mat<2>(c.Q2)}, {"R", mat<2>(c.R)}, {"Qf1", mat<5>(c.Qf1)},
          {"Qf2", mat<2>(c.Qf2)}, {"nu", c.nu}, {"mu", c.mu}};
}

void read_leader_cost(const Json& j, LeaderCostParams& c) {
  check_keys(j, "leader_cost", {"Q1", "Q2", "R", "Qf1", "Qf2", "nu", "mu"});
  opt(j, "Q1", [&](const Json& v) { c.Q1 = read_mat<5>(v, "leader_cost.Q1"); });
  opt(j, "Q2", [&](const Json& v) { c.Q2 = read_mat<2>(v, "leader_cost.Q2"); });
  opt(j, "R", [&](const Json& v) { c.R = read_mat<2>(v, "leader_cost.R"); });
  opt(j, "Qf1", [&](const Json& v) { c.Qf1 = read_mat<5>(v, "leader_cost.Qf1"); });
  opt(j, "Qf2", [&](const Json& v) { c.Qf2 = read_mat<2>(v, "leader_cost.Qf2"); });
  opt(j, "nu", [&](const Json& v) { c.nu = number(v, "leader_cost.nu"); });
  opt(j, "mu", [&](const Json& v) { c.mu = number(v, "leader_cost.mu"); });
}

void read_types(const Json& j, RunConfig& cfg) {
  check_keys(j, "follower_types", {"types", "distribution"});
  opt(j, "types", [&](const Json& arr) {
    if (!arr.is_array()) throw ConfigError("follower_types.types: expected an array");
    cfg.types.clear();
    for (const auto& t : arr) {
      check_keys(t, "follower_types.types", {"id", "c"});
      FollowerType ft;
      if (!t.contains("id") || !t.contains("c")) throw ConfigError("follower_types.types: id and c are required");
      ft.id = integer(t.at("id"), "follower_types.types.id");
      const Json& c = t.at("c");
      if (!c.is_array() || c.size() != 4) throw ConfigError("follower_types.types.c: expected 4 numbers");
      for (std::size_t i = 0; i < 4; ++i) ft.c[i] = number(c[i], "follower_types.types.c");
      cfg.types.push_back(ft);
    }
  });
  opt(j, "distribution", [&](const Json& arr) {
    if (!arr.is_array()) throw ConfigError("follower_types.distribution: expected an array");
    cfg.distribution.probs.clear();
    for (const auto& p : arr) cfg.distribution.probs.push_back(number(p, "follower_types.distribution"));
  });
}

}  // namespace

std::string to_json(const RunConfig& cfg) {
  Json types = Json::array();
  for (const auto& t : cfg.types) types.push_back({{"id", t.id}, {"c", t.c}});
  Json j = {{"seed", cfg.seed},
            {"workspace", workspace_json(cfg.workspace)},
            {"dynamics", {{"dt", cfg.dynamics.dt}, {"u_max", cfg.dynamics.u_max}}},
            {"leader_cost", leader_cost_json(cfg.leader_cost)},
            {"follower_types", {{"types", types}, {"distribution", cfg.distribution.probs}}},
            {"meta", meta_json(cfg.meta)},
            {"plan", plan_json(cfg.plan)}};
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"seed", "workspace", "dynamics", "leader_cost", "follower_types", "meta", "plan"});
  RunConfig cfg;
  opt(j, "seed", [&](const Json& v) {
    if (!v.is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
    cfg.seed = v.get<std::uint64_t>();
  });
  opt(j, "workspace", [&](const Json& v) { read_workspace(v, cfg.workspace); });
  opt(j, "dynamics", [&](const Json& v) {
    check_keys(v, "dynamics", {"dt", "u_max"});
    opt(v, "dt", [&](const Json& x) { cfg.dynamics.dt = number(x, "dynamics.dt"); });
    opt(v, "u_max", [&](const Json& x) { cfg.dynamics.u_max = number(x, "dynamics.u_max"); });
  });
  opt(j, "leader_cost", [&](const Json& v) { read_leader_cost(v, cfg.leader_cost); });
  opt(j, "follower_types", [&](const Json& v) { read_types(v, cfg); });
  opt(j, "meta", [&](const Json& v) { read_meta(v, cfg.meta); });
  opt(j, "plan", [&](const Json& v) { read_plan(v, cfg.plan); });
  cfg.plan.dynamics = cfg.dynamics;
  cfg.validate();
  return cfg;
}

void apply_seed_override(RunConfig& cfg) {
  const char* env = std::getenv("SGMETA_SEED");
  if (env == nullptr || *env == '\0') return;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || *end != '\0' || *env == '-') {
    throw ConfigError(std::string("SGMETA_SEED is not a nonnegative integer: '") + env + "'");
  }
  cfg.seed = v;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  RunConfig cfg;
  try {
    cfg = run_config_from_json(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  apply_seed_override(cfg);
  return cfg;
}

}  // namespace sgmeta
