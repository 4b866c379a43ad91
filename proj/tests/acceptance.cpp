// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   sgmeta_acceptance [--work-dir DIR] [--only N[,N...]]
//
// Criteria 3-8 share one desk-scale pipeline (meta training, baselines,
// adaptation comparison, guided and unguided runs) that is executed twice for
// the determinism check. Artifacts of the first pass land in the work dir.

#include "sgmeta/config.hpp"
#include "sgmeta/io.hpp"
#include "sgmeta/svg.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace sgmeta;

namespace {

int g_failures = 0;

void verdict(int n, const std::string& name, bool pass, const std::string& detail) {
  std::printf("criterion %d %s: %s  %s\n", n, name.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void note(const std::string& msg) {
  std::printf("  %s\n", msg.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- criterion 1

void gradient_check() {
  const Workspace ws = Workspace::default_layout();
  double worst_loss = 0.0;
  double worst_input = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(1000, seed));
    const MlpParams w = MlpParams::initialize(rng);
    const Dataset data = oracle::random_dataset(10, rng);
    worst_loss = std::max(worst_loss, oracle::loss_grad_error(w, data));
    const JointState x = oracle::random_state(ws, rng);
    const LeaderControl uL = oracle::random_leader_control(rng);
    worst_input = std::max(worst_input, oracle::input_grad_error(w, x, uL));
  }
  const bool pass = worst_loss < 1e-6 && worst_input < 1e-6;
  verdict(1, "gradient correctness", pass,
          "worst rel. error loss_grad " + fmt("%.2e", worst_loss) + ", input_grad " + fmt("%.2e", worst_input) +
              " over 20 seeds");
}

// ---------------------------------------------------------------- criterion 2

void best_response_check() {
  const Workspace ws = Workspace::default_layout();
  const DynamicsParams dyn;
  // The grid minimum is an upper bound on the true minimum, so the solver may
  // land below it; it must never land more than 1e-3 above it.
  double worst_above = 0.0;
  double worst_below = 0.0;
  int queries = 0;
  for (const auto& type : default_follower_types()) {
    Rng rng(derive_seed(2000, static_cast<std::uint64_t>(type.id)));
    for (int i = 0; i < 100; ++i) {
      const JointState x = oracle::random_state(ws, rng);
      const LeaderControl uL = oracle::random_leader_control(rng, dyn.u_max);
      const FollowerControl br = best_response(x, uL, type, ws, dyn.dt);
      const double cost = follower_cost(br, x, uL, type, ws, dyn.dt);
      const double grid = oracle::grid_search(x, uL, type, ws, dyn.dt, 201).cost;
      worst_above = std::max(worst_above, cost - grid);
      worst_below = std::max(worst_below, grid - cost);
      ++queries;
    }
  }
  verdict(2, "best-response oracle", worst_above <= 1e-3,
          "solver above the 201x201 grid minimum by at most " + fmt("%.2e", worst_above) + ", below it by up to " +
              fmt("%.2e", worst_below) + " over " + std::to_string(queries) + " queries");
}

// ------------------------------------------------------------ shared pipeline

const std::vector<Vec2> kGuidedStarts = {Vec2(0.0, 8.0), Vec2(6.0, 0.0)};
const std::vector<Vec2> kUnguidedStarts = {Vec2(0.0, 8.0), Vec2(0.0, 4.0), Vec2(6.0, 0.0)};

struct Pipeline {
  MlpParams meta;
  MlpParams output_ave;
  ParamAveResult param_ave;
  TrainingTrace meta_trace;
  std::vector<TypeComparison> comparison;
  std::vector<std::pair<std::string, Trajectory>> guided;    // label, run
  std::vector<std::pair<std::string, Trajectory>> unguided;
};

std::string start_label(const Vec2& p) {
  std::ostringstream ss;
  ss << p.x() << '_' << p.y();
  return ss.str();
}

Pipeline run_pipeline(const RunConfig& cfg, bool learning, bool planning) {
  Pipeline out;
  if (learning || planning) {
    auto t0 = std::chrono::steady_clock::now();
    Rng rng(seed_for(cfg, SeedStream::Meta));
    out.meta = train_meta(cfg.meta, cfg.distribution, cfg.types, cfg.workspace, cfg.dynamics, rng, &out.meta_trace);
    note("meta training: " + fmt("%.0f s", seconds_since(t0)));
  }
  if (learning) {
    auto t0 = std::chrono::steady_clock::now();
    Rng oa(seed_for(cfg, SeedStream::OutputAve));
    out.output_ave = train_output_ave(cfg.distribution, cfg.types, cfg.workspace, cfg.dynamics, cfg.meta, oa);
    Rng pa(seed_for(cfg, SeedStream::ParamAve));
    out.param_ave = train_param_ave(cfg.distribution, cfg.types, cfg.workspace, cfg.dynamics, cfg.meta, pa);
    note("baselines: " + fmt("%.0f s", seconds_since(t0)));
    t0 = std::chrono::steady_clock::now();
    const std::vector<MlpParams> models = {out.meta, out.output_ave, out.param_ave.average};
    out.comparison = compare_adaptation(models, cfg.types, cfg.meta, cfg.workspace, cfg.dynamics,
                                        seed_for(cfg, SeedStream::Adapt));
    note("adaptation comparison: " + fmt("%.0f s", seconds_since(t0)));
  }
  if (planning) {
    for (const auto& type : cfg.types) {
      const MlpParams adapted = adapt_for_type(out.meta, type, cfg).params;
      for (const Vec2& s : kGuidedStarts) {
        const auto t0 = std::chrono::steady_clock::now();
        Trajectory traj = guide(type, start_state(s, cfg), adapted, cfg.plan, cfg.leader_cost, cfg.workspace);
        const Vec2 pF = traj.states.back().follower_pos;
        note("guide type " + std::to_string(type.id) + " from (" + start_label(s) + "): " + to_string(traj.reason) +
             " after " + std::to_string(traj.steps()) + " steps, final distance " +
             fmt("%.3f", (pF - cfg.workspace.destination).norm()) + ", " + fmt("%.0f s", seconds_since(t0)));
        out.guided.emplace_back("type" + std::to_string(type.id) + "_from_" + start_label(s), std::move(traj));
      }
    }
  }
  for (const int id : {3, 5}) {
    const FollowerType& type = cfg.type(id);
    for (const Vec2& s : kUnguidedStarts) {
      Trajectory traj = run_unguided(type, {s, wrap_angle(cfg.plan.follower_heading)}, cfg.plan, cfg.workspace);
      out.unguided.emplace_back("type" + std::to_string(id) + "_from_" + start_label(s), std::move(traj));
    }
  }
  return out;
}

// Every output of the pipeline as text, for bitwise comparison.
std::vector<std::pair<std::string, std::string>> serialize(const Pipeline& p, bool learning, bool planning) {
  std::vector<std::pair<std::string, std::string>> out;
  auto ckpt = [&](const std::string& name, const MlpParams& w) {
    std::ostringstream ss;
    write_checkpoint(ss, w, {});
    out.emplace_back(name, ss.str());
  };
  if (learning || planning) ckpt("meta", p.meta);
  if (learning) {
    ckpt("output_ave", p.output_ave);
    ckpt("param_ave", p.param_ave.average);
    std::ostringstream cmp;
    for (const auto& tc : p.comparison) {
      for (const auto& m : tc.models) {
        cmp << tc.type_id << ' ' << format_double(m.heldout_mse);
        for (const double v : m.curve) cmp << ' ' << format_double(v);
        cmp << '\n';
      }
    }
    out.emplace_back("comparison", cmp.str());
  }
  for (const auto* runs : {&p.guided, &p.unguided}) {
    for (const auto& [name, traj] : *runs) {
      std::ostringstream ss;
      write_trajectory_csv(ss, traj);
      write_diagnostics_json(ss, traj.diagnostics);
      out.emplace_back(name, ss.str());
    }
  }
  return out;
}

void write_artifacts(const fs::path& dir, const RunConfig& cfg, const Pipeline& p, bool learning) {
  fs::create_directories(dir);
  auto save = [&](const std::string& name, const MlpParams& w, const std::string& kind) {
    std::ofstream out(dir / name);
    write_checkpoint(out, w, {cfg.seed, kind, 0});
  };
  if (!p.meta_trace.loss.empty()) {
    save("meta.json", p.meta, "meta");
    std::ofstream out(dir / "meta.loss.csv");
    write_loss_trace_csv(out, p.meta_trace);
  }
  if (learning) {
    save("output_ave.json", p.output_ave, "output-ave");
    save("param_ave.json", p.param_ave.average, "param-ave");
    std::ofstream out(dir / "adaptation.csv");
    out << "type,model,heldout_mse,curve_first,curve_last\n";
    const char* names[] = {"meta", "output-ave", "param-ave"};
    for (const auto& tc : p.comparison) {
      for (std::size_t m = 0; m < tc.models.size(); ++m) {
        out << tc.type_id << ',' << names[m] << ',' << format_double(tc.models[m].heldout_mse) << ','
            << format_double(tc.models[m].curve.front()) << ',' << format_double(tc.models[m].curve.back()) << '\n';
      }
    }
  }
  for (const auto* runs : {&p.guided, &p.unguided}) {
    const bool guided = runs == &p.guided;
    for (const auto& [name, traj] : *runs) {
      const std::string stem = (guided ? "guided_" : "unguided_") + name;
      std::ofstream csv(dir / (stem + ".csv"));
      write_trajectory_csv(csv, traj);
      SvgOptions opts;
      opts.title = stem;
      if (!guided) opts.sensing_type = cfg.type(name[4] - '0');
      std::ofstream svg(dir / (stem + ".svg"));
      svg << render_svg(cfg.workspace, {traj}, opts);
    }
  }
}

// ------------------------------------------------------------ criteria 3-7

void adaptation_ordering(const Pipeline& p) {
  int meta_le_oa = 0;
  int meta_lt_pa = 0;
  double ratio_sum = 0.0;
  for (const auto& tc : p.comparison) {
    const double meta = tc.models[0].heldout_mse;
    const double oa = tc.models[1].heldout_mse;
    const double pa = tc.models[2].heldout_mse;
    meta_le_oa += meta <= oa;
    meta_lt_pa += meta < pa;
    ratio_sum += pa / meta;
    note("type " + std::to_string(tc.type_id) + ": meta " + fmt("%.5f", meta) + ", output-ave " + fmt("%.5f", oa) +
         ", param-ave " + fmt("%.5f", pa));
  }
  const double mean_ratio = ratio_sum / static_cast<double>(p.comparison.size());
  const bool pass = meta_le_oa >= 4 && meta_lt_pa == 5 && mean_ratio >= 2.0;
  verdict(3, "adaptation ordering", pass,
          "meta <= output-ave on " + std::to_string(meta_le_oa) + "/5, meta < param-ave on " +
              std::to_string(meta_lt_pa) + "/5, mean param-ave/meta " + fmt("%.2f", mean_ratio));
}

void fast_adaptation(const Pipeline& p) {
  for (const auto& tc : p.comparison) {
    if (tc.type_id != 2) continue;
    const auto& meta = tc.models[0].curve;
    const auto& oa = tc.models[1].curve;
    const double dm = meta.at(0) - meta.at(10);
    const double doa = oa.at(0) - oa.at(10);
    verdict(4, "fast-adaptation shape", dm > doa,
            "type 2 loss drop over 10 steps: meta " + fmt("%.3e", dm) + ", output-ave " + fmt("%.3e", doa));
    return;
  }
  verdict(4, "fast-adaptation shape", false, "type 2 missing from the comparison");
}

void guidance_success(const Pipeline& p, const RunConfig& cfg) {
  int reached = 0;
  std::size_t violations = 0;
  std::string failed;
  for (const auto& [name, traj] : p.guided) {
    const double dist = (traj.states.back().follower_pos - cfg.workspace.destination).norm();
    const bool ok = dist <= cfg.workspace.goal_radius && traj.steps() <= static_cast<std::size_t>(cfg.plan.max_time_steps);
    const std::size_t v = safety_violations(traj, cfg.workspace);
    violations += v;
    if (ok && v == 0) {
      ++reached;
    } else {
      failed += (failed.empty() ? "" : ", ") + name;
    }
  }
  verdict(5, "guidance success", reached == static_cast<int>(p.guided.size()) && violations == 0,
          std::to_string(reached) + "/" + std::to_string(p.guided.size()) + " runs reached the goal, " +
              std::to_string(violations) + " safety violations" + (failed.empty() ? "" : "; failed: " + failed));
}

void zero_guidance(const Pipeline& p) {
  int stopped = 0;
  std::string detail;
  for (const auto& [name, traj] : p.unguided) {
    stopped += traj.reason != Termination::Reached;
    detail += (detail.empty() ? "" : ", ") + name + " " + to_string(traj.reason);
  }
  verdict(6, "zero-guidance failure", stopped == static_cast<int>(p.unguided.size()), detail);
}

void pmp_monotonicity(const Pipeline& p) {
  std::size_t steps = 0;
  std::size_t increased = 0;
  std::size_t strict = 0;
  for (const auto& [name, traj] : p.guided) {
    for (const auto& d : traj.diagnostics) {
      ++steps;
      if (!(d.refined_objective <= d.pre_refine_objective)) ++increased;
      if (d.refined_objective < d.pre_refine_objective) ++strict;
    }
  }
  const double share = steps == 0 ? 0.0 : static_cast<double>(strict) / static_cast<double>(steps);
  verdict(7, "PMP monotonicity", steps > 0 && increased == 0 && share >= 0.30,
          std::to_string(steps) + " steps, " + std::to_string(increased) + " increases, strictly lower in " +
              fmt("%.1f%%", 100.0 * share));
}

void determinism(const Pipeline& a, const Pipeline& b, bool learning, bool planning) {
  const auto sa = serialize(a, learning, planning);
  const auto sb = serialize(b, learning, planning);
  std::size_t differ = 0;
  std::string which;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (i >= sb.size() || sa[i] != sb[i]) {
      ++differ;
      which += (which.empty() ? "" : ", ") + sa[i].first;
    }
  }
  verdict(8, "determinism", differ == 0 && sa.size() == sb.size(),
          std::to_string(sa.size()) + " outputs compared, " + std::to_string(differ) + " differ" +
              (which.empty() ? "" : ": " + which));
}

std::set<int> parse_only(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work_dir = fs::temp_directory_path() / "sgmeta_acceptance";
  std::set<int> only = {1, 2, 3, 4, 5, 6, 7, 8};
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work-dir" && i + 1 < argc) {
      work_dir = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      only = parse_only(argv[++i]);
    } else {
      std::cerr << "usage: sgmeta_acceptance [--work-dir DIR] [--only N[,N...]]\n";
      return 2;
    }
  }
  const auto start = std::chrono::steady_clock::now();

  if (only.count(1)) gradient_check();
  if (only.count(2)) best_response_check();

  const bool learning = only.count(3) || only.count(4) || only.count(8);
  const bool planning = only.count(5) || only.count(7) || only.count(8);
  const bool unguided = only.count(6) || only.count(8);
  if (learning || planning || unguided) {
    RunConfig cfg;
    cfg.validate();
    note("pass 1");
    const Pipeline first = run_pipeline(cfg, learning, planning);
    write_artifacts(work_dir, cfg, first, learning);
    note("artifacts in " + work_dir.string());
    if (only.count(3)) adaptation_ordering(first);
    if (only.count(4)) fast_adaptation(first);
    if (only.count(5)) guidance_success(first, cfg);
    if (only.count(6)) zero_guidance(first);
    if (only.count(7)) pmp_monotonicity(first);
    if (only.count(8)) {
      note("pass 2");
      const Pipeline second = run_pipeline(cfg, learning, planning);
      determinism(first, second, learning, planning);
    }
  }

  std::printf("acceptance: %d failing criteria, %.0f s\n", g_failures, seconds_since(start));
  return g_failures == 0 ? 0 : 1;
}
