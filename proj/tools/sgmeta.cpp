#include "sgmeta/config.hpp"
#include "sgmeta/io.hpp"
#include "sgmeta/meta.hpp"
#include "sgmeta/planner.hpp"
#include "sgmeta/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace sgmeta;

namespace {

// Bad arguments or inputs; exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

// out.json -> out.<suffix>
fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension(suffix);
  return p;
}

Checkpoint load_model(const fs::path& path) {
  auto in = open_input(path);
  try {
    return read_checkpoint(in);
  } catch (const FormatError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

void save_model(const fs::path& path, const MlpParams& w, const CheckpointInfo& info) {
  auto out = open_output(path);
  write_checkpoint(out, w, info);
}

Vec2 parse_point(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("expected a point as \"x,y\", got '" + text + "'");
  try {
    return {parse_double(text.substr(0, comma)), parse_double(text.substr(comma + 1))};
  } catch (const FormatError&) {
    throw UsageError("expected a point as \"x,y\", got '" + text + "'");
  }
}

void write_svg(const fs::path& path, const RunConfig& cfg, const std::vector<Trajectory>& trajs,
               const SvgOptions& opts) {
  auto out = open_output(path);
  out << render_svg(cfg.workspace, trajs, opts);
}

void write_trajectory(const fs::path& path, const Trajectory& traj) {
  auto out = open_output(path);
  write_trajectory_csv(out, traj);
}

Trajectory load_trajectory(const fs::path& path) {
  auto in = open_input(path);
  try {
    return read_trajectory_csv(in);
  } catch (const FormatError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

void report(const Trajectory& traj, const Workspace& ws) {
  const Vec2 pF = traj.states.back().follower_pos;
  std::cout << "reason " << to_string(traj.reason) << ", steps " << traj.steps() << ", final follower ("
            << pF.x() << ", " << pF.y() << "), distance to goal " << (pF - ws.destination).norm() << '\n';
}

struct Options {
  std::string config;
  std::string out;
  std::string out_dir;
  std::string model;
  std::string meta;
  std::string output_ave;
  std::string param_ave;
  std::string start;
  std::string svg;
  std::string trajectory;
  int type = 0;
  bool adapt = false;
};

int cmd_init_config(const Options& o) {
  const std::string text = to_json(RunConfig{}) + "\n";
  if (o.out.empty()) {
    std::cout << text;
  } else {
    auto out = open_output(o.out);
    out << text;
  }
  return 0;
}

int cmd_train_meta(const Options& o) {
  const RunConfig cfg = load_run_config(o.config);
  Rng rng(seed_for(cfg, SeedStream::Meta));
  TrainingTrace trace;
  const MlpParams w = train_meta(cfg.meta, cfg.distribution, cfg.types, cfg.workspace, cfg.dynamics, rng, &trace);
  save_model(o.out, w, {cfg.seed, "meta", cfg.meta.max_iter});
  auto loss = open_output(sibling(o.out, ".loss.csv"));
  write_loss_trace_csv(loss, trace);
  if (!trace.loss.empty()) std::cout << "final mean outer loss " << trace.loss.back() << '\n';
  return 0;
}

int cmd_adapt(const Options& o) {
  const RunConfig cfg = load_run_config(o.config);
  const FollowerType& type = cfg.type(o.type);
  const Checkpoint ck = load_model(o.model);
  const AdaptResult res = adapt_for_type(ck.params, type, cfg);
  save_model(o.out, res.params, {cfg.seed, "adapted", cfg.meta.adapt_steps});
  auto curve = open_output(sibling(o.out, ".curve.csv"));
  write_adapt_curve_csv(curve, res.curve);
  std::cout << "adaptation loss " << res.curve.front() << " -> " << res.curve.back() << '\n';
  return 0;
}

int cmd_plan(const Options& o) {
  const RunConfig cfg = load_run_config(o.config);
  const FollowerType& type = cfg.type(o.type);
  const Vec2 start = parse_point(o.start);
  if (!is_clear(start, cfg.workspace)) {
    throw UsageError("start (" + o.start + ") is outside the workspace or inside a safety region");
  }
  MlpParams w = load_model(o.model).params;
  if (o.adapt) w = adapt_for_type(w, type, cfg).params;
  Trajectory traj;
  try {
    traj = guide(type, start_state(start, cfg), w, cfg.plan, cfg.leader_cost, cfg.workspace);
  } catch (const InfeasibleStart& e) {
    throw UsageError(e.what());
  }
  write_trajectory(o.out, traj);
  auto diag = open_output(sibling(o.out, ".diag.json"));
  write_diagnostics_json(diag, traj.diagnostics);
  if (!o.svg.empty()) {
    SvgOptions opts;
    opts.title = "type " + std::to_string(type.id) + " guided from " + o.start;
    write_svg(o.svg, cfg, {traj}, opts);
  }
  report(traj, cfg.workspace);
  return 0;
}

int cmd_no_guidance(const Options& o) {
  const RunConfig cfg = load_run_config(o.config);
  const FollowerType& type = cfg.type(o.type);
  const Vec2 start = parse_point(o.start);
  if (!is_clear(start, cfg.workspace)) {
    throw UsageError("start (" + o.start + ") is outside the workspace or inside a safety region");
  }
  const FollowerPose pose{start, wrap_angle(cfg.plan.follower_heading)};
  const Trajectory traj = run_unguided(type, pose, cfg.plan, cfg.workspace);
  write_trajectory(o.out, traj);
  if (!o.svg.empty()) {
    SvgOptions opts;
    opts.sensing_type = type;
    opts.title = "type " + std::to_string(type.id) + " without guidance from " + o.start;
    write_svg(o.svg, cfg, {traj}, opts);
  }
  report(traj, cfg.workspace);
  return 0;
}

int cmd_baselines(const Options& o) {
  const RunConfig cfg = load_run_config(o.config);
  const fs::path dir = o.out_dir;
  {
    Rng rng(seed_for(cfg, SeedStream::OutputAve));
    TrainingTrace trace;
    const MlpParams w =
        train_output_ave(cfg.distribution, cfg.types, cfg.workspace, cfg.dynamics, cfg.meta, rng, &trace);
    save_model(dir / "output_ave.json", w, {cfg.seed, "output-ave", cfg.meta.baseline_epochs});
    auto loss = open_output(dir / "output_ave.loss.csv");
    write_loss_trace_csv(loss, trace);
  }
  Rng rng(seed_for(cfg, SeedStream::ParamAve));
  const ParamAveResult pa = train_param_ave(cfg.distribution, cfg.types, cfg.workspace, cfg.dynamics, cfg.meta, rng);
  save_model(dir / "param_ave.json", pa.average, {cfg.seed, "param-ave", cfg.meta.baseline_epochs});
  for (std::size_t i = 0; i < cfg.types.size(); ++i) {
    const std::string stem = "param_ave_type" + std::to_string(cfg.types[i].id);
    save_model(dir / (stem + ".json"), pa.components[i],
               {cfg.seed, "param-ave-component", cfg.meta.baseline_epochs});
    auto loss = open_output(dir / (stem + ".loss.csv"));
    write_loss_trace_csv(loss, pa.traces.at(i));
  }
  std::cout << "wrote baselines to " << dir.string() << '\n';
  return 0;
}

int cmd_eval_adapt(const Options& o) {
  const RunConfig cfg = load_run_config(o.config);
  const std::vector<std::string> names = {"meta", "output-ave", "param-ave"};
  const std::vector<MlpParams> models = {load_model(o.meta).params, load_model(o.output_ave).params,
                                         load_model(o.param_ave).params};
  const auto cmp = compare_adaptation(models, cfg.types, cfg.meta, cfg.workspace, cfg.dynamics,
                                      seed_for(cfg, SeedStream::Adapt));

  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  auto curves = open_output(sibling(o.out, ".curves.csv"));
  curves << "type,model,step,mse\n";
  for (const auto& tc : cmp) {
    nlohmann::ordered_json entry = {{"type", tc.type_id}};
    for (std::size_t m = 0; m < names.size(); ++m) {
      const auto& ma = tc.models[m];
      entry[names[m]] = {{"heldout_mse", ma.heldout_mse}, {"curve", ma.curve}};
      for (std::size_t s = 0; s < ma.curve.size(); ++s) {
        curves << tc.type_id << ',' << names[m] << ',' << s << ',' << format_double(ma.curve[s]) << '\n';
      }
    }
    j.push_back(entry);
    std::cout << "type " << tc.type_id << ": meta " << tc.models[0].heldout_mse << ", output-ave "
              << tc.models[1].heldout_mse << ", param-ave " << tc.models[2].heldout_mse << '\n';
  }
  auto out = open_output(o.out);
  out << j.dump(2) << '\n';
  return 0;
}

int cmd_plot(const Options& o) {
  const RunConfig cfg = load_run_config(o.config);
  const Trajectory traj = load_trajectory(o.trajectory);
  SvgOptions opts;
  if (o.type != 0) opts.sensing_type = cfg.type(o.type);
  write_svg(o.out, cfg, {traj}, opts);
  return 0;
}

int cmd_verify(const Options& o) {
  const RunConfig cfg = load_run_config(o.config);
  const Trajectory traj = load_trajectory(o.trajectory);
  const double err = replay_error(traj, cfg.dynamics.dt);
  const std::size_t violations = safety_violations(traj, cfg.workspace);
  std::cout << "replay error " << err << ", safety violations " << violations << '\n';
  return err <= 1e-12 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stackelberg meta-learning for guided trajectory planning"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config, "run configuration JSON")->required();
  };
  auto add_type = [&](CLI::App* sub) {
    sub->add_option("--type", o.type, "follower type id")->required();
  };

  auto* init = app.add_subcommand("init-config", "write the default configuration");
  init->add_option("-o,--out", o.out, "output path (stdout when omitted)");

  auto* train = app.add_subcommand("train-meta", "train the meta-best-response model");
  add_config(train);
  train->add_option("-o,--out", o.out, "checkpoint path; the loss trace goes to <stem>.loss.csv")->required();

  auto* adapt = app.add_subcommand("adapt", "adapt a checkpoint to one follower type");
  add_config(adapt);
  adapt->add_option("-m,--model", o.model, "input checkpoint")->required();
  add_type(adapt);
  adapt->add_option("-o,--out", o.out, "adapted checkpoint; the loss curve goes to <stem>.curve.csv")->required();

  auto* plan = app.add_subcommand("plan", "guide a follower with receding-horizon planning");
  add_config(plan);
  plan->add_option("-m,--model", o.model, "response model checkpoint")->required();
  add_type(plan);
  plan->add_option("--start", o.start, "follower start \"x,y\"")->required();
  plan->add_option("-o,--out", o.out, "trajectory CSV; diagnostics go to <stem>.diag.json")->required();
  plan->add_option("--svg", o.svg, "also render an SVG plot");
  plan->add_flag("--adapt", o.adapt, "adapt the model to the type before planning");

  auto* unguided = app.add_subcommand("no-guidance", "simulate the follower without a leader");
  add_config(unguided);
  add_type(unguided);
  unguided->add_option("--start", o.start, "follower start \"x,y\"")->required();
  unguided->add_option("-o,--out", o.out, "trajectory CSV")->required();
  unguided->add_option("--svg", o.svg, "also render an SVG plot with sensing-cost shading");

  auto* baselines = app.add_subcommand("baselines", "train the Output-Ave and Param-Ave models");
  add_config(baselines);
  baselines->add_option("--out-dir", o.out_dir, "directory for checkpoints and traces")->required();

  auto* eval = app.add_subcommand("eval-adapt", "compare adaptation of three checkpoints");
  add_config(eval);
  eval->add_option("--meta", o.meta, "meta checkpoint")->required();
  eval->add_option("--output-ave", o.output_ave, "Output-Ave checkpoint")->required();
  eval->add_option("--param-ave", o.param_ave, "Param-Ave checkpoint")->required();
  eval->add_option("-o,--out", o.out, "summary JSON; curves go to <stem>.curves.csv")->required();

  auto* plot = app.add_subcommand("plot", "render a trajectory CSV as SVG");
  add_config(plot);
  plot->add_option("-t,--trajectory", o.trajectory, "trajectory CSV")->required();
  plot->add_option("--type", o.type, "shade cells with this type's sensing cost");
  plot->add_option("-o,--out", o.out, "SVG path")->required();

  auto* verify = app.add_subcommand("verify", "replay a trajectory CSV through the dynamics");
  add_config(verify);
  verify->add_option("-t,--trajectory", o.trajectory, "trajectory CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*init) return cmd_init_config(o);
    if (*train) return cmd_train_meta(o);
    if (*adapt) return cmd_adapt(o);
    if (*plan) return cmd_plan(o);
    if (*unguided) return cmd_no_guidance(o);
    if (*baselines) return cmd_baselines(o);
    if (*eval) return cmd_eval_adapt(o);
    if (*plot) return cmd_plot(o);
    if (*verify) return cmd_verify(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
