#include "sgmeta/follower.hpp"
#include "sgmeta/mlp.hpp"
#include "sgmeta/planner.hpp"
#include "sgmeta/sampler.hpp"

#include <benchmark/benchmark.h>

using namespace sgmeta;

namespace {

const Workspace& workspace() {
  static const Workspace ws = Workspace::default_layout();
  return ws;
}

JointState sample_state() { return {Vec2(1.0, 7.0), Vec2(0.5, 8.0), 0.0}; }

MlpParams sample_params() {
  Rng rng(7);
  return MlpParams::initialize(rng);
}

Dataset sample_data(std::size_t n) {
  Rng rng(11);
  const DynamicsParams dyn;
  const FollowerType type = default_follower_types()[1];
  return sample_dataset(type, SamplePlan::for_type(n, 2.0, type), workspace(), dyn, rng);
}

void BM_Forward(benchmark::State& state) {
  const MlpParams w = sample_params();
  const JointState x = sample_state();
  const LeaderControl uL{Vec2(0.5, -0.5)};
  for (auto _ : state) benchmark::DoNotOptimize(forward(w, x, uL));
}
BENCHMARK(BM_Forward);

void BM_InputGrad(benchmark::State& state) {
  const MlpParams w = sample_params();
  const JointState x = sample_state();
  const LeaderControl uL{Vec2(0.5, -0.5)};
  for (auto _ : state) benchmark::DoNotOptimize(input_grad(w, x, uL));
}
BENCHMARK(BM_InputGrad);

void BM_LossAndGrad(benchmark::State& state) {
  const MlpParams w = sample_params();
  const Dataset data = sample_data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(w, data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGrad)->Arg(100)->Arg(1000);

void BM_BestResponse(benchmark::State& state) {
  const DynamicsParams dyn;
  const FollowerType type = default_follower_types()[0];
  const JointState x = sample_state();
  const LeaderControl uL{Vec2(1.0, 0.5)};
  for (auto _ : state) benchmark::DoNotOptimize(best_response(x, uL, type, workspace(), dyn.dt));
}
BENCHMARK(BM_BestResponse);

void BM_SolveOcp(benchmark::State& state) {
  const MlpParams w = sample_params();
  const PlanConfig cfg;
  const LeaderCostParams params;
  const JointState x = sample_state();
  for (auto _ : state) benchmark::DoNotOptimize(solve_ocp(x, w, params, cfg, workspace()));
}
BENCHMARK(BM_SolveOcp)->Unit(benchmark::kMillisecond);

void BM_PmpRefine(benchmark::State& state) {
  const MlpParams w = sample_params();
  const PlanConfig cfg;
  const LeaderCostParams params;
  const JointState x = sample_state();
  const PlanResult plan = solve_ocp(x, w, params, cfg, workspace());
  for (auto _ : state) benchmark::DoNotOptimize(pmp_refine(plan, x, w, params, cfg, workspace()));
}
BENCHMARK(BM_PmpRefine)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
