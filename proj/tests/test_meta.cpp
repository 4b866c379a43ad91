#include "sgmeta/meta.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

using namespace sgmeta;

namespace {

MetaConfig small_config() {
  MetaConfig cfg;
  cfg.max_iter = 3;
  cfg.batch_tasks = 2;
  cfg.k_total = 12;
  cfg.adapt_samples = 30;
  cfg.adapt_steps = 4;
  cfg.baseline_pool = 60;
  cfg.baseline_per_type = 40;
  cfg.baseline_epochs = 2;
  cfg.baseline_iters_per_epoch = 4;
  return cfg;
}

double max_abs_diff(const MlpParams& a, const MlpParams& b) {
  return (a.flatten() - b.flatten()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("inner_update") {
  Rng rng(1);
  const MlpParams w = MlpParams::initialize(rng);
  Dataset exact = oracle::random_dataset(5, rng);
  for (auto& s : exact) s.response = forward(w, s.state, s.leader_control);
  CHECK(max_abs_diff(inner_update(w, exact, 0.1), w) < 1e-16);

  const Dataset data = oracle::random_dataset(5, rng);
  CHECK(max_abs_diff(inner_update(w, data, 1e-300), w) == 0.0);

  // zero network: only the output bias has a nonzero gradient, -2 * label
  Dataset one = {{JointState{Vec2(1, 1), Vec2(2, 2), 0.0}, {Vec2(0.5, 0.5)}, {0.5, -0.25}}};
  const MlpParams step = inner_update(MlpParams::zeros(), one, 0.01);
  CHECK(step.biases[2](0) == doctest::Approx(0.01 * 2 * 0.5));
  CHECK(step.biases[2](1) == doctest::Approx(0.01 * 2 * -0.25));
  MlpParams rest = step;
  rest.biases[2].setZero();
  CHECK(rest == MlpParams::zeros());
}

TEST_CASE("meta_step") {
  Rng rng(2);
  const MlpParams w = MlpParams::initialize(rng);
  const TaskData task{oracle::random_dataset(6, rng), oracle::random_dataset(6, rng)};

  SUBCASE("single task is an SGD step at the adapted point") {
    const MlpParams adapted = inner_update(w, task.train, 0.01);
    const MlpParams expected = sgd_step(w, loss_grad(adapted, task.test), 0.2);
    const std::array<TaskData, 1> batch{task};
    const MetaStepResult r = meta_step(w, batch, 0.01, 0.2);
    CHECK(max_abs_diff(r.params, expected) < 1e-15);
    CHECK(r.outer_loss == doctest::Approx(task_loss(adapted, task.test)));
  }

  SUBCASE("a duplicated task equals the single task") {
    const std::array<TaskData, 1> one{task};
    const std::array<TaskData, 2> two{task, task};
    CHECK(max_abs_diff(meta_step(w, one, 0.01, 0.2).params, meta_step(w, two, 0.01, 0.2).params) < 1e-15);
  }

  SUBCASE("zero test gradients leave w unchanged") {
    Dataset train = task.train;
    for (auto& s : train) s.response = forward(w, s.state, s.leader_control);
    Dataset test = task.test;
    for (auto& s : test) s.response = forward(w, s.state, s.leader_control);
    const std::array<TaskData, 1> batch{TaskData{train, test}};
    CHECK(max_abs_diff(meta_step(w, batch, 0.01, 0.2).params, w) < 1e-16);
  }
}

TEST_CASE("train_meta") {
  const Workspace ws = Workspace::default_layout();
  const auto types = default_follower_types();
  const auto dist = default_type_distribution();

  MetaConfig zero = small_config();
  zero.max_iter = 0;
  Rng a(3), b(3);
  CHECK(train_meta(zero, dist, types, ws, {}, a) == MlpParams::initialize(b, InputScaling{10.0, kPi, 2.0}));

  const MetaConfig cfg = small_config();
  Rng c(4), d(4);
  TrainingTrace trace;
  const MlpParams w1 = train_meta(cfg, dist, types, ws, {}, c, &trace);
  const MlpParams w2 = train_meta(cfg, dist, types, ws, {}, d);
  CHECK(w1 == w2);
  CHECK(trace.loss.size() == cfg.max_iter);
}

TEST_CASE("adapt") {
  const Workspace ws = Workspace::default_layout();
  const FollowerType t2 = default_follower_types()[1];
  Rng rng(5);
  const MlpParams w = MlpParams::initialize(rng);
  MetaConfig cfg = small_config();

  cfg.adapt_steps = 0;
  const AdaptResult none = adapt(w, t2, cfg, ws, {}, 9);
  CHECK(none.params == w);
  CHECK(none.curve.size() == 1);

  cfg.adapt_steps = 10;
  const AdaptResult r1 = adapt(w, t2, cfg, ws, {}, 9);
  const AdaptResult r2 = adapt(w, t2, cfg, ws, {}, 9);
  CHECK(r1.params == r2.params);
  CHECK(r1.curve == r2.curve);
  REQUIRE(r1.curve.size() == 11);
  CHECK(r1.curve.back() <= r1.curve.front());

  const MetaConfig defaults;
  CHECK(defaults.adapt_samples == 1000);
  CHECK(defaults.adapt_steps == 50);
}

TEST_CASE("baselines with a degenerate distribution reduce to one type") {
  const Workspace ws = Workspace::default_layout();
  const auto types = default_follower_types();
  const TypeDistribution only2{{0, 1, 0, 0, 0}};
  const MetaConfig cfg = small_config();

  Rng a(6);
  const ParamAveResult pa = train_param_ave(only2, types, ws, {}, cfg, a);
  CHECK(pa.components.size() == 5);
  CHECK(pa.traces.size() == 5);
  CHECK(pa.average == pa.components[1]);

  Rng b(7), c(7);
  const MlpParams oa = train_output_ave(only2, types, ws, {}, cfg, b);
  // the same pooled draw trained directly as a single-type supervised model
  MlpParams init = MlpParams::initialize(c, InputScaling{10.0, kPi, 2.0});
  Dataset data = sample_dataset(types[1], cfg.plan_for(types[1], cfg.baseline_pool), ws, {}, c);
  std::shuffle(data.begin(), data.end(), c);
  const MlpParams direct =
      train_supervised(init, data, cfg.baseline_epochs, cfg.baseline_iters_per_epoch, cfg.baseline_lr, c);
  CHECK(max_abs_diff(oa, direct) == 0.0);
}

TEST_CASE("weighted_average") {
  Rng rng(8);
  const MlpParams w = MlpParams::initialize(rng);
  const std::array<MlpParams, 3> same{w, w, w};
  const std::array<double, 3> p{0.2, 0.5, 0.3};
  CHECK(max_abs_diff(weighted_average(same, p), w) < 1e-15);
}

TEST_CASE("compare_adaptation uses a common dataset") {
  const Workspace ws = Workspace::default_layout();
  const auto types = default_follower_types();
  Rng rng(9);
  const MlpParams w = MlpParams::initialize(rng);
  const MlpParams v = MlpParams::initialize(rng);
  const MetaConfig cfg = small_config();
  const std::array<MlpParams, 3> models{w, w, v};
  const auto cmp = compare_adaptation(models, types, cfg, ws, {}, 123);
  REQUIRE(cmp.size() == 5);
  for (const auto& tc : cmp) {
    REQUIRE(tc.models.size() == 3);
    CHECK(tc.models[0].curve == tc.models[1].curve);
    CHECK(tc.models[0].heldout_mse == tc.models[1].heldout_mse);
    CHECK(tc.models[0].curve.size() == cfg.adapt_steps + 1);
    // the adaptation set is the one adapt() draws from the same per-type seed
    const AdaptResult direct = adapt(v, types[static_cast<std::size_t>(tc.type_id - 1)], cfg, ws, {},
                                     derive_seed(123, static_cast<std::uint64_t>(tc.type_id)));
    CHECK(direct.curve == tc.models[2].curve);
  }
}
