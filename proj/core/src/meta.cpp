#include "sgmeta/meta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sgmeta {

void MetaConfig::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("meta: alpha and beta must be positive");
  if (batch_tasks < 1) throw std::invalid_argument("meta: batch_tasks must be at least 1");
  if (k_total < 1 || adapt_samples < 1) throw std::invalid_argument("meta: sample counts must be positive");
  if (!(kappa >= 0.0)) throw std::invalid_argument("meta: kappa must be nonnegative");
  if (!(baseline_lr > 0.0)) throw std::invalid_argument("meta: baseline_lr must be positive");
  if (baseline_iters_per_epoch < 1) throw std::invalid_argument("meta: baseline_iters_per_epoch must be positive");
}

MlpParams inner_update(const MlpParams& w, const Dataset& train, double alpha) {
  return sgd_step(w, loss_grad(w, train), alpha);
}

MetaStepResult meta_step(const MlpParams& w, std::span<const TaskData> batch, double alpha,
                         double beta) {
  if (batch.empty()) throw std::invalid_argument("meta_step: empty task batch");
  MlpParams sum = MlpParams::zeros(w.scaling);
  double loss = 0.0;
  for (const TaskData& task : batch) {
    const MlpParams adapted = inner_update(w, task.train, alpha);
    const LossAndGrad lg = loss_and_grad(adapted, task.test);
    sum.axpy(1.0, lg.grad);
    loss += lg.loss;
  }
  const double n = static_cast<double>(batch.size());
  return {sgd_step(w, sum, beta / n), loss / n};
}

MlpParams train_meta(const MetaConfig& cfg, const TypeDistribution& dist,
                     std::span<const FollowerType> types, const Workspace& ws,
                     const DynamicsParams& dyn, Rng& rng, TrainingTrace* trace) {
  cfg.validate();
  dist.validate();
  MlpParams w = MlpParams::initialize(rng, InputScaling{10.0, kPi, dyn.u_max});
  std::vector<TaskData> batch(cfg.batch_tasks);
  for (std::size_t k = 0; k < cfg.max_iter; ++k) {
    for (auto& task : batch) {
      const FollowerType& type = sample_type(dist, types, rng);
      const SamplePlan plan = cfg.plan_for(type, cfg.k_total);
      task.train = sample_dataset(type, plan, ws, dyn, rng);
      task.test = sample_dataset(type, plan, ws, dyn, rng);
    }
    const double ramp = cfg.warmup_iters == 0
                            ? 1.0
                            : std::min(1.0, static_cast<double>(k + 1) / static_cast<double>(cfg.warmup_iters));
    MetaStepResult r = meta_step(w, batch, cfg.alpha, cfg.beta * ramp);
    w = std::move(r.params);
    if (trace) trace->loss.push_back(r.outer_loss);
  }
  return w;
}

AdaptResult adapt_on(const MlpParams& w, const Dataset& data, double alpha, std::size_t steps) {
  AdaptResult out{w, {}};
  out.curve.reserve(steps + 1);
  for (std::size_t k = 0; k < steps; ++k) {
    LossAndGrad lg = loss_and_grad(out.params, data);
    out.curve.push_back(lg.loss);
    out.params.axpy(-alpha, lg.grad);
  }
  out.curve.push_back(task_loss(out.params, data));
  return out;
}

AdaptResult adapt(const MlpParams& w_meta, const FollowerType& type, const MetaConfig& cfg,
                  const Workspace& ws, const DynamicsParams& dyn, std::uint64_t seed) {
  Rng rng(seed);
  const Dataset data = sample_dataset(type, cfg.plan_for(type, cfg.adapt_samples), ws, dyn, rng);
  return adapt_on(w_meta, data, cfg.alpha, cfg.adapt_steps);
}

MlpParams train_supervised(MlpParams w, const Dataset& data, std::size_t epochs,
                           std::size_t iters_per_epoch, double lr, Rng& rng, TrainingTrace* trace) {
  if (data.empty()) throw std::invalid_argument("train_supervised: empty dataset");
  const std::size_t iters = std::min(iters_per_epoch, data.size());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Dataset mini;
  for (std::size_t e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
      const std::size_t lo = it * data.size() / iters;
      const std::size_t hi = (it + 1) * data.size() / iters;
      mini.clear();
      for (std::size_t i = lo; i < hi; ++i) mini.push_back(data[order[i]]);
      const LossAndGrad lg = loss_and_grad(w, mini);
      w.axpy(-lr, lg.grad);
      epoch_loss += lg.loss;
    }
    if (trace) trace->loss.push_back(epoch_loss / static_cast<double>(iters));
  }
  return w;
}

namespace {

std::vector<std::size_t> proportional_counts(const TypeDistribution& dist, std::size_t total) {
  std::vector<std::size_t> counts(dist.probs.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    counts[i] = static_cast<std::size_t>(std::llround(dist.probs[i] * static_cast<double>(total)));
    assigned += counts[i];
  }
  // Put any rounding remainder on the most likely type.
  const auto top = static_cast<std::size_t>(
      std::max_element(dist.probs.begin(), dist.probs.end()) - dist.probs.begin());
  if (assigned > total) {
    counts[top] -= std::min(counts[top], assigned - total);
  } else {
    counts[top] += total - assigned;
  }
  return counts;
}

}  // namespace

MlpParams train_output_ave(const TypeDistribution& dist, std::span<const FollowerType> types,
                           const Workspace& ws, const DynamicsParams& dyn, const MetaConfig& cfg,
                           Rng& rng, TrainingTrace* trace) {
  cfg.validate();
  dist.validate();
  if (dist.probs.size() != types.size()) throw std::invalid_argument("type distribution and registry differ in size");
  MlpParams w = MlpParams::initialize(rng, InputScaling{10.0, kPi, dyn.u_max});
  const std::vector<std::size_t> counts = proportional_counts(dist, cfg.baseline_pool);
  Dataset pooled;
  pooled.reserve(cfg.baseline_pool);
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (counts[i] == 0) continue;
    Dataset part = sample_dataset(types[i], cfg.plan_for(types[i], counts[i]), ws, dyn, rng);
    pooled.insert(pooled.end(), part.begin(), part.end());
  }
  std::shuffle(pooled.begin(), pooled.end(), rng);
  return train_supervised(std::move(w), pooled, cfg.baseline_epochs, cfg.baseline_iters_per_epoch,
                          cfg.baseline_lr, rng, trace);
}

ParamAveResult train_param_ave(const TypeDistribution& dist, std::span<const FollowerType> types,
                               const Workspace& ws, const DynamicsParams& dyn,
                               const MetaConfig& cfg, Rng& rng) {
  cfg.validate();
  dist.validate();
  if (dist.probs.size() != types.size()) throw std::invalid_argument("type distribution and registry differ in size");
  ParamAveResult out;
  for (const FollowerType& type : types) {
    Rng local(rng());
    MlpParams w = MlpParams::initialize(local, InputScaling{10.0, kPi, dyn.u_max});
    const Dataset data = sample_dataset(type, cfg.plan_for(type, cfg.baseline_per_type), ws, dyn, local);
    TrainingTrace trace;
    out.components.push_back(train_supervised(std::move(w), data, cfg.baseline_epochs,
                                              cfg.baseline_iters_per_epoch, cfg.baseline_lr, local,
                                              &trace));
    out.traces.push_back(std::move(trace));
  }
  out.average = weighted_average(out.components, dist.probs);
  return out;
}

MlpParams weighted_average(std::span<const MlpParams> models, std::span<const double> weights) {
  if (models.empty() || models.size() != weights.size()) {
    throw std::invalid_argument("weighted_average: models and weights differ in size");
  }
  MlpParams avg = MlpParams::zeros(models.front().scaling);
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (weights[i] != 0.0) avg.axpy(weights[i], models[i]);
  }
  return avg;
}

std::vector<TypeComparison> compare_adaptation(std::span<const MlpParams> models,
                                               std::span<const FollowerType> types,
                                               const MetaConfig& cfg, const Workspace& ws,
                                               const DynamicsParams& dyn, std::uint64_t seed) {
  cfg.validate();
  std::vector<TypeComparison> out;
  for (const FollowerType& type : types) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(type.id)));
    const SamplePlan plan = cfg.plan_for(type, cfg.adapt_samples);
    const Dataset data = sample_dataset(type, plan, ws, dyn, rng);
    const Dataset heldout = sample_dataset(type, plan, ws, dyn, rng);
    TypeComparison cmp{type.id, {}};
    for (const MlpParams& w : models) {
      AdaptResult r = adapt_on(w, data, cfg.alpha, cfg.adapt_steps);
      cmp.models.push_back({std::move(r.curve), task_loss(r.params, heldout)});
    }
    out.push_back(std::move(cmp));
  }
  return out;
}

}  // namespace sgmeta
