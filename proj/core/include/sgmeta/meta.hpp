#pragma once

#include "sgmeta/dynamics.hpp"
#include "sgmeta/env.hpp"
#include "sgmeta/follower.hpp"
#include "sgmeta/mlp.hpp"
#include "sgmeta/sampler.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace sgmeta {

struct MetaConfig {
  double alpha = 1e-4;            // inner / adaptation step size
  double beta = 0.2;              // outer step size
  std::size_t warmup_iters = 1000;  // linear ramp of beta
  std::size_t max_iter = 20000;
  std::size_t batch_tasks = 5;
  std::size_t k_total = 100;      // samples in each of D^train and D^test
  double kappa = 2.0;             // K1 / K2
  std::size_t adapt_steps = 50;   // C
  std::size_t adapt_samples = 1000;  // K'
  double leader_radius = 3.0;

  // Comparison trainers.
  std::size_t baseline_pool = 15000;      // pooled Output-Ave dataset size
  std::size_t baseline_per_type = 15000;  // per-type Param-Ave dataset size
  std::size_t baseline_epochs = 200;
  std::size_t baseline_iters_per_epoch = 150;
  double baseline_lr = 0.2;

  void validate() const;
  SamplePlan plan_for(const FollowerType& type, std::size_t total) const {
    return SamplePlan::for_type(total, kappa, type, leader_radius);
  }
};

// One gradient step on the task's training data.
MlpParams inner_update(const MlpParams& w, const Dataset& train, double alpha);

struct TaskData {
  Dataset train;
  Dataset test;
};

struct MetaStepResult {
  MlpParams params;
  double outer_loss = 0.0;  // mean test loss at the adapted points
};

// First-order outer update: w - beta/|batch| * sum grad L(w'_task; test).
MetaStepResult meta_step(const MlpParams& w, std::span<const TaskData> batch, double alpha,
                         double beta);

// Per-iteration mean outer (or training) loss.
struct TrainingTrace {
  std::vector<double> loss;
};

MlpParams train_meta(const MetaConfig& cfg, const TypeDistribution& dist,
                     std::span<const FollowerType> types, const Workspace& ws,
                     const DynamicsParams& dyn, Rng& rng, TrainingTrace* trace = nullptr);

struct AdaptResult {
  MlpParams params;
  std::vector<double> curve;  // loss on the adaptation data before and after each step (C + 1)
};

// C full-batch steps of size alpha on the given data.
AdaptResult adapt_on(const MlpParams& w, const Dataset& data, double alpha, std::size_t steps);

// Samples K' points for the type from `seed` and adapts on them.
AdaptResult adapt(const MlpParams& w_meta, const FollowerType& type, const MetaConfig& cfg,
                  const Workspace& ws, const DynamicsParams& dyn, std::uint64_t seed);

// Plain minibatch SGD: each epoch shuffles and visits iters_per_epoch batches.
MlpParams train_supervised(MlpParams w, const Dataset& data, std::size_t epochs,
                           std::size_t iters_per_epoch, double lr, Rng& rng,
                           TrainingTrace* trace = nullptr);

// Output-Ave: one network on a pooled dataset with per-type counts
// proportional to p(theta).
MlpParams train_output_ave(const TypeDistribution& dist, std::span<const FollowerType> types,
                           const Workspace& ws, const DynamicsParams& dyn, const MetaConfig& cfg,
                           Rng& rng, TrainingTrace* trace = nullptr);

struct ParamAveResult {
  MlpParams average;
  std::vector<MlpParams> components;  // one per type, in registry order
  std::vector<TrainingTrace> traces;
};

// Param-Ave: independent per-type networks averaged with weights p(theta).
ParamAveResult train_param_ave(const TypeDistribution& dist, std::span<const FollowerType> types,
                               const Workspace& ws, const DynamicsParams& dyn,
                               const MetaConfig& cfg, Rng& rng);

MlpParams weighted_average(std::span<const MlpParams> models, std::span<const double> weights);

struct ModelAdaptation {
  std::vector<double> curve;  // C + 1 losses on the adaptation set
  double heldout_mse = 0.0;   // after C steps, on an independent set of the same size
};

struct TypeComparison {
  int type_id = 0;
  std::vector<ModelAdaptation> models;  // same order as the input models
};

// For each type, draws one adaptation set and one held-out set from
// derive_seed(seed, type id) and adapts every model on those same samples.
std::vector<TypeComparison> compare_adaptation(std::span<const MlpParams> models,
                                               std::span<const FollowerType> types,
                                               const MetaConfig& cfg, const Workspace& ws,
                                               const DynamicsParams& dyn, std::uint64_t seed);

}  // namespace sgmeta
