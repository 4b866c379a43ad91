#pragma once

#include "sgmeta/dynamics.hpp"
#include "sgmeta/env.hpp"
#include "sgmeta/follower.hpp"
#include "sgmeta/mlp.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <utility>

namespace sgmeta {

// Importance-sampling budget: k1 samples over the whole feasible set, k2
// samples in a band just outside the obstacles' safety regions.
struct SamplePlan {
  std::size_t k1 = 67;
  std::size_t k2 = 33;
  double band = 1.0;           // m, width of the near-obstacle band
  double leader_radius = 3.0;  // m, leader drawn within this distance of the follower

  // k2 = round(total / (1 + kappa)), k1 = total - k2.
  static SamplePlan from_total(std::size_t total, double kappa, double band,
                               double leader_radius = 3.0);
  // Band set to 1 / c4, the reach of the type's sensing term.
  static SamplePlan for_type(std::size_t total, double kappa, const FollowerType& type,
                             double leader_radius = 3.0);

  std::size_t total() const { return k1 + k2; }
};

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxRejections = 10000;

// Unlabeled state/leader-action pair drawn by the sampling rule.
struct SampleQuery {
  JointState state;
  LeaderControl leader_control;
};

// Draws the queries only; labeling is separate so callers can reuse them.
std::vector<SampleQuery> sample_queries(const SamplePlan& plan, const Workspace& ws,
                                        const DynamicsParams& dyn, Rng& rng);

// Draws k1 + k2 queries and labels each one with the type's best response.
Dataset sample_dataset(const FollowerType& type, const SamplePlan& plan, const Workspace& ws,
                       const DynamicsParams& dyn, Rng& rng);

Dataset label_queries(const std::vector<SampleQuery>& queries, const FollowerType& type,
                      const Workspace& ws, const DynamicsParams& dyn);

// Order-preserving split; the first round(fraction * n) samples go to train.
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction);

// CSV with header pLx,pLy,pFx,pFy,phi,uLx,uLy,vF,wF.
void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);

}  // namespace sgmeta
