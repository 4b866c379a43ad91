#pragma once

#include "sgmeta/env.hpp"
#include "sgmeta/types.hpp"

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace sgmeta {

// Cost weights [c1, c2, c3, c4]: goal, guidance, control effort, sensing.
struct FollowerType {
  int id = 1;
  std::array<double, 4> c{1.0, 1.0, 1.0, 1.0};
  void validate() const;
};

struct TypeDistribution {
  std::vector<double> probs;
  void validate() const;
};

std::vector<FollowerType> default_follower_types();
TypeDistribution default_type_distribution();

class FollowerTrapped : public std::runtime_error {
 public:
  FollowerTrapped() : std::runtime_error("follower trapped") {}
};

// One-step-ahead follower cost J^F with the guidance term.
double follower_cost(const FollowerControl& uF, const JointState& x, const LeaderControl& uL,
                     const FollowerType& type, const Workspace& ws, double dt);

// Same cost without the guidance term; never reads leader quantities.
double myopic_cost(const FollowerControl& uF, const JointState& x, const FollowerType& type,
                   const Workspace& ws, double dt);

struct ResponseSolverOptions {
  int grid = 41;              // points per axis of the coarse scan
  int max_starts = 3;         // grid local minima that get refined
  int max_iterations = 200;
  double min_step = 1e-5;
  double fd_step = 1e-7;
};

// argmin of follower_cost over [-1,1]^2: coarse grid scan followed by a
// projected descent from the best grid minima. Throws FollowerTrapped when
// every grid point violates a safety boundary.
FollowerControl best_response(const JointState& x, const LeaderControl& uL,
                              const FollowerType& type, const Workspace& ws, double dt,
                              const ResponseSolverOptions& opts = {});

// Zero-guidance follower: best response to myopic_cost.
FollowerControl myopic_policy(const JointState& x, const FollowerType& type, const Workspace& ws,
                              double dt, const ResponseSolverOptions& opts = {});

// Exhaustive n x n grid minimum of the guided cost; reference for the solver.
double grid_minimum_cost(const JointState& x, const LeaderControl& uL, const FollowerType& type,
                         const Workspace& ws, double dt, int n);

const FollowerType& sample_type(const TypeDistribution& dist, std::span<const FollowerType> types,
                                Rng& rng);

}  // namespace sgmeta
