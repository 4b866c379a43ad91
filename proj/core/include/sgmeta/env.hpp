#pragma once

#include "sgmeta/types.hpp"

#include <stdexcept>
#include <vector>

namespace sgmeta {

enum class NormOrder { Two, Inf };

struct Obstacle {
  Vec2 center = Vec2::Zero();
  double safety_dist = 1.0;
  Vec2 scaling = Vec2::Ones();
  NormOrder norm = NormOrder::Inf;
};

struct Box {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Constant(10.0);
  bool contains(const Vec2& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
};

struct Workspace {
  Box bounds;
  std::vector<Obstacle> obstacles;
  Vec2 destination = Vec2(9.0, 9.0);
  double goal_radius = 0.5;

  // Four rectangular obstacles on [0,10]^2 with the destination at [9,9].
  static Workspace default_layout();

  // Throws std::invalid_argument on a broken invariant.
  void validate() const;
};

// ||scaling .* (p - center)||_l
double scaled_distance(const Vec2& p, const Obstacle& obs);

// A (sub)gradient of scaled_distance with respect to p. At a max-norm tie the
// first axis is used; at the center the zero vector is returned.
Vec2 scaled_distance_grad(const Vec2& p, const Obstacle& obs);

// Sum over obstacles and both agents of -nu * ln(dist - d_j), or
// kBarrierViolated when any agent is at or inside a safety boundary.
double barrier_cost(const JointState& x, const Workspace& ws, double nu);

// Gradient of barrier_cost with respect to the joint state (heading entry is
// always zero). Only meaningful where barrier_cost is finite.
Vec5 barrier_cost_grad(const JointState& x, const Workspace& ws, double nu);

// -10 ln(arg) on (0, 1], zero above 1, kBarrierViolated at or below 0.
double sensing_penalty(double arg);

// Strictly outside every safety region (bounds not checked).
bool is_clear(const Vec2& p, const Workspace& ws);

// Inside bounds and strictly outside every safety region.
bool is_feasible(const Vec2& p, const Workspace& ws);

}  // namespace sgmeta
