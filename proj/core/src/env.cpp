#include "sgmeta/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sgmeta {

Workspace Workspace::default_layout() {
  Workspace ws;
  for (const Vec2& c : {Vec2(3.0, 2.5), Vec2(2.5, 7.0), Vec2(6.5, 5.5), Vec2(8.5, 2.0)}) {
    ws.obstacles.push_back(Obstacle{c, 1.0, Vec2::Ones(), NormOrder::Inf});
  }
  return ws;
}

void Workspace::validate() const {
  if (!(bounds.lo.array() < bounds.hi.array()).all()) {
    throw std::invalid_argument("workspace bounds are empty");
  }
  if (!(goal_radius > 0.0)) throw std::invalid_argument("goal_radius must be positive");
  for (std::size_t j = 0; j < obstacles.size(); ++j) {
    const auto& o = obstacles[j];
    if (!(o.safety_dist > 0.0)) {
      throw std::invalid_argument("obstacle " + std::to_string(j) + ": safety_dist must be positive");
    }
    if (!(o.scaling.array() > 0.0).all()) {
      throw std::invalid_argument("obstacle " + std::to_string(j) + ": scaling must be positive");
    }
  }
  if (!is_feasible(destination, *this)) {
    throw std::invalid_argument("destination must lie inside bounds and outside every safety region");
  }
}

double scaled_distance(const Vec2& p, const Obstacle& obs) {
  const Vec2 s = obs.scaling.cwiseProduct(p - obs.center);
  if (obs.norm == NormOrder::Inf) return s.cwiseAbs().maxCoeff();
  return s.norm();
}

Vec2 scaled_distance_grad(const Vec2& p, const Obstacle& obs) {
  const Vec2 s = obs.scaling.cwiseProduct(p - obs.center);
  Vec2 g = Vec2::Zero();
  if (obs.norm == NormOrder::Inf) {
    const int axis = std::abs(s.x()) >= std::abs(s.y()) ? 0 : 1;
    if (s(axis) != 0.0) g(axis) = (s(axis) > 0.0 ? 1.0 : -1.0) * obs.scaling(axis);
    return g;
  }
  const double n = s.norm();
  if (n == 0.0) return g;
  return obs.scaling.cwiseProduct(s) / n;
}

double barrier_cost(const JointState& x, const Workspace& ws, double nu) {
  double total = 0.0;
  for (const auto& obs : ws.obstacles) {
    for (const Vec2* p : {&x.leader_pos, &x.follower_pos}) {
      const double gap = scaled_distance(*p, obs) - obs.safety_dist;
      if (!(gap > 0.0)) return kBarrierViolated;
      total -= nu * std::log(gap);
    }
  }
  return total;
}

Vec5 barrier_cost_grad(const JointState& x, const Workspace& ws, double nu) {
  Vec5 g = Vec5::Zero();
  for (const auto& obs : ws.obstacles) {
    const double gl = scaled_distance(x.leader_pos, obs) - obs.safety_dist;
    const double gf = scaled_distance(x.follower_pos, obs) - obs.safety_dist;
    g.head<2>() -= nu / gl * scaled_distance_grad(x.leader_pos, obs);
    g.segment<2>(2) -= nu / gf * scaled_distance_grad(x.follower_pos, obs);
  }
  return g;
}

double sensing_penalty(double arg) {
  if (!(arg > 0.0)) return kBarrierViolated;
  if (arg > 1.0) return 0.0;
  return -10.0 * std::log(arg);
}

bool is_clear(const Vec2& p, const Workspace& ws) {
  return std::all_of(ws.obstacles.begin(), ws.obstacles.end(), [&](const Obstacle& o) {
    return scaled_distance(p, o) > o.safety_dist;
  });
}

bool is_feasible(const Vec2& p, const Workspace& ws) {
  return ws.bounds.contains(p) && is_clear(p, ws);
}

}  // namespace sgmeta
