#pragma once

#include "sgmeta/types.hpp"

namespace sgmeta {

inline constexpr double kPi = 3.14159265358979323846;

struct DynamicsParams {
  double dt = 0.2;     // s
  double u_max = 2.0;  // leader speed bound per axis, m/s
};

// Maps any angle into (-pi, pi].
double wrap_angle(double angle);

LeaderControl clamp_leader(const LeaderControl& u, double u_max);
FollowerControl clamp_follower(const FollowerControl& u);

// Single integrator: x + u dt.
Vec2 leader_step(const Vec2& pos, const LeaderControl& u, double dt);

// Mixed discretization: the heading is advanced first and the new heading is
// used for the translation. Output heading is wrapped.
FollowerPose follower_step(const FollowerPose& pose, const FollowerControl& u, double dt);

// General f^F(x, u^L, u^F) signature. The follower here is decoupled from the
// leader, so u^L and the leader part of x are ignored.
FollowerPose follower_step(const JointState& x, const LeaderControl& uL, const FollowerControl& uF,
                           double dt);

JointState joint_step(const JointState& x, const LeaderControl& uL, const FollowerControl& uF,
                      double dt);

}  // namespace sgmeta
