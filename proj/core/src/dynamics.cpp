#include "sgmeta/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace sgmeta {

double wrap_angle(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

LeaderControl clamp_leader(const LeaderControl& u, double u_max) {
  return {u.velocity.cwiseMax(-u_max).cwiseMin(u_max)};
}

FollowerControl clamp_follower(const FollowerControl& u) {
  return {std::clamp(u.speed, -1.0, 1.0), std::clamp(u.turn_rate, -1.0, 1.0)};
}

Vec2 leader_step(const Vec2& pos, const LeaderControl& u, double dt) {
  return pos + u.velocity * dt;
}

FollowerPose follower_step(const FollowerPose& pose, const FollowerControl& u, double dt) {
  const double heading = pose.heading + u.turn_rate * dt;
  FollowerPose next;
  next.position = pose.position + u.speed * dt * Vec2(std::cos(heading), std::sin(heading));
  next.heading = wrap_angle(heading);
  return next;
}

FollowerPose follower_step(const JointState& x, const LeaderControl& /*uL*/,
                           const FollowerControl& uF, double dt) {
  return follower_step(FollowerPose{x.follower_pos, x.follower_heading}, uF, dt);
}

JointState joint_step(const JointState& x, const LeaderControl& uL, const FollowerControl& uF,
                      double dt) {
  const FollowerPose f = follower_step(x, uL, uF, dt);
  return {leader_step(x.leader_pos, uL, dt), f.position, f.heading};
}

}  // namespace sgmeta
