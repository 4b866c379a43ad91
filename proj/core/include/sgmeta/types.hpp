#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>

namespace sgmeta {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat5 = Eigen::Matrix<double, 5, 5>;

// Returned by every barrier-style cost when an agent sits at or inside a
// safety boundary. Compares greater than any finite cost.
inline constexpr double kBarrierViolated = std::numeric_limits<double>::infinity();

inline bool is_barrier_violated(double cost) { return !(cost < kBarrierViolated); }

// x = [p^L, p^F, phi^F]
struct JointState {
  Vec2 leader_pos = Vec2::Zero();
  Vec2 follower_pos = Vec2::Zero();
  double follower_heading = 0.0;

  Vec5 as_vector() const {
    Vec5 v;
    v << leader_pos, follower_pos, follower_heading;
    return v;
  }
  static JointState from_vector(const Vec5& v) {
    return {v.head<2>(), v.segment<2>(2), v(4)};
  }
  bool operator==(const JointState& o) const {
    return leader_pos == o.leader_pos && follower_pos == o.follower_pos &&
           follower_heading == o.follower_heading;
  }
};

struct LeaderControl {
  Vec2 velocity = Vec2::Zero();
  bool operator==(const LeaderControl& o) const { return velocity == o.velocity; }
};

// u^F = [v^F, omega^F]
struct FollowerControl {
  double speed = 0.0;
  double turn_rate = 0.0;
  bool operator==(const FollowerControl&) const = default;
};

struct FollowerPose {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;
};

}  // namespace sgmeta

#include <cstdint>
#include <random>

namespace sgmeta {

// Engine used for every stochastic routine; fixed seed gives fixed output.
using Rng = std::mt19937_64;

// Independent child seed for a named stream (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace sgmeta
