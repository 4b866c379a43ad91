#include "sgmeta/dynamics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sgmeta;

TEST_CASE("leader_step") {
  CHECK(leader_step(Vec2(0, 0), {Vec2(0, 0)}, 0.2) == Vec2(0, 0));
  const Vec2 a = leader_step(Vec2(0, 0), {Vec2(1, 0)}, 0.2);
  CHECK(a.x() == doctest::Approx(0.2));
  CHECK(a.y() == 0.0);
  const Vec2 b = leader_step(Vec2(9, 9), {Vec2(-1, -1)}, 0.2);
  CHECK(b.x() == doctest::Approx(8.8));
  CHECK(b.y() == doctest::Approx(8.8));

  // exactly linear in position
  const LeaderControl u{Vec2(0.7, -1.3)};
  const Vec2 p(1.25, 3.5), q(0.5, -0.25);
  CHECK(leader_step(p + q, u, 0.2) - leader_step(p, u, 0.2) == q);
}

TEST_CASE("follower_step") {
  const FollowerPose origin{Vec2(0, 0), 0.0};
  const FollowerPose still = follower_step(origin, {0.0, 0.0}, 0.2);
  CHECK(still.position == Vec2(0, 0));
  CHECK(still.heading == 0.0);

  const FollowerPose fwd = follower_step(origin, {1.0, 0.0}, 0.2);
  CHECK(fwd.position.x() == doctest::Approx(0.2));
  CHECK(fwd.position.y() == doctest::Approx(0.0));

  const FollowerPose turn = follower_step(origin, {1.0, 1.0}, 0.2);
  CHECK(turn.position.x() == doctest::Approx(0.196013).epsilon(1e-6));
  CHECK(turn.position.y() == doctest::Approx(0.039734).epsilon(1e-5));
  CHECK(turn.heading == doctest::Approx(0.2));

  const FollowerPose wrapped = follower_step(FollowerPose{Vec2(0, 0), kPi}, {0.0, 1.0}, 0.2);
  CHECK(wrapped.heading == doctest::Approx(-kPi + 0.2));
  CHECK(wrapped.heading == doctest::Approx(-2.94159).epsilon(1e-5));
}

TEST_CASE("follower displacement is bounded by dt") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0), a(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const FollowerPose p{Vec2(a(rng), a(rng)), a(rng)};
    const FollowerPose n = follower_step(p, {u(rng), u(rng)}, 0.2);
    CHECK((n.position - p.position).norm() <= 0.2 + 1e-15);
    CHECK(n.heading > -kPi);
    CHECK(n.heading <= kPi);
  }
}

TEST_CASE("wrap_angle stays in (-pi, pi]") {
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi + 0.1) == doctest::Approx(-kPi + 0.1));
  for (double t = -50.0; t < 50.0; t += 0.37) {
    const double w = wrap_angle(t);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(std::remainder(w - t, 2 * kPi) == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("joint_step composes the agent steps") {
  const JointState x{Vec2(1.0, 2.0), Vec2(3.0, 4.0), 0.5};
  const JointState copy = x;
  const LeaderControl uL{Vec2(-0.5, 1.5)};
  const FollowerControl uF{0.8, -0.3};
  const JointState n = joint_step(x, uL, uF, 0.2);
  const FollowerPose f = follower_step(FollowerPose{x.follower_pos, x.follower_heading}, uF, 0.2);
  CHECK(n.leader_pos == leader_step(x.leader_pos, uL, 0.2));
  CHECK(n.follower_pos == f.position);
  CHECK(n.follower_heading == f.heading);
  CHECK(x == copy);
  CHECK(joint_step(x, {}, {}, 0.2) == x);
}

TEST_CASE("control clamping") {
  const LeaderControl l = clamp_leader({Vec2(3.0, -5.0)}, 2.0);
  CHECK(l.velocity == Vec2(2.0, -2.0));
  const FollowerControl f = clamp_follower({1.5, -0.2});
  CHECK(f.speed == 1.0);
  CHECK(f.turn_rate == -0.2);
}
