#include "sgmeta/sampler.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace sgmeta;

namespace {

bool same_sample(const BrSample& a, const BrSample& b) {
  return a.state == b.state && a.leader_control == b.leader_control && a.response == b.response;
}

}  // namespace

TEST_CASE("sample plan sizes") {
  const SamplePlan p = SamplePlan::from_total(100, 2.0, 1.0);
  CHECK(p.k1 == 67);
  CHECK(p.k2 == 33);
  const SamplePlan all_free = SamplePlan::from_total(50, 0.0, 1.0);
  CHECK(all_free.k1 == 0);
  CHECK(all_free.k2 == 50);
  const FollowerType t4 = default_follower_types()[3];
  CHECK(SamplePlan::for_type(1000, 2.0, t4).band == doctest::Approx(1.0 / t4.c[3]));
  CHECK_THROWS_AS(SamplePlan::from_total(10, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("sampled datasets honor the sampling rule") {
  const Workspace ws = Workspace::default_layout();
  const DynamicsParams dyn;
  const auto types = default_follower_types();
  for (const auto& type : types) {
    Rng rng(40 + static_cast<std::uint64_t>(type.id));
    const SamplePlan plan = SamplePlan::for_type(60, 2.0, type);
    const Dataset d = sample_dataset(type, plan, ws, dyn, rng);
    REQUIRE(d.size() == plan.total());
    for (std::size_t i = 0; i < d.size(); ++i) {
      const BrSample& s = d[i];
      CHECK(is_feasible(s.state.follower_pos, ws));
      CHECK(is_feasible(s.state.leader_pos, ws));
      CHECK((s.state.leader_pos - s.state.follower_pos).norm() <= plan.leader_radius);
      CHECK(s.leader_control.velocity.cwiseAbs().maxCoeff() <= dyn.u_max);
      CHECK(std::abs(s.response.speed) <= 1.0);
      CHECK(std::abs(s.response.turn_rate) <= 1.0);
      if (i >= plan.k1) {
        bool in_band = false;
        for (const auto& o : ws.obstacles) {
          const double r = scaled_distance(s.state.follower_pos, o);
          in_band = in_band || (r > o.safety_dist && r <= o.safety_dist + plan.band);
        }
        CHECK(in_band);
      }
    }
    // labels reproduce when the oracle is queried again
    std::vector<SampleQuery> queries;
    for (const auto& s : d) queries.push_back({s.state, s.leader_control});
    const Dataset again = label_queries(queries, type, ws, dyn);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(same_sample(d[i], again[i]));
  }
}

TEST_CASE("sampling is deterministic under a fixed seed") {
  const Workspace ws = Workspace::default_layout();
  const FollowerType t = default_follower_types()[1];
  const SamplePlan plan = SamplePlan::from_total(30, 2.0, 1.0);
  Rng a(7), b(7);
  const Dataset da = sample_dataset(t, plan, ws, {}, a);
  const Dataset db = sample_dataset(t, plan, ws, {}, b);
  std::ostringstream sa, sb;
  write_dataset_csv(sa, da);
  write_dataset_csv(sb, db);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("sampling without obstacles but with a near-obstacle budget fails") {
  Workspace ws;
  ws.obstacles.clear();
  Rng rng(1);
  CHECK_THROWS_AS(sample_queries(SamplePlan::from_total(10, 2.0, 1.0), ws, {}, rng), SamplingError);
}

TEST_CASE("split") {
  const Workspace ws = Workspace::default_layout();
  Rng rng(3);
  const auto queries = sample_queries(SamplePlan::from_total(100, 2.0, 1.0), ws, {}, rng);
  Dataset data;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    data.push_back({queries[i].state, queries[i].leader_control, {static_cast<double>(i) / 100.0, 0.0}});
  }
  const auto [train, test] = split(data, 0.5);
  CHECK(train.size() == 50);
  CHECK(test.size() == 50);
  std::vector<double> ids;
  for (const auto& s : train) ids.push_back(s.response.speed);
  for (const auto& s : test) ids.push_back(s.response.speed);
  std::vector<double> expected;
  for (const auto& s : data) expected.push_back(s.response.speed);
  CHECK(ids == expected);
  std::sort(ids.begin(), ids.end());
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
  CHECK_THROWS_AS(split(data, 1.0), std::invalid_argument);
}

TEST_CASE("dataset CSV round trip") {
  const Workspace ws = Workspace::default_layout();
  Rng rng(5);
  const Dataset d = sample_dataset(default_follower_types()[4], SamplePlan::from_total(12, 2.0, 1.0), ws, {}, rng);
  std::stringstream ss;
  write_dataset_csv(ss, d);
  const std::string header = ss.str().substr(0, ss.str().find('\n'));
  CHECK(header == "pLx,pLy,pFx,pFy,phi,uLx,uLy,vF,wF");
  const Dataset back = read_dataset_csv(ss);
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(same_sample(d[i], back[i]));
}
