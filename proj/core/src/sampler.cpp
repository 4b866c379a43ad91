#include "sgmeta/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace sgmeta {

SamplePlan SamplePlan::from_total(std::size_t total, double kappa, double band,
                                  double leader_radius) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("sampling ratio kappa must be nonnegative");
  const auto k2 = static_cast<std::size_t>(std::llround(static_cast<double>(total) / (1.0 + kappa)));
  return {total - k2, k2, band, leader_radius};
}

SamplePlan SamplePlan::for_type(std::size_t total, double kappa, const FollowerType& type,
                                double leader_radius) {
  return from_total(total, kappa, 1.0 / type.c[3], leader_radius);
}

namespace {

Vec2 uniform_in_box(const Vec2& lo, const Vec2& hi, Rng& rng) {
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
  const double x = ux(rng);
  return {x, uy(rng)};
}

template <typename Draw>
Vec2 rejection(Draw&& draw, const char* what) {
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    if (auto p = draw()) return *p;
  }
  throw SamplingError(std::string("workspace too constrained: ") + what);
}

Vec2 sample_free_position(const Workspace& ws, Rng& rng) {
  return rejection(
      [&]() -> std::optional<Vec2> {
        const Vec2 p = uniform_in_box(ws.bounds.lo, ws.bounds.hi, rng);
        if (is_feasible(p, ws)) return p;
        return std::nullopt;
      },
      "no feasible follower position");
}

Vec2 sample_near_obstacle(const Workspace& ws, double band, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, ws.obstacles.size() - 1);
  const Obstacle& obs = ws.obstacles[pick(rng)];
  const double outer = obs.safety_dist + band;
  const Vec2 half = Vec2::Constant(outer).cwiseQuotient(obs.scaling);
  return rejection(
      [&]() -> std::optional<Vec2> {
        const Vec2 p = uniform_in_box(obs.center - half, obs.center + half, rng);
        const double s = scaled_distance(p, obs);
        if (s > obs.safety_dist && s <= outer && is_feasible(p, ws)) return p;
        return std::nullopt;
      },
      "no feasible position near the obstacle");
}

SampleQuery complete_query(const Vec2& follower, const SamplePlan& plan, const Workspace& ws,
                           const DynamicsParams& dyn, Rng& rng) {
  std::uniform_real_distribution<double> heading(-kPi, kPi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> control(-dyn.u_max, dyn.u_max);

  SampleQuery q;
  q.state.follower_pos = follower;
  q.state.follower_heading = wrap_angle(heading(rng));
  q.state.leader_pos = rejection(
      [&]() -> std::optional<Vec2> {
        const double r = plan.leader_radius * std::sqrt(unit(rng));
        const double a = 2.0 * kPi * unit(rng);
        const Vec2 p = follower + r * Vec2(std::cos(a), std::sin(a));
        if (is_feasible(p, ws)) return p;
        return std::nullopt;
      },
      "no feasible leader position");
  const double ux = control(rng);
  q.leader_control.velocity = Vec2(ux, control(rng));
  return q;
}

}  // namespace

std::vector<SampleQuery> sample_queries(const SamplePlan& plan, const Workspace& ws,
                                        const DynamicsParams& dyn, Rng& rng) {
  if (plan.k2 > 0 && ws.obstacles.empty()) {
    throw SamplingError("near-obstacle samples requested but the workspace has no obstacles");
  }
  std::vector<SampleQuery> out;
  out.reserve(plan.total());
  for (std::size_t i = 0; i < plan.k1; ++i) {
    out.push_back(complete_query(sample_free_position(ws, rng), plan, ws, dyn, rng));
  }
  for (std::size_t i = 0; i < plan.k2; ++i) {
    out.push_back(complete_query(sample_near_obstacle(ws, plan.band, rng), plan, ws, dyn, rng));
  }
  return out;
}

Dataset label_queries(const std::vector<SampleQuery>& queries, const FollowerType& type,
                      const Workspace& ws, const DynamicsParams& dyn) {
  Dataset data;
  data.reserve(queries.size());
  for (const auto& q : queries) {
    data.push_back({q.state, q.leader_control,
                    best_response(q.state, q.leader_control, type, ws, dyn.dt)});
  }
  return data;
}

Dataset sample_dataset(const FollowerType& type, const SamplePlan& plan, const Workspace& ws,
                       const DynamicsParams& dyn, Rng& rng) {
  return label_queries(sample_queries(plan, ws, dyn, rng), type, ws, dyn);
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split fraction must lie in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(data.size())));
  if (n_train == 0 || n_train >= data.size()) throw std::invalid_argument("split leaves an empty part");
  return {Dataset(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n_train)),
          Dataset(data.begin() + static_cast<std::ptrdiff_t>(n_train), data.end())};
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  os << "pLx,pLy,pFx,pFy,phi,uLx,uLy,vF,wF\n";
  char buf[512];
  for (const auto& d : data) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  d.state.leader_pos.x(), d.state.leader_pos.y(), d.state.follower_pos.x(),
                  d.state.follower_pos.y(), d.state.follower_heading, d.leader_control.velocity.x(),
                  d.leader_control.velocity.y(), d.response.speed, d.response.turn_rate);
    os << buf;
  }
}

Dataset read_dataset_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("pLx,pLy,pFx,pFy,phi,uLx,uLy,vF,wF", 0) != 0) {
    throw std::runtime_error("dataset CSV: missing or unexpected header");
  }
  Dataset data;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    double v[9];
    std::stringstream ss(line);
    std::string cell;
    int k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= 9) break;
      try {
        v[k++] = std::stod(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("dataset CSV: bad number on row " + std::to_string(row));
      }
    }
    if (k != 9) throw std::runtime_error("dataset CSV: expected 9 columns on row " + std::to_string(row));
    data.push_back({JointState{Vec2(v[0], v[1]), Vec2(v[2], v[3]), v[4]}, LeaderControl{Vec2(v[5], v[6])},
                    FollowerControl{v[7], v[8]}});
  }
  return data;
}

}  // namespace sgmeta
