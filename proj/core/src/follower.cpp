#include "sgmeta/follower.hpp"

#include "sgmeta/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sgmeta {

void FollowerType::validate() const {
  for (double ci : c) {
    if (!(ci > 0.0)) throw std::invalid_argument("follower type " + std::to_string(id) + ": weights must be positive");
  }
}

void TypeDistribution::validate() const {
  if (probs.empty()) throw std::invalid_argument("type distribution is empty");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("type distribution has a negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("type distribution must sum to 1");
}

std::vector<FollowerType> default_follower_types() {
  return {
      {1, {1.0, 8.0, 1.0, 0.8}},
      {2, {1.0, 10.0, 2.0, 0.7}},
      {3, {1.0, 10.0, 2.0, 0.6}},
      {4, {1.0, 5.0, 0.5, 1.0}},
      {5, {1.0, 5.0, 0.3, 1.2}},
  };
}

TypeDistribution default_type_distribution() { return {{0.2, 0.3, 0.1, 0.3, 0.1}}; }

namespace {

// The follower's decision problem at one state with everything that does not
// depend on u^F precomputed.
class ResponseProblem {
 public:
  ResponseProblem(const JointState& x, const LeaderControl* uL, const FollowerType& type,
                  const Workspace& ws, double dt)
      : pos_(x.follower_pos), heading_(x.follower_heading), goal_(ws.destination), c_(type.c),
        dt_(dt), guided_(uL != nullptr) {
    if (guided_) leader_next_ = leader_step(x.leader_pos, *uL, dt);
    // Obstacles the follower cannot sense from anywhere within one step are dropped.
    const double reach = 1.01 * dt;
    for (const auto& o : ws.obstacles) {
      const double max_scale = o.scaling.maxCoeff();
      if (scaled_distance(pos_, o) - reach * max_scale - o.safety_dist > 1.0 / c_[3]) continue;
      obstacles_.push_back({o.center.x(), o.center.y(), o.scaling.x(), o.scaling.y(), o.safety_dist,
                            o.norm == NormOrder::Inf});
    }
  }

  double operator()(double v, double w) const {
    const double h = heading_ + w * dt_;
    return eval(v, w, std::cos(h), std::sin(h));
  }

  double eval(double v, double w, double cos_h, double sin_h) const {
    const double nx = pos_.x() + v * dt_ * cos_h;
    const double ny = pos_.y() + v * dt_ * sin_h;
    const double gx = nx - goal_.x(), gy = ny - goal_.y();
    double cost = c_[0] * (gx * gx + gy * gy) + c_[2] * (v * v + w * w);
    if (guided_) {
      const double lx = leader_next_.x() - nx, ly = leader_next_.y() - ny;
      cost += c_[1] * (lx * lx + ly * ly);
    }
    for (const auto& o : obstacles_) {
      const double dx = o.sx * (nx - o.cx), dy = o.sy * (ny - o.cy);
      const double dist = o.inf_norm ? std::max(std::abs(dx), std::abs(dy)) : std::sqrt(dx * dx + dy * dy);
      const double arg = c_[3] * (dist - o.d);
      if (arg > 1.0) continue;
      if (!(arg > 0.0)) return kBarrierViolated;
      cost -= 10.0 * std::log(arg);
    }
    return cost;
  }

  double heading() const { return heading_; }
  double dt() const { return dt_; }

 private:
  struct Obs {
    double cx, cy, sx, sy, d;
    bool inf_norm;
  };
  Vec2 pos_;
  double heading_;
  Vec2 goal_;
  std::array<double, 4> c_;
  double dt_;
  bool guided_;
  Vec2 leader_next_ = Vec2::Zero();
  std::vector<Obs> obstacles_;
};

struct Candidate {
  double v, w, cost;
};

double grid_value(int i, int n) { return -1.0 + 2.0 * i / (n - 1); }

std::vector<double> scan(const ResponseProblem& prob, int n) {
  std::vector<double> costs(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    const double w = grid_value(j, n);
    const double h = prob.heading() + w * prob.dt();
    const double ch = std::cos(h), sh = std::sin(h);
    for (int i = 0; i < n; ++i) costs[static_cast<std::size_t>(j) * n + i] = prob.eval(grid_value(i, n), w, ch, sh);
  }
  return costs;
}

// Projected Newton on the free coordinates with finite-difference derivatives.
// Stops once a step shrinks below opts.min_step or stops decreasing the cost.
Candidate newton_polish(const ResponseProblem& prob, Candidate u, const ResponseSolverOptions& opts,
                        int& budget) {
  const double fd = opts.fd_step;
  const double hh = 1e-4;
  while (budget-- > 0) {
    const double f0 = u.cost;
    const double gv = (prob(u.v + fd, u.w) - prob(u.v - fd, u.w)) / (2.0 * fd);
    const double gw = (prob(u.v, u.w + fd) - prob(u.v, u.w - fd)) / (2.0 * fd);
    const double fvp = prob(u.v + hh, u.w), fvm = prob(u.v - hh, u.w);
    const double fwp = prob(u.v, u.w + hh), fwm = prob(u.v, u.w - hh);
    const double hvv = (fvp - 2.0 * f0 + fvm) / (hh * hh);
    const double hww = (fwp - 2.0 * f0 + fwm) / (hh * hh);
    const double hvw = (prob(u.v + hh, u.w + hh) - prob(u.v + hh, u.w - hh) - prob(u.v - hh, u.w + hh) +
                        prob(u.v - hh, u.w - hh)) /
                       (4.0 * hh * hh);
    if (!std::isfinite(gv + gw + hvv + hww + hvw)) break;
    const bool free_v = !((u.v >= 1.0 && gv < 0.0) || (u.v <= -1.0 && gv > 0.0));
    const bool free_w = !((u.w >= 1.0 && gw < 0.0) || (u.w <= -1.0 && gw > 0.0));
    double dv = 0.0, dw = 0.0;
    if (free_v && free_w) {
      const double det = hvv * hww - hvw * hvw;
      if (!(hvv > 0.0 && det > 0.0)) break;
      dv = -(hww * gv - hvw * gw) / det;
      dw = -(hvv * gw - hvw * gv) / det;
    } else if (free_v) {
      if (!(hvv > 0.0)) break;
      dv = -gv / hvv;
    } else if (free_w) {
      if (!(hww > 0.0)) break;
      dw = -gw / hww;
    } else {
      break;
    }
    const double nv = std::clamp(u.v + dv, -1.0, 1.0), nw = std::clamp(u.w + dw, -1.0, 1.0);
    const double c = prob(nv, nw);
    if (!(c <= u.cost)) break;
    const double moved = std::hypot(nv - u.v, nw - u.w);
    u = {nv, nw, c};
    if (moved < opts.min_step) break;
  }
  return u;
}

// Normalized-gradient and compass moves with step halving.
Candidate pattern_descent(const ResponseProblem& prob, Candidate u, const ResponseSolverOptions& opts,
                          double step, int& budget) {
  const double fd = opts.fd_step;
  const double max_step = step;
  auto try_move = [&](double v, double w) {
    v = std::clamp(v, -1.0, 1.0);
    w = std::clamp(w, -1.0, 1.0);
    const double c = prob(v, w);
    if (c < u.cost) {
      u = {v, w, c};
      return true;
    }
    return false;
  };
  while (budget-- > 0 && step >= opts.min_step) {
    const double gv = (prob(u.v + fd, u.w) - prob(u.v - fd, u.w)) / (2.0 * fd);
    const double gw = (prob(u.v, u.w + fd) - prob(u.v, u.w - fd)) / (2.0 * fd);
    const double gn = std::hypot(gv, gw);
    if (std::isfinite(gn) && gn > 0.0 && try_move(u.v - step * gv / gn, u.w - step * gw / gn)) {
      step = std::min(2.0 * step, max_step);
      continue;
    }
    // Compass moves cover creases of the max-norm sensing term and the box faces.
    if (try_move(u.v + step, u.w) || try_move(u.v - step, u.w) || try_move(u.v, u.w + step) ||
        try_move(u.v, u.w - step)) {
      continue;
    }
    step *= 0.5;
  }
  return u;
}

Candidate refine(const ResponseProblem& prob, Candidate u, const ResponseSolverOptions& opts, double spacing) {
  int budget = opts.max_iterations;
  u = newton_polish(prob, u, opts, budget);
  // A short certification sweep around the Newton point; a full-width one when
  // Newton could not move (nonsmooth or indefinite region).
  const double step = budget == opts.max_iterations - 1 ? spacing : std::min(spacing, 1e-3);
  return pattern_descent(prob, u, opts, step, budget);
}

FollowerControl solve(const ResponseProblem& prob, const ResponseSolverOptions& opts) {
  const int n = opts.grid;
  const std::vector<double> costs = scan(prob, n);
  auto at = [&](int i, int j) { return costs[static_cast<std::size_t>(j) * n + i]; };

  std::vector<Candidate> minima;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double c = at(i, j);
      if (is_barrier_violated(c)) continue;
      bool local_min = true;
      for (int dj = -1; dj <= 1 && local_min; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const int ii = i + di, jj = j + dj;
          if ((di == 0 && dj == 0) || ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
          if (at(ii, jj) < c) {
            local_min = false;
            break;
          }
        }
      }
      if (local_min) minima.push_back({grid_value(i, n), grid_value(j, n), c});
    }
  }
  if (minima.empty()) throw FollowerTrapped();

  std::stable_sort(minima.begin(), minima.end(),
                   [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });
  const double spacing = 2.0 / (n - 1);
  Candidate best = minima.front();
  const auto starts = std::min<std::size_t>(minima.size(), static_cast<std::size_t>(opts.max_starts));
  for (std::size_t k = 0; k < starts; ++k) {
    const Candidate r = refine(prob, minima[k], opts, spacing);
    if (r.cost < best.cost) best = r;
  }
  return {best.v, best.w};
}

}  // namespace

double follower_cost(const FollowerControl& uF, const JointState& x, const LeaderControl& uL,
                     const FollowerType& type, const Workspace& ws, double dt) {
  return ResponseProblem(x, &uL, type, ws, dt)(uF.speed, uF.turn_rate);
}

double myopic_cost(const FollowerControl& uF, const JointState& x, const FollowerType& type,
                   const Workspace& ws, double dt) {
  return ResponseProblem(x, nullptr, type, ws, dt)(uF.speed, uF.turn_rate);
}

FollowerControl best_response(const JointState& x, const LeaderControl& uL,
                              const FollowerType& type, const Workspace& ws, double dt,
                              const ResponseSolverOptions& opts) {
  return solve(ResponseProblem(x, &uL, type, ws, dt), opts);
}

FollowerControl myopic_policy(const JointState& x, const FollowerType& type, const Workspace& ws,
                              double dt, const ResponseSolverOptions& opts) {
  return solve(ResponseProblem(x, nullptr, type, ws, dt), opts);
}

double grid_minimum_cost(const JointState& x, const LeaderControl& uL, const FollowerType& type,
                         const Workspace& ws, double dt, int n) {
  const ResponseProblem prob(x, &uL, type, ws, dt);
  const std::vector<double> costs = scan(prob, n);
  return *std::min_element(costs.begin(), costs.end());
}

const FollowerType& sample_type(const TypeDistribution& dist, std::span<const FollowerType> types,
                                Rng& rng) {
  if (dist.probs.size() != types.size()) {
    throw std::invalid_argument("type distribution and type registry differ in size");
  }
  std::discrete_distribution<std::size_t> pick(dist.probs.begin(), dist.probs.end());
  return types[pick(rng)];
}

}  // namespace sgmeta
