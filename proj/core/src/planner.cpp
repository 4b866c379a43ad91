#include "sgmeta/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgmeta {

void LeaderCostParams::validate() const {
  auto psd = [](const auto& m) {
    using M = std::decay_t<decltype(m)>;
    const M sym = 0.5 * (m + m.transpose());
    const Eigen::LDLT<M> ldlt(sym);
    return ldlt.info() == Eigen::Success && ldlt.isPositive();
  };
  if (!psd(Q1) || !psd(Q2) || !psd(R) || !psd(Qf1) || !psd(Qf2)) {
    throw std::invalid_argument("leader cost weights must be positive semidefinite");
  }
  if (!(nu > 0.0) || !(mu > 0.0)) throw std::invalid_argument("nu and mu must be positive");
}

void PlanConfig::validate() const {
  if (horizon_steps < 1) throw std::invalid_argument("horizon_steps must be at least 1");
  if (max_time_steps < 0) throw std::invalid_argument("max_time_steps must be nonnegative");
  if (!(dynamics.dt > 0.0) || !(dynamics.u_max > 0.0)) throw std::invalid_argument("dt and u_max must be positive");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Reached: return "reached";
    case Termination::Timeout: return "timeout";
    case Termination::Trapped: return "trapped";
  }
  return "timeout";
}

Termination termination_from_string(const std::string& s) {
  if (s == "reached") return Termination::Reached;
  if (s == "timeout") return Termination::Timeout;
  if (s == "trapped") return Termination::Trapped;
  throw std::invalid_argument("unknown termination reason '" + s + "'");
}

namespace {

Vec5 state_error(const JointState& x, const Vec2& destination) {
  Vec5 e;
  e << x.leader_pos - destination, x.follower_pos - destination, wrap_angle(x.follower_heading);
  return e;
}

struct CostGrad {
  double value;
  Vec5 dx;
};

CostGrad state_cost(const JointState& x, const Mat5& Q, const Mat2& Qg, const Vec2& destination) {
  const Vec5 e = state_error(x, destination);
  const Vec2 r = x.leader_pos - x.follower_pos;
  CostGrad c;
  c.value = e.dot(Q * e) + r.dot(Qg * r);
  c.dx = (Q + Q.transpose()) * e;
  const Vec2 gr = (Qg + Qg.transpose()) * r;
  c.dx.head<2>() += gr;
  c.dx.segment<2>(2) -= gr;
  return c;
}

// Model-driven follower transition with derivatives. Headings are not wrapped
// here so that a sequence of planned headings stays continuous.
struct FollowerTransition {
  Vec3 next;
  Eigen::Matrix<double, 3, 5> dx;
  Eigen::Matrix<double, 3, 2> du;
};

JointState net_state(const JointState& x) {
  return {x.leader_pos, x.follower_pos, wrap_angle(x.follower_heading)};
}

Vec3 predict_follower(const JointState& x, const LeaderControl& u, const MlpParams& w, double dt) {
  const Eigen::Vector2d y = evaluate(w, encode_input(net_state(x), u, w.scaling));
  const double heading = x.follower_heading + y(1) * dt;
  Vec3 next;
  next << x.follower_pos + y(0) * dt * Vec2(std::cos(heading), std::sin(heading)), heading;
  return next;
}

FollowerTransition predict_follower_grad(const JointState& x, const LeaderControl& u,
                                         const MlpParams& w, double dt) {
  const ForwardJacobian fj = forward_with_jacobian(w, net_state(x), u);
  const double v = fj.output(0), om = fj.output(1);
  const double heading = x.follower_heading + om * dt;
  const double c = std::cos(heading), s = std::sin(heading);
  FollowerTransition tr;
  tr.next << x.follower_pos + v * dt * Vec2(c, s), heading;

  Eigen::Matrix<double, 3, 2> d_out;
  d_out << dt * c, -v * dt * dt * s,
           dt * s,  v * dt * dt * c,
           0.0,     dt;
  Eigen::Matrix<double, 3, 5> direct = Eigen::Matrix<double, 3, 5>::Zero();
  direct(0, 2) = 1.0;
  direct(1, 3) = 1.0;
  direct(0, 4) = -v * dt * s;
  direct(1, 4) = v * dt * c;
  direct(2, 4) = 1.0;
  tr.dx = direct + d_out * fj.jacobian.leftCols<5>();
  tr.du = d_out * fj.jacobian.rightCols<2>();
  return tr;
}

Vec3 follower_residual(const FollowerPose& next, const Vec3& predicted) {
  return {next.position.x() - predicted(0), next.position.y() - predicted(1),
          wrap_angle(next.heading - predicted(2))};
}

JointState compose(const Vec2& leader, const FollowerPose& f) { return {leader, f.position, f.heading}; }

// Value (and optionally gradient) of the relaxed objective. Both paths share
// the same arithmetic for the value.
double relaxed_objective(const std::vector<LeaderControl>& u, const std::vector<FollowerPose>& xf,
                         const JointState& x0, const MlpParams& w, const LeaderCostParams& p,
                         const Workspace& ws, double dt, ObjectiveGradient* grad) {
  const std::size_t T = u.size();
  if (xf.size() != T || T == 0) throw std::invalid_argument("penalized_objective: sequence lengths differ");
  std::vector<Vec5> gx;
  if (grad) {
    gx.assign(T + 1, Vec5::Zero());
    grad->controls.assign(T, Vec2::Zero());
    grad->follower.assign(T, Vec3::Zero());
  }
  double total = 0.0;
  Vec2 leader = x0.leader_pos;
  FollowerPose follower{x0.follower_pos, x0.follower_heading};
  for (std::size_t t = 0; t < T; ++t) {
    const JointState x = compose(leader, follower);
    const double barrier = barrier_cost(x, ws, p.nu);
    if (is_barrier_violated(barrier)) return kBarrierViolated;
    const CostGrad sc = state_cost(x, p.Q1, p.Q2, ws.destination);
    total += sc.value + u[t].velocity.dot(p.R * u[t].velocity) + barrier;

    if (grad) {
      const FollowerTransition tr = predict_follower_grad(x, u[t], w, dt);
      const Vec3 r = follower_residual(xf[t], tr.next);
      total += p.mu * r.squaredNorm();
      const Vec3 g = 2.0 * p.mu * r;
      grad->follower[t] += g;
      gx[t] += sc.dx + barrier_cost_grad(x, ws, p.nu) - tr.dx.transpose() * g;
      grad->controls[t] += (p.R + p.R.transpose()) * u[t].velocity - tr.du.transpose() * g;
    } else {
      const Vec3 r = follower_residual(xf[t], predict_follower(x, u[t], w, dt));
      total += p.mu * r.squaredNorm();
    }
    leader = leader_step(leader, u[t], dt);
    follower = xf[t];
  }
  const JointState xT = compose(leader, follower);
  const double barrier = barrier_cost(xT, ws, p.nu);
  if (is_barrier_violated(barrier)) return kBarrierViolated;
  const CostGrad tc = state_cost(xT, p.Qf1, p.Qf2, ws.destination);
  total += tc.value + barrier;

  if (grad) {
    gx[T] += tc.dx + barrier_cost_grad(xT, ws, p.nu);
    // Follower states after x0 are decision variables.
    for (std::size_t t = 1; t <= T; ++t) grad->follower[t - 1] += gx[t].tail<3>();
    // Leader positions are eliminated: p^L_t depends on u_s for every s < t.
    Vec2 tail = Vec2::Zero();
    for (std::size_t t = T; t >= 1; --t) {
      tail += gx[t].head<2>();
      grad->controls[t - 1] += dt * tail;
    }
    grad->value = total;
  }
  return total;
}

// Follower poses x^F_1..x^F_T of the model-driven rollout, headings unwrapped.
std::vector<FollowerPose> model_rollout(const JointState& x0, const std::vector<LeaderControl>& u,
                                        const MlpParams& w, double dt) {
  std::vector<FollowerPose> out;
  out.reserve(u.size());
  Vec2 leader = x0.leader_pos;
  FollowerPose f{x0.follower_pos, x0.follower_heading};
  for (const auto& ut : u) {
    const Vec3 n = predict_follower(compose(leader, f), ut, w, dt);
    f = {n.head<2>(), n(2)};
    out.push_back(f);
    leader = leader_step(leader, ut, dt);
  }
  return out;
}

double rollout_objective(const JointState& x0, const std::vector<LeaderControl>& u, const MlpParams& w,
                         const LeaderCostParams& p, const Workspace& ws, double dt) {
  return relaxed_objective(u, model_rollout(x0, u, w, dt), x0, w, p, ws, dt, nullptr);
}

// Flat decision vector: controls (2T) followed by follower poses (3T).
struct Packing {
  std::size_t T;
  Eigen::VectorXd pack(const std::vector<LeaderControl>& u, const std::vector<FollowerPose>& xf) const {
    Eigen::VectorXd z(5 * T);
    for (std::size_t t = 0; t < T; ++t) {
      z.segment<2>(2 * t) = u[t].velocity;
      z.segment<2>(2 * T + 3 * t) = xf[t].position;
      z(2 * T + 3 * t + 2) = xf[t].heading;
    }
    return z;
  }
  Eigen::VectorXd pack_grad(const ObjectiveGradient& g) const {
    Eigen::VectorXd z(5 * T);
    for (std::size_t t = 0; t < T; ++t) {
      z.segment<2>(2 * t) = g.controls[t];
      z.segment<3>(2 * T + 3 * t) = g.follower[t];
    }
    return z;
  }
  void unpack(const Eigen::VectorXd& z, std::vector<LeaderControl>& u, std::vector<FollowerPose>& xf) const {
    u.resize(T);
    xf.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
      u[t].velocity = z.segment<2>(2 * t);
      xf[t].position = z.segment<2>(2 * T + 3 * t);
      xf[t].heading = z(2 * T + 3 * t + 2);
    }
  }
  void project(Eigen::VectorXd& z, double u_max) const {
    z.head(2 * T) = z.head(2 * T).cwiseMax(-u_max).cwiseMin(u_max);
  }
};

PlanResult make_plan(const JointState& x0, const std::vector<LeaderControl>& u,
                     const std::vector<FollowerPose>& xf, double objective, double dt) {
  PlanResult plan;
  plan.controls = u;
  plan.objective = objective;
  plan.predicted.reserve(u.size() + 1);
  plan.predicted.push_back(x0);
  Vec2 leader = x0.leader_pos;
  for (std::size_t t = 0; t < u.size(); ++t) {
    leader = leader_step(leader, u[t], dt);
    plan.predicted.push_back({leader, xf[t].position, wrap_angle(xf[t].heading)});
  }
  return plan;
}

}  // namespace

double leader_stage_cost(const JointState& x, const LeaderControl& uL, const LeaderCostParams& params,
                         const Vec2& destination) {
  return state_cost(x, params.Q1, params.Q2, destination).value + uL.velocity.dot(params.R * uL.velocity);
}

double leader_terminal_cost(const JointState& x, const LeaderCostParams& params, const Vec2& destination) {
  return state_cost(x, params.Qf1, params.Qf2, destination).value;
}

double penalized_objective(const std::vector<LeaderControl>& controls,
                           const std::vector<FollowerPose>& follower_seq, const JointState& x0,
                           const MlpParams& w, const LeaderCostParams& params, const Workspace& ws,
                           const PlanConfig& cfg) {
  return relaxed_objective(controls, follower_seq, x0, w, params, ws, cfg.dynamics.dt, nullptr);
}

ObjectiveGradient penalized_objective_grad(const std::vector<LeaderControl>& controls,
                                           const std::vector<FollowerPose>& follower_seq,
                                           const JointState& x0, const MlpParams& w,
                                           const LeaderCostParams& params, const Workspace& ws,
                                           const PlanConfig& cfg) {
  ObjectiveGradient g;
  const double v = relaxed_objective(controls, follower_seq, x0, w, params, ws, cfg.dynamics.dt, &g);
  if (is_barrier_violated(v)) throw std::domain_error("penalized_objective_grad: barrier violated");
  return g;
}

std::vector<JointState> rollout(const JointState& x0, const std::vector<LeaderControl>& controls,
                                const MlpParams& w, double dt) {
  const std::vector<FollowerPose> f = model_rollout(x0, controls, w, dt);
  return make_plan(x0, controls, f, 0.0, dt).predicted;
}

PlanResult solve_ocp(const JointState& x0, const MlpParams& w, const LeaderCostParams& params,
                     const PlanConfig& cfg, const Workspace& ws,
                     const std::optional<PlanResult>& warm_start) {
  if (is_barrier_violated(barrier_cost(x0, ws, params.nu))) {
    throw InfeasibleStart("solve_ocp: initial state is inside a safety region");
  }
  const auto T = static_cast<std::size_t>(cfg.horizon_steps);
  const double dt = cfg.dynamics.dt;
  const double u_max = cfg.dynamics.u_max;
  const Packing pk{T};

  // Candidate initializations; the cheapest feasible one wins. Holding both
  // agents in place is always feasible.
  std::vector<std::pair<std::vector<LeaderControl>, std::vector<FollowerPose>>> inits;
  if (warm_start && !warm_start->controls.empty()) {
    std::vector<LeaderControl> u(T);
    const auto& prev = warm_start->controls;
    for (std::size_t t = 0; t < T; ++t) u[t] = clamp_leader(prev[std::min(t + 1, prev.size() - 1)], u_max);
    inits.emplace_back(u, model_rollout(x0, u, w, dt));
  }
  const std::vector<LeaderControl> zero(T);
  inits.emplace_back(zero, model_rollout(x0, zero, w, dt));
  inits.emplace_back(zero, std::vector<FollowerPose>(T, FollowerPose{x0.follower_pos, x0.follower_heading}));

  Eigen::VectorXd z;
  double f = kBarrierViolated;
  for (const auto& [u, xf] : inits) {
    const double v = relaxed_objective(u, xf, x0, w, params, ws, dt, nullptr);
    if (v < f) {
      f = v;
      z = pk.pack(u, xf);
    }
  }

  std::vector<LeaderControl> u;
  std::vector<FollowerPose> xf;
  auto value_grad = [&](const Eigen::VectorXd& zz, Eigen::VectorXd& g) {
    pk.unpack(zz, u, xf);
    ObjectiveGradient og;
    const double v = relaxed_objective(u, xf, x0, w, params, ws, dt, &og);
    g = pk.pack_grad(og);
    return v;
  };
  auto value = [&](const Eigen::VectorXd& zz) {
    pk.unpack(zz, u, xf);
    return relaxed_objective(u, xf, x0, w, params, ws, dt, nullptr);
  };

  Eigen::VectorXd g;
  f = value_grad(z, g);
  double step = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
  int it = 0;
  for (; it < cfg.ocp_max_iterations; ++it) {
    Eigen::VectorXd pg = z - g;
    pk.project(pg, u_max);
    if ((pg - z).lpNorm<Eigen::Infinity>() < cfg.ocp_tolerance) break;

    Eigen::VectorXd d = z - step * g;
    pk.project(d, u_max);
    d -= z;
    const double slope = g.dot(d);
    double lambda = 1.0;
    bool accepted = false;
    Eigen::VectorXd zn;
    double fn = kBarrierViolated;
    for (int ls = 0; ls < 40; ++ls) {
      zn = z + lambda * d;
      fn = value(zn);
      if (fn <= f + 1e-4 * lambda * slope) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;

    Eigen::VectorXd gn;
    const double fcheck = value_grad(zn, gn);
    const Eigen::VectorXd s = zn - z, y = gn - g;
    const double sy = s.dot(y);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-10, 1e4) : 1.0;
    z = std::move(zn);
    f = std::min(fn, fcheck);
    g = std::move(gn);
  }

  pk.unpack(z, u, xf);
  PlanResult plan = make_plan(x0, u, xf, value(z), dt);
  plan.iterations = it;
  return plan;
}

std::vector<Vec5> costates(const JointState& x0, const std::vector<LeaderControl>& controls,
                           const MlpParams& w, const LeaderCostParams& params, const Workspace& ws,
                           const PlanConfig& cfg) {
  const std::size_t T = controls.size();
  const double dt = cfg.dynamics.dt;
  const std::vector<FollowerPose> f = model_rollout(x0, controls, w, dt);
  std::vector<JointState> xs;
  xs.reserve(T + 1);
  xs.push_back(x0);
  Vec2 leader = x0.leader_pos;
  for (std::size_t t = 0; t < T; ++t) {
    leader = leader_step(leader, controls[t], dt);
    xs.push_back(compose(leader, f[t]));
  }
  std::vector<Vec5> lambda(T);
  lambda[T - 1] = state_cost(xs[T], params.Qf1, params.Qf2, ws.destination).dx +
                  barrier_cost_grad(xs[T], ws, params.nu);
  for (std::size_t t = T - 1; t >= 1; --t) {
    const FollowerTransition tr = predict_follower_grad(xs[t], controls[t], w, dt);
    Mat5 A = Mat5::Zero();
    A.topLeftCorner<2, 2>().setIdentity();
    A.bottomRows<3>() = tr.dx;
    lambda[t - 1] = state_cost(xs[t], params.Q1, params.Q2, ws.destination).dx +
                    barrier_cost_grad(xs[t], ws, params.nu) + A.transpose() * lambda[t];
  }
  return lambda;
}

namespace {

// Projected gradient with backtracking on H_t(u) = ||u||_R^2 + lambda^T f(x_t, u)
// (terms independent of u dropped).
LeaderControl minimize_hamiltonian(const JointState& x, const LeaderControl& start, const Vec5& lambda,
                                   const MlpParams& w, const LeaderCostParams& p, const PlanConfig& cfg) {
  const double dt = cfg.dynamics.dt;
  const double u_max = cfg.dynamics.u_max;
  auto value = [&](const Vec2& u) {
    const Vec3 fn = predict_follower(x, {u}, w, dt);
    return u.dot(p.R * u) + lambda.head<2>().dot(x.leader_pos + u * dt) + lambda.tail<3>().dot(fn);
  };
  auto gradient = [&](const Vec2& u) {
    const FollowerTransition tr = predict_follower_grad(x, {u}, w, dt);
    return Vec2((p.R + p.R.transpose()) * u + dt * lambda.head<2>() + tr.du.transpose() * lambda.tail<3>());
  };
  Vec2 u = start.velocity;
  double h = value(u);
  double step = 0.1;
  for (int it = 0; it < cfg.hamiltonian_iterations; ++it) {
    const Vec2 g = gradient(u);
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Vec2 cand = (u - step * g).cwiseMax(-u_max).cwiseMin(u_max);
      if ((cand - u).squaredNorm() < 1e-24) break;
      const double hc = value(cand);
      if (hc < h - 1e-4 * g.dot(u - cand)) {
        u = cand;
        h = hc;
        moved = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {u};
}

}  // namespace

RefineResult pmp_refine(const PlanResult& plan, const JointState& x0, const MlpParams& w,
                        const LeaderCostParams& params, const PlanConfig& cfg, const Workspace& ws) {
  const double dt = cfg.dynamics.dt;
  RefineResult out;
  out.plan = plan;
  std::vector<LeaderControl> u = plan.controls;
  double current = rollout_objective(x0, u, w, params, ws, dt);
  out.input_objective = current;
  if (is_barrier_violated(current) || u.empty()) return out;

  const std::size_t T = u.size();
  bool accepted_any = false;
  for (int sweep = 0; sweep < cfg.pmp_max_sweeps; ++sweep) {
    ++out.sweeps;
    const std::vector<Vec5> lambda = costates(x0, u, w, params, ws, cfg);
    const std::vector<JointState> xs = [&] {
      std::vector<JointState> s{x0};
      const auto f = model_rollout(x0, u, w, dt);
      Vec2 leader = x0.leader_pos;
      for (std::size_t t = 0; t + 1 < T; ++t) {
        leader = leader_step(leader, u[t], dt);
        s.push_back(compose(leader, f[t]));
      }
      return s;
    }();
    std::vector<LeaderControl> target(T);
    for (std::size_t t = 0; t < T; ++t) target[t] = minimize_hamiltonian(xs[t], u[t], lambda[t], w, params, cfg);

    // Damped update toward the Hamiltonian minimizers; reject the sweep when no
    // damping factor lowers the objective.
    bool accepted = false;
    double change = 0.0;
    for (double tau = 1.0; tau >= 1.0 / 1024.0; tau *= 0.5) {
      std::vector<LeaderControl> cand(T);
      for (std::size_t t = 0; t < T; ++t) cand[t].velocity = u[t].velocity + tau * (target[t].velocity - u[t].velocity);
      const double j = rollout_objective(x0, cand, w, params, ws, dt);
      if (j < current) {
        change = 0.0;
        for (std::size_t t = 0; t < T; ++t) change += (cand[t].velocity - u[t].velocity).norm();
        u = std::move(cand);
        current = j;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    accepted_any = true;
    if (change < cfg.pmp_tolerance) break;
  }

  if (accepted_any) {
    out.plan = make_plan(x0, u, model_rollout(x0, u, w, dt), current, dt);
    out.plan.iterations = plan.iterations;
    out.plan.refined = true;
  }
  return out;
}

Vec2 default_leader_start(const Vec2& follower, const Workspace& ws, const PlanConfig& cfg) {
  const Vec2 preferred = follower + cfg.leader_offset;
  if (is_feasible(preferred, ws)) return preferred;
  const double base_r = std::max(cfg.leader_offset.norm(), 0.1);
  const double base_a = std::atan2(cfg.leader_offset.y(), cfg.leader_offset.x());
  for (int ring = 1; ring <= 40; ++ring) {
    for (int k = 0; k < 32; ++k) {
      const double a = base_a + 2.0 * kPi * k / 32.0;
      const Vec2 p = follower + ring * base_r * Vec2(std::cos(a), std::sin(a));
      if (is_feasible(p, ws)) return p;
    }
  }
  throw std::runtime_error("no feasible leader start near the follower");
}

namespace {

bool at_goal(const Vec2& p, const Workspace& ws) { return (p - ws.destination).norm() <= ws.goal_radius; }

// The relaxed solve can return controls whose b-rollout is poor or even
// infeasible. Refinement starts from the cheapest of those controls, the
// shifted previous plan, and zero controls, all scored on the b-rollout.
PlanResult refine_start(const PlanResult& plan, const std::optional<PlanResult>& previous,
                        const JointState& x, const MlpParams& w, const LeaderCostParams& params,
                        const PlanConfig& cfg, const Workspace& ws) {
  const double dt = cfg.dynamics.dt;
  const std::size_t T = plan.controls.size();
  std::vector<std::vector<LeaderControl>> candidates{plan.controls};
  if (previous && !previous->controls.empty()) {
    std::vector<LeaderControl> u(T);
    const auto& prev = previous->controls;
    for (std::size_t t = 0; t < T; ++t) u[t] = prev[std::min(t + 1, prev.size() - 1)];
    candidates.push_back(std::move(u));
  }
  candidates.emplace_back(T);
  // Constant-velocity probes in 8 directions at full and half speed.
  for (int k = 0; k < 8; ++k) {
    const double a = 2.0 * kPi * k / 8.0;
    for (double scale : {1.0, 0.5}) {
      const Vec2 v = scale * cfg.dynamics.u_max * Vec2(std::cos(a), std::sin(a));
      candidates.emplace_back(T, clamp_leader(LeaderControl{v}, cfg.dynamics.u_max));
    }
  }

  const std::vector<LeaderControl>* best = &candidates.front();
  double best_j = rollout_objective(x, *best, w, params, ws, dt);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double j = rollout_objective(x, candidates[i], w, params, ws, dt);
    if (j < best_j) {
      best_j = j;
      best = &candidates[i];
    }
  }
  if (best == &candidates.front()) return plan;
  PlanResult start = make_plan(x, *best, model_rollout(x, *best, w, dt), best_j, dt);
  start.iterations = plan.iterations;
  return start;
}

}  // namespace

Trajectory guide(const FollowerType& type, const JointState& x_init, const MlpParams& w,
                 const PlanConfig& cfg, const LeaderCostParams& params, const Workspace& ws) {
  cfg.validate();
  params.validate();
  if (is_barrier_violated(barrier_cost(x_init, ws, params.nu))) {
    throw InfeasibleStart("guide: initial state is inside a safety region");
  }
  const double dt = cfg.dynamics.dt;
  Trajectory traj;
  traj.states.push_back(x_init);
  JointState x = x_init;
  std::optional<PlanResult> warm;
  traj.reason = Termination::Timeout;
  if (at_goal(x.follower_pos, ws)) {
    traj.reason = Termination::Reached;
  } else {
    for (int t = 0; t < cfg.max_time_steps; ++t) {
      const PlanResult plan = solve_ocp(x, w, params, cfg, ws, warm);
      const RefineResult ref = pmp_refine(refine_start(plan, warm, x, w, params, cfg, ws), x, w, params, cfg, ws);
      const LeaderControl uL = clamp_leader(ref.plan.controls.front(), cfg.dynamics.u_max);

      StepDiagnostics diag;
      diag.t = t;
      diag.ocp_objective = plan.objective;
      diag.pre_refine_objective = ref.input_objective;
      diag.refined_objective = ref.plan.refined ? ref.plan.objective : ref.input_objective;
      diag.ocp_iterations = plan.iterations;
      diag.pmp_sweeps = ref.sweeps;
      traj.diagnostics.push_back(diag);

      FollowerControl uF;
      try {
        uF = best_response(x, uL, type, ws, dt);
      } catch (const FollowerTrapped&) {
        traj.reason = Termination::Trapped;
        break;
      }
      traj.stage_costs.push_back(leader_stage_cost(x, uL, params, ws.destination));
      x = joint_step(x, uL, uF, dt);
      traj.leader_controls.push_back(uL);
      traj.follower_controls.push_back(uF);
      traj.states.push_back(x);
      warm = ref.plan;
      if (at_goal(x.follower_pos, ws)) {
        traj.reason = Termination::Reached;
        break;
      }
    }
  }
  traj.stage_costs.push_back(leader_terminal_cost(x, params, ws.destination));
  return traj;
}

Trajectory run_unguided(const FollowerType& type, const FollowerPose& start, const PlanConfig& cfg,
                        const Workspace& ws) {
  cfg.validate();
  const double dt = cfg.dynamics.dt;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const Vec2 no_leader(nan, nan);
  Trajectory traj;
  traj.has_leader = false;
  JointState x{no_leader, start.position, start.heading};
  traj.states.push_back(x);
  traj.reason = Termination::Timeout;
  if (at_goal(x.follower_pos, ws)) {
    traj.reason = Termination::Reached;
  } else {
    for (int t = 0; t < cfg.max_time_steps; ++t) {
      FollowerControl uF;
      try {
        uF = myopic_policy(x, type, ws, dt);
      } catch (const FollowerTrapped&) {
        traj.reason = Termination::Trapped;
        break;
      }
      const LeaderControl uL{no_leader};
      const JointState next = joint_step(x, uL, uF, dt);
      traj.stage_costs.push_back(myopic_cost(uF, x, type, ws, dt));
      traj.leader_controls.push_back(uL);
      traj.follower_controls.push_back(uF);
      traj.states.push_back(next);
      const bool stationary = next.follower_pos == x.follower_pos &&
                              next.follower_heading == x.follower_heading && uF.speed == 0.0 &&
                              uF.turn_rate == 0.0;
      x = next;
      if (at_goal(x.follower_pos, ws)) {
        traj.reason = Termination::Reached;
        break;
      }
      if (stationary) {
        traj.reason = Termination::Trapped;
        break;
      }
    }
  }
  traj.stage_costs.push_back(0.0);
  return traj;
}

double replay_error(const Trajectory& traj, double dt) {
  double worst = 0.0;
  for (std::size_t t = 0; t < traj.steps(); ++t) {
    const JointState& x = traj.states[t];
    const JointState& recorded = traj.states[t + 1];
    const FollowerPose f = follower_step(FollowerPose{x.follower_pos, x.follower_heading},
                                         traj.follower_controls[t], dt);
    worst = std::max(worst, (f.position - recorded.follower_pos).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(wrap_angle(f.heading - recorded.follower_heading)));
    if (traj.has_leader) {
      const Vec2 l = leader_step(x.leader_pos, traj.leader_controls[t], dt);
      worst = std::max(worst, (l - recorded.leader_pos).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

std::size_t safety_violations(const Trajectory& traj, const Workspace& ws) {
  std::size_t n = 0;
  for (const auto& x : traj.states) {
    if (!is_clear(x.follower_pos, ws) || (traj.has_leader && !is_clear(x.leader_pos, ws))) ++n;
  }
  return n;
}

}  // namespace sgmeta
