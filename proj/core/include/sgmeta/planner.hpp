#pragma once

#include "sgmeta/dynamics.hpp"
#include "sgmeta/env.hpp"
#include "sgmeta/follower.hpp"
#include "sgmeta/mlp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sgmeta {

// Leader stage cost ||x - x^d||^2_Q1 + ||p^L - p^F||^2_Q2 + ||u^L||^2_R and
// terminal cost with (Qf1, Qf2), plus the barrier and dynamics penalty weights.
struct LeaderCostParams {
  Mat5 Q1 = 2.0 * Mat5::Identity();
  Mat2 Q2 = 5.0 * Mat2::Identity();
  Mat2 R = Mat2::Identity();
  Mat5 Qf1 = 10.0 * Mat5::Identity();
  Mat2 Qf2 = 25.0 * Mat2::Identity();
  double nu = 0.5;  // barrier weight
  double mu = 50.0;  // follower-dynamics penalty weight

  void validate() const;
};

struct PlanConfig {
  DynamicsParams dynamics;
  int horizon_steps = 10;
  int max_time_steps = 150;

  // Penalized solve (spectral projected gradient).
  int ocp_max_iterations = 300;
  double ocp_tolerance = 1e-4;  // projected-gradient infinity norm

  // PMP refinement.
  int pmp_max_sweeps = 20;
  double pmp_tolerance = 1e-4;   // total control change that ends the sweeps
  int hamiltonian_iterations = 50;

  Vec2 leader_offset = Vec2(0.5, 0.5);  // leader start relative to the follower
  double follower_heading = 0.0;        // heading used when a start is given as a position

  void validate() const;
};

struct PlanResult {
  std::vector<LeaderControl> controls;  // T
  std::vector<JointState> predicted;    // T + 1, predicted[0] is the query state
  double objective = 0.0;
  bool refined = false;
  int iterations = 0;
};

enum class Termination { Reached, Timeout, Trapped };
std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct StepDiagnostics {
  int t = 0;
  double ocp_objective = 0.0;      // solver objective (free follower states)
  double pre_refine_objective = 0.0;  // objective of the solver's controls on the b-rollout
  double refined_objective = 0.0;
  int ocp_iterations = 0;
  int pmp_sweeps = 0;
};

struct Trajectory {
  std::vector<JointState> states;                // N + 1
  std::vector<LeaderControl> leader_controls;    // N
  std::vector<FollowerControl> follower_controls;  // N
  std::vector<double> stage_costs;               // N + 1, last entry terminal or 0
  Termination reason = Termination::Timeout;
  bool has_leader = true;
  std::vector<StepDiagnostics> diagnostics;      // one per planning step (guided only)

  std::size_t steps() const { return leader_controls.size(); }
};

double leader_stage_cost(const JointState& x, const LeaderControl& uL, const LeaderCostParams& params,
                         const Vec2& destination);
double leader_terminal_cost(const JointState& x, const LeaderCostParams& params, const Vec2& destination);

// Objective of the relaxed problem where the follower states after x0 are free
// and tied to b through mu * ||x^F_{t+1} - f^F(x_t, u^L_t, b(x_t, u^L_t))||^2.
// follower_seq holds x^F_1..x^F_T. Returns kBarrierViolated when any state
// touches a safety region.
double penalized_objective(const std::vector<LeaderControl>& controls,
                           const std::vector<FollowerPose>& follower_seq, const JointState& x0,
                           const MlpParams& w, const LeaderCostParams& params, const Workspace& ws,
                           const PlanConfig& cfg);

struct ObjectiveGradient {
  double value = 0.0;
  std::vector<Vec2> controls;   // d/d u^L_t
  std::vector<Vec3> follower;   // d/d (p^F_{t+1}, phi_{t+1})
};
ObjectiveGradient penalized_objective_grad(const std::vector<LeaderControl>& controls,
                                           const std::vector<FollowerPose>& follower_seq,
                                           const JointState& x0, const MlpParams& w,
                                           const LeaderCostParams& params, const Workspace& ws,
                                           const PlanConfig& cfg);

// States x_0..x_T produced by the leader controls with the follower driven by b.
std::vector<JointState> rollout(const JointState& x0, const std::vector<LeaderControl>& controls,
                                const MlpParams& w, double dt);

class InfeasibleStart : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Projected descent on penalized_objective over (controls, follower states).
// Throws InfeasibleStart if x0 is inside a safety region.
PlanResult solve_ocp(const JointState& x0, const MlpParams& w, const LeaderCostParams& params,
                     const PlanConfig& cfg, const Workspace& ws,
                     const std::optional<PlanResult>& warm_start = std::nullopt);

// Costates lambda_1..lambda_T along the b-rollout of the given controls
// (index 0 holds lambda_1).
std::vector<Vec5> costates(const JointState& x0, const std::vector<LeaderControl>& controls,
                           const MlpParams& w, const LeaderCostParams& params, const Workspace& ws,
                           const PlanConfig& cfg);

struct RefineResult {
  PlanResult plan;
  double input_objective = 0.0;  // objective of the input controls on the b-rollout
  int sweeps = 0;
};

// Forward / costate / Hamiltonian-minimization sweeps on the exact b-driven
// dynamics. A sweep is accepted only if it lowers the objective, so the result
// never scores worse than the input controls.
RefineResult pmp_refine(const PlanResult& plan, const JointState& x0, const MlpParams& w,
                        const LeaderCostParams& params, const PlanConfig& cfg, const Workspace& ws);

// Default leader start: follower position plus cfg.leader_offset, moved to the
// nearest feasible point on rings around the follower when needed.
Vec2 default_leader_start(const Vec2& follower, const Workspace& ws, const PlanConfig& cfg);

// Receding-horizon guidance of the true follower using the model w.
Trajectory guide(const FollowerType& type, const JointState& x_init, const MlpParams& w,
                 const PlanConfig& cfg, const LeaderCostParams& params, const Workspace& ws);

// Zero-guidance follower running its myopic policy.
Trajectory run_unguided(const FollowerType& type, const FollowerPose& start, const PlanConfig& cfg,
                        const Workspace& ws);

// Largest deviation between recorded states and a replay of the recorded
// controls through joint_step (follower-only when the trajectory has no leader).
double replay_error(const Trajectory& traj, double dt);

// Number of recorded states with an agent at or inside a safety region.
std::size_t safety_violations(const Trajectory& traj, const Workspace& ws);

}  // namespace sgmeta
