#pragma once

#include "sgmeta/meta.hpp"
#include "sgmeta/mlp.hpp"
#include "sgmeta/planner.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgmeta {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointInfo {
  std::uint64_t seed = 0;
  std::string kind = "meta";  // meta, adapted, output-ave, param-ave, param-ave-component
  std::size_t iterations = 0;
};

struct Checkpoint {
  MlpParams params;
  CheckpointInfo info;
};

// {"arch": [7,50,50,2], "weights": [...], "biases": [...], "meta": {...}}.
// Doubles are written with round-trip precision, so save/load is exact.
void write_checkpoint(std::ostream& os, const MlpParams& w, const CheckpointInfo& info);
// Rejects any architecture or shape mismatch and non-finite values.
Checkpoint read_checkpoint(std::istream& is);

// Header t,pLx,pLy,pFx,pFy,phi,uLx,uLy,vF,wF,stage_cost,reason. One row per
// recorded state; controls on the final row and leader fields of unguided
// runs are nan, and only the final row carries the termination reason.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);

// Header iter,mean_outer_loss.
void write_loss_trace_csv(std::ostream& os, const TrainingTrace& trace);
TrainingTrace read_loss_trace_csv(std::istream& is);

// Header step,mse with C + 1 rows.
void write_adapt_curve_csv(std::ostream& os, const std::vector<double>& curve);
std::vector<double> read_adapt_curve_csv(std::istream& is);

// JSON array, one object per planning step.
void write_diagnostics_json(std::ostream& os, const std::vector<StepDiagnostics>& diag);

// Shortest decimal text that reads back to the same double; "nan" and
// "inf"/"-inf" for non-finite values.
std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace sgmeta
