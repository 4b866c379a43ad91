#include "sgmeta/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace sgmeta {

using Json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw FormatError("not a number: '" + s + "'");
  return v;
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool next_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

void expect_header(std::istream& is, const std::string& header) {
  std::string line;
  if (!next_line(is, line) || line != header) throw FormatError("expected CSV header '" + header + "'");
}

}  // namespace

void write_checkpoint(std::ostream& os, const MlpParams& w, const CheckpointInfo& info) {
  if (!w.has_valid_shapes()) throw FormatError("checkpoint: parameters have the wrong shape");
  Json weights = Json::array();
  Json biases = Json::array();
  for (int l = 0; l < MlpParams::kLayers; ++l) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < w.weights[l].rows(); ++i) {
      Json row = Json::array();
      for (Eigen::Index j = 0; j < w.weights[l].cols(); ++j) row.push_back(w.weights[l](i, j));
      rows.push_back(std::move(row));
    }
    weights.push_back(std::move(rows));
    Json b = Json::array();
    for (Eigen::Index i = 0; i < w.biases[l].size(); ++i) b.push_back(w.biases[l](i));
    biases.push_back(std::move(b));
  }
  Json j = {{"arch", MlpParams::kArch},
            {"weights", weights},
            {"biases", biases},
            {"meta",
             {{"seed", info.seed},
              {"kind", info.kind},
              {"iterations", info.iterations},
              {"input_scale",
               {{"position", w.scaling.position},
                {"heading", w.scaling.heading},
                {"control", w.scaling.control}}}}}};
  os << j.dump() << '\n';
}

Checkpoint read_checkpoint(std::istream& is) {
  Json j;
  try {
    j = Json::parse(is);
  } catch (const Json::exception& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("arch") || !j.contains("weights") || !j.contains("biases")) {
      throw FormatError("checkpoint: missing arch, weights or biases");
    }
    if (j.at("arch").get<std::vector<int>>() !=
        std::vector<int>(MlpParams::kArch.begin(), MlpParams::kArch.end())) {
      throw FormatError("checkpoint: architecture is not 7-50-50-2");
    }
    Checkpoint ck;
    if (j.contains("meta")) {
      const Json& m = j.at("meta");
      if (m.contains("seed")) ck.info.seed = m.at("seed").get<std::uint64_t>();
      if (m.contains("kind")) ck.info.kind = m.at("kind").get<std::string>();
      if (m.contains("iterations")) ck.info.iterations = m.at("iterations").get<std::size_t>();
      if (m.contains("input_scale")) {
        const Json& s = m.at("input_scale");
        ck.params.scaling.position = s.at("position").get<double>();
        ck.params.scaling.heading = s.at("heading").get<double>();
        ck.params.scaling.control = s.at("control").get<double>();
      }
    }
    const Json& weights = j.at("weights");
    const Json& biases = j.at("biases");
    if (!weights.is_array() || weights.size() != MlpParams::kLayers || !biases.is_array() ||
        biases.size() != MlpParams::kLayers) {
      throw FormatError("checkpoint: expected 3 weight and bias blocks");
    }
    for (int l = 0; l < MlpParams::kLayers; ++l) {
      const int out = MlpParams::kArch[l + 1];
      const int in = MlpParams::kArch[l];
      const Json& rows = weights[l];
      if (!rows.is_array() || rows.size() != static_cast<std::size_t>(out)) {
        throw FormatError("checkpoint: layer " + std::to_string(l) + " has the wrong number of rows");
      }
      ck.params.weights[l].resize(out, in);
      for (int r = 0; r < out; ++r) {
        if (!rows[r].is_array() || rows[r].size() != static_cast<std::size_t>(in)) {
          throw FormatError("checkpoint: layer " + std::to_string(l) + " has the wrong number of columns");
        }
        for (int c = 0; c < in; ++c) ck.params.weights[l](r, c) = rows[r][c].get<double>();
      }
      const Json& b = biases[l];
      if (!b.is_array() || b.size() != static_cast<std::size_t>(out)) {
        throw FormatError("checkpoint: bias " + std::to_string(l) + " has the wrong length");
      }
      ck.params.biases[l].resize(out);
      for (int r = 0; r < out; ++r) ck.params.biases[l](r) = b[r].get<double>();
    }
    if (!ck.params.all_finite()) throw FormatError("checkpoint: non-finite parameter");
    return ck;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  os << "t,pLx,pLy,pFx,pFy,phi,uLx,uLy,vF,wF,stage_cost,reason\n";
  const std::size_t n = traj.steps();
  for (std::size_t t = 0; t <= n; ++t) {
    const JointState& x = traj.states.at(t);
    const bool has_u = t < n;
    const Vec2 uL = has_u && traj.has_leader ? traj.leader_controls[t].velocity : Vec2(nan, nan);
    const FollowerControl uF = has_u ? traj.follower_controls[t] : FollowerControl{nan, nan};
    const Vec2 pL = traj.has_leader ? x.leader_pos : Vec2(nan, nan);
    const double cost = t < traj.stage_costs.size() ? traj.stage_costs[t] : nan;
    os << t << ',' << format_double(pL.x()) << ',' << format_double(pL.y()) << ','
       << format_double(x.follower_pos.x()) << ',' << format_double(x.follower_pos.y()) << ','
       << format_double(x.follower_heading) << ',' << format_double(uL.x()) << ','
       << format_double(uL.y()) << ',' << format_double(uF.speed) << ','
       << format_double(uF.turn_rate) << ',' << format_double(cost) << ','
       << (t == n ? to_string(traj.reason) : "") << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  expect_header(is, "t,pLx,pLy,pFx,pFy,phi,uLx,uLy,vF,wF,stage_cost,reason");
  Trajectory traj;
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (next_line(is, line)) {
    auto cells = split_row(line);
    if (cells.size() != 12) throw FormatError("trajectory row has " + std::to_string(cells.size()) + " fields");
    if (std::stoul(cells[0]) != rows.size()) throw FormatError("trajectory rows are not consecutive");
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw FormatError("trajectory has no rows");
  traj.has_leader = !std::isnan(parse_double(rows.front()[1]));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto& r = rows[t];
    JointState x{{parse_double(r[1]), parse_double(r[2])}, {parse_double(r[3]), parse_double(r[4])},
                 parse_double(r[5])};
    traj.states.push_back(x);
    traj.stage_costs.push_back(parse_double(r[10]));
    if (t + 1 < rows.size()) {
      traj.leader_controls.push_back({{parse_double(r[6]), parse_double(r[7])}});
      traj.follower_controls.push_back({parse_double(r[8]), parse_double(r[9])});
      if (!r[11].empty()) throw FormatError("termination reason before the final row");
    } else {
      try {
        traj.reason = termination_from_string(r[11]);
      } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
      }
    }
  }
  return traj;
}

void write_loss_trace_csv(std::ostream& os, const TrainingTrace& trace) {
  os << "iter,mean_outer_loss\n";
  for (std::size_t i = 0; i < trace.loss.size(); ++i) os << i << ',' << format_double(trace.loss[i]) << '\n';
}

TrainingTrace read_loss_trace_csv(std::istream& is) {
  expect_header(is, "iter,mean_outer_loss");
  TrainingTrace trace;
  std::string line;
  while (next_line(is, line)) {
    const auto cells = split_row(line);
    if (cells.size() != 2) throw FormatError("loss trace row must have 2 fields");
    trace.loss.push_back(parse_double(cells[1]));
  }
  return trace;
}

void write_adapt_curve_csv(std::ostream& os, const std::vector<double>& curve) {
  os << "step,mse\n";
  for (std::size_t i = 0; i < curve.size(); ++i) os << i << ',' << format_double(curve[i]) << '\n';
}

std::vector<double> read_adapt_curve_csv(std::istream& is) {
  expect_header(is, "step,mse");
  std::vector<double> curve;
  std::string line;
  while (next_line(is, line)) {
    const auto cells = split_row(line);
    if (cells.size() != 2) throw FormatError("adaptation curve row must have 2 fields");
    curve.push_back(parse_double(cells[1]));
  }
  return curve;
}

void write_diagnostics_json(std::ostream& os, const std::vector<StepDiagnostics>& diag) {
  auto num = [](double v) -> Json {
    if (std::isfinite(v)) return v;
    return format_double(v);
  };
  Json arr = Json::array();
  for (const auto& d : diag) {
    arr.push_back({{"t", d.t},
                   {"ocp_objective", num(d.ocp_objective)},
                   {"pre_refine_objective", num(d.pre_refine_objective)},
                   {"refined_objective", num(d.refined_objective)},
                   {"ocp_iterations", d.ocp_iterations},
                   {"pmp_sweeps", d.pmp_sweeps}});
  }
  os << arr.dump(2) << '\n';
}

}  // namespace sgmeta
