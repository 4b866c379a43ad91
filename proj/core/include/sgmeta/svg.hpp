#pragma once

#include "sgmeta/env.hpp"
#include "sgmeta/follower.hpp"
#include "sgmeta/planner.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sgmeta {

struct SvgOptions {
  double pixels_per_meter = 50.0;
  // When set, cells are shaded by this type's sensing cost sum_j h(c4 (dist_j - d_j)).
  std::optional<FollowerType> sensing_type;
  int shading_cells = 80;  // per axis
  std::string title;
};

// Workspace, safety regions, destination marker and trajectories. Leader
// paths are drawn dashed blue, follower paths solid orange.
std::string render_svg(const Workspace& ws, const std::vector<Trajectory>& trajectories,
                       const SvgOptions& opts = {});

}  // namespace sgmeta
