#pragma once

#include "sgmeta/dynamics.hpp"
#include "sgmeta/env.hpp"
#include "sgmeta/follower.hpp"
#include "sgmeta/meta.hpp"
#include "sgmeta/planner.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgmeta {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Everything a run needs. plan.dynamics always mirrors dynamics.
struct RunConfig {
  Workspace workspace = Workspace::default_layout();
  DynamicsParams dynamics;
  LeaderCostParams leader_cost;
  std::vector<FollowerType> types = default_follower_types();
  TypeDistribution distribution = default_type_distribution();
  MetaConfig meta;
  PlanConfig plan;
  std::uint64_t seed = 0;

  void validate() const;
  const FollowerType& type(int id) const;  // throws ConfigError for an unknown id
};

// Named random streams of a run, all derived from RunConfig::seed.
enum class SeedStream : std::uint64_t { Meta = 1, OutputAve = 2, ParamAve = 3, Adapt = 4 };
std::uint64_t seed_for(const RunConfig& cfg, SeedStream stream);

// Task adaptation for one type on the run's adaptation data; eval-adapt uses the same samples.
AdaptResult adapt_for_type(const MlpParams& w, const FollowerType& type, const RunConfig& cfg);

// Start state for a follower position: configured heading, default leader start.
JointState start_state(const Vec2& follower, const RunConfig& cfg);

// Pretty-printed JSON holding every field.
std::string to_json(const RunConfig& cfg);

// Missing keys take defaults; unknown keys and malformed values throw ConfigError.
RunConfig run_config_from_json(const std::string& text);

// Reads and validates a config file; a missing file throws ConfigError naming
// the path. SGMETA_SEED, when set, replaces the seed.
RunConfig load_run_config(const std::filesystem::path& path);

// Applies SGMETA_SEED if present; throws ConfigError when it is not an integer.
void apply_seed_override(RunConfig& cfg);

}  // namespace sgmeta
