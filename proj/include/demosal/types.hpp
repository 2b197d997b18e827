#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "demosal/errors.hpp"

namespace demosal {

using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Rounding used for every cell-count quota. Ties go to even (the default
/// FP rounding mode, which this project never changes) so that a percentage
/// and its complement always produce complementary counts.
inline long round_half_even(double x) { return static_cast<long>(std::llrint(x)); }

/// One frame of a demonstration: the state observed, the action taken, and
/// the reward received. Rewards are kept for auditing only; learners never
/// see them.
struct Step {
  int state = 0;
  int action = 0;
  double reward = 0.0;
};

using Trajectory = std::vector<Step>;

/// A set of expert trajectories, all of identical length, treated as a
/// demo_count x horizon grid of frames.
struct DemoSet {
  std::string env_name;
  int horizon = 0;       // frames per trajectory
  int action_count = 0;  // actions available in the source environment
  std::vector<Trajectory> trajectories;

  int demo_count() const { return static_cast<int>(trajectories.size()); }
};

/// Maps the demo grid onto snippet cells: each of the `snippets` cells per
/// trajectory covers the same number of consecutive frames. The snippet
/// count must divide the horizon exactly.
struct GridGeometry {
  int demo_count = 0;
  int horizon = 0;
  int snippets = 0;

  GridGeometry(int demo_count_in, int horizon_in, int snippets_in)
      : demo_count(demo_count_in), horizon(horizon_in), snippets(snippets_in) {
    if (demo_count < 1) throw ConfigError("H", "demo count must be >= 1");
    if (horizon < 0) throw ConfigError("T", "horizon must be >= 0");
    if (snippets < 1) throw ConfigError("G", "snippet count must be >= 1");
    if (horizon % snippets != 0) {
      throw ConfigError("G", "snippet count " + std::to_string(snippets) +
                                 " does not divide horizon " +
                                 std::to_string(horizon));
    }
  }

  int frames_per_snippet() const { return horizon / snippets; }
  long cell_count() const { return static_cast<long>(demo_count) * snippets; }
};

struct FrameRange {
  int begin = 0;  // inclusive
  int end = 0;    // exclusive
};

/// Half-open frame range covered by one snippet. Ranges over all snippet
/// indices partition [0, horizon).
inline FrameRange snippet_frame_range(const GridGeometry& geom, int snippet_index) {
  if (snippet_index < 0 || snippet_index >= geom.snippets) {
    throw std::out_of_range("snippet index " + std::to_string(snippet_index) +
                            " outside [0, " + std::to_string(geom.snippets) + ")");
  }
  const int width = geom.frames_per_snippet();
  return {snippet_index * width, (snippet_index + 1) * width};
}

/// Binary snippet mask over the demo grid; 1 = observed, 0 = masked.
/// `keep_fraction` is the per-cell observation probability the mask was
/// sampled with (for exact-count masks this equals kept / total exactly).
struct MaskGrid {
  MaskMatrix cells;
  double keep_fraction = 1.0;

  long kept_cells() const { return cells.cast<long>().sum(); }
  long masked_cells() const { return cells.size() - kept_cells(); }
};

struct CellCount {
  long kept = 0;
  long masked = 0;
};

inline CellCount cell_count(const MaskGrid& mask) {
  const long kept = mask.kept_cells();
  return {kept, mask.cells.size() - kept};
}

/// Saliency accumulator over the snippet grid. `weighted_sums` holds the
/// running sum of mean-return-weighted masks; `normalized` divides by the
/// expected observation rate times the mask count, so each cell estimates
/// the expected return conditioned on that cell being observed.
struct ImportanceMap {
  Eigen::MatrixXd weighted_sums;
  Eigen::MatrixXd normalized;
  long n_masks = 0;
  double keep_fraction = 1.0;
  std::string provenance;
};

/// Evaluation summary over a batch of rollouts. `stddev` is the population
/// standard deviation of the per-rollout returns.
struct ReturnStats {
  std::vector<double> per_rollout;
  double mean = 0.0;
  double stddev = 0.0;
};

inline ReturnStats make_return_stats(std::vector<double> per_rollout) {
  if (per_rollout.empty()) throw ContractError("return stats need >= 1 rollout");
  ReturnStats stats;
  stats.per_rollout = std::move(per_rollout);
  const auto n = static_cast<double>(stats.per_rollout.size());
  double sum = 0.0;
  for (double r : stats.per_rollout) sum += r;
  stats.mean = sum / n;
  double sq = 0.0;
  for (double r : stats.per_rollout) sq += (r - stats.mean) * (r - stats.mean);
  stats.stddev = std::sqrt(sq / n);
  return stats;
}

/// Full experiment specification. Field names follow their role; the
/// config-file keys they map to are listed in io.hpp.
struct RunConfig {
  std::string env_name = "keydoor";
  std::map<std::string, std::string> env_params;
  std::string learner_name = "bc_tabular";
  std::map<std::string, std::string> learner_params;
  int demo_count = 20;    // H
  int horizon = 0;        // T; 0 inherits the environment's horizon
  int snippets = 10;      // G
  double level = 50.0;    // percent of cells masked per randomized mask
  int n_masks = 100;
  int n_rollouts = 20;
  std::uint64_t master_seed = 0;
  int n_workers = 0;      // 0 = one per hardware thread
  std::string out_dir = "out";
};

/// Checks the env-independent invariants. The horizon/geometry checks run in
/// the engine once the environment has resolved the final horizon.
inline void validate_config(const RunConfig& config) {
  if (config.demo_count < 1) throw ConfigError("H", "H must be >= 1");
  if (config.horizon < 0) throw ConfigError("T", "T must be >= 0");
  if (config.snippets < 1) throw ConfigError("G", "G must be >= 1");
  if (config.level >= 100.0) throw ConfigError("level", "level leaves zero kept cells");
  if (config.level < 0.0) throw ConfigError("level", "level must lie in [0, 100)");
  if (config.n_masks < 1) throw ConfigError("n_masks", "n_masks must be >= 1");
  if (config.n_rollouts < 1) throw ConfigError("n_rollouts", "n_rollouts must be >= 1");
  if (config.n_workers < 0) throw ConfigError("workers", "workers must be >= 0");
}

}  // namespace demosal
