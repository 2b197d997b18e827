#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "demosal/engine.hpp"
#include "demosal/types.hpp"

namespace demosal {

enum class ThresholdMode { kTop, kBottom };

std::string to_string(ThresholdMode mode);

/// Converts an importance map into a binary mask keeping exactly
/// round_half_even(percent/100 * cells) cells: the highest-valued cells for
/// kTop, the lowest for kBottom. Cells are ranked by (value descending,
/// cell index ascending); kBottom keeps the tail of that ranking, so the
/// top-p and bottom-(100-p) masks always partition the grid, ties included.
MaskGrid threshold_mask(const ImportanceMap& map, double percent_kept,
                        ThresholdMode mode);

struct CurvePoint {
  double percent_kept = 0.0;
  ThresholdMode mode = ThresholdMode::kTop;
  std::uint64_t seed = 0;      // derived retrain seed for this point
  ReturnStats stats;
  bool empty_trainset = false;
};

/// Retraining curves: for each percentage and each mode, build the threshold
/// mask, retrain the configured learner on the masked demos, and evaluate.
/// Point seeds derive from the percentage only, so at 100% the two modes
/// coincide bit-exactly. The map must come from the same (env, geometry,
/// demos) the config describes.
std::vector<CurvePoint> validation_curves(const ImportanceMap& map,
                                          const RunConfig& config,
                                          const std::vector<double>& percents);

struct MapDeviation {
  Eigen::MatrixXd deviation;  // element-wise |a - b| after min-max projection
  double mean = 0.0;
  double max = 0.0;
};

/// Projects both maps to [0, 1] by min-max (a constant map projects to all
/// zeros) and reports the element-wise absolute deviation. Symmetric in its
/// arguments and invariant under positive affine rescaling of either map.
MapDeviation compare_maps(const ImportanceMap& a, const ImportanceMap& b);

/// Min-max projection helper shared by compare_maps.
Eigen::MatrixXd minmax_projected(const Eigen::MatrixXd& values);

struct TransferCondition {
  std::string label;  // source_mask | target_mask | random_mask
  ReturnStats stats;
  std::vector<double> round_returns;  // adv_il target: exact return per round
};

/// Mask-transfer experiment: trains the configured (target) learner three
/// ways at the same kept-cell budget — with the top mask of `source_map`,
/// with the top mask of the target's own importance map (computed here by a
/// full engine run), and with a size-matched random mask. All three
/// conditions share one retrain seed, so identical masks give identical
/// stats.
std::vector<TransferCondition> transfer_experiment(const ImportanceMap& source_map,
                                                   double percent_kept,
                                                   const RunConfig& config);

}  // namespace demosal
