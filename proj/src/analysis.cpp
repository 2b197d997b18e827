#include "demosal/analysis.hpp"

#include <algorithm>
#include <numeric>

#include "demosal/learners.hpp"
#include "streams.hpp"

namespace demosal {

namespace {

void check_map_matches(const ImportanceMap& map, const GridGeometry& geom) {
  if (map.normalized.rows() != geom.demo_count ||
      map.normalized.cols() != geom.snippets) {
    throw ContractError("importance map does not match the configured geometry");
  }
}

}  // namespace

std::string to_string(ThresholdMode mode) {
  return mode == ThresholdMode::kTop ? "top" : "bottom";
}

MaskGrid threshold_mask(const ImportanceMap& map, double percent_kept,
                        ThresholdMode mode) {
  if (!(percent_kept > 0.0 && percent_kept <= 100.0)) {
    throw ContractError("percent_kept must lie in (0, 100]");
  }
  const auto rows = map.normalized.rows();
  const auto cols = map.normalized.cols();
  const long cells = static_cast<long>(map.normalized.size());
  if (cells == 0) throw ContractError("empty importance map");
  // Quotas compute the product before dividing so half-cell ties stay
  // exactly representable. The bottom mask is the complement of the
  // top-(100-percent) head, which pins the partition property even when a
  // half-tie quota has no symmetric rounding (50/50 on an odd grid).
  auto quota_of = [cells](double percent) {
    return round_half_even(percent * static_cast<double>(cells) / 100.0);
  };
  const long quota = mode == ThresholdMode::kTop
                         ? quota_of(percent_kept)
                         : cells - quota_of(100.0 - percent_kept);

  // One total order for both modes: value descending, cell index ascending
  // among ties. Top keeps the head of the ranking, bottom keeps the tail.
  std::vector<long> ranking(cells);
  std::iota(ranking.begin(), ranking.end(), 0L);
  std::stable_sort(ranking.begin(), ranking.end(), [&](long a, long b) {
    return map.normalized(a / cols, a % cols) > map.normalized(b / cols, b % cols);
  });

  MaskGrid mask;
  mask.cells = MaskMatrix::Zero(rows, cols);
  mask.keep_fraction = static_cast<double>(quota) / static_cast<double>(cells);
  const long from = mode == ThresholdMode::kTop ? 0 : cells - quota;
  for (long r = from; r < from + quota; ++r) {
    mask.cells(ranking[r] / cols, ranking[r] % cols) = 1;
  }
  return mask;
}

std::vector<CurvePoint> validation_curves(const ImportanceMap& map,
                                          const RunConfig& config,
                                          const std::vector<double>& percents) {
  validate_config(config);
  auto mdp = make_env(config.env_name, config.env_params);
  const int horizon = resolve_horizon(config, *mdp);
  const GridGeometry geom(config.demo_count, horizon, config.snippets);
  check_map_matches(map, geom);
  for (double percent : percents) {
    if (!(percent > 0.0 && percent <= 100.0)) {
      throw ConfigError("percent", "percentages must lie in (0, 100]");
    }
  }
  const DemoSet demos = demos_for_config(config, *mdp);
  const LearnerSpec spec =
      learner_from_config(config.learner_name, config.learner_params, mdp);

  std::vector<CurvePoint> points;
  points.reserve(percents.size() * 2);
  for (double percent : percents) {
    // The point seed depends on the percentage only, so the two modes of the
    // 100% point coincide bit-exactly.
    const std::uint64_t point_seed =
        derive_seed(config.master_seed, detail::kCurveStream,
                    static_cast<std::uint64_t>(llround(percent * 10000.0)));
    for (const ThresholdMode mode : {ThresholdMode::kTop, ThresholdMode::kBottom}) {
      const MaskGrid mask = threshold_mask(map, percent, mode);
      const TrainingSet data = apply_mask(demos, mask, geom);
      const Policy policy = train(spec, data, derive_seed(point_seed, 0));
      const ReturnStats stats =
          evaluate(*mdp, policy, config.n_rollouts, derive_seed(point_seed, 1));
      points.push_back({percent, mode, point_seed, stats, data.pairs.empty()});
    }
  }
  return points;
}

Eigen::MatrixXd minmax_projected(const Eigen::MatrixXd& values) {
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  if (hi == lo) return Eigen::MatrixXd::Zero(values.rows(), values.cols());
  return (values.array() - lo) / (hi - lo);
}

MapDeviation compare_maps(const ImportanceMap& a, const ImportanceMap& b) {
  if (a.normalized.rows() != b.normalized.rows() ||
      a.normalized.cols() != b.normalized.cols()) {
    throw ContractError("importance map dimensions differ");
  }
  if (a.normalized.size() == 0) throw ContractError("empty importance map");
  MapDeviation out;
  out.deviation = (minmax_projected(a.normalized) - minmax_projected(b.normalized))
                      .cwiseAbs();
  out.mean = out.deviation.mean();
  out.max = out.deviation.maxCoeff();
  return out;
}

std::vector<TransferCondition> transfer_experiment(const ImportanceMap& source_map,
                                                   double percent_kept,
                                                   const RunConfig& config) {
  validate_config(config);
  if (!(percent_kept > 0.0 && percent_kept <= 100.0)) {
    throw ConfigError("percent", "percent must lie in (0, 100]");
  }
  auto mdp = make_env(config.env_name, config.env_params);
  const int horizon = resolve_horizon(config, *mdp);
  const GridGeometry geom(config.demo_count, horizon, config.snippets);
  check_map_matches(source_map, geom);

  const MaskGrid source_mask = threshold_mask(source_map, percent_kept,
                                              ThresholdMode::kTop);
  if (source_mask.kept_cells() < 1) {
    throw ConfigError("percent", "percent keeps zero cells");
  }

  // The target's own importance map, from a full engine run with the target
  // learner under the same configuration (and therefore the same demos).
  const ImportanceMap target_map = run(config).map;
  const MaskGrid target_mask = threshold_mask(target_map, percent_kept,
                                              ThresholdMode::kTop);
  const MaskGrid random_mask = random_mask_with_kept(
      geom, source_mask.kept_cells(),
      derive_seed(config.master_seed, detail::kTransferRandomStream));

  const DemoSet demos = demos_for_config(config, *mdp);
  const LearnerSpec spec =
      learner_from_config(config.learner_name, config.learner_params, mdp);
  // One retrain seed for all three conditions: identical masks then give
  // identical stats.
  const std::uint64_t retrain_seed =
      derive_seed(config.master_seed, detail::kTransferStream);

  std::vector<TransferCondition> conditions;
  const std::pair<std::string, const MaskGrid*> runs[] = {
      {"source_mask", &source_mask},
      {"target_mask", &target_mask},
      {"random_mask", &random_mask},
  };
  for (const auto& [label, mask] : runs) {
    const TrainingSet data = apply_mask(demos, *mask, geom);
    TrainDiag diag;
    const Policy policy = train(spec, data, derive_seed(retrain_seed, 0), &diag);
    const ReturnStats stats =
        evaluate(*mdp, policy, config.n_rollouts, derive_seed(retrain_seed, 1));
    conditions.push_back({label, stats, std::move(diag.round_returns)});
  }
  return conditions;
}

}  // namespace demosal
