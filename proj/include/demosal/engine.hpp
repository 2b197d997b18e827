#pragma once

#include <cstdint>
#include <vector>

#include "demosal/envs.hpp"
#include "demosal/masking.hpp"
#include "demosal/types.hpp"

namespace demosal {

/// Audit record for one mask job.
struct RunLogRecord {
  int mask_index = 0;
  std::uint64_t derived_seed = 0;
  long masked_cells = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  bool empty_trainset = false;
  double wall_time_s = 0.0;  // excluded from determinism guarantees
};

struct RunLog {
  std::vector<RunLogRecord> records;
};

struct RunResult {
  ImportanceMap map;
  RunLog log;
};

/// Deterministic reduction of per-mask contributions: sums mean_return * mask
/// in ascending mask order, then normalizes by keep_fraction * n_masks. All
/// masks must share one keep fraction.
ImportanceMap reduce_contributions(const std::vector<MaskGrid>& masks,
                                   const std::vector<double>& mean_returns);

/// The retrain-and-evaluate loop. For each mask: derive the mask job seed
/// from (master_seed, mask_index), train the configured learner on the
/// masked demonstrations, evaluate it, and accumulate the mean return into
/// the importance map. Masks whose training set is empty fall back to the
/// uniform policy and are flagged; the run continues.
///
/// Mask jobs run on a bounded worker pool (`n_workers`; 0 = hardware
/// concurrency) but the result is bit-identical for every worker count: jobs
/// depend only on (config, mask_index) and the reduction is sequential.
RunResult run(const RunConfig& config);

/// Same loop with externally supplied environment, demos and masks
/// (exhaustive-enumeration oracles reuse this).
RunResult run_with_masks(const RunConfig& config,
                         std::shared_ptr<const TabularMdp> mdp, const DemoSet& demos,
                         const std::vector<MaskGrid>& masks);

/// Cell-wise arithmetic mean of the normalized fields.
ImportanceMap combine_maps(const std::vector<ImportanceMap>& maps);

/// Retrains and evaluates once per Bernoulli segment mask (geometry must use
/// 10 snippets per trajectory). Every probe shares one evaluation seed so
/// the spread across probes isolates the effect of the masked data: a
/// data-independent learner scores identically on every probe.
std::vector<ReturnStats> variance_probe(const RunConfig& config, int n_probe_masks);

/// Demos an engine run would train on (deterministic in config).
DemoSet demos_for_config(const RunConfig& config, const TabularMdp& mdp);

/// Horizon after inheriting the environment default when T is unset; raises
/// ConfigError if an explicit T disagrees with the environment.
int resolve_horizon(const RunConfig& config, const TabularMdp& mdp);

}  // namespace demosal
