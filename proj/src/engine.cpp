#include "demosal/engine.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <thread>

#include "demosal/learners.hpp"
#include "streams.hpp"

namespace demosal {

namespace {

/// Runs body(0..n_jobs-1) on a bounded worker pool. Job i's side effects
/// must depend only on i; errors are rethrown in job order, so behaviour is
/// identical for every worker count.
void parallel_for(int n_jobs, int n_workers, const std::function<void(int)>& body) {
  int workers = n_workers;
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n_jobs));

  std::vector<std::exception_ptr> errors(n_jobs);
  auto guarded = [&](int i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (workers == 1) {
    for (int i = 0; i < n_jobs; ++i) guarded(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < n_jobs; i = next.fetch_add(1)) guarded(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (int i = 0; i < n_jobs; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }
}

long kept_quota(const GridGeometry& geom, double level) {
  return round_half_even((100.0 - level) * static_cast<double>(geom.cell_count()) /
                         100.0);
}

}  // namespace

int resolve_horizon(const RunConfig& config, const TabularMdp& mdp) {
  if (config.horizon == 0) return mdp.spec.horizon;
  if (config.horizon != mdp.spec.horizon) {
    throw ConfigError("T", "T=" + std::to_string(config.horizon) +
                               " does not match the environment horizon " +
                               std::to_string(mdp.spec.horizon));
  }
  return config.horizon;
}

DemoSet demos_for_config(const RunConfig& config, const TabularMdp& mdp) {
  return gen_demos(mdp, config.demo_count,
                   derive_seed(config.master_seed, detail::kDemoStream));
}

ImportanceMap reduce_contributions(const std::vector<MaskGrid>& masks,
                                   const std::vector<double>& mean_returns) {
  if (masks.empty()) throw ContractError("reduction needs at least one mask");
  if (masks.size() != mean_returns.size()) {
    throw ContractError("mask/return count mismatch");
  }
  const auto rows = masks.front().cells.rows();
  const auto cols = masks.front().cells.cols();
  const double keep_fraction = masks.front().keep_fraction;
  for (const auto& mask : masks) {
    if (mask.cells.rows() != rows || mask.cells.cols() != cols) {
      throw ContractError("mask dimensions differ");
    }
    if (mask.keep_fraction != keep_fraction) {
      throw ContractError("masks do not share one keep fraction");
    }
  }

  ImportanceMap map;
  map.weighted_sums = Eigen::MatrixXd::Zero(rows, cols);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    map.weighted_sums += mean_returns[i] * masks[i].cells.cast<double>();
  }
  map.n_masks = static_cast<long>(masks.size());
  map.keep_fraction = keep_fraction;
  map.normalized = map.weighted_sums / (keep_fraction * static_cast<double>(map.n_masks));
  return map;
}

RunResult run_with_masks(const RunConfig& config,
                         std::shared_ptr<const TabularMdp> mdp, const DemoSet& demos,
                         const std::vector<MaskGrid>& masks) {
  validate_config(config);
  if (!mdp) throw ContractError("null environment");
  if (masks.empty()) throw ContractError("run needs at least one mask");
  const GridGeometry geom(demos.demo_count(), demos.horizon, config.snippets);
  const LearnerSpec spec =
      learner_from_config(config.learner_name, config.learner_params, mdp);

  const int n = static_cast<int>(masks.size());
  std::vector<RunLogRecord> records(n);
  std::vector<double> means(n);
  parallel_for(n, config.n_workers, [&](int i) {
    const auto started = std::chrono::steady_clock::now();
    const std::uint64_t job_seed =
        derive_seed(config.master_seed, detail::kJobStream, i);
    const TrainingSet data = apply_mask(demos, masks[i], geom);
    const Policy policy = train(spec, data, derive_seed(job_seed, 0));
    const ReturnStats stats =
        evaluate(*mdp, policy, config.n_rollouts, derive_seed(job_seed, 1));
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - started;
    records[i] = {i,          job_seed,     cell_count(masks[i]).masked,
                  stats.mean, stats.stddev, data.pairs.empty(),
                  elapsed.count()};
    means[i] = stats.mean;
  });

  RunResult result;
  result.map = reduce_contributions(masks, means);
  result.map.provenance = "run env=" + config.env_name +
                          " learner=" + config.learner_name +
                          " seed=" + std::to_string(config.master_seed);
  result.log.records = std::move(records);
  return result;
}

RunResult run(const RunConfig& config) {
  validate_config(config);
  auto mdp = make_env(config.env_name, config.env_params);
  RunConfig resolved = config;
  resolved.horizon = resolve_horizon(config, *mdp);
  const GridGeometry geom(resolved.demo_count, resolved.horizon, resolved.snippets);
  if (kept_quota(geom, resolved.level) < 1) {
    throw ConfigError("level", "level leaves zero kept cells");
  }
  // validate the learner selection before generating any data
  learner_from_config(resolved.learner_name, resolved.learner_params, mdp);

  const DemoSet demos = demos_for_config(resolved, *mdp);
  const auto masks = gen_masks(geom, resolved.level, resolved.n_masks,
                               derive_seed(resolved.master_seed, detail::kMaskStream));
  return run_with_masks(resolved, mdp, demos, masks);
}

ImportanceMap combine_maps(const std::vector<ImportanceMap>& maps) {
  if (maps.empty()) throw ContractError("combine needs at least one map");
  const auto rows = maps.front().normalized.rows();
  const auto cols = maps.front().normalized.cols();
  bool same_meta = true;
  for (const auto& map : maps) {
    if (map.normalized.rows() != rows || map.normalized.cols() != cols) {
      throw ContractError("importance map dimensions differ");
    }
    same_meta = same_meta && map.n_masks == maps.front().n_masks &&
                map.keep_fraction == maps.front().keep_fraction;
  }

  const double n = static_cast<double>(maps.size());
  ImportanceMap out;
  out.normalized = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& map : maps) out.normalized += map.normalized;
  out.normalized /= n;
  if (same_meta) {
    out.n_masks = maps.front().n_masks;
    out.keep_fraction = maps.front().keep_fraction;
    out.weighted_sums = Eigen::MatrixXd::Zero(rows, cols);
    for (const auto& map : maps) out.weighted_sums += map.weighted_sums;
    out.weighted_sums /= n;
  } else {  // heterogeneous inputs: keep the identity normalization
    out.n_masks = 1;
    out.keep_fraction = 1.0;
    out.weighted_sums = out.normalized;
  }
  out.provenance = "combine of " + std::to_string(maps.size()) + " maps";
  return out;
}

std::vector<ReturnStats> variance_probe(const RunConfig& config, int n_probe_masks) {
  validate_config(config);
  if (n_probe_masks < 1) throw ConfigError("probes", "probe count must be >= 1");
  if (config.snippets != 10) {
    throw ConfigError("G", "the variance probe divides each trajectory into 10 segments");
  }
  auto mdp = make_env(config.env_name, config.env_params);
  const int horizon = resolve_horizon(config, *mdp);
  const GridGeometry geom(config.demo_count, horizon, config.snippets);
  const DemoSet demos = demos_for_config(config, *mdp);
  const auto masks =
      segment_probe_masks(geom, n_probe_masks,
                          derive_seed(config.master_seed, detail::kProbeMaskStream));
  const LearnerSpec spec =
      learner_from_config(config.learner_name, config.learner_params, mdp);

  // One shared evaluation seed: probe-to-probe spread then reflects only the
  // training data each mask kept.
  const std::uint64_t eval_seed =
      derive_seed(config.master_seed, detail::kProbeEvalStream);
  std::vector<ReturnStats> stats(n_probe_masks);
  parallel_for(n_probe_masks, config.n_workers, [&](int k) {
    const TrainingSet data = apply_mask(demos, masks[k], geom);
    const Policy policy =
        train(spec, data, derive_seed(config.master_seed, detail::kProbeTrainStream, k));
    stats[k] = evaluate(*mdp, policy, config.n_rollouts, eval_seed);
  });
  return stats;
}

}  // namespace demosal
