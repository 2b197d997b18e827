#pragma once

#include <string>
#include <vector>

#include "demosal/analysis.hpp"
#include "demosal/engine.hpp"
#include "demosal/types.hpp"

namespace demosal {

// Demonstration files: one header line `env,H,T,A` followed by one line per
// step, `traj_index,t,state,action,reward`. Rewards are printed with 17
// significant digits so the round trip is bit-exact.
std::string demos_to_csv(const DemoSet& demos);
DemoSet demos_from_csv(const std::string& text, const std::string& path_for_errors);
void save_demos(const std::string& path, const DemoSet& demos);
DemoSet load_demos(const std::string& path);

// Importance-map CSV: demo_count rows of comma-separated normalized values
// at full precision. Loading recovers the normalized field only.
std::string map_to_csv(const ImportanceMap& map);
ImportanceMap map_from_csv(const std::string& text, const std::string& path_for_errors);
void save_map_csv(const std::string& path, const ImportanceMap& map);
ImportanceMap load_map_csv(const std::string& path);

// Plain (ASCII) 8-bit PGM of the normalized field, min-max scaled so white
// is most important; a constant map renders mid-gray (128). Grid columns are
// image x (trajectory length), rows are image y (trajectories).
std::string map_to_pgm(const ImportanceMap& map);
void save_map_pgm(const std::string& path, const ImportanceMap& map);

std::string runlog_to_csv(const RunLog& log);
void save_runlog(const std::string& path, const RunLog& log);

std::string probe_to_csv(const std::vector<ReturnStats>& probes);
std::string curves_to_csv(const std::vector<CurvePoint>& points);
std::string transfer_to_csv(const std::vector<TransferCondition>& conditions,
                            double percent_kept);
std::string transfer_rounds_to_csv(const std::vector<TransferCondition>& conditions);

/// Applies one `key=value` entry to the config. Recognized keys: env,
/// env_params.*, learner, learner_params.*, H, T, G, level, n_masks,
/// n_rollouts, seed, workers, out_dir. Unknown keys raise UsageError; bad
/// values raise ConfigError naming the key.
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);

/// Parses a config file of `key=value` lines (# comments and blank lines
/// allowed), then applies `overrides` in order.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);
RunConfig config_from_text(const std::string& text, const std::string& path_for_errors);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace demosal
