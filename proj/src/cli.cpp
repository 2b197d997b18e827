#include "demosal/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>

#include "demosal/analysis.hpp"
#include "demosal/engine.hpp"
#include "demosal/io.hpp"

namespace demosal {

namespace {

namespace fs = std::filesystem;

std::string joined(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::vector<double> parse_percent_list(const std::string& text) {
  std::vector<double> percents;
  std::stringstream stream(text);
  std::string field;
  while (std::getline(stream, field, ',')) {
    try {
      percents.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw UsageError("--percents expects comma-separated numbers, got '" + field + "'");
    }
  }
  if (percents.empty()) throw UsageError("--percents is empty");
  return percents;
}

int run_subcommands(const std::vector<std::string>& args) {
  CLI::App app{"Frame-importance maps for imitation-learning demonstrations"};
  app.name("demosal");
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_config_options = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config file of key=value lines");
    sub->add_option("--set", overrides, "override one config key (key=value)");
  };

  auto* gen = app.add_subcommand("gen-demos", "write expert demonstrations");
  add_config_options(gen);

  auto* run_cmd = app.add_subcommand(
      "run", "masked retraining loop; writes map.csv, map.pgm, runlog.csv");
  add_config_options(run_cmd);

  int n_probes = 10;
  auto* probe = app.add_subcommand("probe",
                                   "segment variance probe; writes probe.csv");
  add_config_options(probe);
  probe->add_option("--probes", n_probes, "number of probe masks");

  std::string map_path;
  std::string percents_text = "10,30,50,70,90";
  auto* curves = app.add_subcommand(
      "curves", "top/bottom threshold retraining curves; writes curves.csv");
  add_config_options(curves);
  curves->add_option("--map", map_path, "importance map CSV")->required();
  curves->add_option("--percents", percents_text, "comma-separated kept percentages");

  std::string map_a, map_b, out_prefix = "deviation";
  auto* compare = app.add_subcommand(
      "compare", "element-wise deviation of two min-max projected maps");
  compare->add_option("map_a", map_a, "first importance map CSV")->required();
  compare->add_option("map_b", map_b, "second importance map CSV")->required();
  compare->add_option("--out-prefix", out_prefix, "output path prefix");

  double percent_kept = 30.0;
  auto* transfer = app.add_subcommand(
      "transfer", "train the configured learner with a transferred mask");
  add_config_options(transfer);
  transfer->add_option("--map", map_path, "source importance map CSV")->required();
  transfer->add_option("--percent", percent_kept, "kept percentage for the masks");

  std::vector<std::string> combine_inputs;
  std::string combine_out = "combined_map.csv";
  auto* combine = app.add_subcommand("combine", "average importance maps cell-wise");
  combine->add_option("maps", combine_inputs, "importance map CSVs")->required();
  combine->add_option("--out", combine_out, "output map path");

  std::vector<std::string> argv_strings = args;
  argv_strings.insert(argv_strings.begin(), "demosal");
  std::vector<const char*> argv;
  argv.reserve(argv_strings.size());
  for (const auto& s : argv_strings) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  if (gen->parsed()) {
    const RunConfig config = load_config(config_path, overrides);
    validate_config(config);
    auto mdp = make_env(config.env_name, config.env_params);
    resolve_horizon(config, *mdp);
    const DemoSet demos = demos_for_config(config, *mdp);
    const std::string path = joined(config.out_dir, "demos.csv");
    save_demos(path, demos);
    std::cout << "wrote " << path << " (" << demos.demo_count() << " trajectories x "
              << demos.horizon << " frames)\n";
    return 0;
  }

  if (run_cmd->parsed()) {
    const RunConfig config = load_config(config_path, overrides);
    const RunResult result = run(config);
    save_map_csv(joined(config.out_dir, "map.csv"), result.map);
    save_map_pgm(joined(config.out_dir, "map.pgm"), result.map);
    save_runlog(joined(config.out_dir, "runlog.csv"), result.log);
    std::cout << "wrote " << joined(config.out_dir, "map.csv") << ", map.pgm, runlog.csv ("
              << result.log.records.size() << " masks)\n";
    return 0;
  }

  if (probe->parsed()) {
    const RunConfig config = load_config(config_path, overrides);
    const auto stats = variance_probe(config, n_probes);
    const std::string path = joined(config.out_dir, "probe.csv");
    write_text_file(path, probe_to_csv(stats));
    double lo = stats.front().mean, hi = stats.front().mean;
    for (const auto& s : stats) {
      lo = std::min(lo, s.mean);
      hi = std::max(hi, s.mean);
    }
    std::cout << "wrote " << path << " (spread " << hi - lo << ")\n";
    return 0;
  }

  if (curves->parsed()) {
    const RunConfig config = load_config(config_path, overrides);
    const ImportanceMap map = load_map_csv(map_path);
    const auto points = validation_curves(map, config, parse_percent_list(percents_text));
    const std::string path = joined(config.out_dir, "curves.csv");
    write_text_file(path, curves_to_csv(points));
    std::cout << "wrote " << path << " (" << points.size() << " points)\n";
    return 0;
  }

  if (compare->parsed()) {
    const ImportanceMap a = load_map_csv(map_a);
    const ImportanceMap b = load_map_csv(map_b);
    const MapDeviation dev = compare_maps(a, b);
    ImportanceMap as_map;
    as_map.normalized = dev.deviation;
    as_map.weighted_sums = dev.deviation;
    as_map.n_masks = 1;
    write_text_file(out_prefix + ".csv", map_to_csv(as_map));
    write_text_file(out_prefix + ".pgm", map_to_pgm(as_map));
    std::cout << "mean_deviation=" << dev.mean << " max_deviation=" << dev.max << "\n";
    return 0;
  }

  if (transfer->parsed()) {
    const RunConfig config = load_config(config_path, overrides);
    const ImportanceMap source = load_map_csv(map_path);
    const auto conditions = transfer_experiment(source, percent_kept, config);
    const std::string path = joined(config.out_dir, "transfer.csv");
    write_text_file(path, transfer_to_csv(conditions, percent_kept));
    bool any_rounds = false;
    for (const auto& c : conditions) any_rounds = any_rounds || !c.round_returns.empty();
    if (any_rounds) {
      write_text_file(joined(config.out_dir, "transfer_rounds.csv"),
                      transfer_rounds_to_csv(conditions));
    }
    for (const auto& c : conditions) {
      std::cout << c.label << " mean_return=" << c.stats.mean << "\n";
    }
    return 0;
  }

  if (combine->parsed()) {
    std::vector<ImportanceMap> maps;
    maps.reserve(combine_inputs.size());
    for (const auto& input : combine_inputs) maps.push_back(load_map_csv(input));
    save_map_csv(combine_out, combine_maps(maps));
    std::cout << "wrote " << combine_out << " (mean of " << maps.size() << " maps)\n";
    return 0;
  }

  return 2;  // unreachable with require_subcommand(1)
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
  try {
    return run_subcommands(args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace demosal
