#include "demosal/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "params.hpp"

namespace demosal {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream stream(line);
  while (std::getline(stream, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

/// Splits text into lines, tolerating a missing final newline.
std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::stringstream stream(text);
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string demos_to_csv(const DemoSet& demos) {
  std::string out;
  out += demos.env_name + "," + std::to_string(demos.demo_count()) + "," +
         std::to_string(demos.horizon) + "," + std::to_string(demos.action_count) +
         "\n";
  for (int h = 0; h < demos.demo_count(); ++h) {
    const Trajectory& traj = demos.trajectories[h];
    for (int t = 0; t < static_cast<int>(traj.size()); ++t) {
      out += std::to_string(h) + "," + std::to_string(t) + "," +
             std::to_string(traj[t].state) + "," + std::to_string(traj[t].action) +
             "," + fmt_double(traj[t].reward) + "\n";
    }
  }
  return out;
}

DemoSet demos_from_csv(const std::string& text, const std::string& path) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError(path, 1, "missing header line");
  const auto header = split(lines[0], ',');
  if (header.size() != 4) throw ParseError(path, 1, "header must be env,H,T,A");

  DemoSet demos;
  demos.env_name = header[0];
  const auto demo_count = detail::try_parse_ll(header[1]);
  const auto horizon = detail::try_parse_ll(header[2]);
  const auto action_count = detail::try_parse_ll(header[3]);
  if (!demo_count || !horizon || !action_count) {
    throw ParseError(path, 1, "header counts must be integers");
  }
  if (*demo_count < 1 || *horizon < 0 || *action_count < 1) {
    throw ConfigError("demos", "header declares H=" + header[1] + " T=" + header[2] +
                                   " A=" + header[3]);
  }
  demos.horizon = static_cast<int>(*horizon);
  demos.action_count = static_cast<int>(*action_count);
  demos.trajectories.assign(*demo_count, Trajectory{});

  long expected = *demo_count * *horizon;
  long seen = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const long line_no = static_cast<long>(i) + 1;
    if (trim(lines[i]).empty()) continue;
    const auto fields = split(lines[i], ',');
    if (fields.size() != 5) {
      throw ParseError(path, line_no, "expected traj_index,t,state,action,reward");
    }
    const auto traj = detail::try_parse_ll(fields[0]);
    const auto frame = detail::try_parse_ll(fields[1]);
    const auto state = detail::try_parse_ll(fields[2]);
    const auto action = detail::try_parse_ll(fields[3]);
    const auto reward = detail::try_parse_double(fields[4]);
    if (!traj || !frame || !state || !action || !reward) {
      throw ParseError(path, line_no, "malformed step record");
    }
    if (seen >= expected) {
      throw ConfigError("demos", "more step records than the header's H*T");
    }
    const long want_traj = seen / *horizon;
    const long want_frame = seen % *horizon;
    if (*traj != want_traj || *frame != want_frame) {
      throw ConfigError("demos", "record at line " + std::to_string(line_no) +
                                     " is out of order: expected trajectory " +
                                     std::to_string(want_traj) + " frame " +
                                     std::to_string(want_frame));
    }
    if (*state < 0) throw ConfigError("demos", "negative state at line " +
                                                   std::to_string(line_no));
    if (*action < 0 || *action >= *action_count) {
      throw ConfigError("demos", "action outside [0, A) at line " +
                                     std::to_string(line_no));
    }
    demos.trajectories[*traj].push_back(
        {static_cast<int>(*state), static_cast<int>(*action), *reward});
    ++seen;
  }
  if (seen != expected) {
    const long short_traj = seen / std::max<long>(*horizon, 1);
    throw ConfigError("demos", "trajectory " + std::to_string(short_traj) + " has " +
                                   std::to_string(seen % std::max<long>(*horizon, 1)) +
                                   " frames, expected " + std::to_string(*horizon));
  }
  return demos;
}

void save_demos(const std::string& path, const DemoSet& demos) {
  write_text_file(path, demos_to_csv(demos));
}

DemoSet load_demos(const std::string& path) {
  return demos_from_csv(read_text_file(path), path);
}

std::string map_to_csv(const ImportanceMap& map) {
  std::string out;
  for (Eigen::Index r = 0; r < map.normalized.rows(); ++r) {
    for (Eigen::Index c = 0; c < map.normalized.cols(); ++c) {
      if (c > 0) out += ",";
      out += fmt_double(map.normalized(r, c));
    }
    out += "\n";
  }
  return out;
}

ImportanceMap map_from_csv(const std::string& text, const std::string& path) {
  const auto lines = lines_of(text);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split(lines[i], ',');
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& field : fields) {
      const auto v = detail::try_parse_double(trim(field));
      if (!v) {
        throw ParseError(path, static_cast<long>(i) + 1,
                         "expected a number, got '" + field + "'");
      }
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path, static_cast<long>(i) + 1, "ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path, 1, "empty importance map");

  ImportanceMap map;
  map.normalized.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < map.normalized.rows(); ++r) {
    for (Eigen::Index c = 0; c < map.normalized.cols(); ++c) {
      map.normalized(r, c) = rows[r][c];
    }
  }
  map.weighted_sums = map.normalized;
  map.n_masks = 1;
  map.keep_fraction = 1.0;
  map.provenance = "csv:" + path;
  return map;
}

void save_map_csv(const std::string& path, const ImportanceMap& map) {
  write_text_file(path, map_to_csv(map));
}

ImportanceMap load_map_csv(const std::string& path) {
  return map_from_csv(read_text_file(path), path);
}

std::string map_to_pgm(const ImportanceMap& map) {
  const auto rows = map.normalized.rows();
  const auto cols = map.normalized.cols();
  const double lo = map.normalized.minCoeff();
  const double hi = map.normalized.maxCoeff();

  std::string out = "P2\n" + std::to_string(cols) + " " + std::to_string(rows) +
                    "\n255\n";
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      long pixel = 128;  // constant maps render mid-gray
      if (hi > lo) {
        pixel = std::llround((map.normalized(r, c) - lo) / (hi - lo) * 255.0);
      }
      if (c > 0) out += " ";
      out += std::to_string(pixel);
    }
    out += "\n";
  }
  return out;
}

void save_map_pgm(const std::string& path, const ImportanceMap& map) {
  write_text_file(path, map_to_pgm(map));
}

std::string runlog_to_csv(const RunLog& log) {
  std::string out =
      "mask_index,seed,masked_cells,mean_return,std_return,empty_trainset,"
      "wall_time_s\n";
  for (const auto& r : log.records) {
    out += std::to_string(r.mask_index) + "," + std::to_string(r.derived_seed) + "," +
           std::to_string(r.masked_cells) + "," + fmt_double(r.mean_return) + "," +
           fmt_double(r.std_return) + "," + (r.empty_trainset ? "1" : "0") + "," +
           fmt_double(r.wall_time_s) + "\n";
  }
  return out;
}

void save_runlog(const std::string& path, const RunLog& log) {
  write_text_file(path, runlog_to_csv(log));
}

std::string probe_to_csv(const std::vector<ReturnStats>& probes) {
  std::string out = "probe_index,n_rollouts,mean_return,std_return\n";
  for (std::size_t k = 0; k < probes.size(); ++k) {
    out += std::to_string(k) + "," + std::to_string(probes[k].per_rollout.size()) +
           "," + fmt_double(probes[k].mean) + "," + fmt_double(probes[k].stddev) +
           "\n";
  }
  return out;
}

std::string curves_to_csv(const std::vector<CurvePoint>& points) {
  std::string out = "percent,mode,seed,mean_return,std_return,empty_trainset\n";
  for (const auto& p : points) {
    out += fmt_double(p.percent_kept) + "," + to_string(p.mode) + "," +
           std::to_string(p.seed) + "," + fmt_double(p.stats.mean) + "," +
           fmt_double(p.stats.stddev) + "," + (p.empty_trainset ? "1" : "0") + "\n";
  }
  return out;
}

std::string transfer_to_csv(const std::vector<TransferCondition>& conditions,
                            double percent_kept) {
  std::string out = "label,percent_kept,mean_return,std_return\n";
  for (const auto& c : conditions) {
    out += c.label + "," + fmt_double(percent_kept) + "," + fmt_double(c.stats.mean) +
           "," + fmt_double(c.stats.stddev) + "\n";
  }
  return out;
}

std::string transfer_rounds_to_csv(const std::vector<TransferCondition>& conditions) {
  std::string out = "label,round,exact_return\n";
  for (const auto& c : conditions) {
    for (std::size_t r = 0; r < c.round_returns.size(); ++r) {
      out += c.label + "," + std::to_string(r) + "," + fmt_double(c.round_returns[r]) +
             "\n";
    }
  }
  return out;
}

void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value) {
  auto as_int = [&](const char* k) {
    const auto v = detail::try_parse_ll(value);
    if (!v) throw ConfigError(k, "expected an integer, got '" + value + "'");
    return static_cast<int>(*v);
  };

  if (key == "env") {
    config.env_name = value;
  } else if (key == "learner") {
    config.learner_name = value;
  } else if (key.rfind("env_params.", 0) == 0) {
    const std::string sub = key.substr(11);
    if (sub.empty()) throw UsageError("unknown config key '" + key + "'");
    config.env_params[sub] = value;
  } else if (key.rfind("learner_params.", 0) == 0) {
    const std::string sub = key.substr(15);
    if (sub.empty()) throw UsageError("unknown config key '" + key + "'");
    config.learner_params[sub] = value;
  } else if (key == "H") {
    config.demo_count = as_int("H");
  } else if (key == "T") {
    config.horizon = as_int("T");
  } else if (key == "G") {
    config.snippets = as_int("G");
  } else if (key == "level") {
    const auto v = detail::try_parse_double(value);
    if (!v) throw ConfigError("level", "expected a number, got '" + value + "'");
    config.level = *v;
  } else if (key == "n_masks") {
    config.n_masks = as_int("n_masks");
  } else if (key == "n_rollouts") {
    config.n_rollouts = as_int("n_rollouts");
  } else if (key == "seed") {
    const auto v = detail::try_parse_ull(value);
    if (!v) throw ConfigError("seed", "expected an unsigned integer, got '" + value + "'");
    config.master_seed = *v;
  } else if (key == "workers") {
    config.n_workers = as_int("workers");
  } else if (key == "out_dir") {
    config.out_dir = value;
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

RunConfig config_from_text(const std::string& text, const std::string& path) {
  RunConfig config;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path, static_cast<long>(i) + 1, "expected key=value");
    }
    apply_config_entry(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides) {
  RunConfig config =
      path.empty() ? RunConfig{} : config_from_text(read_text_file(path), path);
  for (const auto& entry : overrides) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      throw UsageError("--set expects key=value, got '" + entry + "'");
    }
    apply_config_entry(config, trim(entry.substr(0, eq)), trim(entry.substr(eq + 1)));
  }
  return config;
}

void write_text_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path, 0, "cannot open for writing");
  out << text;
  if (!out) throw ParseError(path, 0, "write failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace demosal
