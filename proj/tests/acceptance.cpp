// Acceptance suite: one checked criterion per run, each printing a PASS/FAIL
// line with the measured margins. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "demosal/analysis.hpp"
#include "demosal/engine.hpp"
#include "demosal/io.hpp"
#include "demosal/learners.hpp"
#include "demosal/masking.hpp"
#include "../src/streams.hpp"
#include "support.hpp"

namespace {

using namespace demosal;

struct Outcome {
  bool ok = true;
  std::string detail;
};

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

RunConfig keydoor_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.env_name = "keydoor";
  cfg.env_params = {{"random_start", "1"}};
  cfg.learner_name = "bc_tabular";
  cfg.demo_count = 20;
  cfg.snippets = 10;
  cfg.level = 50.0;
  cfg.n_masks = 200;
  cfg.n_rollouts = 20;
  cfg.master_seed = seed;
  return cfg;
}

const std::vector<std::uint64_t> kSeeds = {0, 1, 2, 3, 4};

// Criterion 1: with a data-independent constant learner of return R, every
// normalized cell must equal R * k_cell / (p * N) at 1e-9 relative (with
// k_cell recounted from the regenerated masks and R taken from the runlog)
// and lie within |R| * 3 * sqrt((1-p)/(p*N)) of R.
Outcome criterion1() {
  RunConfig cfg;
  cfg.env_name = "corridor";
  cfg.learner_name = "stub_constant";
  cfg.demo_count = 4;
  cfg.snippets = 5;
  cfg.level = 50.0;
  cfg.n_masks = 2000;
  cfg.n_rollouts = 2;
  cfg.master_seed = 1;

  const RunResult result = run(cfg);
  const double expected_return = -15.0;  // stay forever: horizon * step reward

  Outcome out;
  for (const auto& rec : result.log.records) {
    if (rec.mean_return != expected_return || rec.empty_trainset) {
      out.ok = false;
      out.detail = "mask " + std::to_string(rec.mask_index) + " mean " +
                   std::to_string(rec.mean_return);
      return out;
    }
  }

  const GridGeometry geom(cfg.demo_count, 15, cfg.snippets);
  const auto masks = gen_masks(geom, cfg.level, cfg.n_masks,
                               derive_seed(cfg.master_seed, detail::kMaskStream));
  Eigen::MatrixXd observed = Eigen::MatrixXd::Zero(geom.demo_count, geom.snippets);
  for (const auto& mask : masks) observed += mask.cells.cast<double>();

  const double p = 0.5;
  const double n = cfg.n_masks;
  const double band = std::abs(expected_return) * 3.0 * std::sqrt((1.0 - p) / (p * n));
  double worst_rel = 0.0, worst_dev = 0.0;
  for (int h = 0; h < geom.demo_count; ++h) {
    for (int g = 0; g < geom.snippets; ++g) {
      const double closed_form = expected_return * observed(h, g) / (p * n);
      const double cell = result.map.normalized(h, g);
      worst_rel = std::max(worst_rel, std::abs(cell - closed_form));
      worst_dev = std::max(worst_dev, std::abs(cell - expected_return));
      if (!rel_close(cell, closed_form, 1e-9)) {
        out.ok = false;
        out.detail = "cell deviates from closed form by " +
                     std::to_string(cell - closed_form);
        return out;
      }
    }
  }
  out.ok = worst_dev <= band;
  std::ostringstream s;
  s << "max|cell-R|=" << worst_dev << " band=" << band;
  out.detail = s.str();
  return out;
}

// Criterion 2: on a 1x4 grid with all six exact-count two-masked-cell masks,
// the engine map must equal a plain-loop evaluation of the normalized
// return-weighted mask sum at 1e-9.
Outcome criterion2() {
  RunConfig cfg;
  cfg.env_name = "corridor";
  cfg.env_params = {{"horizon", "16"}};
  cfg.learner_name = "bc_tabular";
  cfg.demo_count = 1;
  cfg.horizon = 16;
  cfg.snippets = 4;
  cfg.level = 50.0;
  cfg.n_masks = 6;
  cfg.n_rollouts = 20;
  cfg.master_seed = 7;

  auto mdp = make_env(cfg.env_name, cfg.env_params);
  const DemoSet demos = demos_for_config(cfg, *mdp);

  std::vector<MaskGrid> masks;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      MaskGrid mask;
      mask.cells = MaskMatrix::Ones(1, 4);
      mask.cells(0, i) = 0;
      mask.cells(0, j) = 0;
      mask.keep_fraction = 0.5;
      masks.push_back(mask);
    }
  }

  const RunResult result = run_with_masks(cfg, mdp, demos, masks);

  // Brute force with naked loops: rebuild each training set frame by frame,
  // reuse the learner/evaluator as the black box, accumulate into plain
  // doubles.
  const LearnerSpec spec = learner_from_config("bc_tabular", {}, mdp);
  double oracle[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t idx = 0; idx < masks.size(); ++idx) {
    TrainingSet data;
    for (int t = 0; t < 16; ++t) {
      if (masks[idx].cells(0, t / 4) != 0) {
        data.pairs.push_back(
            {demos.trajectories[0][t].state, demos.trajectories[0][t].action, 0, t});
      }
    }
    const std::uint64_t job_seed =
        derive_seed(cfg.master_seed, detail::kJobStream, idx);
    const Policy policy = train(spec, data, derive_seed(job_seed, 0));
    const ReturnStats stats =
        evaluate(*mdp, policy, cfg.n_rollouts, derive_seed(job_seed, 1));
    for (int g = 0; g < 4; ++g) {
      if (masks[idx].cells(0, g) != 0) oracle[g] += stats.mean;
    }
  }

  Outcome out;
  std::ostringstream s;
  for (int g = 0; g < 4; ++g) {
    oracle[g] /= 0.5 * 6.0;
    if (!rel_close(oracle[g], result.map.normalized(0, g), 1e-9)) {
      out.ok = false;
      s << "cell " << g << ": engine " << result.map.normalized(0, g) << " vs oracle "
        << oracle[g];
      out.detail = s.str();
      return out;
    }
  }
  s << "map [" << result.map.normalized << "] matches brute force";
  out.detail = s.str();
  return out;
}

// Criterion 3: the spread of per-probe mean returns under Bernoulli segment
// masks must exceed the stub learner's spread (exactly zero) and 0.2x the
// expert return, in a majority of seeds.
Outcome criterion3() {
  auto mdp = make_env("keydoor", {{"random_start", "1"}});
  const double expert_return = exact_policy_return(*mdp, expert_policy(*mdp));

  int passing = 0;
  std::ostringstream s;
  s << "expert=" << expert_return << " spreads:";
  for (const auto seed : kSeeds) {
    RunConfig cfg = keydoor_config(seed);
    const auto stats = variance_probe(cfg, 10);
    double lo = stats.front().mean, hi = stats.front().mean;
    for (const auto& st : stats) {
      lo = std::min(lo, st.mean);
      hi = std::max(hi, st.mean);
    }
    const double spread = hi - lo;

    RunConfig stub_cfg = cfg;
    stub_cfg.learner_name = "stub_constant";
    const auto stub_stats = variance_probe(stub_cfg, 10);
    double stub_lo = stub_stats.front().mean, stub_hi = stub_stats.front().mean;
    for (const auto& st : stub_stats) {
      stub_lo = std::min(stub_lo, st.mean);
      stub_hi = std::max(stub_hi, st.mean);
    }
    const double stub_spread = stub_hi - stub_lo;

    const bool ok =
        stub_spread == 0.0 && spread > stub_spread && spread > 0.2 * expert_return;
    passing += ok ? 1 : 0;
    s << " " << spread << (ok ? "" : "(fail)");
  }
  return {passing >= 3, s.str() + " passing=" + std::to_string(passing) + "/5"};
}

// Criterion 4: mean normalized importance over pre-key snippets must exceed
// the mean over absorbing-tail snippets in >= 4 of 5 seeds.
Outcome criterion4() {
  int passing = 0;
  std::ostringstream s;
  s << "key-vs-tail margins:";
  for (const auto seed : kSeeds) {
    const RunConfig cfg = keydoor_config(seed);
    const RunResult result = run(cfg);
    auto mdp = make_env(cfg.env_name, cfg.env_params);
    const GridGeometry geom(cfg.demo_count, 20, cfg.snippets);
    const DemoSet demos = demos_for_config(cfg, *mdp);
    const auto cells = testing::classify_keydoor_cells(demos, geom, *mdp);
    if (cells.key_acquisition.empty() || cells.absorbing_tail.empty()) {
      return {false, "degenerate fixture: no classified cells"};
    }
    const double key_mean =
        testing::mean_over_cells(result.map.normalized, cells.key_acquisition);
    const double tail_mean =
        testing::mean_over_cells(result.map.normalized, cells.absorbing_tail);
    passing += key_mean > tail_mean ? 1 : 0;
    s << " " << key_mean - tail_mean;
  }
  return {passing >= 4, s.str() + " passing=" + std::to_string(passing) + "/5"};
}

// Criterion 5: retraining on the top-importance cells must match or beat the
// bottom cells at 10/30/50 percent kept, in >= 4 of 5 seeds per percentage.
Outcome criterion5() {
  const std::vector<double> percents = {10.0, 30.0, 50.0};
  std::map<double, int> passing;
  std::ostringstream s;
  for (const auto seed : kSeeds) {
    const RunConfig cfg = keydoor_config(seed);
    const ImportanceMap map = run(cfg).map;
    const auto points = validation_curves(map, cfg, percents);
    for (const double percent : percents) {
      double top = 0.0, bottom = 0.0;
      for (const auto& point : points) {
        if (point.percent_kept != percent) continue;
        (point.mode == ThresholdMode::kTop ? top : bottom) = point.stats.mean;
      }
      passing[percent] += top >= bottom ? 1 : 0;
    }
  }
  bool ok = true;
  for (const double percent : percents) {
    ok = ok && passing[percent] >= 4;
    s << " p" << percent << "=" << passing[percent] << "/5";
  }
  return {ok, "seeds with top>=bottom:" + s.str()};
}

// Criterion 6: an adversarial learner trained with the source-model mask and
// with its own mask must each match or beat the size-matched random mask in
// >= 4 of 5 seeds.
Outcome criterion6() {
  int passing = 0;
  std::ostringstream s;
  s << "(source-random, target-random):";
  for (const auto seed : kSeeds) {
    const RunConfig bc_cfg = keydoor_config(seed);
    const ImportanceMap source_map = run(bc_cfg).map;
    RunConfig adv_cfg = bc_cfg;
    adv_cfg.learner_name = "adv_il";
    const auto conditions = transfer_experiment(source_map, 30.0, adv_cfg);
    const double source_mean = conditions[0].stats.mean;
    const double target_mean = conditions[1].stats.mean;
    const double random_mean = conditions[2].stats.mean;
    const bool ok = source_mean >= random_mean && target_mean >= random_mean;
    passing += ok ? 1 : 0;
    s << " (" << source_mean - random_mean << "," << target_mean - random_mean << ")";
  }
  return {passing >= 4, s.str() + " passing=" + std::to_string(passing) + "/5"};
}

// Criterion 7: identical config must give byte-identical map.csv for 1, 2
// and 8 workers (and identical runlogs up to wall time).
Outcome criterion7() {
  RunConfig cfg = keydoor_config(3);
  cfg.demo_count = 8;
  cfg.n_masks = 20;
  cfg.n_rollouts = 5;

  std::vector<std::string> csvs;
  std::vector<RunLog> logs;
  for (const int workers : {1, 2, 8}) {
    cfg.n_workers = workers;
    const RunResult result = run(cfg);
    csvs.push_back(map_to_csv(result.map));
    logs.push_back(result.log);
  }
  for (std::size_t i = 1; i < csvs.size(); ++i) {
    if (csvs[i] != csvs[0]) return {false, "map.csv differs across worker counts"};
    for (std::size_t r = 0; r < logs[i].records.size(); ++r) {
      const auto& a = logs[0].records[r];
      const auto& b = logs[i].records[r];
      if (a.mask_index != b.mask_index || a.derived_seed != b.derived_seed ||
          a.masked_cells != b.masked_cells || a.mean_return != b.mean_return ||
          a.std_return != b.std_return || a.empty_trainset != b.empty_trainset) {
        return {false, "runlog differs across worker counts"};
      }
    }
  }
  return {true, "map.csv byte-identical for workers {1,2,8}"};
}

// Criterion 8: exact-count invariant (zero variance in masked cells) and
// per-cell kept frequency within +-0.02 of p at N=10000 on a 2x4 grid.
Outcome criterion8() {
  const GridGeometry geom(2, 8, 4);
  const auto masks = gen_masks(geom, 50.0, 10000, 0);
  Eigen::MatrixXd kept_counts = Eigen::MatrixXd::Zero(2, 4);
  for (const auto& mask : masks) {
    if (cell_count(mask).masked != 4) return {false, "masked-cell count varies"};
    kept_counts += mask.cells.cast<double>();
  }
  const Eigen::MatrixXd freq = kept_counts / 10000.0;
  const double worst = (freq.array() - 0.5).abs().maxCoeff();
  return {worst <= 0.02, "max|freq-0.5|=" + std::to_string(worst)};
}

// Criterion 9: analysis algebra on randomized (tie-heavy) maps - threshold
// masks invariant under strictly increasing transforms, zero deviation
// against positive affine rescalings, and exact top/bottom partitions.
Outcome criterion9() {
  Rng rng(99);
  const std::vector<double> percents = {10.0, 25.0, 30.0, 50.0, 77.5, 90.0, 100.0};
  for (int iter = 0; iter < 200; ++iter) {
    const int rows = 1 + static_cast<int>(rng.uniform_int(6));
    const int cols = 1 + static_cast<int>(rng.uniform_int(8));
    ImportanceMap map;
    // quarter-step grid values: ties are common and strictly increasing
    // transforms keep distinct values distinct in floating point
    map.normalized.resize(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        map.normalized(r, c) = 0.25 * (static_cast<double>(rng.uniform_int(65)) - 32.0);
      }
    }
    map.weighted_sums = map.normalized;
    map.n_masks = 1;

    const auto transforms = std::vector<std::function<double(double)>>{
        [](double x) { return 2.0 * x + 3.0; },
        [](double x) { return std::atan(x); },
        [](double x) { return std::exp(x / 4.0); }};
    for (const double percent : percents) {
      for (const auto mode : {ThresholdMode::kTop, ThresholdMode::kBottom}) {
        const MaskGrid base = threshold_mask(map, percent, mode);
        for (const auto& f : transforms) {
          ImportanceMap warped = map;
          warped.normalized = warped.normalized.unaryExpr(f);
          if (threshold_mask(warped, percent, mode).cells != base.cells) {
            return {false, "threshold mask changed under increasing transform"};
          }
        }
      }
      const MaskGrid top = threshold_mask(map, percent, ThresholdMode::kTop);
      if (percent < 100.0) {
        const MaskGrid bottom =
            threshold_mask(map, 100.0 - percent, ThresholdMode::kBottom);
        const Eigen::MatrixXi total = top.cells.cast<int>() + bottom.cells.cast<int>();
        if ((total.array() != 1).any()) {
          return {false, "top/bottom masks do not partition the grid"};
        }
      }
    }

    for (const double scale : {2.0, 0.5, 3.0}) {
      for (const double shift : {-1.0, 0.0, 2.0}) {
        ImportanceMap affine = map;
        affine.normalized = (scale * affine.normalized.array() + shift).matrix();
        const MapDeviation dev = compare_maps(map, affine);
        if (dev.max > 1e-12) {
          return {false, "affine rescaling produced deviation " + std::to_string(dev.max)};
        }
        const MapDeviation ab = compare_maps(map, affine);
        const MapDeviation ba = compare_maps(affine, map);
        if (ab.deviation != ba.deviation) return {false, "compare_maps not symmetric"};
      }
    }
  }
  return {true, "200 randomized maps"};
}

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;
  std::function<Outcome()> body;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria = {
      {1, "normalization oracle (constant learner)", 60.0, criterion1},
      {2, "exhaustive-enumeration equivalence", 60.0, criterion2},
      {3, "non-identical importance (segment probe)", 300.0, criterion3},
      {4, "planted-cause detection", 600.0, criterion4},
      {5, "threshold separation (top vs bottom)", 600.0, criterion5},
      {6, "mask transfer", 900.0, criterion6},
      {7, "worker-count determinism", 60.0, criterion7},
      {8, "mask statistics", 60.0, criterion8},
      {9, "analysis algebra properties", 60.0, criterion9},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (only != 0 && criterion.id != only) continue;
    const auto started = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.body();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
            .count();
    if (elapsed > criterion.time_limit_s) {
      outcome.ok = false;
      outcome.detail += " [over time limit]";
    }
    std::printf("[%s] criterion %d: %s — %s (%.1fs)\n", outcome.ok ? "PASS" : "FAIL",
                criterion.id, criterion.name, outcome.detail.c_str(), elapsed);
    failures += outcome.ok ? 0 : 1;
  }
  return failures;
}
