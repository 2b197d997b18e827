#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "demosal/engine.hpp"
#include "demosal/envs.hpp"
#include "demosal/types.hpp"

namespace demosal::testing {

/// Optimal return from every state with the full horizon remaining, by
/// time-indexed backward induction written as plain scalar loops. Oracle for
/// expert optimality and the designed-fixture return values.
inline Eigen::VectorXd optimal_values(const TabularMdp& mdp) {
  const int states = mdp.spec.state_count;
  const int actions = mdp.spec.action_count;
  Eigen::VectorXd value = Eigen::VectorXd::Zero(states);
  for (int t = 0; t < mdp.spec.horizon; ++t) {
    Eigen::VectorXd next(states);
    for (int s = 0; s < states; ++s) {
      double best = -1e300;
      for (int a = 0; a < actions; ++a) {
        const double q = mdp.reward(s, a) + value(mdp.next_state(s, a));
        if (q > best) best = q;
      }
      next(s) = best;
    }
    value = next;
  }
  return value;
}

struct ReturnMoments {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Exact mean and standard deviation of the episode return under a
/// (possibly stochastic) policy, by backward dynamic programming over the
/// first two moments of the return-to-go.
inline ReturnMoments exact_return_moments(const TabularMdp& mdp, const Policy& policy) {
  const int states = mdp.spec.state_count;
  const int actions = mdp.spec.action_count;
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(states);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(states);
  for (int t = mdp.spec.horizon - 1; t >= 0; --t) {
    Eigen::VectorXd n1 = Eigen::VectorXd::Zero(states);
    Eigen::VectorXd n2 = Eigen::VectorXd::Zero(states);
    for (int s = 0; s < states; ++s) {
      for (int a = 0; a < actions; ++a) {
        const double p = policy.action_probs(s, a);
        if (p == 0.0) continue;
        const double r = mdp.reward(s, a);
        const int ns = mdp.next_state(s, a);
        n1(s) += p * (r + m1(ns));
        n2(s) += p * (r * r + 2.0 * r * m1(ns) + m2(ns));
      }
    }
    m1 = n1;
    m2 = n2;
  }
  const double mean = mdp.start_prob.dot(m1);
  const double second = mdp.start_prob.dot(m2);
  return {mean, std::sqrt(std::max(0.0, second - mean * mean))};
}

struct PlantedCells {
  std::vector<std::pair<int, int>> key_acquisition;  // snippets before the key is held
  std::vector<std::pair<int, int>> absorbing_tail;   // snippets after the episode ended
};

/// Classifies the snippet cells of a keydoor demo set by the planted causal
/// structure: cells fully inside the pre-key prefix of their trajectory, and
/// cells fully inside the absorbing padding tail.
inline PlantedCells classify_keydoor_cells(const DemoSet& demos, const GridGeometry& geom,
                                           const TabularMdp& mdp) {
  PlantedCells out;
  for (int h = 0; h < geom.demo_count; ++h) {
    const Trajectory& traj = demos.trajectories[h];
    int key_time = geom.horizon;
    int terminal_time = geom.horizon;
    for (int t = 0; t < geom.horizon; ++t) {
      const int s = traj[t].state;
      if (s == mdp.absorbing_state) {
        terminal_time = t;
        break;
      }
      if (key_time == geom.horizon && mdp.state_coords(s, 2) > 0.0) key_time = t;
    }
    for (int g = 0; g < geom.snippets; ++g) {
      const FrameRange range = snippet_frame_range(geom, g);
      if (range.end <= key_time) out.key_acquisition.emplace_back(h, g);
      if (range.begin >= terminal_time) out.absorbing_tail.emplace_back(h, g);
    }
  }
  return out;
}

inline double mean_over_cells(const Eigen::MatrixXd& values,
                              const std::vector<std::pair<int, int>>& cells) {
  double sum = 0.0;
  for (const auto& [h, g] : cells) sum += values(h, g);
  return sum / static_cast<double>(cells.size());
}

/// Unique writable directory under the system temp root.
inline std::string fresh_temp_dir(const std::string& tag) {
  static int counter = 0;
  const auto stamp =
      std::chrono::steady_clock::now().time_since_epoch().count() + ++counter;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("demosal_" + tag + "_" + std::to_string(stamp));
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace demosal::testing
