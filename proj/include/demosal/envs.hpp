#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "demosal/rng.hpp"
#include "demosal/types.hpp"

namespace demosal {

/// Environment summary: sizes, horizon, and the fully resolved parameter set
/// it was built from.
struct EnvSpec {
  std::string name;
  int state_count = 0;
  int action_count = 0;
  int horizon = 0;
  bool deterministic = true;  // single start state (dynamics are always deterministic)
  std::map<std::string, std::string> params;
};

/// Finite MDP in tabular form. Dynamics are deterministic; the only
/// randomness is the start-state draw. `absorbing_state` self-loops with
/// zero reward and pads finished episodes out to the fixed horizon.
///
/// `state_coords` embeds each state in R^3 (layout documented per
/// environment) and is used by the nearest-state fallback and by fixture
/// inspection; the absorbing state sits at a far sentinel coordinate.
struct TabularMdp {
  EnvSpec spec;
  Eigen::MatrixXi next_state;    // state_count x action_count
  Eigen::MatrixXd reward;        // state_count x action_count
  Eigen::VectorXd start_prob;    // state_count, sums to 1
  Eigen::MatrixXd state_coords;  // state_count x 3
  int absorbing_state = 0;
  int noop_action = 0;
};

/// Builds one of the built-in environments.
///
///   keydoor  — square grid; the agent must pick up a key and then reach the
///              door. Params: grid (5), key_row (1), key_col (3), door_row
///              (4), door_col (4), start_row (0), start_col (0),
///              step_penalty (-1), door_reward (10), horizon (20),
///              random_start (0). With random_start=1 the start cell is
///              drawn uniformly from all non-door cells.
///              Actions: 0 up, 1 down, 2 left, 3 right, 4 stay (noop).
///              State id: row*grid+col, plus grid*grid when the key is held;
///              the last id is the absorbing pad state.
///   corridor — 1-D walk to the rightmost cell. Params: length (12),
///              distractor_lo (4), distractor_hi (8), step_penalty (-1),
///              goal_reward (10), horizon (15), random_start (0). Inside
///              [distractor_lo, distractor_hi) every action moves right, so
///              behaviour there cannot affect the return. Actions: 0 left,
///              1 right, 2 stay (noop). State id: cell index; the last id is
///              the absorbing pad state.
///
/// Unknown environment names and invalid parameter values raise ConfigError.
std::shared_ptr<const TabularMdp> make_env(
    const std::string& name,
    const std::map<std::string, std::string>& params = {});

/// Row-stochastic action table: one distribution over actions per state.
/// Deterministic policies are one-hot rows.
struct Policy {
  Eigen::MatrixXd action_probs;

  int act(int state, Rng& rng) const;
};

Policy make_uniform_policy(int state_count, int action_count);
Policy make_constant_policy(int state_count, int action_count, int action);

/// Single-episode stepping interface over a tabular environment.
class Simulator {
 public:
  explicit Simulator(const TabularMdp& mdp) : mdp_(&mdp) {}

  struct Outcome {
    int next_state = 0;
    double reward = 0.0;
    bool done = false;
  };

  int reset(std::uint64_t seed);
  int reset(Rng& rng);
  int reset_to(int state);  // pin the start state (oracles and tests)
  Outcome step(int action);
  int state() const { return state_; }

 private:
  const TabularMdp* mdp_;
  int state_ = 0;
};

/// Optimal deterministic policy by value iteration over the tabular model,
/// ties broken toward the lowest action index.
Policy expert_policy(const TabularMdp& mdp);

struct RolloutResult {
  Trajectory trajectory;      // exactly `horizon` frames, absorbing-padded
  double total_return = 0.0;  // sum of per-frame rewards
};

/// Runs one episode. The seed drives both the start draw and any policy
/// sampling, so identical (env, policy, seed) give identical output.
RolloutResult rollout(const TabularMdp& mdp, const Policy& policy, std::uint64_t seed);

/// Mean/std over `n_rollouts` rollouts with per-rollout derived seeds.
ReturnStats evaluate(const TabularMdp& mdp, const Policy& policy, int n_rollouts,
                     std::uint64_t seed);

/// Expert demonstrations: one expert rollout per trajectory, each with its
/// own derived seed.
DemoSet gen_demos(const TabularMdp& mdp, int demo_count, std::uint64_t seed);

/// Exact expected return of a policy over the start distribution and policy
/// randomness, by forward dynamic programming over the horizon.
double exact_policy_return(const TabularMdp& mdp, const Policy& policy);

}  // namespace demosal
