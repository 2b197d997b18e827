#include "demosal/envs.hpp"

#include <algorithm>
#include <limits>

#include "params.hpp"

namespace demosal {

namespace {

constexpr double kSentinelCoord = 1000.0;  // keeps the pad state far from real states

std::shared_ptr<const TabularMdp> make_keydoor(
    const std::map<std::string, std::string>& params) {
  detail::ParamReader reader("env_params.", params);
  const int grid = reader.get_int("grid", 5);
  const int key_row = reader.get_int("key_row", 1);
  const int key_col = reader.get_int("key_col", 3);
  const int door_row = reader.get_int("door_row", 4);
  const int door_col = reader.get_int("door_col", 4);
  const int start_row = reader.get_int("start_row", 0);
  const int start_col = reader.get_int("start_col", 0);
  const double step_penalty = reader.get_double("step_penalty", -1.0);
  const double door_reward = reader.get_double("door_reward", 10.0);
  const int horizon = reader.get_int("horizon", 20);
  const bool random_start = reader.get_flag("random_start", false);
  reader.finish();

  if (grid < 1) throw ConfigError("env_params.grid", "grid must be >= 1");
  if (horizon < 0) throw ConfigError("env_params.horizon", "horizon must be >= 0");
  auto check_cell = [&](const char* key, int row, int col) {
    if (row < 0 || row >= grid || col < 0 || col >= grid) {
      throw ConfigError(std::string("env_params.") + key, "cell outside the grid");
    }
  };
  check_cell("key_row", key_row, key_col);
  check_cell("door_row", door_row, door_col);
  check_cell("start_row", start_row, start_col);

  const int cells = grid * grid;
  const int key_pos = key_row * grid + key_col;
  const int door_pos = door_row * grid + door_col;
  const int state_count = 2 * cells + 1;
  const int action_count = 5;  // up, down, left, right, stay
  const int absorbing = 2 * cells;

  auto mdp = std::make_shared<TabularMdp>();
  mdp->next_state.resize(state_count, action_count);
  mdp->reward.resize(state_count, action_count);
  mdp->state_coords.resize(state_count, 3);
  mdp->absorbing_state = absorbing;
  mdp->noop_action = 4;

  const int row_delta[5] = {-1, 1, 0, 0, 0};
  const int col_delta[5] = {0, 0, -1, 1, 0};
  for (int pos = 0; pos < cells; ++pos) {
    const int row = pos / grid;
    const int col = pos % grid;
    for (int key = 0; key < 2; ++key) {
      const int state = pos + key * cells;
      mdp->state_coords.row(state) << row, col, key * 2.0 * grid;
      for (int a = 0; a < action_count; ++a) {
        const int next_row = std::clamp(row + row_delta[a], 0, grid - 1);
        const int next_col = std::clamp(col + col_delta[a], 0, grid - 1);
        const int next_pos = next_row * grid + next_col;
        const int next_key = (key == 1 || next_pos == key_pos) ? 1 : 0;
        if (next_pos == door_pos && next_key == 1) {
          mdp->next_state(state, a) = absorbing;
          mdp->reward(state, a) = step_penalty + door_reward;
        } else {
          mdp->next_state(state, a) = next_pos + next_key * cells;
          mdp->reward(state, a) = step_penalty;
        }
      }
    }
  }
  mdp->state_coords.row(absorbing).setConstant(kSentinelCoord);
  for (int a = 0; a < action_count; ++a) {
    mdp->next_state(absorbing, a) = absorbing;
    mdp->reward(absorbing, a) = 0.0;
  }

  mdp->start_prob = Eigen::VectorXd::Zero(state_count);
  if (random_start) {
    const double p = 1.0 / (cells - 1);
    for (int pos = 0; pos < cells; ++pos) {
      if (pos == door_pos) continue;
      mdp->start_prob(pos + (pos == key_pos ? cells : 0)) += p;
    }
  } else {
    const int start_pos = start_row * grid + start_col;
    mdp->start_prob(start_pos + (start_pos == key_pos ? cells : 0)) = 1.0;
  }

  mdp->spec.name = "keydoor";
  mdp->spec.state_count = state_count;
  mdp->spec.action_count = action_count;
  mdp->spec.horizon = horizon;
  mdp->spec.deterministic = !random_start;
  mdp->spec.params = {{"grid", std::to_string(grid)},
                      {"key_row", std::to_string(key_row)},
                      {"key_col", std::to_string(key_col)},
                      {"door_row", std::to_string(door_row)},
                      {"door_col", std::to_string(door_col)},
                      {"start_row", std::to_string(start_row)},
                      {"start_col", std::to_string(start_col)},
                      {"step_penalty", std::to_string(step_penalty)},
                      {"door_reward", std::to_string(door_reward)},
                      {"horizon", std::to_string(horizon)},
                      {"random_start", random_start ? "1" : "0"}};
  return mdp;
}

std::shared_ptr<const TabularMdp> make_corridor(
    const std::map<std::string, std::string>& params) {
  detail::ParamReader reader("env_params.", params);
  const int length = reader.get_int("length", 12);
  const int distractor_lo = reader.get_int("distractor_lo", 4);
  const int distractor_hi = reader.get_int("distractor_hi", 8);
  const double step_penalty = reader.get_double("step_penalty", -1.0);
  const double goal_reward = reader.get_double("goal_reward", 10.0);
  const int horizon = reader.get_int("horizon", 15);
  const bool random_start = reader.get_flag("random_start", false);
  reader.finish();

  if (length < 2) throw ConfigError("env_params.length", "length must be >= 2");
  if (horizon < 0) throw ConfigError("env_params.horizon", "horizon must be >= 0");
  if (distractor_lo < 0 || distractor_hi < distractor_lo || distractor_hi > length - 1) {
    throw ConfigError("env_params.distractor_lo",
                      "distractor segment must lie inside [0, length-1]");
  }

  const int goal = length - 1;
  const int state_count = length + 1;
  const int action_count = 3;  // left, right, stay
  const int absorbing = length;

  auto mdp = std::make_shared<TabularMdp>();
  mdp->next_state.resize(state_count, action_count);
  mdp->reward.resize(state_count, action_count);
  mdp->state_coords.resize(state_count, 3);
  mdp->absorbing_state = absorbing;
  mdp->noop_action = 2;

  for (int pos = 0; pos < length; ++pos) {
    mdp->state_coords.row(pos) << pos, 0.0, 0.0;
    for (int a = 0; a < action_count; ++a) {
      if (pos == goal) {  // unreachable (entering the goal absorbs) but total
        mdp->next_state(pos, a) = absorbing;
        mdp->reward(pos, a) = 0.0;
        continue;
      }
      int next_pos;
      if (pos >= distractor_lo && pos < distractor_hi) {
        next_pos = pos + 1;  // conveyor: every action moves right
      } else if (a == 0) {
        next_pos = std::max(pos - 1, 0);
      } else if (a == 1) {
        next_pos = std::min(pos + 1, goal);
      } else {
        next_pos = pos;
      }
      if (next_pos == goal) {
        mdp->next_state(pos, a) = absorbing;
        mdp->reward(pos, a) = step_penalty + goal_reward;
      } else {
        mdp->next_state(pos, a) = next_pos;
        mdp->reward(pos, a) = step_penalty;
      }
    }
  }
  mdp->state_coords.row(absorbing).setConstant(kSentinelCoord);
  for (int a = 0; a < action_count; ++a) {
    mdp->next_state(absorbing, a) = absorbing;
    mdp->reward(absorbing, a) = 0.0;
  }

  mdp->start_prob = Eigen::VectorXd::Zero(state_count);
  if (random_start) {
    for (int pos = 0; pos < goal; ++pos) mdp->start_prob(pos) = 1.0 / goal;
  } else {
    mdp->start_prob(0) = 1.0;
  }

  mdp->spec.name = "corridor";
  mdp->spec.state_count = state_count;
  mdp->spec.action_count = action_count;
  mdp->spec.horizon = horizon;
  mdp->spec.deterministic = !random_start;
  mdp->spec.params = {{"length", std::to_string(length)},
                      {"distractor_lo", std::to_string(distractor_lo)},
                      {"distractor_hi", std::to_string(distractor_hi)},
                      {"step_penalty", std::to_string(step_penalty)},
                      {"goal_reward", std::to_string(goal_reward)},
                      {"horizon", std::to_string(horizon)},
                      {"random_start", random_start ? "1" : "0"}};
  return mdp;
}

int sample_start(const TabularMdp& mdp, Rng& rng) {
  const double u = rng.uniform01();
  double cum = 0.0;
  int last = 0;
  for (int s = 0; s < mdp.start_prob.size(); ++s) {
    if (mdp.start_prob(s) <= 0.0) continue;
    cum += mdp.start_prob(s);
    last = s;
    if (u < cum) return s;
  }
  return last;
}

}  // namespace

std::shared_ptr<const TabularMdp> make_env(
    const std::string& name, const std::map<std::string, std::string>& params) {
  if (name == "keydoor") return make_keydoor(params);
  if (name == "corridor") return make_corridor(params);
  throw ConfigError("env", "unknown environment '" + name + "'");
}

int Policy::act(int state, Rng& rng) const {
  if (state < 0 || state >= action_probs.rows()) {
    throw ContractError("policy queried with state " + std::to_string(state) +
                        " outside its table");
  }
  const double u = rng.uniform01();
  double cum = 0.0;
  const int actions = static_cast<int>(action_probs.cols());
  for (int a = 0; a < actions; ++a) {
    cum += action_probs(state, a);
    if (u < cum) return a;
  }
  return actions - 1;
}

Policy make_uniform_policy(int state_count, int action_count) {
  Policy policy;
  policy.action_probs =
      Eigen::MatrixXd::Constant(state_count, action_count, 1.0 / action_count);
  return policy;
}

Policy make_constant_policy(int state_count, int action_count, int action) {
  if (action < 0 || action >= action_count) {
    throw ContractError("constant policy action out of range");
  }
  Policy policy;
  policy.action_probs = Eigen::MatrixXd::Zero(state_count, action_count);
  policy.action_probs.col(action).setOnes();
  return policy;
}

int Simulator::reset(std::uint64_t seed) {
  Rng rng(seed);
  return reset(rng);
}

int Simulator::reset(Rng& rng) {
  state_ = sample_start(*mdp_, rng);
  return state_;
}

int Simulator::reset_to(int state) {
  if (state < 0 || state >= mdp_->spec.state_count) {
    throw ContractError("reset_to state out of range");
  }
  state_ = state;
  return state_;
}

Simulator::Outcome Simulator::step(int action) {
  if (action < 0 || action >= mdp_->spec.action_count) {
    throw ContractError("invalid action " + std::to_string(action) + " for env '" +
                        mdp_->spec.name + "'");
  }
  const int next = mdp_->next_state(state_, action);
  const double reward = mdp_->reward(state_, action);
  const bool done = next == mdp_->absorbing_state && state_ != mdp_->absorbing_state;
  state_ = next;
  return {next, reward, done};
}

Policy expert_policy(const TabularMdp& mdp) {
  const int states = mdp.spec.state_count;
  const int actions = mdp.spec.action_count;

  // Undiscounted value iteration; `horizon` sweeps reach the fixed-horizon
  // optimum for every state that can reach the absorbing goal in time.
  Eigen::VectorXd value = Eigen::VectorXd::Zero(states);
  Eigen::VectorXd next_value(states);
  for (int sweep = 0; sweep < mdp.spec.horizon; ++sweep) {
    for (int s = 0; s < states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < actions; ++a) {
        best = std::max(best, mdp.reward(s, a) + value(mdp.next_state(s, a)));
      }
      next_value(s) = best;
    }
    value.swap(next_value);
  }

  Policy policy;
  policy.action_probs = Eigen::MatrixXd::Zero(states, actions);
  for (int s = 0; s < states; ++s) {
    int best_action = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < actions; ++a) {
      const double q = mdp.reward(s, a) + value(mdp.next_state(s, a));
      if (q > best) {  // strict: ties stay on the lowest action index
        best = q;
        best_action = a;
      }
    }
    policy.action_probs(s, best_action) = 1.0;
  }
  return policy;
}

RolloutResult rollout(const TabularMdp& mdp, const Policy& policy, std::uint64_t seed) {
  if (policy.action_probs.rows() != mdp.spec.state_count ||
      policy.action_probs.cols() != mdp.spec.action_count) {
    throw ContractError("policy table does not match env '" + mdp.spec.name + "'");
  }
  Rng rng(seed);
  Simulator sim(mdp);
  sim.reset(rng);

  RolloutResult result;
  result.trajectory.reserve(mdp.spec.horizon);
  bool done = false;
  for (int t = 0; t < mdp.spec.horizon; ++t) {
    if (!done) {
      const int state = sim.state();
      const int action = policy.act(state, rng);
      const auto outcome = sim.step(action);
      result.trajectory.push_back({state, action, outcome.reward});
      result.total_return += outcome.reward;
      done = outcome.done;
    } else {
      result.trajectory.push_back({mdp.absorbing_state, mdp.noop_action, 0.0});
    }
  }
  return result;
}

ReturnStats evaluate(const TabularMdp& mdp, const Policy& policy, int n_rollouts,
                     std::uint64_t seed) {
  if (n_rollouts < 1) throw ConfigError("n_rollouts", "n_rollouts must be >= 1");
  std::vector<double> returns(n_rollouts);
  for (int j = 0; j < n_rollouts; ++j) {
    returns[j] = rollout(mdp, policy, derive_seed(seed, j)).total_return;
  }
  return make_return_stats(std::move(returns));
}

DemoSet gen_demos(const TabularMdp& mdp, int demo_count, std::uint64_t seed) {
  if (demo_count < 1) throw ConfigError("H", "H must be >= 1");
  const Policy expert = expert_policy(mdp);
  DemoSet demos;
  demos.env_name = mdp.spec.name;
  demos.horizon = mdp.spec.horizon;
  demos.action_count = mdp.spec.action_count;
  demos.trajectories.reserve(demo_count);
  for (int h = 0; h < demo_count; ++h) {
    demos.trajectories.push_back(rollout(mdp, expert, derive_seed(seed, h)).trajectory);
  }
  return demos;
}

double exact_policy_return(const TabularMdp& mdp, const Policy& policy) {
  if (policy.action_probs.rows() != mdp.spec.state_count ||
      policy.action_probs.cols() != mdp.spec.action_count) {
    throw ContractError("policy table does not match env '" + mdp.spec.name + "'");
  }
  const int states = mdp.spec.state_count;
  const int actions = mdp.spec.action_count;
  const Eigen::VectorXd step_reward =
      policy.action_probs.cwiseProduct(mdp.reward).rowwise().sum();

  Eigen::VectorXd dist = mdp.start_prob;
  double total = 0.0;
  for (int t = 0; t < mdp.spec.horizon; ++t) {
    total += dist.dot(step_reward);
    Eigen::VectorXd next_dist = Eigen::VectorXd::Zero(states);
    for (int s = 0; s < states; ++s) {
      if (dist(s) == 0.0) continue;
      for (int a = 0; a < actions; ++a) {
        next_dist(mdp.next_state(s, a)) += dist(s) * policy.action_probs(s, a);
      }
    }
    dist.swap(next_dist);
  }
  return total;
}

}  // namespace demosal
