#include "demosal/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "params.hpp"

namespace demosal {

namespace {

/// Nearest seen state under the environment embedding (L1 distance), ties
/// toward the lowest state id.
int nearest_seen_state(const TabularMdp& env, const std::vector<int>& seen, int state) {
  double best = std::numeric_limits<double>::infinity();
  int best_state = seen.front();
  for (int s : seen) {
    const double dist =
        (env.state_coords.row(s) - env.state_coords.row(state)).cwiseAbs().sum();
    if (dist < best) {
      best = dist;
      best_state = s;
    }
  }
  return best_state;
}

void fill_fallback_rows(const LearnerSpec& spec, const std::vector<int>& seen,
                        Eigen::MatrixXd& probs) {
  const int states = static_cast<int>(probs.rows());
  const int actions = static_cast<int>(probs.cols());
  std::vector<char> is_seen(states, 0);
  for (int s : seen) is_seen[s] = 1;
  for (int s = 0; s < states; ++s) {
    if (is_seen[s]) continue;
    if (spec.fallback == FallbackMode::kNearest) {
      if (!spec.env) {
        throw ConfigError("learner_params.fallback",
                          "nearest fallback requires an environment model");
      }
      probs.row(s) = probs.row(nearest_seen_state(*spec.env, seen, s));
    } else {
      probs.row(s).setConstant(1.0 / actions);
    }
  }
}

int argmax_lowest(const Eigen::VectorXd& values) {
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < values.size(); ++i) {
    if (values(i) > best_value) {
      best_value = values(i);
      best = i;
    }
  }
  return best;
}

Policy train_bc_tabular(const LearnerSpec& spec, const TrainingSet& data) {
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(spec.state_count, spec.action_count);
  for (const auto& pair : data.pairs) counts(pair.state, pair.action) += 1.0;

  Policy policy;
  policy.action_probs = Eigen::MatrixXd::Zero(spec.state_count, spec.action_count);
  std::vector<int> seen;
  for (int s = 0; s < spec.state_count; ++s) {
    if (counts.row(s).sum() <= 0.0) continue;
    policy.action_probs(s, argmax_lowest(counts.row(s).transpose())) = 1.0;
    seen.push_back(s);
  }
  fill_fallback_rows(spec, seen, policy.action_probs);
  return policy;
}

Policy train_bc_linear(const LearnerSpec& spec, const TrainingSet& data,
                       std::uint64_t seed) {
  const int states = spec.state_count;
  const int actions = spec.action_count;

  Rng rng(seed);
  Eigen::MatrixXd weights(actions, states);
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) weights(a, s) = rng.normal() * spec.init_scale;
  }

  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(actions, states);
  for (const auto& pair : data.pairs) counts(pair.action, pair.state) += 1.0;
  const Eigen::RowVectorXd per_state = counts.colwise().sum();
  const double total = static_cast<double>(data.pairs.size());

  // Full-batch gradient descent on the cross-entropy of the per-state
  // softmax; one-hot state features make the per-state columns independent.
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    Eigen::MatrixXd probs = weights;
    probs.rowwise() -= weights.colwise().maxCoeff();
    probs = probs.array().exp();
    probs.array().rowwise() /= probs.colwise().sum().array();
    const Eigen::MatrixXd grad =
        ((probs.array().rowwise() * per_state.array()) - counts.array()) / total;
    weights -= spec.learning_rate * grad;
  }

  Policy policy;
  policy.action_probs = Eigen::MatrixXd::Zero(states, actions);
  std::vector<int> seen;
  for (int s = 0; s < states; ++s) {
    if (per_state(s) <= 0.0) continue;
    policy.action_probs(s, argmax_lowest(weights.col(s))) = 1.0;
    seen.push_back(s);
  }
  fill_fallback_rows(spec, seen, policy.action_probs);
  return policy;
}

/// Transition table demonstrated by the training data: consecutive kept
/// frames of one trajectory yield (state, action) -> next state. Everything
/// not demonstrated self-loops, so the generator cannot plan through parts
/// of the world the masked demos never showed it.
Eigen::MatrixXi demonstrated_transitions(const TrainingSet& data, int states,
                                         int actions) {
  Eigen::MatrixXi next(states, actions);
  for (int s = 0; s < states; ++s) next.row(s).setConstant(s);

  long long frame_span = 0;
  for (const auto& pair : data.pairs) frame_span = std::max<long long>(frame_span, pair.frame);
  ++frame_span;
  std::unordered_map<long long, int> state_at;
  state_at.reserve(data.pairs.size());
  for (const auto& pair : data.pairs) {
    state_at[pair.traj * frame_span + pair.frame] = pair.state;
  }
  for (const auto& pair : data.pairs) {
    const auto it = state_at.find(pair.traj * frame_span + pair.frame + 1);
    if (it != state_at.end()) next(pair.state, pair.action) = it->second;
  }
  return next;
}

/// State-action occupancy of a policy over the horizon under the given
/// transition table, by forward dynamic programming (normalized to sum to 1).
Eigen::MatrixXd exact_occupancy(const Eigen::MatrixXi& next_state,
                                const Eigen::VectorXd& start_prob, int horizon,
                                const Eigen::MatrixXd& probs) {
  const int states = static_cast<int>(next_state.rows());
  const int actions = static_cast<int>(next_state.cols());
  Eigen::MatrixXd occupancy = Eigen::MatrixXd::Zero(states, actions);
  if (horizon == 0) return occupancy;

  Eigen::VectorXd dist = start_prob;
  for (int t = 0; t < horizon; ++t) {
    occupancy += (probs.array().colwise() * dist.array()).matrix();
    Eigen::VectorXd next_dist = Eigen::VectorXd::Zero(states);
    for (int s = 0; s < states; ++s) {
      if (dist(s) == 0.0) continue;
      for (int a = 0; a < actions; ++a) {
        next_dist(next_state(s, a)) += dist(s) * probs(s, a);
      }
    }
    dist.swap(next_dist);
  }
  return occupancy / horizon;
}

/// Soft (entropy-regularized) value iteration on an arbitrary reward table;
/// returns the softmax policy at the given temperature.
Eigen::MatrixXd soft_value_iteration(const Eigen::MatrixXi& next_state,
                                     const Eigen::MatrixXd& reward, double discount,
                                     double temperature, int sweeps) {
  const int states = static_cast<int>(next_state.rows());
  const int actions = static_cast<int>(next_state.cols());
  Eigen::VectorXd value = Eigen::VectorXd::Zero(states);
  Eigen::MatrixXd q(states, actions);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int s = 0; s < states; ++s) {
      for (int a = 0; a < actions; ++a) {
        q(s, a) = reward(s, a) + discount * value(next_state(s, a));
      }
      const double peak = q.row(s).maxCoeff();
      value(s) =
          peak + temperature *
                     std::log(((q.row(s).array() - peak) / temperature).exp().sum());
    }
  }
  Eigen::MatrixXd probs(states, actions);
  for (int s = 0; s < states; ++s) {
    probs.row(s) = ((q.row(s).array() - value(s)) / temperature).exp();
    probs.row(s) /= probs.row(s).sum();
  }
  return probs;
}

Policy train_adv_il(const LearnerSpec& spec, const TrainingSet& data,
                    std::uint64_t seed, TrainDiag& diag) {
  if (!spec.env) throw ConfigError("learner", "adv_il requires an environment model");
  const TabularMdp& mdp = *spec.env;
  if (spec.state_count != mdp.spec.state_count ||
      spec.action_count != mdp.spec.action_count) {
    throw ContractError("adv_il learner tables do not match its environment");
  }
  const int states = spec.state_count;
  const int actions = spec.action_count;

  Eigen::MatrixXd expert_occ = Eigen::MatrixXd::Zero(states, actions);
  for (const auto& pair : data.pairs) expert_occ(pair.state, pair.action) += 1.0;
  expert_occ /= static_cast<double>(data.pairs.size());

  // The generator plans over what the masked demos demonstrated, not over
  // the evaluation environment's true dynamics.
  const Eigen::MatrixXi model = demonstrated_transitions(data, states, actions);

  Rng rng(seed);
  Eigen::MatrixXd theta(states, actions);
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) theta(s, a) = rng.normal() * 0.01;
  }

  Policy policy = make_uniform_policy(states, actions);
  Policy best = policy;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int round = 0; round < spec.adv_rounds; ++round) {
    const Eigen::MatrixXd policy_occ =
        exact_occupancy(model, mdp.start_prob, mdp.spec.horizon, policy.action_probs);

    // Logistic discriminator on one-hot (state, action) features: ascend the
    // expected log-likelihood of separating expert from policy occupancy.
    for (int step = 0; step < spec.disc_steps; ++step) {
      const Eigen::ArrayXXd sig = 1.0 / (1.0 + (-theta.array()).exp());
      theta.array() +=
          spec.disc_lr * (expert_occ.array() * (1.0 - sig) - policy_occ.array() * sig);
    }

    // Generator reward log D(s,a) = -softplus(-theta), evaluated stably.
    Eigen::MatrixXd adv_reward(states, actions);
    for (int s = 0; s < states; ++s) {
      for (int a = 0; a < actions; ++a) {
        const double th = theta(s, a);
        adv_reward(s, a) =
            th < 0.0 ? th - std::log1p(std::exp(th)) : -std::log1p(std::exp(-th));
      }
    }

    policy.action_probs = soft_value_iteration(model, adv_reward, spec.discount,
                                               spec.temperature, spec.vi_sweeps);
    diag.round_returns.push_back(exact_policy_return(mdp, policy));

    // Keep the round that matches the expert occupancy best. The adversarial
    // loop circles its equilibrium rather than settling, and occupancy
    // distance is the one selection criterion that needs no reward access.
    const double gap =
        (exact_occupancy(model, mdp.start_prob, mdp.spec.horizon, policy.action_probs) -
         expert_occ)
            .cwiseAbs()
            .sum();
    if (gap < best_gap) {
      best_gap = gap;
      best = policy;
    }
  }
  return best;
}

}  // namespace

LearnerSpec make_stub_constant(Policy fixed_policy) {
  LearnerSpec spec;
  spec.name = "stub_constant";
  spec.state_count = static_cast<int>(fixed_policy.action_probs.rows());
  spec.action_count = static_cast<int>(fixed_policy.action_probs.cols());
  spec.stub_policy = std::move(fixed_policy);
  return spec;
}

LearnerSpec learner_from_config(const std::string& name,
                                const std::map<std::string, std::string>& params,
                                std::shared_ptr<const TabularMdp> env) {
  static const std::vector<std::string> kKnown = {"bc_tabular", "bc_linear", "adv_il",
                                                  "stub_constant"};
  if (std::find(kKnown.begin(), kKnown.end(), name) == kKnown.end()) {
    throw ConfigError("learner", "unknown learner '" + name + "'");
  }

  LearnerSpec spec;
  spec.name = name;
  spec.env = env;
  if (env) {
    spec.state_count = env->spec.state_count;
    spec.action_count = env->spec.action_count;
  }

  detail::ParamReader reader("learner_params.", params);
  const std::string fallback = reader.get_string("fallback", "uniform");
  if (fallback == "uniform") {
    spec.fallback = FallbackMode::kUniform;
  } else if (fallback == "nearest") {
    spec.fallback = FallbackMode::kNearest;
  } else {
    throw ConfigError("learner_params.fallback",
                      "expected uniform or nearest, got '" + fallback + "'");
  }
  spec.epochs = reader.get_int("epochs", spec.epochs);
  spec.learning_rate = reader.get_double("learning_rate", spec.learning_rate);
  spec.init_scale = reader.get_double("init_scale", spec.init_scale);
  spec.adv_rounds = reader.get_int("rounds", spec.adv_rounds);
  spec.disc_steps = reader.get_int("disc_steps", spec.disc_steps);
  spec.disc_lr = reader.get_double("disc_lr", spec.disc_lr);
  spec.discount = reader.get_double("discount", spec.discount);
  spec.temperature = reader.get_double("temperature", spec.temperature);
  spec.vi_sweeps = reader.get_int("vi_sweeps", spec.vi_sweeps);
  const int stub_action = reader.get_int("stub_action", env ? env->noop_action : 0);
  reader.finish();

  if (spec.epochs < 1) throw ConfigError("learner_params.epochs", "epochs must be >= 1");
  if (spec.learning_rate <= 0.0) {
    throw ConfigError("learner_params.learning_rate", "learning_rate must be > 0");
  }
  if (spec.adv_rounds < 1) throw ConfigError("learner_params.rounds", "rounds must be >= 1");
  if (spec.disc_steps < 1) {
    throw ConfigError("learner_params.disc_steps", "disc_steps must be >= 1");
  }
  if (!(spec.discount > 0.0 && spec.discount <= 1.0)) {
    throw ConfigError("learner_params.discount", "discount must lie in (0, 1]");
  }
  if (spec.temperature <= 0.0) {
    throw ConfigError("learner_params.temperature", "temperature must be > 0");
  }
  if (spec.vi_sweeps < 1) {
    throw ConfigError("learner_params.vi_sweeps", "vi_sweeps must be >= 1");
  }

  if (name == "stub_constant") {
    if (!env) throw ConfigError("learner", "stub_constant requires an environment");
    spec.stub_policy =
        make_constant_policy(spec.state_count, spec.action_count, stub_action);
  }
  return spec;
}

Policy train(const LearnerSpec& spec, const TrainingSet& data, std::uint64_t seed,
             TrainDiag* diag) {
  TrainDiag local;
  TrainDiag& out = diag ? *diag : local;
  out = TrainDiag{};

  if (spec.name == "stub_constant") {
    if (spec.stub_policy.action_probs.size() == 0) {
      throw ContractError("stub_constant has no stub policy");
    }
    return spec.stub_policy;
  }

  if (spec.state_count < 1 || spec.action_count < 1) {
    throw ContractError("learner spec has no table dimensions");
  }
  if (data.pairs.empty()) {
    out.used_fallback = true;
    return make_uniform_policy(spec.state_count, spec.action_count);
  }
  for (const auto& pair : data.pairs) {
    if (pair.state < 0 || pair.state >= spec.state_count || pair.action < 0 ||
        pair.action >= spec.action_count) {
      throw ContractError("training pair outside learner tables");
    }
  }

  if (spec.name == "bc_tabular") return train_bc_tabular(spec, data);
  if (spec.name == "bc_linear") return train_bc_linear(spec, data, seed);
  if (spec.name == "adv_il") return train_adv_il(spec, data, seed, out);
  throw ConfigError("learner", "unknown learner '" + spec.name + "'");
}

}  // namespace demosal
