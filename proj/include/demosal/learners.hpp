#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "demosal/envs.hpp"
#include "demosal/types.hpp"

namespace demosal {

/// One retained (state, action) pair plus where it came from in the demo grid.
struct TrainingPair {
  int state = 0;
  int action = 0;
  int traj = 0;
  int frame = 0;
};

struct TrainingSet {
  std::vector<TrainingPair> pairs;
};

enum class FallbackMode { kUniform, kNearest };

/// Specification of a pluggable imitation learner. Hyperparameters are fixed
/// per run; `state_count`/`action_count` size the policy tables and must
/// cover the evaluation environment.
///
///   bc_tabular    — majority action per observed state, ties toward the
///                   lowest action index.
///   bc_linear     — softmax linear model on one-hot state features, trained
///                   by full-batch gradient descent with a fixed schedule;
///                   acts by argmax.
///   adv_il        — adversarial imitation at tabular scale: alternates a
///                   logistic discriminator on expert-vs-policy state-action
///                   occupancy with soft value iteration on the
///                   log-discriminator reward. Requires `env`.
///   stub_constant — ignores its data and always returns `stub_policy`
///                   (test oracle for the normalization path).
///
/// States absent from the training data fall back to a uniform-random action
/// or, with FallbackMode::kNearest, to the action of the nearest seen state
/// under the environment's state embedding (requires `env`).
struct LearnerSpec {
  std::string name = "bc_tabular";
  int state_count = 0;
  int action_count = 0;
  FallbackMode fallback = FallbackMode::kUniform;

  // bc_linear
  int epochs = 200;
  double learning_rate = 0.5;
  double init_scale = 0.01;

  // adv_il; the discriminator is fit to near-optimality every round, which
  // keeps the adversarial loop from oscillating at this scale
  int adv_rounds = 10;
  int disc_steps = 100;
  double disc_lr = 10.0;
  double discount = 0.99;
  double temperature = 0.1;
  int vi_sweeps = 300;

  Policy stub_policy;
  std::shared_ptr<const TabularMdp> env;
};

/// Learner whose train() output is independent of the training data: it
/// always returns `fixed_policy`. The constant return it realizes is
/// whatever evaluating that policy yields.
LearnerSpec make_stub_constant(Policy fixed_policy);

/// Builds a LearnerSpec from config-file keys (learner_params.*), sizing the
/// tables from `env`. Unknown learner names and bad parameter values raise
/// ConfigError.
LearnerSpec learner_from_config(const std::string& name,
                                const std::map<std::string, std::string>& params,
                                std::shared_ptr<const TabularMdp> env);

/// Optional training diagnostics.
struct TrainDiag {
  bool used_fallback = false;          // empty training set
  std::vector<double> round_returns;   // adv_il: exact return after each round
};

/// Trains a policy. Deterministic in (spec, data, seed); model parameters
/// are freshly initialized from the seed on every call. An empty training
/// set yields the uniform-random fallback policy (flagged in `diag`) for
/// every learner except stub_constant.
Policy train(const LearnerSpec& spec, const TrainingSet& data, std::uint64_t seed,
             TrainDiag* diag = nullptr);

}  // namespace demosal
