#pragma once

#include <functional>
#include <span>
#include <vector>

#include "piqa/rng.hpp"

namespace piqa::grpo {

// One sampled response within a GRPO group.
struct Rollout {
  std::vector<int> actions;
  double logp_new = 0.0;
  double logp_old = 0.0;
  double logp_ref = 0.0;
  double reward = 0.0;
};

inline constexpr double kDefaultEpsilon = 0.2;
inline constexpr double kDefaultBetaKl = 0.01;

// (r_k - mean) / (std + 1e-8) with the population std. All-equal rewards
// normalize to all-zero advantages.
std::vector<double> group_advantages(std::span<const double> rewards);

// min(rho * A, clip(rho, 1-eps, 1+eps) * A) with rho = exp(logp_new - logp_old).
double clipped_surrogate(double logp_new, double logp_old, double advantage,
                         double epsilon = kDefaultEpsilon);

// Non-negative per-sample estimator: exp(d) - d - 1 with d = logp_ref - logp_new.
double kl_penalty(double logp_new, double logp_ref);

// Mean over the group of clipped surrogate minus beta_kl * KL penalty,
// with advantages normalized from the rollout rewards.
double grpo_objective(std::span<const Rollout> group,
                      double epsilon = kDefaultEpsilon,
                      double beta_kl = kDefaultBetaKl);

// Linear softmax policy: logits = W x, W stored row-major [action][feature].
class ToyPolicy {
 public:
  ToyPolicy() = default;
  ToyPolicy(int n_actions, int n_features)
      : n_actions_(n_actions), n_features_(n_features),
        w_(static_cast<size_t>(n_actions) * n_features, 0.0) {}

  int n_actions() const { return n_actions_; }
  int n_features() const { return n_features_; }
  std::vector<double>& params() { return w_; }
  const std::vector<double>& params() const { return w_; }

  std::vector<double> logits(std::span<const double> x) const;
  std::vector<double> probs(std::span<const double> x) const;
  double logprob(int action, std::span<const double> x) const;
  int sample(Rng& rng, std::span<const double> x, double* logp = nullptr) const;
  int argmax(std::span<const double> x) const;
  // Expected value of per-action values under the policy distribution.
  double expectation(std::span<const double> x,
                     std::span<const double> values) const;

  // grad += coef * d logprob(action | x) / dW
  void accumulate_logprob_grad(int action, std::span<const double> x,
                               double coef, std::vector<double>& grad) const;

 private:
  int n_actions_ = 0;
  int n_features_ = 0;
  std::vector<double> w_;
};

// Cross-entropy cloning loss: -sum_t log P(action_t | obs_t). Natural log.
double bc_loss(const ToyPolicy& policy,
               const std::vector<std::vector<double>>& observations,
               const std::vector<int>& target_actions);
std::vector<double> bc_loss_grad(
    const ToyPolicy& policy,
    const std::vector<std::vector<double>>& observations,
    const std::vector<int>& target_actions);

// A differentiable scalar objective of the policy parameters.
struct ObjectiveEvaluator {
  std::function<double(const ToyPolicy&)> value;
  std::function<std::vector<double>(const ToyPolicy&)> grad;
};

ObjectiveEvaluator make_bc_evaluator(
    std::vector<std::vector<double>> observations,
    std::vector<int> target_actions);

// GRPO objective as a function of theta through logp_new; old/ref logprobs,
// actions, rewards and per-step observations are frozen.
struct FrozenEpisode {
  std::vector<std::vector<double>> observations;  // one per step
  std::vector<int> actions;
  double logp_old = 0.0;
  double logp_ref = 0.0;
  double reward = 0.0;
};

ObjectiveEvaluator make_grpo_evaluator(std::vector<FrozenEpisode> group,
                                       double epsilon, double beta_kl);

// Max relative error between the analytic gradient and central finite
// differences over all parameters (denominator floored at 1e-8).
double grad_check(const ToyPolicy& policy, const ObjectiveEvaluator& objective,
                  double h = 1e-5);

// Adam step for the toy policies.
class Adam {
 public:
  explicit Adam(size_t n, double lr = 0.05, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0),
        v_(n, 0.0) {}

  // Gradient-ascent step (pass the gradient of the objective to maximize).
  void ascend(std::vector<double>& params, std::span<const double> grad);
  // Gradient-descent step for losses.
  void descend(std::vector<double>& params, std::span<const double> grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace piqa::grpo
