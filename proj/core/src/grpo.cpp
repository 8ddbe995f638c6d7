#include "piqa/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "piqa/errors.hpp"

namespace piqa::grpo {

std::vector<double> group_advantages(std::span<const double> rewards) {
  const size_t k = rewards.size();
  if (k < 2) throw ArgumentError("group_advantages: group size must be >= 2");
  double mean = 0.0;
  for (const double r : rewards) mean += r;
  mean /= static_cast<double>(k);
  double var = 0.0;
  for (const double r : rewards) var += (r - mean) * (r - mean);
  const double stddev = std::sqrt(var / static_cast<double>(k));
  std::vector<double> adv(k);
  for (size_t i = 0; i < k; ++i) adv[i] = (rewards[i] - mean) / (stddev + 1e-8);
  return adv;
}

double clipped_surrogate(double logp_new, double logp_old, double advantage,
                         double epsilon) {
  if (!(epsilon > 0.0))
    throw ArgumentError("clipped_surrogate: epsilon must be positive");
  const double rho = std::exp(logp_new - logp_old);
  const double clipped = std::clamp(rho, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(rho * advantage, clipped * advantage);
}

double kl_penalty(double logp_new, double logp_ref) {
  const double d = logp_ref - logp_new;
  return std::exp(d) - d - 1.0;
}

double grpo_objective(std::span<const Rollout> group, double epsilon,
                      double beta_kl) {
  if (group.size() < 2)
    throw ArgumentError("grpo_objective: group size must be >= 2");
  if (beta_kl < 0.0)
    throw ArgumentError("grpo_objective: beta_kl must be >= 0");
  std::vector<double> rewards;
  rewards.reserve(group.size());
  for (const Rollout& r : group) rewards.push_back(r.reward);
  const std::vector<double> adv = group_advantages(rewards);

  double acc = 0.0;
  for (size_t k = 0; k < group.size(); ++k) {
    acc += clipped_surrogate(group[k].logp_new, group[k].logp_old, adv[k],
                             epsilon) -
           beta_kl * kl_penalty(group[k].logp_new, group[k].logp_ref);
  }
  return acc / static_cast<double>(group.size());
}

// ---- ToyPolicy ----

std::vector<double> ToyPolicy::logits(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_features_)
    throw ArgumentError("ToyPolicy: feature size mismatch");
  std::vector<double> l(n_actions_, 0.0);
  for (int a = 0; a < n_actions_; ++a) {
    const double* row = &w_[static_cast<size_t>(a) * n_features_];
    double acc = 0.0;
    for (int f = 0; f < n_features_; ++f) acc += row[f] * x[f];
    l[a] = acc;
  }
  return l;
}

std::vector<double> ToyPolicy::probs(std::span<const double> x) const {
  std::vector<double> l = logits(x);
  const double m = *std::max_element(l.begin(), l.end());
  double z = 0.0;
  for (double& v : l) {
    v = std::exp(v - m);
    z += v;
  }
  for (double& v : l) v /= z;
  return l;
}

double ToyPolicy::logprob(int action, std::span<const double> x) const {
  if (action < 0 || action >= n_actions_)
    throw ArgumentError("ToyPolicy: action out of range");
  std::vector<double> l = logits(x);
  const double m = *std::max_element(l.begin(), l.end());
  double z = 0.0;
  for (const double v : l) z += std::exp(v - m);
  return l[action] - m - std::log(z);
}

int ToyPolicy::sample(Rng& rng, std::span<const double> x, double* logp) const {
  const std::vector<double> p = probs(x);
  const double u = rng.uniform();
  double acc = 0.0;
  int action = n_actions_ - 1;
  for (int a = 0; a < n_actions_; ++a) {
    acc += p[a];
    if (u < acc) {
      action = a;
      break;
    }
  }
  if (logp) *logp = std::log(std::max(p[action], 1e-300));
  return action;
}

int ToyPolicy::argmax(std::span<const double> x) const {
  const std::vector<double> l = logits(x);
  return static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
}

double ToyPolicy::expectation(std::span<const double> x,
                              std::span<const double> values) const {
  if (values.size() != static_cast<size_t>(n_actions_))
    throw ArgumentError("ToyPolicy: value size mismatch");
  const std::vector<double> p = probs(x);
  double acc = 0.0;
  for (int a = 0; a < n_actions_; ++a) acc += p[a] * values[a];
  return acc;
}

void ToyPolicy::accumulate_logprob_grad(int action, std::span<const double> x,
                                        double coef,
                                        std::vector<double>& grad) const {
  const std::vector<double> p = probs(x);
  for (int a = 0; a < n_actions_; ++a) {
    const double w = coef * ((a == action ? 1.0 : 0.0) - p[a]);
    double* row = &grad[static_cast<size_t>(a) * n_features_];
    for (int f = 0; f < n_features_; ++f) row[f] += w * x[f];
  }
}

// ---- Behavior cloning ----

double bc_loss(const ToyPolicy& policy,
               const std::vector<std::vector<double>>& observations,
               const std::vector<int>& target_actions) {
  if (observations.size() != target_actions.size())
    throw ArgumentError("bc_loss: observations/actions length mismatch");
  double loss = 0.0;
  for (size_t t = 0; t < observations.size(); ++t)
    loss -= policy.logprob(target_actions[t], observations[t]);
  return loss;
}

std::vector<double> bc_loss_grad(
    const ToyPolicy& policy,
    const std::vector<std::vector<double>>& observations,
    const std::vector<int>& target_actions) {
  if (observations.size() != target_actions.size())
    throw ArgumentError("bc_loss_grad: observations/actions length mismatch");
  std::vector<double> grad(policy.params().size(), 0.0);
  for (size_t t = 0; t < observations.size(); ++t)
    policy.accumulate_logprob_grad(target_actions[t], observations[t], -1.0,
                                   grad);
  return grad;
}

ObjectiveEvaluator make_bc_evaluator(
    std::vector<std::vector<double>> observations,
    std::vector<int> target_actions) {
  auto obs = std::make_shared<std::vector<std::vector<double>>>(
      std::move(observations));
  auto acts = std::make_shared<std::vector<int>>(std::move(target_actions));
  ObjectiveEvaluator ev;
  ev.value = [obs, acts](const ToyPolicy& p) { return bc_loss(p, *obs, *acts); };
  ev.grad = [obs, acts](const ToyPolicy& p) {
    return bc_loss_grad(p, *obs, *acts);
  };
  return ev;
}

// ---- Frozen-group GRPO evaluator ----

namespace {

double episode_logp(const ToyPolicy& policy, const FrozenEpisode& ep) {
  double logp = 0.0;
  for (size_t t = 0; t < ep.actions.size(); ++t)
    logp += policy.logprob(ep.actions[t], ep.observations[t]);
  return logp;
}

}  // namespace

ObjectiveEvaluator make_grpo_evaluator(std::vector<FrozenEpisode> group,
                                       double epsilon, double beta_kl) {
  if (group.size() < 2)
    throw ArgumentError("make_grpo_evaluator: group size must be >= 2");
  auto eps = std::make_shared<std::vector<FrozenEpisode>>(std::move(group));

  std::vector<double> rewards;
  for (const FrozenEpisode& ep : *eps) rewards.push_back(ep.reward);
  auto adv = std::make_shared<std::vector<double>>(group_advantages(rewards));

  ObjectiveEvaluator ev;
  ev.value = [eps, adv, epsilon, beta_kl](const ToyPolicy& p) {
    double acc = 0.0;
    for (size_t k = 0; k < eps->size(); ++k) {
      const FrozenEpisode& ep = (*eps)[k];
      const double lnew = episode_logp(p, ep);
      acc += clipped_surrogate(lnew, ep.logp_old, (*adv)[k], epsilon) -
             beta_kl * kl_penalty(lnew, ep.logp_ref);
    }
    return acc / static_cast<double>(eps->size());
  };
  ev.grad = [eps, adv, epsilon, beta_kl](const ToyPolicy& p) {
    std::vector<double> grad(p.params().size(), 0.0);
    const double inv_k = 1.0 / static_cast<double>(eps->size());
    for (size_t k = 0; k < eps->size(); ++k) {
      const FrozenEpisode& ep = (*eps)[k];
      const double lnew = episode_logp(p, ep);
      const double rho = std::exp(lnew - ep.logp_old);
      const double a = (*adv)[k];
      double surrogate_coef;
      if (rho >= 1.0 - epsilon && rho <= 1.0 + epsilon) {
        surrogate_coef = rho * a;  // branches coincide inside the band
      } else {
        const double clipped = std::clamp(rho, 1.0 - epsilon, 1.0 + epsilon);
        surrogate_coef = rho * a <= clipped * a ? rho * a : 0.0;
      }
      const double kl_coef =
          -beta_kl * (1.0 - std::exp(ep.logp_ref - lnew));
      const double coef = (surrogate_coef + kl_coef) * inv_k;
      for (size_t t = 0; t < ep.actions.size(); ++t)
        p.accumulate_logprob_grad(ep.actions[t], ep.observations[t], coef,
                                  grad);
    }
    return grad;
  };
  return ev;
}

double grad_check(const ToyPolicy& policy, const ObjectiveEvaluator& objective,
                  double h) {
  if (!(h > 0.0)) throw ArgumentError("grad_check: h must be positive");
  const std::vector<double> analytic = objective.grad(policy);
  ToyPolicy probe = policy;
  double max_rel = 0.0;
  for (size_t i = 0; i < probe.params().size(); ++i) {
    const double saved = probe.params()[i];
    probe.params()[i] = saved + h;
    const double fp = objective.value(probe);
    probe.params()[i] = saved - h;
    const double fm = objective.value(probe);
    probe.params()[i] = saved;
    const double fd = (fp - fm) / (2.0 * h);
    const double denom =
        std::max({std::fabs(fd), std::fabs(analytic[i]), 1e-8});
    max_rel = std::max(max_rel, std::fabs(fd - analytic[i]) / denom);
  }
  return max_rel;
}

// ---- Adam ----

void Adam::ascend(std::vector<double>& params, std::span<const double> grad) {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] += lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
  }
}

void Adam::descend(std::vector<double>& params, std::span<const double> grad) {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
  }
}

}  // namespace piqa::grpo
