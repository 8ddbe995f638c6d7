#include "piqa/rank.hpp"

#include <cmath>

#include "piqa/errors.hpp"

namespace piqa::rank {

GroupStats group_stats(const ScoreGroup& group) {
  const size_t k = group.scores.size();
  if (k < 2) throw ArgumentError("group_stats: need at least 2 scores");
  double sum = 0.0;
  for (const double q : group.scores) {
    if (!std::isfinite(q)) throw ArgumentError("group_stats: non-finite score");
    sum += q;
  }
  const double mean = sum / static_cast<double>(k);
  double ss = 0.0;
  for (const double q : group.scores) ss += (q - mean) * (q - mean);
  return {mean, ss / static_cast<double>(k - 1)};
}

double z_score(double q_k_i, const GroupStats& stats_i,
               const GroupStats& stats_j, double gamma) {
  if (!(gamma > 0.0)) throw ArgumentError("z_score: gamma must be positive");
  return (q_k_i - stats_j.mean) /
         std::sqrt(stats_i.variance + stats_j.variance + gamma);
}

double comp_prob(double z) {
  return 0.5 * std::erfc(-z * 0.70710678118654752440084436210485);
}

double rank_reward(double p, double y) {
  if (y != 0.0 && y != 0.5 && y != 1.0)
    throw ArgumentError("rank_reward: y must be 0, 0.5 or 1");
  return y * p + (1.0 - y) * (1.0 - p);
}

double preference_label(double mos_i, double mos_j) {
  if (std::fabs(mos_i - mos_j) <= 1e-9) return 0.5;
  return mos_i > mos_j ? 1.0 : 0.0;
}

std::vector<double> pair_rewards(const ScoreGroup& group_i,
                                 const ScoreGroup& group_j, double y,
                                 double gamma) {
  if (group_i.scores.size() != group_j.scores.size())
    throw ArgumentError("pair_rewards: group size mismatch");
  const GroupStats stats_i = group_stats(group_i);
  const GroupStats stats_j = group_stats(group_j);
  std::vector<double> rewards;
  rewards.reserve(group_i.scores.size());
  for (const double q : group_i.scores)
    rewards.push_back(
        rank_reward(comp_prob(z_score(q, stats_i, stats_j, gamma)), y));
  return rewards;
}

}  // namespace piqa::rank
