#pragma once

#include <span>
#include <vector>

namespace piqa::rank {

// The K quality scores one stochastic policy emits for one image.
struct ScoreGroup {
  std::vector<double> scores;
};

struct GroupStats {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
};

struct PreferencePair {
  double mos_i = 0.0;
  double mos_j = 0.0;
  double y = 0.5;  // in {0, 0.5, 1}
};

inline constexpr double kDefaultGamma = 1e-3;

GroupStats group_stats(const ScoreGroup& group);

// Standardized difference of one score against the opposing group:
// (q_k_i - mean_j) / sqrt(var_i + var_j + gamma).
double z_score(double q_k_i, const GroupStats& stats_i,
               const GroupStats& stats_j, double gamma = kDefaultGamma);

// Standard Gaussian CDF, accurate to well under 1e-9 absolute.
double comp_prob(double z);

// Fidelity reward y*p + (1-y)*(1-p); y must be 0, 0.5 or 1.
double rank_reward(double p, double y);

// 1 if mos_i > mos_j, 0.5 if equal (within 1e-9), else 0.
double preference_label(double mos_i, double mos_j);

// Per-sample rewards for group_i against group_j under preference y.
std::vector<double> pair_rewards(const ScoreGroup& group_i,
                                 const ScoreGroup& group_j, double y,
                                 double gamma = kDefaultGamma);

}  // namespace piqa::rank
