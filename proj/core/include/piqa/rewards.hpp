#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "piqa/types.hpp"

namespace piqa::rewards {

struct RewardWeights {
  double alpha = 1.0;      // accuracy
  double beta_loc = 0.15;  // localization
  double gamma_fmt = 0.1;  // format compliance

  void validate() const;
};

struct RewardBreakdown {
  double r_acc = 0.0;
  double r_loc = 0.0;
  double r_fmt = 0.0;
  double r_total = 0.0;
};

inline constexpr double kDefaultTau = 0.5;

// exp(-|s_pred - s_mos| / tau), in (0,1].
double acc_reward(double s_pred, double s_mos, double tau = kDefaultTau);

// Intersection over union of axis-aligned rectangles, in [0,1], symmetric.
double iou(const Region& a, const Region& b);

// 0 without a defect or prediction; otherwise IoU against the tight bounding
// box of the union of all defect regions.
double loc_reward(bool has_defect, const std::optional<Region>& b_pred,
                  const std::vector<DefectRecord>& defects);

// 1 iff the trace is, in order: one <think>...</think> block, zero or more
// <crop x= y= w= h=/> actions each followed by <observe/>, and one terminal
// <score>v</score> with v in [1,5]. Anything else scores 0.
double format_reward(std::string_view trace_text);

RewardBreakdown total_reward(double r_acc, double r_loc, double r_fmt,
                             const RewardWeights& weights = {});

// Structured view of a valid trace, for consumers that need the actions.
struct ParsedTrace {
  std::vector<Region> crops;
  double score = 0.0;
};
std::optional<ParsedTrace> parse_trace(std::string_view trace_text);

}  // namespace piqa::rewards
