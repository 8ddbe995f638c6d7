#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "piqa/grpo.hpp"
#include "piqa/probe.hpp"
#include "piqa/rewards.hpp"
#include "piqa/types.hpp"

namespace piqa::sim {

// One grid patch of a synthetic scene.
struct ScenePatch {
  double quality = 5.0;  // [1,5], depressed when defective
  bool defect = false;
  DefectKind kind = DefectKind::blur;
  double severity = 0.0;    // (0,1] when defective
  double importance = 0.0;  // [0,1] when defective
};

// Desk-scale stand-in for a high-resolution image: a g x g patch grid with
// localized defects. The global observation carries the per-patch
// impact (importance * severity) at full strength only when the severity
// exceeds the visibility threshold; below it the signal is attenuated,
// mimicking subtle artifacts that require zooming in.
struct Scene {
  int g = 0;
  double visibility = 0.0;
  double attenuation = 0.0;
  std::vector<ScenePatch> patches;    // g*g, row-major
  std::vector<double> global_obs;     // per patch impact proxy
  double mos = 5.0;

  int cells() const { return g * g; }
  bool has_defect() const;
  double impact(int cell) const;  // importance * severity (0 for pristine)
  std::vector<int> defect_cells() const;
  Region defect_union_cells() const;  // in cell units
};

Scene make_scene(uint64_t seed, int g, double defect_prob, double visibility,
                 double attenuation = 0.2);

// Two linear softmax heads: the crop head picks one of g*g cells or no-crop
// (last action) from the global observation; the score head picks one of the
// score bins {1.0, 1.25, ..., 5.0} from global evidence plus optional crop
// observation features and a did-crop indicator.
struct ProbePolicy {
  grpo::ToyPolicy crop_head;
  grpo::ToyPolicy score_head;

  static ProbePolicy make(int g);
  int no_crop_action() const { return crop_head.n_actions() - 1; }
};

inline constexpr int kScoreBins = 17;
inline constexpr double kBinWidth = 0.25;
inline double bin_value(int bin) { return 1.0 + kBinWidth * bin; }
int nearest_bin(double score);

std::vector<double> crop_features(const Scene& scene);
std::vector<double> score_features(const Scene& scene, int crop_action);

struct SimConfig {
  int g = 6;
  int k = 6;                    // GRPO group size
  double epsilon = 0.2;         // clip threshold
  double beta_kl = 0.01;
  double gamma_rank = 1e-3;
  double tau = 0.5;
  rewards::RewardWeights weights{};
  double defect_prob = 0.10;
  double visibility = 0.5;
  double attenuation = 0.2;

  int stage1_scenes = 48;
  int stage1_iters = 500;
  double stage1_lr = 0.04;

  int stage2_corpus = 60;
  int stage2_epochs = 250;
  double stage2_lr = 0.05;

  int stage3_scenes = 96;
  int stage3_iters = 700;
  double stage3_lr = 0.02;

  int heldout_scenes = 200;
};

// One sampled episode with everything needed for exact gradients.
struct EpisodeSample {
  int crop_action = 0;
  int score_action = 0;
  bool did_crop = false;
  double score_value = 0.0;
  std::vector<double> crop_x;
  std::vector<double> score_x;
  double logp_new = 0.0;
  double logp_old = 0.0;
  double logp_ref = 0.0;
  double reward = 0.0;

  grpo::Rollout to_rollout() const;
};

// K sampled episodes with exact logprobs under the current policy and the
// old/reference snapshots (defaulting to the current policy).
std::vector<EpisodeSample> rollout_group(const ProbePolicy& policy,
                                         const Scene& scene, int k,
                                         uint64_t seed,
                                         bool force_no_crop = false,
                                         const ProbePolicy* old_snapshot = nullptr,
                                         const ProbePolicy* ref_snapshot = nullptr);

struct Curve {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string to_csv() const;
};

// Scene sets for the curriculum. Stage 1 uses fully visible defects
// (low-resolution analog); later stages mix in subtle scenes.
std::vector<Scene> make_scene_set(uint64_t seed, int count,
                                  const SimConfig& cfg,
                                  double subtle_fraction);

// Stage 1: pairwise ranking rewards on score-only episodes (no-crop forced),
// optimized with the clipped-surrogate objective. Curve columns:
// iter, mean_rank_reward, mean_group_std.
Curve stage1_train(ProbePolicy& policy, const std::vector<Scene>& scenes,
                   int pairs, int iters, const SimConfig& cfg, uint64_t seed);

// One trajectory-analog demonstration for cloning.
struct SimDemo {
  std::vector<double> crop_x;
  int crop_action = 0;
  std::vector<double> score_x;
  int score_action = 0;
};

// Teacher corpus under a crop strategy. degradation_only crops exactly the
// strongest defect cell on defective scenes and never elsewhere; partial
// crops a random defect cell and adds a small share of pristine-region
// crops; all_plus_context targets the strongest defect and mixes in enough
// pristine-region crops to break the crop/low-score correlation.
std::vector<SimDemo> build_sim_corpus(const std::vector<Scene>& scenes,
                                      probe::CropStrategy strategy,
                                      uint64_t seed);

// Stage 2: cross-entropy cloning of both heads. Curve: iter, loss.
Curve stage2_clone(ProbePolicy& policy, const std::vector<SimDemo>& corpus,
                   int iters, const SimConfig& cfg);

// Stage 3: decoupled rewards (accuracy / localization / format) with GRPO.
// Curve: iter, mean_r_acc, mean_r_loc, mean_r_fmt.
Curve stage3_train(ProbePolicy& policy, const std::vector<Scene>& scenes,
                   int iters, const rewards::RewardWeights& weights,
                   const SimConfig& cfg, uint64_t seed);

struct PolicyEval {
  double srcc = 0.0;
  double plcc = 0.0;
  double crop_hit_rate = 0.0;  // defective scenes whose greedy crop lands on
                               // a defect cell
  double crop_rate = 0.0;      // scenes where the greedy action crops at all
};

PolicyEval evaluate_policy(const ProbePolicy& policy,
                           const std::vector<Scene>& scenes);

// Mean greedy score on pristine probes without a crop minus with a
// pristine-cell crop, in score bins. Positive values mean the policy
// penalizes cropping as such.
double crop_score_bias_gap(const ProbePolicy& policy,
                           const std::vector<Scene>& pristine_scenes);

// Frozen GRPO group over the score head for gradient checking, built the
// same way stage 1 builds its update.
std::vector<grpo::FrozenEpisode> stage1_frozen_group(
    const ProbePolicy& policy, const Scene& scene_i, const Scene& scene_j,
    const SimConfig& cfg, uint64_t seed);

enum class AblationKind { stages, rewards, crop_strategy };
AblationKind ablation_kind_from_string(const std::string& s);

struct AblationSeedResult {
  uint64_t seed = 0;
  std::vector<std::string> labels;
  std::vector<double> srcc;
  std::vector<double> crop_hit_rate;
  std::vector<double> bias_gap_bins;  // crop_strategy ablation only
  bool ordering_holds = false;
};

struct AblationReport {
  std::string kind;
  std::string header;  // provenance note: synthetic scenes, orderings only
  std::vector<std::string> labels;
  std::vector<AblationSeedResult> per_seed;
  int seeds_with_ordering = 0;

  std::string to_json() const;
};

AblationReport run_ablation(AblationKind kind, uint64_t seed, int n_seeds,
                            const SimConfig& cfg);

// Policy checkpoints (JSON).
std::string policy_to_json(const ProbePolicy& policy);
ProbePolicy policy_from_json(const std::string& text);
void save_policy(const ProbePolicy& policy, const std::string& path);
ProbePolicy load_policy(const std::string& path);

}  // namespace piqa::sim
