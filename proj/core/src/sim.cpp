#include "piqa/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "piqa/eval.hpp"
#include "piqa/io_util.hpp"
#include "piqa/rank.hpp"

namespace piqa::sim {

namespace {

// Area saturation of a single grid cell in the scene MOS formula, the
// grid analog of the 5%-of-image defect saturation.
double cell_saturation(int g) {
  return std::min(1.0, (1.0 / (g * g)) / 0.05);
}

}  // namespace

bool Scene::has_defect() const {
  for (const ScenePatch& p : patches)
    if (p.defect) return true;
  return false;
}

double Scene::impact(int cell) const {
  const ScenePatch& p = patches[cell];
  return p.defect ? p.importance * p.severity : 0.0;
}

std::vector<int> Scene::defect_cells() const {
  std::vector<int> cells;
  for (int i = 0; i < static_cast<int>(patches.size()); ++i)
    if (patches[i].defect) cells.push_back(i);
  return cells;
}

Region Scene::defect_union_cells() const {
  std::vector<Region> boxes;
  for (int i = 0; i < static_cast<int>(patches.size()); ++i)
    if (patches[i].defect)
      boxes.push_back(Region{i % g, i / g, 1, 1});
  return union_box(boxes);
}

Scene make_scene(uint64_t seed, int g, double defect_prob, double visibility,
                 double attenuation) {
  if (g < 2) throw ArgumentError("make_scene: g must be >= 2");
  if (!(defect_prob >= 0.0 && defect_prob <= 1.0))
    throw ArgumentError("make_scene: defect_prob out of [0,1]");
  if (visibility < 0.0) throw ArgumentError("make_scene: negative visibility");

  Rng rng(seed);
  Scene scene;
  scene.g = g;
  scene.visibility = visibility;
  scene.attenuation = attenuation;
  scene.patches.resize(static_cast<size_t>(g) * g);
  scene.global_obs.assign(scene.patches.size(), 0.0);

  const double sat = cell_saturation(g);
  double total_impact = 0.0;
  for (size_t i = 0; i < scene.patches.size(); ++i) {
    ScenePatch& p = scene.patches[i];
    if (rng.bernoulli(defect_prob)) {
      p.defect = true;
      p.severity = rng.uniform(0.25, 1.0);
      p.importance = rng.uniform(0.2, 1.0);
      p.kind = static_cast<DefectKind>(rng.uniform_int(4));
      p.quality = 5.0 - 4.0 * p.severity;
      const double impact = p.importance * p.severity;
      scene.global_obs[i] =
          p.severity > visibility ? impact : attenuation * impact;
      total_impact += impact * sat;
    } else {
      p.quality = 5.0;
    }
  }
  scene.mos = 5.0 - 4.0 * std::min(1.0, total_impact);
  return scene;
}

ProbePolicy ProbePolicy::make(int g) {
  ProbePolicy policy;
  policy.crop_head = grpo::ToyPolicy(g * g + 1, 1 + g * g);
  policy.score_head = grpo::ToyPolicy(kScoreBins, 5);
  return policy;
}

int nearest_bin(double score) {
  const int bin = static_cast<int>(std::lround((score - 1.0) / kBinWidth));
  return std::clamp(bin, 0, kScoreBins - 1);
}

std::vector<double> crop_features(const Scene& scene) {
  std::vector<double> x;
  x.reserve(1 + scene.global_obs.size());
  x.push_back(1.0);
  x.insert(x.end(), scene.global_obs.begin(), scene.global_obs.end());
  return x;
}

std::vector<double> score_features(const Scene& scene, int crop_action) {
  const double sat = cell_saturation(scene.g);
  double sum = 0.0, mx = 0.0;
  for (const double v : scene.global_obs) {
    sum += v;
    mx = std::max(mx, v);
  }
  const bool did_crop = crop_action >= 0 && crop_action < scene.cells();
  double revealed = 0.0;
  if (did_crop)
    revealed = sat * (scene.impact(crop_action) -
                      scene.global_obs[crop_action]);
  return {1.0, sat * sum, mx, revealed, did_crop ? 1.0 : 0.0};
}

grpo::Rollout EpisodeSample::to_rollout() const {
  grpo::Rollout r;
  if (did_crop || crop_action >= 0) r.actions.push_back(crop_action);
  r.actions.push_back(score_action);
  r.logp_new = logp_new;
  r.logp_old = logp_old;
  r.logp_ref = logp_ref;
  r.reward = reward;
  return r;
}

std::vector<EpisodeSample> rollout_group(const ProbePolicy& policy,
                                         const Scene& scene, int k,
                                         uint64_t seed, bool force_no_crop,
                                         const ProbePolicy* old_snapshot,
                                         const ProbePolicy* ref_snapshot) {
  if (k < 2) throw ArgumentError("rollout_group: k must be >= 2");
  const ProbePolicy& old_p = old_snapshot ? *old_snapshot : policy;
  const ProbePolicy& ref_p = ref_snapshot ? *ref_snapshot : policy;

  std::vector<EpisodeSample> group;
  group.reserve(k);
  Rng rng(seed);
  const std::vector<double> cx = crop_features(scene);
  for (int i = 0; i < k; ++i) {
    EpisodeSample ep;
    ep.crop_x = cx;
    if (force_no_crop) {
      ep.crop_action = -1;
      ep.did_crop = false;
    } else {
      double logp_crop = 0.0;
      ep.crop_action = policy.crop_head.sample(rng, cx, &logp_crop);
      ep.did_crop = ep.crop_action < scene.cells();
      ep.logp_new += logp_crop;
      ep.logp_old += old_p.crop_head.logprob(ep.crop_action, cx);
      ep.logp_ref += ref_p.crop_head.logprob(ep.crop_action, cx);
    }
    ep.score_x = score_features(scene, force_no_crop ? scene.cells()
                                                     : ep.crop_action);
    double logp_score = 0.0;
    ep.score_action = policy.score_head.sample(rng, ep.score_x, &logp_score);
    ep.score_value = bin_value(ep.score_action);
    ep.logp_new += logp_score;
    ep.logp_old += old_p.score_head.logprob(ep.score_action, ep.score_x);
    ep.logp_ref += ref_p.score_head.logprob(ep.score_action, ep.score_x);
    group.push_back(std::move(ep));
  }
  return group;
}

std::string Curve::to_csv() const {
  std::ostringstream out;
  for (size_t i = 0; i < columns.size(); ++i)
    out << (i ? "," : "") << columns[i];
  out << "\n";
  out.precision(10);
  for (const std::vector<double>& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

std::vector<Scene> make_scene_set(uint64_t seed, int count,
                                  const SimConfig& cfg,
                                  double subtle_fraction) {
  std::vector<Scene> scenes;
  scenes.reserve(count);
  Rng rng(Rng::derive(seed, "scene_set"));
  for (int i = 0; i < count; ++i) {
    const bool pristine = rng.bernoulli(0.3);
    const bool subtle = rng.bernoulli(subtle_fraction);
    scenes.push_back(make_scene(Rng::derive(seed, static_cast<uint64_t>(i)),
                                cfg.g, pristine ? 0.0 : cfg.defect_prob,
                                subtle ? cfg.visibility : 0.0,
                                cfg.attenuation));
  }
  return scenes;
}

namespace {

// Shared GRPO update: per-episode coefficient from the clipped surrogate and
// the KL penalty, accumulated into per-head gradients through the sampled
// actions. Episodes must carry rewards.
void accumulate_policy_gradient(const ProbePolicy& policy,
                                const std::vector<EpisodeSample>& group,
                                const SimConfig& cfg,
                                std::vector<double>* crop_grad,
                                std::vector<double>* score_grad) {
  std::vector<double> rewards;
  rewards.reserve(group.size());
  for (const EpisodeSample& ep : group) rewards.push_back(ep.reward);
  const std::vector<double> adv = grpo::group_advantages(rewards);

  const double inv_k = 1.0 / static_cast<double>(group.size());
  for (size_t k = 0; k < group.size(); ++k) {
    const EpisodeSample& ep = group[k];
    const double rho = std::exp(ep.logp_new - ep.logp_old);
    double surrogate_coef;
    if (rho >= 1.0 - cfg.epsilon && rho <= 1.0 + cfg.epsilon) {
      surrogate_coef = rho * adv[k];
    } else {
      const double clipped =
          std::clamp(rho, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon);
      surrogate_coef = rho * adv[k] <= clipped * adv[k] ? rho * adv[k] : 0.0;
    }
    const double kl_coef =
        -cfg.beta_kl * (1.0 - std::exp(ep.logp_ref - ep.logp_new));
    const double coef = (surrogate_coef + kl_coef) * inv_k;
    if (crop_grad && ep.crop_action >= 0)
      policy.crop_head.accumulate_logprob_grad(ep.crop_action, ep.crop_x,
                                               coef, *crop_grad);
    if (score_grad)
      policy.score_head.accumulate_logprob_grad(ep.score_action, ep.score_x,
                                                coef, *score_grad);
  }
}

}  // namespace

Curve stage1_train(ProbePolicy& policy, const std::vector<Scene>& scenes,
                   int pairs, int iters, const SimConfig& cfg, uint64_t seed) {
  if (scenes.size() < 2)
    throw ArgumentError("stage1_train: need at least 2 scenes");
  bool distinct_mos = false;
  for (const Scene& s : scenes) distinct_mos |= s.mos != scenes[0].mos;
  if (!distinct_mos)
    throw ArgumentError("stage1_train: scenes must carry distinct mos");

  const ProbePolicy ref = policy;
  Rng rng(Rng::derive(seed, "stage1"));
  grpo::Adam adam(policy.score_head.params().size(), cfg.stage1_lr);

  Curve curve;
  curve.columns = {"iter", "mean_rank_reward", "mean_group_std"};
  const int n = static_cast<int>(scenes.size());
  for (int iter = 0; iter < iters; ++iter) {
    // `pairs` scene pairs per iteration share one parameter update.
    std::vector<double> grad(policy.score_head.params().size(), 0.0);
    double reward_acc = 0.0, std_acc = 0.0;
    int reward_n = 0;
    for (int p = 0; p < std::max(1, pairs); ++p) {
      const int i = rng.uniform_int(n);
      int j = rng.uniform_int(n - 1);
      if (j >= i) ++j;
      const uint64_t s0 = Rng::derive(seed, iter * 9781ULL + p * 2ULL);
      std::vector<EpisodeSample> gi =
          rollout_group(policy, scenes[i], cfg.k, s0, true, nullptr, &ref);
      std::vector<EpisodeSample> gj =
          rollout_group(policy, scenes[j], cfg.k, s0 + 1, true, nullptr, &ref);

      rank::ScoreGroup qi, qj;
      for (const EpisodeSample& ep : gi) qi.scores.push_back(ep.score_value);
      for (const EpisodeSample& ep : gj) qj.scores.push_back(ep.score_value);
      const double yij = rank::preference_label(scenes[i].mos, scenes[j].mos);
      const double yji = rank::preference_label(scenes[j].mos, scenes[i].mos);
      const std::vector<double> ri =
          rank::pair_rewards(qi, qj, yij, cfg.gamma_rank);
      const std::vector<double> rj =
          rank::pair_rewards(qj, qi, yji, cfg.gamma_rank);
      for (int k = 0; k < cfg.k; ++k) {
        gi[k].reward = ri[k];
        gj[k].reward = rj[k];
        reward_acc += ri[k] + rj[k];
      }
      reward_n += 2 * cfg.k;
      std_acc += std::sqrt(rank::group_stats(qi).variance) +
                 std::sqrt(rank::group_stats(qj).variance);

      accumulate_policy_gradient(policy, gi, cfg, nullptr, &grad);
      accumulate_policy_gradient(policy, gj, cfg, nullptr, &grad);
    }
    adam.ascend(policy.score_head.params(), grad);
    curve.rows.push_back({static_cast<double>(iter),
                          reward_acc / std::max(1, reward_n),
                          std_acc / (2.0 * std::max(1, pairs))});
  }
  return curve;
}

std::vector<SimDemo> build_sim_corpus(const std::vector<Scene>& scenes,
                                      probe::CropStrategy strategy,
                                      uint64_t seed) {
  if (scenes.empty()) throw ArgumentError("build_sim_corpus: no scenes");
  double pristine_crop_share = 0.0;
  switch (strategy) {
    case probe::CropStrategy::degradation_only: pristine_crop_share = 0.0; break;
    case probe::CropStrategy::partial: pristine_crop_share = 0.35; break;
    case probe::CropStrategy::all_plus_context: pristine_crop_share = 1.0; break;
  }

  Rng rng(Rng::derive(seed, "sim_corpus"));
  std::vector<SimDemo> corpus;
  corpus.reserve(scenes.size());
  for (const Scene& scene : scenes) {
    SimDemo demo;
    demo.crop_x = crop_features(scene);
    const std::vector<int> defects = scene.defect_cells();
    if (!defects.empty()) {
      if (strategy == probe::CropStrategy::partial) {
        demo.crop_action =
            defects[rng.uniform_int(static_cast<int>(defects.size()))];
      } else {
        int best = defects[0];
        for (const int c : defects)
          if (scene.impact(c) > scene.impact(best)) best = c;
        demo.crop_action = best;
      }
    } else if (rng.bernoulli(pristine_crop_share)) {
      demo.crop_action = rng.uniform_int(scene.cells());
    } else {
      demo.crop_action = scene.cells();  // no-crop
    }
    demo.score_x = score_features(scene, demo.crop_action);
    demo.score_action = nearest_bin(scene.mos);
    corpus.push_back(std::move(demo));
  }
  return corpus;
}

Curve stage2_clone(ProbePolicy& policy, const std::vector<SimDemo>& corpus,
                   int iters, const SimConfig& cfg) {
  if (corpus.empty()) throw ArgumentError("stage2_clone: empty corpus");

  std::vector<std::vector<double>> crop_obs, score_obs;
  std::vector<int> crop_act, score_act;
  for (const SimDemo& d : corpus) {
    crop_obs.push_back(d.crop_x);
    crop_act.push_back(d.crop_action);
    score_obs.push_back(d.score_x);
    score_act.push_back(d.score_action);
  }

  grpo::Adam adam_crop(policy.crop_head.params().size(), cfg.stage2_lr);
  grpo::Adam adam_score(policy.score_head.params().size(), cfg.stage2_lr);
  const double inv_n = 1.0 / static_cast<double>(corpus.size());

  Curve curve;
  curve.columns = {"iter", "loss"};
  for (int iter = 0; iter < iters; ++iter) {
    const double loss = (grpo::bc_loss(policy.crop_head, crop_obs, crop_act) +
                         grpo::bc_loss(policy.score_head, score_obs,
                                       score_act)) *
                        inv_n;
    std::vector<double> gc =
        grpo::bc_loss_grad(policy.crop_head, crop_obs, crop_act);
    std::vector<double> gs =
        grpo::bc_loss_grad(policy.score_head, score_obs, score_act);
    for (double& v : gc) v *= inv_n;
    for (double& v : gs) v *= inv_n;
    adam_crop.descend(policy.crop_head.params(), gc);
    adam_score.descend(policy.score_head.params(), gs);
    curve.rows.push_back({static_cast<double>(iter), loss});
  }
  return curve;
}

Curve stage3_train(ProbePolicy& policy, const std::vector<Scene>& scenes,
                   int iters, const rewards::RewardWeights& weights,
                   const SimConfig& cfg, uint64_t seed) {
  if (scenes.empty()) throw ArgumentError("stage3_train: no scenes");
  weights.validate();

  const ProbePolicy ref = policy;
  Rng rng(Rng::derive(seed, "stage3"));
  grpo::Adam adam_crop(policy.crop_head.params().size(), cfg.stage3_lr);
  grpo::Adam adam_score(policy.score_head.params().size(), cfg.stage3_lr);

  Curve curve;
  curve.columns = {"iter", "mean_r_acc", "mean_r_loc", "mean_r_fmt"};
  for (int iter = 0; iter < iters; ++iter) {
    const Scene& scene = scenes[rng.uniform_int(
        static_cast<int>(scenes.size()))];
    std::vector<EpisodeSample> group =
        rollout_group(policy, scene, cfg.k,
                      Rng::derive(seed, 77777ULL + iter), false, nullptr,
                      &ref);
    double acc_sum = 0.0, loc_sum = 0.0, fmt_sum = 0.0;
    for (EpisodeSample& ep : group) {
      const double r_acc =
          rewards::acc_reward(ep.score_value, scene.mos, cfg.tau);
      double r_loc = 0.0;
      if (scene.has_defect() && ep.did_crop) {
        const Region cell{ep.crop_action % scene.g, ep.crop_action / scene.g,
                          1, 1};
        r_loc = rewards::iou(cell, scene.defect_union_cells());
      }
      const double r_fmt = 1.0;  // sim actions are well formed by construction
      ep.reward = rewards::total_reward(r_acc, r_loc, r_fmt, weights).r_total;
      acc_sum += r_acc;
      loc_sum += r_loc;
      fmt_sum += r_fmt;
    }
    std::vector<double> gc(policy.crop_head.params().size(), 0.0);
    std::vector<double> gs(policy.score_head.params().size(), 0.0);
    accumulate_policy_gradient(policy, group, cfg, &gc, &gs);
    adam_crop.ascend(policy.crop_head.params(), gc);
    adam_score.ascend(policy.score_head.params(), gs);
    curve.rows.push_back({static_cast<double>(iter), acc_sum / cfg.k,
                          loc_sum / cfg.k, fmt_sum / cfg.k});
  }
  return curve;
}

PolicyEval evaluate_policy(const ProbePolicy& policy,
                           const std::vector<Scene>& scenes) {
  if (scenes.size() < 2)
    throw ArgumentError("evaluate_policy: need at least 2 scenes");
  std::vector<double> bins(kScoreBins);
  for (int b = 0; b < kScoreBins; ++b) bins[b] = bin_value(b);

  std::vector<double> preds, gts;
  int defective = 0, hits = 0, crops = 0;
  for (const Scene& scene : scenes) {
    const std::vector<double> cx = crop_features(scene);
    const int crop_action = policy.crop_head.argmax(cx);
    const bool did_crop = crop_action < scene.cells();
    crops += did_crop ? 1 : 0;
    if (scene.has_defect()) {
      ++defective;
      if (did_crop && scene.patches[crop_action].defect) ++hits;
    }
    const std::vector<double> sx = score_features(scene, crop_action);
    preds.push_back(policy.score_head.expectation(sx, bins));
    gts.push_back(scene.mos);
  }
  PolicyEval pe;
  pe.srcc = eval::srcc(preds, gts);
  pe.plcc = eval::plcc(preds, gts);
  pe.crop_hit_rate = defective == 0 ? 0.0
                                    : static_cast<double>(hits) / defective;
  pe.crop_rate = static_cast<double>(crops) / scenes.size();
  return pe;
}

double crop_score_bias_gap(const ProbePolicy& policy,
                           const std::vector<Scene>& pristine_scenes) {
  if (pristine_scenes.empty())
    throw ArgumentError("crop_score_bias_gap: no probe scenes");
  std::vector<double> bins(kScoreBins);
  for (int b = 0; b < kScoreBins; ++b) bins[b] = bin_value(b);
  double gap = 0.0;
  for (const Scene& scene : pristine_scenes) {
    const double no_crop = policy.score_head.expectation(
        score_features(scene, scene.cells()), bins);
    const double with_crop = policy.score_head.expectation(
        score_features(scene, 0), bins);
    gap += (no_crop - with_crop) / kBinWidth;
  }
  return gap / static_cast<double>(pristine_scenes.size());
}

std::vector<grpo::FrozenEpisode> stage1_frozen_group(
    const ProbePolicy& policy, const Scene& scene_i, const Scene& scene_j,
    const SimConfig& cfg, uint64_t seed) {
  const std::vector<EpisodeSample> gi =
      rollout_group(policy, scene_i, cfg.k, seed, true);
  const std::vector<EpisodeSample> gj =
      rollout_group(policy, scene_j, cfg.k, seed + 1, true);
  rank::ScoreGroup qi, qj;
  for (const EpisodeSample& ep : gi) qi.scores.push_back(ep.score_value);
  for (const EpisodeSample& ep : gj) qj.scores.push_back(ep.score_value);
  const double y = rank::preference_label(scene_i.mos, scene_j.mos);
  const std::vector<double> rewards =
      rank::pair_rewards(qi, qj, y, cfg.gamma_rank);

  std::vector<grpo::FrozenEpisode> group;
  for (int k = 0; k < cfg.k; ++k) {
    grpo::FrozenEpisode ep;
    ep.observations = {gi[k].score_x};
    ep.actions = {gi[k].score_action};
    ep.logp_old = gi[k].logp_old;
    ep.logp_ref = gi[k].logp_ref;
    ep.reward = rewards[k];
    group.push_back(std::move(ep));
  }
  return group;
}

// ---- Ablations ----

AblationKind ablation_kind_from_string(const std::string& s) {
  if (s == "stages") return AblationKind::stages;
  if (s == "rewards") return AblationKind::rewards;
  if (s == "crop_strategy") return AblationKind::crop_strategy;
  throw ArgumentError("unknown ablation kind: " + s);
}

namespace {

struct SeedContext {
  std::vector<Scene> s1_scenes;
  std::vector<Scene> corpus_scenes;
  std::vector<Scene> s3_scenes;
  std::vector<Scene> heldout;
  std::vector<Scene> pristine_probes;
  uint64_t seed = 0;

  static SeedContext build(uint64_t seed, const SimConfig& cfg,
                           double heldout_subtle) {
    SeedContext ctx;
    ctx.seed = seed;
    ctx.s1_scenes = make_scene_set(Rng::derive(seed, "s1"),
                                   cfg.stage1_scenes, cfg, 0.0);
    // 2:1 fully-visible to subtle, the low/high resolution analog.
    ctx.corpus_scenes = make_scene_set(Rng::derive(seed, "s2"),
                                       cfg.stage2_corpus, cfg, 1.0 / 3.0);
    ctx.s3_scenes = make_scene_set(Rng::derive(seed, "s3"),
                                   cfg.stage3_scenes, cfg, 2.0 / 3.0);
    ctx.heldout = make_scene_set(Rng::derive(seed, "heldout"),
                                 cfg.heldout_scenes, cfg, heldout_subtle);
    ctx.pristine_probes.reserve(24);
    for (int i = 0; i < 24; ++i)
      ctx.pristine_probes.push_back(
          make_scene(Rng::derive(seed, 424242ULL + i), cfg.g, 0.0,
                     cfg.visibility, cfg.attenuation));
    return ctx;
  }

  ProbePolicy run(const SimConfig& cfg, bool do1, bool do2, bool do3,
                  probe::CropStrategy strategy,
                  const rewards::RewardWeights& weights,
                  double* bias_gap_bins = nullptr) const {
    ProbePolicy policy = ProbePolicy::make(cfg.g);
    if (do1)
      stage1_train(policy, s1_scenes, 1, cfg.stage1_iters, cfg,
                   Rng::derive(seed, "run_s1"));
    if (do2) {
      const std::vector<SimDemo> corpus =
          build_sim_corpus(corpus_scenes, strategy, Rng::derive(seed, "corp"));
      stage2_clone(policy, corpus, cfg.stage2_epochs, cfg);
    }
    if (bias_gap_bins)
      *bias_gap_bins = crop_score_bias_gap(policy, pristine_probes);
    if (do3)
      stage3_train(policy, s3_scenes, cfg.stage3_iters, weights, cfg,
                   Rng::derive(seed, "run_s3"));
    return policy;
  }
};

}  // namespace

AblationReport run_ablation(AblationKind kind, uint64_t seed, int n_seeds,
                            const SimConfig& cfg) {
  if (n_seeds < 1) throw ArgumentError("run_ablation: n_seeds must be >= 1");
  AblationReport report;
  report.header =
      "synthetic grid scenes stand in for the benchmark corpora; only "
      "orderings are meaningful, not absolute correlation values";

  const rewards::RewardWeights full = cfg.weights;
  rewards::RewardWeights acc_only = full;
  acc_only.beta_loc = 0.0;
  acc_only.gamma_fmt = 0.0;
  rewards::RewardWeights acc_fmt = full;
  acc_fmt.beta_loc = 0.0;

  switch (kind) {
    case AblationKind::stages:
      report.kind = "stages";
      report.labels = {"stage1_only", "stage2_3", "stage1_2", "full"};
      break;
    case AblationKind::rewards:
      report.kind = "rewards";
      report.labels = {"acc_only", "acc_fmt", "acc_fmt_loc"};
      break;
    case AblationKind::crop_strategy:
      report.kind = "crop_strategy";
      report.labels = {"degradation_only", "partial", "all_plus_context"};
      break;
  }

  for (int s = 0; s < n_seeds; ++s) {
    const uint64_t run_seed = seed + static_cast<uint64_t>(s);
    const double heldout_subtle =
        kind == AblationKind::stages ? 0.5 : 1.0;
    const SeedContext ctx = SeedContext::build(run_seed, cfg, heldout_subtle);

    AblationSeedResult result;
    result.seed = run_seed;
    result.labels = report.labels;

    const probe::CropStrategy default_strategy =
        probe::CropStrategy::all_plus_context;
    switch (kind) {
      case AblationKind::stages: {
        const bool flags[4][3] = {
            {true, false, false},   // stage 1 only
            {false, true, true},    // 2 + 3
            {true, true, false},    // 1 + 2
            {true, true, true},     // full
        };
        for (const bool* f : flags) {
          const ProbePolicy p =
              ctx.run(cfg, f[0], f[1], f[2], default_strategy, full);
          const PolicyEval pe = evaluate_policy(p, ctx.heldout);
          result.srcc.push_back(pe.srcc);
          result.crop_hit_rate.push_back(pe.crop_hit_rate);
        }
        result.ordering_holds = result.srcc[3] > result.srcc[0] &&
                                result.srcc[3] > result.srcc[1] &&
                                result.srcc[3] > result.srcc[2];
        break;
      }
      case AblationKind::rewards: {
        for (const rewards::RewardWeights& w : {acc_only, acc_fmt, full}) {
          const ProbePolicy p =
              ctx.run(cfg, true, true, true, default_strategy, w);
          const PolicyEval pe = evaluate_policy(p, ctx.heldout);
          result.srcc.push_back(pe.srcc);
          result.crop_hit_rate.push_back(pe.crop_hit_rate);
        }
        result.ordering_holds =
            result.srcc[2] > result.srcc[0] &&
            result.crop_hit_rate[2] > result.crop_hit_rate[0];
        break;
      }
      case AblationKind::crop_strategy: {
        for (const probe::CropStrategy strat :
             {probe::CropStrategy::degradation_only,
              probe::CropStrategy::partial,
              probe::CropStrategy::all_plus_context}) {
          double gap = 0.0;
          const ProbePolicy p = ctx.run(cfg, true, true, true, strat, full,
                                        &gap);
          const PolicyEval pe = evaluate_policy(p, ctx.heldout);
          result.srcc.push_back(pe.srcc);
          result.crop_hit_rate.push_back(pe.crop_hit_rate);
          result.bias_gap_bins.push_back(gap);
        }
        result.ordering_holds = result.srcc[0] < result.srcc[1] &&
                                result.srcc[1] < result.srcc[2];
        break;
      }
    }
    if (result.ordering_holds) ++report.seeds_with_ordering;
    report.per_seed.push_back(std::move(result));
  }
  return report;
}

std::string AblationReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["kind"] = kind;
  doc["note"] = header;
  doc["labels"] = labels;
  doc["seeds_with_ordering"] = seeds_with_ordering;
  doc["seeds_total"] = static_cast<int>(per_seed.size());
  doc["per_seed"] = nlohmann::ordered_json::array();
  for (const AblationSeedResult& r : per_seed) {
    nlohmann::ordered_json row{{"seed", r.seed},
                               {"srcc", r.srcc},
                               {"crop_hit_rate", r.crop_hit_rate},
                               {"ordering_holds", r.ordering_holds}};
    if (!r.bias_gap_bins.empty()) row["bias_gap_bins"] = r.bias_gap_bins;
    doc["per_seed"].push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

// ---- Checkpoints ----

std::string policy_to_json(const ProbePolicy& policy) {
  nlohmann::ordered_json doc;
  doc["crop_head"] = {{"actions", policy.crop_head.n_actions()},
                      {"features", policy.crop_head.n_features()},
                      {"w", policy.crop_head.params()}};
  doc["score_head"] = {{"actions", policy.score_head.n_actions()},
                       {"features", policy.score_head.n_features()},
                       {"w", policy.score_head.params()}};
  return doc.dump() + "\n";
}

ProbePolicy policy_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("policy checkpoint: ") + e.what());
  }
  auto load_head = [](const nlohmann::json& j) {
    grpo::ToyPolicy head(j.at("actions").get<int>(),
                         j.at("features").get<int>());
    const std::vector<double> w = j.at("w").get<std::vector<double>>();
    if (w.size() != head.params().size())
      throw ValidationError("policy checkpoint: weight size mismatch");
    head.params() = w;
    return head;
  };
  try {
    ProbePolicy policy;
    policy.crop_head = load_head(doc.at("crop_head"));
    policy.score_head = load_head(doc.at("score_head"));
    return policy;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("policy checkpoint: ") + e.what());
  }
}

void save_policy(const ProbePolicy& policy, const std::string& path) {
  atomic_write_file(path, policy_to_json(policy));
}

ProbePolicy load_policy(const std::string& path) {
  return policy_from_json(read_text_file(path));
}

}  // namespace piqa::sim
