#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "piqa/types.hpp"

namespace piqa::probe {

enum class TrajectoryKind {
  degradation_capture,
  clarity_localization,
  distant_view,
};

enum class CropStrategy {
  degradation_only,
  partial,
  all_plus_context,
};

const char* to_string(TrajectoryKind kind);
const char* to_string(CropStrategy strategy);
CropStrategy crop_strategy_from_string(const std::string& s);

enum class StepType { global_look, crop, observe, verify, score };

struct Step {
  StepType type;
  Region region;      // crop / verify
  double value = 0.0; // score
};

// Ordered probing trace: one leading global look, optional crop activity,
// one terminal score. trace_text always satisfies the format grammar.
struct Trajectory {
  std::string item_id;
  TrajectoryKind kind = TrajectoryKind::distant_view;
  std::vector<Step> steps;
  std::string trace_text;
  double coverage = 1.0;
  double context_ratio = 1.0;
};

struct ProbeConfig {
  int crop = 768;
  double context_margin = 0.3;
  long long hires_min_pixels = 1024LL * 1024LL;
};

// Crop-sized window centered on the highest-importance defect, clamped
// inside the image.
Region crop_degradation_only(const std::vector<DefectRecord>& defects,
                             int crop, int image_w, int image_h);

// Smallest window that contains the defect union box expanded by
// context_margin per side, grown to at least crop x crop where the image
// allows. Always covers every defect.
Region crop_all_plus_context(const std::vector<DefectRecord>& defects,
                             int crop, double context_margin, int image_w,
                             int image_h);

// Crop-sized window that covers part (never all) of some defect and keeps
// at least 25% non-defect area. Deterministic under seed.
Region crop_partial(const std::vector<DefectRecord>& defects, int crop,
                    int image_w, int image_h, uint64_t seed);

// coverage = covered defect area / total defect area (1 when no defects);
// context_ratio = non-defect fraction of the region.
std::pair<double, double> coverage(const Region& region,
                                   const std::vector<DefectRecord>& defects);

using RasterProvider =
    std::function<std::optional<Raster>(const BenchmarkItem&)>;

Trajectory generate_trajectory(const BenchmarkItem& item,
                               CropStrategy strategy, TrajectoryKind kind,
                               uint64_t seed, const ProbeConfig& cfg = {},
                               const RasterProvider& source = nullptr);

struct CorpusMix {
  int lowres_count = 0;
  int highres_count = 0;
};

// Deterministic corpus with at least 30% of crop-bearing trajectories
// targeting pristine regions. Resolution classes split at
// cfg.hires_min_pixels; the default mix follows a 2:1 low-to-high ratio.
std::vector<Trajectory> build_sft_corpus(
    const std::vector<BenchmarkItem>& manifest, CorpusMix mix,
    CropStrategy strategy, uint64_t seed, const ProbeConfig& cfg = {},
    const RasterProvider& source = nullptr);

std::string trajectory_to_json(const Trajectory& trajectory);
void write_trajectories(const std::vector<Trajectory>& trajectories,
                        const std::string& path);  // JSONL

}  // namespace piqa::probe
