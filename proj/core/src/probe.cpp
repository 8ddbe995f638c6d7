#include "piqa/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "piqa/io_util.hpp"
#include "piqa/raster_io.hpp"
#include "piqa/rewards.hpp"
#include "piqa/rng.hpp"
#include "piqa/wavelet.hpp"

namespace piqa::probe {

namespace {

Region clamp_window(int cx, int cy, int w, int h, int image_w, int image_h) {
  Region r;
  r.w = w;
  r.h = h;
  r.x = std::clamp(cx - w / 2, 0, image_w - w);
  r.y = std::clamp(cy - h / 2, 0, image_h - h);
  return r;
}

long long defect_overlap(const Region& region,
                         const std::vector<DefectRecord>& defects) {
  long long acc = 0;
  for (const DefectRecord& d : defects)
    acc += intersection_area(region, d.region);
  return acc;
}

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

const char* to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::degradation_capture: return "degradation_capture";
    case TrajectoryKind::clarity_localization: return "clarity_localization";
    case TrajectoryKind::distant_view: return "distant_view";
  }
  return "distant_view";
}

const char* to_string(CropStrategy strategy) {
  switch (strategy) {
    case CropStrategy::degradation_only: return "degradation_only";
    case CropStrategy::partial: return "partial";
    case CropStrategy::all_plus_context: return "all_plus_context";
  }
  return "all_plus_context";
}

CropStrategy crop_strategy_from_string(const std::string& s) {
  if (s == "degradation_only") return CropStrategy::degradation_only;
  if (s == "partial") return CropStrategy::partial;
  if (s == "all_plus_context") return CropStrategy::all_plus_context;
  throw ArgumentError("unknown crop strategy: " + s);
}

Region crop_degradation_only(const std::vector<DefectRecord>& defects,
                             int crop, int image_w, int image_h) {
  if (defects.empty())
    throw ArgumentError("crop_degradation_only: no defects");
  if (crop <= 0 || crop > std::min(image_w, image_h))
    throw ArgumentError("crop_degradation_only: crop does not fit image");
  const DefectRecord* top = &defects[0];
  for (const DefectRecord& d : defects)
    if (d.importance > top->importance) top = &d;
  const int cx = top->region.x + top->region.w / 2;
  const int cy = top->region.y + top->region.h / 2;
  return clamp_window(cx, cy, crop, crop, image_w, image_h);
}

Region crop_all_plus_context(const std::vector<DefectRecord>& defects,
                             int crop, double context_margin, int image_w,
                             int image_h) {
  if (defects.empty())
    throw ArgumentError("crop_all_plus_context: no defects");
  std::vector<Region> boxes;
  for (const DefectRecord& d : defects) boxes.push_back(d.region);
  const Region u = union_box(boxes);
  if (u.w > image_w || u.h > image_h)
    throw RegionError("crop_all_plus_context: defect union exceeds image");

  const int mx = static_cast<int>(std::lround(context_margin * u.w));
  const int my = static_cast<int>(std::lround(context_margin * u.h));
  Region e{std::max(0, u.x - mx), std::max(0, u.y - my), 0, 0};
  e.w = std::min(image_w, u.x + u.w + mx) - e.x;
  e.h = std::min(image_h, u.y + u.h + my) - e.y;

  const int tw = std::min(image_w, std::max(e.w, crop));
  const int th = std::min(image_h, std::max(e.h, crop));
  Region r = clamp_window(e.x + e.w / 2, e.y + e.h / 2, tw, th, image_w,
                          image_h);
  // Window is at least as large as the expanded box, so minimal clamping
  // keeps the union box covered; nudge if integer centering left a gap.
  r.x = std::clamp(r.x, std::max(0, u.x + u.w - r.w), std::min(u.x, image_w - r.w));
  r.y = std::clamp(r.y, std::max(0, u.y + u.h - r.h), std::min(u.y, image_h - r.h));
  return r;
}

Region crop_partial(const std::vector<DefectRecord>& defects, int crop,
                    int image_w, int image_h, uint64_t seed) {
  if (defects.empty()) throw ArgumentError("crop_partial: no defects");
  if (crop <= 0 || crop > std::min(image_w, image_h))
    throw ArgumentError("crop_partial: crop does not fit image");
  Rng rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    Region r;
    if (attempt % 2 == 0) {
      // Anchor near a defect so partial overlap is likely.
      const DefectRecord& d =
          defects[rng.uniform_int(static_cast<int>(defects.size()))];
      const int cx = d.region.x + d.region.w / 2 +
                     static_cast<int>(rng.uniform(-1.0, 1.0) * crop);
      const int cy = d.region.y + d.region.h / 2 +
                     static_cast<int>(rng.uniform(-1.0, 1.0) * crop);
      r = clamp_window(cx, cy, crop, crop, image_w, image_h);
    } else {
      r = Region{rng.uniform_int(image_w - crop + 1),
                 rng.uniform_int(image_h - crop + 1), crop, crop};
    }
    bool partial_hit = false;
    for (const DefectRecord& d : defects) {
      const long long inter = intersection_area(r, d.region);
      if (inter > 0 && inter < d.region.area()) {
        partial_hit = true;
        break;
      }
    }
    if (!partial_hit) continue;
    const long long covered = defect_overlap(r, defects);
    if (static_cast<double>(r.area() - covered) / r.area() < 0.25) continue;
    return r;
  }
  throw ArgumentError("crop_partial: no partial placement found in 100 attempts");
}

std::pair<double, double> coverage(const Region& region,
                                   const std::vector<DefectRecord>& defects) {
  long long total = 0;
  for (const DefectRecord& d : defects) total += d.region.area();
  const long long covered = defect_overlap(region, defects);
  const double cov =
      total == 0 ? 1.0 : static_cast<double>(covered) / total;
  const double ctx =
      region.area() == 0 ? 1.0
                         : 1.0 - static_cast<double>(covered) / region.area();
  return {cov, ctx};
}

namespace {

// A crop-sized window that avoids every defect, preferring high-texture
// placements when pixels are available.
std::optional<Region> pristine_window(const BenchmarkItem& item, int crop,
                                      uint64_t seed,
                                      const RasterProvider& source) {
  auto clear = [&](const Region& r) {
    for (const DefectRecord& d : item.defects)
      if (overlaps(r, d.region)) return false;
    return true;
  };
  if (source) {
    if (std::optional<Raster> raster = source(item)) {
      const wavelet::SubbandPyramid pyr = wavelet::dwt2(*raster, 1);
      const int cell = std::max(2, std::min(16, crop / 2) & ~1);
      const wavelet::EnergyMap energy = wavelet::texture_energy(pyr, cell);
      for (const Region& r : wavelet::select_texture_regions(
               energy, 16, crop, crop / 2.0))
        if (clear(r)) return r;
    }
  }
  Rng rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Region r{rng.uniform_int(item.width - crop + 1),
                   rng.uniform_int(item.height - crop + 1), crop, crop};
    if (clear(r)) return r;
  }
  return std::nullopt;
}

std::string render_trace(const std::vector<Step>& steps,
                         const std::string& intro) {
  std::ostringstream out;
  out << "<think>" << intro << "</think>";
  for (const Step& s : steps) {
    if (s.type == StepType::crop || s.type == StepType::verify) {
      out << "<crop x=" << s.region.x << " y=" << s.region.y
          << " w=" << s.region.w << " h=" << s.region.h << "/><observe/>";
    } else if (s.type == StepType::score) {
      out << "<score>" << format_score(s.value) << "</score>";
    }
  }
  return out.str();
}

}  // namespace

Trajectory generate_trajectory(const BenchmarkItem& item,
                               CropStrategy strategy, TrajectoryKind kind,
                               uint64_t seed, const ProbeConfig& cfg,
                               const RasterProvider& source) {
  const int crop = std::min({cfg.crop, item.width, item.height});

  Trajectory t;
  t.item_id = item.id;
  t.kind = kind;
  t.steps.push_back({StepType::global_look, {}, 0.0});

  std::string intro;
  switch (kind) {
    case TrajectoryKind::degradation_capture: {
      Region r;
      switch (strategy) {
        case CropStrategy::degradation_only:
          r = crop_degradation_only(item.defects, crop, item.width,
                                    item.height);
          break;
        case CropStrategy::partial:
          r = crop_partial(item.defects, crop, item.width, item.height, seed);
          break;
        case CropStrategy::all_plus_context:
          r = crop_all_plus_context(item.defects, crop, cfg.context_margin,
                                    item.width, item.height);
          break;
      }
      t.steps.push_back({StepType::crop, r, 0.0});
      t.steps.push_back({StepType::observe, {}, 0.0});
      std::tie(t.coverage, t.context_ratio) = coverage(r, item.defects);
      intro = "global overview shows suspect texture, zooming in";
      break;
    }
    case TrajectoryKind::clarity_localization: {
      const std::optional<Region> r =
          pristine_window(item, crop, seed, source);
      if (!r)
        throw RegionError("generate_trajectory: no pristine region for item " +
                          item.id);
      t.steps.push_back({StepType::crop, *r, 0.0});
      t.steps.push_back({StepType::observe, {}, 0.0});
      t.steps.push_back({StepType::verify, *r, 0.0});
      std::tie(t.coverage, t.context_ratio) = coverage(*r, item.defects);
      intro = "checking sharpness of a clean region before judging";
      break;
    }
    case TrajectoryKind::distant_view: {
      t.coverage = item.defects.empty() ? 1.0 : 0.0;
      t.context_ratio = 1.0;
      intro = "global view is sufficient at this distance";
      break;
    }
  }

  t.steps.push_back({StepType::score, {}, item.mos});
  t.trace_text = render_trace(t.steps, intro);
  return t;
}

std::vector<Trajectory> build_sft_corpus(
    const std::vector<BenchmarkItem>& manifest, CorpusMix mix,
    CropStrategy strategy, uint64_t seed, const ProbeConfig& cfg,
    const RasterProvider& source) {
  if (manifest.empty()) throw ArgumentError("build_sft_corpus: empty manifest");
  if (mix.lowres_count < 0 || mix.highres_count < 0 ||
      mix.lowres_count + mix.highres_count == 0)
    throw ArgumentError("build_sft_corpus: bad mix");

  std::vector<const BenchmarkItem*> low, high;
  for (const BenchmarkItem& item : manifest) {
    (static_cast<long long>(item.width) * item.height >= cfg.hires_min_pixels
         ? high
         : low)
        .push_back(&item);
  }
  if (static_cast<int>(low.size()) < mix.lowres_count)
    throw ArgumentError("build_sft_corpus: manifest lacks low-resolution "
                        "items: need " + std::to_string(mix.lowres_count) +
                        ", have " + std::to_string(low.size()));
  if (static_cast<int>(high.size()) < mix.highres_count)
    throw ArgumentError("build_sft_corpus: manifest lacks high-resolution "
                        "items: need " + std::to_string(mix.highres_count) +
                        ", have " + std::to_string(high.size()));

  Rng rng(seed);
  auto shuffle = [&rng](std::vector<const BenchmarkItem*>& v) {
    for (size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[rng.uniform_int(static_cast<int>(i))]);
  };
  shuffle(low);
  shuffle(high);
  std::vector<const BenchmarkItem*> selected(
      low.begin(), low.begin() + mix.lowres_count);
  selected.insert(selected.end(), high.begin(),
                  high.begin() + mix.highres_count);
  shuffle(selected);

  std::vector<Trajectory> corpus;
  int deg = 0, pristine_crops = 0, distant = 0;
  for (const BenchmarkItem* item : selected) {
    const uint64_t item_seed = Rng::derive(seed, item->id);
    TrajectoryKind kind;
    if (item->defects.empty()) {
      kind = distant <= pristine_crops ? TrajectoryKind::distant_view
                                       : TrajectoryKind::clarity_localization;
    } else {
      // Keep pristine-target crops at >= 30% of crop-bearing trajectories.
      const bool quota_behind =
          pristine_crops < 0.3 * (deg + pristine_crops + 1);
      kind = quota_behind ? TrajectoryKind::clarity_localization
                          : TrajectoryKind::degradation_capture;
      if (kind == TrajectoryKind::clarity_localization &&
          !pristine_window(*item, std::min({cfg.crop, item->width,
                                            item->height}),
                           item_seed, source))
        kind = TrajectoryKind::degradation_capture;
    }
    corpus.push_back(
        generate_trajectory(*item, strategy, kind, item_seed, cfg, source));
    switch (kind) {
      case TrajectoryKind::degradation_capture: ++deg; break;
      case TrajectoryKind::clarity_localization: ++pristine_crops; break;
      case TrajectoryKind::distant_view: ++distant; break;
    }
  }
  if (deg + pristine_crops > 0 &&
      pristine_crops < 0.3 * (deg + pristine_crops) - 1e-9)
    throw ArgumentError(
        "build_sft_corpus: pristine-crop quota unreachable (" +
        std::to_string(pristine_crops) + "/" +
        std::to_string(deg + pristine_crops) + " crop trajectories)");
  return corpus;
}

std::string trajectory_to_json(const Trajectory& trajectory) {
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const Step& s : trajectory.steps) {
    switch (s.type) {
      case StepType::global_look:
        steps.push_back({{"t", "global_look"}});
        break;
      case StepType::crop:
      case StepType::verify:
        steps.push_back({{"t", s.type == StepType::crop ? "crop" : "verify"},
                         {"x", s.region.x},
                         {"y", s.region.y},
                         {"w", s.region.w},
                         {"h", s.region.h}});
        break;
      case StepType::observe:
        steps.push_back({{"t", "observe"}});
        break;
      case StepType::score:
        steps.push_back({{"t", "score"}, {"v", s.value}});
        break;
    }
  }
  nlohmann::ordered_json doc{{"item_id", trajectory.item_id},
                             {"kind", to_string(trajectory.kind)},
                             {"steps", std::move(steps)},
                             {"trace_text", trajectory.trace_text},
                             {"coverage", trajectory.coverage},
                             {"context_ratio", trajectory.context_ratio}};
  return doc.dump();
}

void write_trajectories(const std::vector<Trajectory>& trajectories,
                        const std::string& path) {
  std::string out;
  for (const Trajectory& t : trajectories) out += trajectory_to_json(t) + "\n";
  atomic_write_file(path, out);
}

}  // namespace piqa::probe
