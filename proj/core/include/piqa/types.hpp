#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "piqa/errors.hpp"

namespace piqa {

inline float clamp01(float v) { return std::min(1.0f, std::max(0.0f, v)); }
inline double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// In-memory image. Channels interleaved, row-major, samples in [0,1].
// Quantization to 8 bits happens only at file boundaries.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;  // 1 (gray) or 3 (rgb)
  std::vector<float> data;

  Raster() = default;
  Raster(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * h * c, fill) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3))
      throw ArgumentError("Raster: invalid dimensions " + std::to_string(w) +
                          "x" + std::to_string(h) + "x" + std::to_string(c));
  }

  float& at(int x, int y, int c = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  // Clamped access, used by filters that read across borders.
  float sample(int x, int y, int c = 0) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y, c);
  }
  size_t size() const { return data.size(); }
};

// Fixed 0.299/0.587/0.114 luma; identity on single-channel input.
Raster to_gray(const Raster& r);

// Axis-aligned pixel rectangle, (x,y) top-left, w/h in pixels.
struct Region {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  long long area() const { return static_cast<long long>(w) * h; }
  bool contains(int px, int py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
  bool inside(int image_w, int image_h) const {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= image_w &&
           y + h <= image_h;
  }
  bool operator==(const Region& o) const = default;
};

inline long long intersection_area(const Region& a, const Region& b) {
  const long long ix = std::max<long long>(
      0, std::min<long long>(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const long long iy = std::max<long long>(
      0, std::min<long long>(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  return ix * iy;
}

inline bool overlaps(const Region& a, const Region& b) {
  return intersection_area(a, b) > 0;
}

// Tight bounding box of a set of regions.
inline Region union_box(const std::vector<Region>& regions) {
  if (regions.empty()) throw ArgumentError("union_box: empty region list");
  int x0 = regions[0].x, y0 = regions[0].y;
  int x1 = regions[0].x + regions[0].w, y1 = regions[0].y + regions[0].h;
  for (const Region& r : regions) {
    x0 = std::min(x0, r.x);
    y0 = std::min(y0, r.y);
    x1 = std::max(x1, r.x + r.w);
    y1 = std::max(y1, r.y + r.h);
  }
  return Region{x0, y0, x1 - x0, y1 - y0};
}

enum class DefectKind { blur, compression, mosaic, noise };

const char* to_string(DefectKind kind);
DefectKind defect_kind_from_string(const std::string& s);

// Ground-truth localized degradation.
struct DefectRecord {
  Region region;
  DefectKind kind = DefectKind::blur;
  double severity = 1.0;    // (0,1]
  double importance = 1.0;  // [0,1]
};

// One synthesized benchmark entry.
struct BenchmarkItem {
  std::string id;
  std::string image_path;
  int width = 0;
  int height = 0;
  std::vector<DefectRecord> defects;
  double mos = 5.0;  // [1,5]
  int64_t seed = 0;
  std::string source_tag;
};

// Throws ValidationError naming the violated invariant.
void validate_item(const BenchmarkItem& item);

}  // namespace piqa
