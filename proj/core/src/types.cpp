#include "piqa/types.hpp"

namespace piqa {

Raster to_gray(const Raster& r) {
  if (r.channels == 1) return r;
  Raster g(r.width, r.height, 1);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      g.at(x, y) = clamp01(0.299f * r.at(x, y, 0) + 0.587f * r.at(x, y, 1) +
                           0.114f * r.at(x, y, 2));
  return g;
}

const char* to_string(DefectKind kind) {
  switch (kind) {
    case DefectKind::blur: return "blur";
    case DefectKind::compression: return "compression";
    case DefectKind::mosaic: return "mosaic";
    case DefectKind::noise: return "noise";
  }
  return "blur";
}

DefectKind defect_kind_from_string(const std::string& s) {
  if (s == "blur") return DefectKind::blur;
  if (s == "compression") return DefectKind::compression;
  if (s == "mosaic") return DefectKind::mosaic;
  if (s == "noise") return DefectKind::noise;
  throw ValidationError("unknown defect kind: " + s);
}

void validate_item(const BenchmarkItem& item) {
  const std::string where = "item " + (item.id.empty() ? "<no id>" : item.id);
  if (item.id.empty()) throw ValidationError(where + ": empty id");
  if (item.width <= 0 || item.height <= 0)
    throw ValidationError(where + ": non-positive dimensions");
  if (!(item.mos >= 1.0 && item.mos <= 5.0))
    throw ValidationError(where + ": mos out of [1,5]");
  for (size_t i = 0; i < item.defects.size(); ++i) {
    const DefectRecord& d = item.defects[i];
    const std::string dj = where + " defect " + std::to_string(i);
    if (d.region.w <= 0 || d.region.h <= 0)
      throw ValidationError(dj + ": non-positive region size");
    if (d.region.x < 0 || d.region.y < 0)
      throw ValidationError(dj + ": negative region origin");
    if (!d.region.inside(item.width, item.height))
      throw ValidationError(dj + ": region outside image");
    if (!(d.severity > 0.0 && d.severity <= 1.0))
      throw ValidationError(dj + ": severity out of (0,1]");
    if (!(d.importance >= 0.0 && d.importance <= 1.0))
      throw ValidationError(dj + ": importance out of [0,1]");
    for (size_t j = 0; j < i; ++j)
      if (overlaps(d.region, item.defects[j].region))
        throw ValidationError(dj + ": overlaps defect " + std::to_string(j));
  }
}

}  // namespace piqa
