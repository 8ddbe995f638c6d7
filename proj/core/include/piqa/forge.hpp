#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "piqa/types.hpp"

namespace piqa::forge {

struct ForgeConfig {
  int defect_count_min = 1;
  int defect_count_max = 3;
  std::vector<DefectKind> kinds_enabled = {DefectKind::blur,
                                           DefectKind::compression,
                                           DefectKind::mosaic,
                                           DefectKind::noise};
  double severity_lo = 0.25;
  double severity_hi = 1.0;
  int region_size_min = 48;
  int region_size_max = 96;
  int feather = 4;
  double pristine_fraction = 0.25;
  int64_t seed = 0;
  std::string source_tag = "synthetic";

  void validate() const;
};

// Localized degradations. Severity in (0,1] maps affinely onto the distortion
// parameter; every injector touches only pixels inside the region.
Raster inject_blur(const Raster& raster, const Region& region,
                   double severity);
Raster inject_mosaic(const Raster& raster, const Region& region,
                     double severity);
Raster inject_block_compression(const Raster& raster, const Region& region,
                                double severity);
Raster inject_noise(const Raster& raster, const Region& region,
                    double severity, uint64_t seed);

// Linear blend: mask is 1 inside the region shrunk by feather and ramps to 0
// at the region boundary grown by feather. feather 0 is a hard paste.
Raster feathered_composite(const Raster& base, const Raster& degraded,
                           const Region& region, int feather);

// mos = 5 - 4 * min(1, sum_i importance_i * severity_i * sat(area_i)), where
// sat saturates once a defect covers 5% of the image. Result in [1,5].
double synthesize_mos(const std::vector<DefectRecord>& defects,
                      long long image_area);

// Full synthesis of one benchmark entry. Deterministic given
// (source, config, id); image_path is left empty for the caller to fill.
std::pair<Raster, BenchmarkItem> forge_item(const Raster& source,
                                            const ForgeConfig& config,
                                            const std::string& id);

}  // namespace piqa::forge
