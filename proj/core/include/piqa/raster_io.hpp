#pragma once

#include <string>

#include "piqa/types.hpp"

namespace piqa {

// Supported formats: PNG (8-bit gray/RGB), PGM (P5), PPM (P6).
// Samples are scaled to [0,1] by 1/255 on load and quantized back on save.
Raster load_raster(const std::string& path);
void save_raster(const Raster& raster, const std::string& path);

}  // namespace piqa
