#pragma once

#include <vector>

#include "piqa/types.hpp"

namespace piqa::wavelet {

struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int width, int height) : w(width), h(height),
      v(static_cast<size_t>(width) * height, 0.0) {}
  double& at(int x, int y) { return v[static_cast<size_t>(y) * w + x]; }
  double at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
};

// One decomposition level of detail coefficients. Level 1 is the finest.
// lh = low-x/high-y (horizontal edges), hl = high-x/low-y (vertical edges),
// hh = diagonal detail.
struct DetailLevel {
  Plane lh, hl, hh;
};

// Multi-level orthonormal Haar decomposition. Odd extents pass the unpaired
// trailing sample straight into the low channel, so the transform stays
// orthonormal: reconstruction and Parseval hold exactly for any size.
// Low-channel dims at level l are ceil(w/2^l) x ceil(h/2^l); detail planes
// take the floor on axes that were odd at that level.
struct SubbandPyramid {
  int src_width = 0;
  int src_height = 0;
  std::vector<DetailLevel> details;  // details[0] is level 1 (finest)
  Plane ll;                          // coarsest approximation

  int levels() const { return static_cast<int>(details.size()); }
};

SubbandPyramid dwt2(const Raster& raster, int levels);
Raster idwt2(const SubbandPyramid& pyramid);

// Mean squared level-1 detail energy per cell x cell block of the source
// raster. cell must be positive and even (level-1 planes sit at half
// resolution); trailing partial cells average over their actual extent.
struct EnergyMap {
  int grid_w = 0;
  int grid_h = 0;
  int cell = 0;  // in source pixels
  int src_width = 0;
  int src_height = 0;
  std::vector<double> values;  // row-major grid

  double at(int col, int row) const {
    return values[static_cast<size_t>(row) * grid_w + col];
  }
};

EnergyMap texture_energy(const SubbandPyramid& pyramid, int cell);

// Up to k region_size x region_size regions centered on the highest-energy
// cells (energy > 0 only), greedily skipping candidates whose region center
// would fall closer than min_separation to an already chosen one. Ties break
// by row-major cell index; regions are clamped inside the source raster.
std::vector<Region> select_texture_regions(const EnergyMap& map, int k,
                                           int region_size,
                                           double min_separation);

}  // namespace piqa::wavelet
