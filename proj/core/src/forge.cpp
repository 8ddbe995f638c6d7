#include "piqa/forge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "piqa/rng.hpp"
#include "piqa/wavelet.hpp"

namespace piqa::forge {

namespace {

void check_injection_args(const Raster& raster, const Region& region,
                          double severity) {
  if (!(severity > 0.0 && severity <= 1.0))
    throw ArgumentError("severity out of (0,1]: " + std::to_string(severity));
  if (!region.inside(raster.width, raster.height))
    throw ArgumentError("region not inside raster");
}

// ---- 8x8 DCT machinery for the block-compression injector ----

constexpr int kBlock = 8;

struct DctBasis {
  double m[kBlock][kBlock];  // m[u][x] = alpha(u) * cos((2x+1) u pi / 16)
  DctBasis() {
    const double pi = 3.14159265358979323846;
    for (int u = 0; u < kBlock; ++u) {
      const double alpha =
          u == 0 ? std::sqrt(1.0 / kBlock) : std::sqrt(2.0 / kBlock);
      for (int x = 0; x < kBlock; ++x)
        m[u][x] = alpha * std::cos((2 * x + 1) * u * pi / (2.0 * kBlock));
    }
  }
};

const DctBasis& dct_basis() {
  static const DctBasis basis;
  return basis;
}

struct Zigzag {
  int index[kBlock][kBlock];  // zigzag position of coefficient (u,v)
  Zigzag() {
    int n = 0;
    for (int s = 0; s < 2 * kBlock - 1; ++s) {
      if (s % 2 == 0) {
        for (int v = std::min(s, kBlock - 1); v >= 0 && s - v < kBlock; --v)
          index[v][s - v] = n++;
      } else {
        for (int u = std::min(s, kBlock - 1); u >= 0 && s - u < kBlock; --u)
          index[s - u][u] = n++;
      }
    }
  }
};

const Zigzag& zigzag() {
  static const Zigzag z;
  return z;
}

}  // namespace

void ForgeConfig::validate() const {
  if (defect_count_min < 1 || defect_count_max < defect_count_min)
    throw ArgumentError("forge config: bad defect count range");
  if (kinds_enabled.empty())
    throw ArgumentError("forge config: kinds_enabled is empty");
  if (!(severity_lo > 0.0 && severity_lo <= severity_hi &&
        severity_hi <= 1.0))
    throw ArgumentError("forge config: severity range not within (0,1]");
  if (region_size_min < 1 || region_size_max < region_size_min)
    throw ArgumentError("forge config: bad region size range");
  if (feather < 0) throw ArgumentError("forge config: negative feather");
  if (!(pristine_fraction >= 0.0 && pristine_fraction <= 1.0))
    throw ArgumentError("forge config: pristine_fraction out of [0,1]");
}

Raster inject_blur(const Raster& raster, const Region& region,
                   double severity) {
  check_injection_args(raster, region, severity);
  const double sigma = 0.5 + 5.5 * severity;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));

  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  Raster out = raster;
  // Horizontal pass over the rows the vertical pass will read.
  const int y0 = std::max(0, region.y - radius);
  const int y1 = std::min(raster.height, region.y + region.h + radius);
  const int rows = y1 - y0;
  std::vector<double> tmp(static_cast<size_t>(rows) * region.w *
                          raster.channels);
  for (int y = y0; y < y1; ++y)
    for (int x = region.x; x < region.x + region.w; ++x)
      for (int c = 0; c < raster.channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += kernel[i + radius] * raster.sample(x + i, y, c);
        tmp[(static_cast<size_t>(y - y0) * region.w + (x - region.x)) *
                raster.channels +
            c] = acc;
      }
  for (int y = region.y; y < region.y + region.h; ++y)
    for (int x = region.x; x < region.x + region.w; ++x)
      for (int c = 0; c < raster.channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          const int sy = std::clamp(y + i, y0, y1 - 1);
          acc += kernel[i + radius] *
                 tmp[(static_cast<size_t>(sy - y0) * region.w +
                      (x - region.x)) *
                         raster.channels +
                     c];
        }
        out.at(x, y, c) = static_cast<float>(clamp01(acc));
      }
  return out;
}

Raster inject_mosaic(const Raster& raster, const Region& region,
                     double severity) {
  check_injection_args(raster, region, severity);
  const int block = static_cast<int>(std::lround(2.0 + 30.0 * severity));

  Raster out = raster;
  for (int by = region.y; by < region.y + region.h; by += block) {
    const int bh = std::min(block, region.y + region.h - by);
    for (int bx = region.x; bx < region.x + region.w; bx += block) {
      const int bw = std::min(block, region.x + region.w - bx);
      for (int c = 0; c < raster.channels; ++c) {
        double acc = 0.0;
        for (int y = by; y < by + bh; ++y)
          for (int x = bx; x < bx + bw; ++x) acc += raster.at(x, y, c);
        const float mean = static_cast<float>(acc / (bw * bh));
        for (int y = by; y < by + bh; ++y)
          for (int x = bx; x < bx + bw; ++x) out.at(x, y, c) = clamp01(mean);
      }
    }
  }
  return out;
}

Raster inject_block_compression(const Raster& raster, const Region& region,
                                double severity) {
  check_injection_args(raster, region, severity);
  const int cutoff = static_cast<int>(std::lround(63.0 * (1.0 - severity)));
  const DctBasis& basis = dct_basis();
  const Zigzag& zz = zigzag();

  Raster out = raster;
  double block[kBlock][kBlock];
  double coef[kBlock][kBlock];
  double tmp[kBlock][kBlock];
  for (int by = region.y; by < region.y + region.h; by += kBlock) {
    const int bh = std::min(kBlock, region.y + region.h - by);
    for (int bx = region.x; bx < region.x + region.w; bx += kBlock) {
      const int bw = std::min(kBlock, region.x + region.w - bx);
      for (int c = 0; c < raster.channels; ++c) {
        // Edge-replicate partial blocks from inside the region.
        for (int y = 0; y < kBlock; ++y)
          for (int x = 0; x < kBlock; ++x)
            block[y][x] = raster.at(bx + std::min(x, bw - 1),
                                    by + std::min(y, bh - 1), c);
        // coef = M * block * M^T
        for (int u = 0; u < kBlock; ++u)
          for (int x = 0; x < kBlock; ++x) {
            double acc = 0.0;
            for (int y = 0; y < kBlock; ++y)
              acc += basis.m[u][y] * block[y][x];
            tmp[u][x] = acc;
          }
        for (int u = 0; u < kBlock; ++u)
          for (int v = 0; v < kBlock; ++v) {
            double acc = 0.0;
            for (int x = 0; x < kBlock; ++x) acc += tmp[u][x] * basis.m[v][x];
            coef[u][v] = zz.index[u][v] > cutoff ? 0.0 : acc;
          }
        // block = M^T * coef * M
        for (int y = 0; y < kBlock; ++y)
          for (int v = 0; v < kBlock; ++v) {
            double acc = 0.0;
            for (int u = 0; u < kBlock; ++u)
              acc += basis.m[u][y] * coef[u][v];
            tmp[y][v] = acc;
          }
        for (int y = 0; y < bh; ++y)
          for (int x = 0; x < bw; ++x) {
            double acc = 0.0;
            for (int v = 0; v < kBlock; ++v) acc += tmp[y][v] * basis.m[v][x];
            out.at(bx + x, by + y, c) = static_cast<float>(clamp01(acc));
          }
      }
    }
  }
  return out;
}

Raster inject_noise(const Raster& raster, const Region& region,
                    double severity, uint64_t seed) {
  check_injection_args(raster, region, severity);
  const double stddev = 0.25 * severity;
  Rng rng(seed);
  Raster out = raster;
  for (int y = region.y; y < region.y + region.h; ++y)
    for (int x = region.x; x < region.x + region.w; ++x)
      for (int c = 0; c < raster.channels; ++c)
        out.at(x, y, c) = static_cast<float>(
            clamp01(raster.at(x, y, c) + rng.normal(0.0, stddev)));
  return out;
}

Raster feathered_composite(const Raster& base, const Raster& degraded,
                           const Region& region, int feather) {
  if (base.width != degraded.width || base.height != degraded.height ||
      base.channels != degraded.channels)
    throw ShapeError("feathered_composite: dimension mismatch");
  if (feather < 0) throw ArgumentError("feathered_composite: negative feather");

  Raster out = base;
  const int x0 = std::max(0, region.x - feather);
  const int y0 = std::max(0, region.y - feather);
  const int x1 = std::min(base.width, region.x + region.w + feather);
  const int y1 = std::min(base.height, region.y + region.h + feather);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      // Signed pixel distance to the region boundary (>=0 inside).
      double s;
      if (region.contains(x, y)) {
        s = std::min(std::min(x - region.x, region.x + region.w - 1 - x),
                     std::min(y - region.y, region.y + region.h - 1 - y));
      } else {
        const int dx = std::max({region.x - x, x - (region.x + region.w - 1), 0});
        const int dy = std::max({region.y - y, y - (region.y + region.h - 1), 0});
        s = -static_cast<double>(std::max(dx, dy));
      }
      double mask;
      if (feather == 0)
        mask = region.contains(x, y) ? 1.0 : 0.0;
      else
        mask = std::clamp((s + feather) / (2.0 * feather), 0.0, 1.0);
      for (int c = 0; c < base.channels; ++c) {
        if (mask >= 1.0)
          out.at(x, y, c) = degraded.at(x, y, c);
        else if (mask > 0.0)
          out.at(x, y, c) = static_cast<float>(
              clamp01(mask * degraded.at(x, y, c) +
                      (1.0 - mask) * base.at(x, y, c)));
      }
    }
  return out;
}

double synthesize_mos(const std::vector<DefectRecord>& defects,
                      long long image_area) {
  if (image_area <= 0) throw ArgumentError("synthesize_mos: empty image");
  double impact = 0.0;
  for (const DefectRecord& d : defects) {
    const double area_frac =
        static_cast<double>(d.region.area()) / (0.05 * image_area);
    impact += d.importance * d.severity * std::min(1.0, area_frac);
  }
  return 5.0 - 4.0 * std::min(1.0, impact);
}

std::pair<Raster, BenchmarkItem> forge_item(const Raster& source,
                                            const ForgeConfig& config,
                                            const std::string& id) {
  config.validate();
  if (config.region_size_max > std::min(source.width, source.height))
    throw ArgumentError("forge_item: source smaller than region_size_max");

  const uint64_t item_seed =
      Rng::derive(static_cast<uint64_t>(config.seed), id);
  Rng rng(item_seed);

  BenchmarkItem item;
  item.id = id;
  item.width = source.width;
  item.height = source.height;
  item.seed = static_cast<int64_t>(item_seed);
  item.source_tag = config.source_tag;

  if (rng.uniform() < config.pristine_fraction) {
    item.mos = 5.0;
    return {source, item};
  }

  const int count = config.defect_count_min +
                    rng.uniform_int(config.defect_count_max -
                                    config.defect_count_min + 1);
  const int size = config.region_size_min +
                   rng.uniform_int(config.region_size_max -
                                   config.region_size_min + 1);

  const wavelet::SubbandPyramid pyr = wavelet::dwt2(source, 1);
  const int cell = std::max(2, (size / 2) & ~1);
  const wavelet::EnergyMap energy = wavelet::texture_energy(pyr, cell);

  // Texture-guided candidates first; min separation sqrt(2)*size keeps
  // unclamped squares disjoint, clamping is re-checked below.
  std::vector<Region> placed;
  for (const Region& r : wavelet::select_texture_regions(
           energy, count, size, size * 1.4142135623730951)) {
    bool clash = false;
    for (const Region& p : placed) clash |= overlaps(r, p);
    if (!clash) placed.push_back(r);
    if (static_cast<int>(placed.size()) == count) break;
  }
  int attempts = 0;
  while (static_cast<int>(placed.size()) < count && attempts < 100) {
    Region r{rng.uniform_int(source.width - size + 1),
             rng.uniform_int(source.height - size + 1), size, size};
    bool clash = false;
    for (const Region& p : placed) clash |= overlaps(r, p);
    if (clash) {
      ++attempts;
      continue;
    }
    placed.push_back(r);
  }
  if (placed.empty())
    throw ForgeError("forge_item: no non-overlapping placement after 100 "
                     "attempts for item " + id);

  // Importance follows the texture-energy rank of the region's center cell:
  // 1.0 for the strongest, linear down to 0.2 for the weakest selected.
  const int n = static_cast<int>(placed.size());
  std::vector<double> cell_energy(n);
  for (int i = 0; i < n; ++i) {
    const int col = std::min((placed[i].x + size / 2) / cell,
                             energy.grid_w - 1);
    const int row = std::min((placed[i].y + size / 2) / cell,
                             energy.grid_h - 1);
    cell_energy[i] = energy.at(col, row);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return cell_energy[a] > cell_energy[b];
  });
  std::vector<double> importance(n);
  for (int rank = 0; rank < n; ++rank)
    importance[order[rank]] =
        n == 1 ? 1.0 : 1.0 - 0.8 * rank / static_cast<double>(n - 1);

  Raster work = source;
  for (int i = 0; i < n; ++i) {
    DefectRecord d;
    d.region = placed[i];
    d.kind = config.kinds_enabled[rng.uniform_int(
        static_cast<int>(config.kinds_enabled.size()))];
    d.severity = rng.uniform(config.severity_lo, config.severity_hi);
    d.importance = importance[i];

    Raster degraded;
    switch (d.kind) {
      case DefectKind::blur:
        degraded = inject_blur(work, d.region, d.severity);
        break;
      case DefectKind::compression:
        degraded = inject_block_compression(work, d.region, d.severity);
        break;
      case DefectKind::mosaic:
        degraded = inject_mosaic(work, d.region, d.severity);
        break;
      case DefectKind::noise:
        degraded = inject_noise(work, d.region, d.severity,
                                Rng::derive(item_seed, static_cast<uint64_t>(i)));
        break;
    }
    work = feathered_composite(work, degraded, d.region, config.feather);
    item.defects.push_back(d);
  }

  item.mos = synthesize_mos(item.defects,
                            static_cast<long long>(source.width) *
                                source.height);
  validate_item(item);
  return {std::move(work), std::move(item)};
}

}  // namespace piqa::forge
