#include "piqa/wavelet.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace piqa::wavelet {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

// Split along x into low (ceil(w/2)) and high (floor(w/2)) halves.
void split_x(const Plane& p, Plane& low, Plane& high) {
  const int wl = (p.w + 1) / 2, wh = p.w / 2;
  low = Plane(wl, p.h);
  high = Plane(wh, p.h);
  for (int y = 0; y < p.h; ++y) {
    for (int i = 0; i < wh; ++i) {
      const double a = p.at(2 * i, y), b = p.at(2 * i + 1, y);
      low.at(i, y) = (a + b) * kInvSqrt2;
      high.at(i, y) = (a - b) * kInvSqrt2;
    }
    if (p.w & 1) low.at(wl - 1, y) = p.at(p.w - 1, y);
  }
}

void split_y(const Plane& p, Plane& low, Plane& high) {
  const int hl = (p.h + 1) / 2, hh = p.h / 2;
  low = Plane(p.w, hl);
  high = Plane(p.w, hh);
  for (int x = 0; x < p.w; ++x) {
    for (int i = 0; i < hh; ++i) {
      const double a = p.at(x, 2 * i), b = p.at(x, 2 * i + 1);
      low.at(x, i) = (a + b) * kInvSqrt2;
      high.at(x, i) = (a - b) * kInvSqrt2;
    }
    if (p.h & 1) low.at(x, hl - 1) = p.at(x, p.h - 1);
  }
}

Plane merge_x(const Plane& low, const Plane& high) {
  const int w = low.w + high.w;
  Plane p(w, low.h);
  for (int y = 0; y < low.h; ++y) {
    for (int i = 0; i < high.w; ++i) {
      const double l = low.at(i, y), h = high.at(i, y);
      p.at(2 * i, y) = (l + h) * kInvSqrt2;
      p.at(2 * i + 1, y) = (l - h) * kInvSqrt2;
    }
    if (w & 1) p.at(w - 1, y) = low.at(low.w - 1, y);
  }
  return p;
}

Plane merge_y(const Plane& low, const Plane& high) {
  const int h = low.h + high.h;
  Plane p(low.w, h);
  for (int x = 0; x < low.w; ++x) {
    for (int i = 0; i < high.h; ++i) {
      const double l = low.at(x, i), hi = high.at(x, i);
      p.at(x, 2 * i) = (l + hi) * kInvSqrt2;
      p.at(x, 2 * i + 1) = (l - hi) * kInvSqrt2;
    }
    if (h & 1) p.at(x, h - 1) = low.at(x, low.h - 1);
  }
  return p;
}

void check_plane(const Plane& p, int w, int h, const char* name) {
  if (p.w != w || p.h != h ||
      p.v.size() != static_cast<size_t>(w) * static_cast<size_t>(h))
    throw ShapeError(std::string("idwt2: plane ") + name +
                     " has inconsistent size");
}

}  // namespace

SubbandPyramid dwt2(const Raster& raster, int levels) {
  if (levels < 1) throw ArgumentError("dwt2: levels must be >= 1");
  if (raster.width <= 0 || raster.height <= 0)
    throw ArgumentError("dwt2: empty raster");
  if ((1 << levels) > std::min(raster.width, raster.height))
    throw ArgumentError("dwt2: 2^levels exceeds min(width,height)");

  const Raster gray = to_gray(raster);
  Plane cur(gray.width, gray.height);
  for (int y = 0; y < gray.height; ++y)
    for (int x = 0; x < gray.width; ++x) cur.at(x, y) = gray.at(x, y);

  SubbandPyramid pyr;
  pyr.src_width = raster.width;
  pyr.src_height = raster.height;
  for (int level = 0; level < levels; ++level) {
    Plane low, high;
    split_x(cur, low, high);
    DetailLevel d;
    Plane ll;
    split_y(low, ll, d.lh);
    split_y(high, d.hl, d.hh);
    pyr.details.push_back(std::move(d));
    cur = std::move(ll);
  }
  pyr.ll = std::move(cur);
  return pyr;
}

Raster idwt2(const SubbandPyramid& pyramid) {
  if (pyramid.details.empty()) throw ShapeError("idwt2: pyramid has no levels");

  // Recompute the expected per-level dims from the source size.
  int w = pyramid.src_width, h = pyramid.src_height;
  std::vector<std::array<int, 4>> dims;  // wl, wh, hl, hh per level
  for (int level = 0; level < pyramid.levels(); ++level) {
    const int wl = (w + 1) / 2, wh = w / 2;
    const int hl = (h + 1) / 2, hh = h / 2;
    dims.push_back({wl, wh, hl, hh});
    w = wl;
    h = hl;
  }
  check_plane(pyramid.ll, w, h, "ll");
  for (int level = 0; level < pyramid.levels(); ++level) {
    const auto& [wl, wh, hl, hh] = dims[level];
    check_plane(pyramid.details[level].lh, wl, hh, "lh");
    check_plane(pyramid.details[level].hl, wh, hl, "hl");
    check_plane(pyramid.details[level].hh, wh, hh, "hh");
  }

  Plane cur = pyramid.ll;
  for (int level = pyramid.levels() - 1; level >= 0; --level) {
    const DetailLevel& d = pyramid.details[level];
    const Plane low = merge_y(cur, d.lh);
    const Plane high = merge_y(d.hl, d.hh);
    cur = merge_x(low, high);
  }

  Raster out(cur.w, cur.h, 1);
  for (int y = 0; y < cur.h; ++y)
    for (int x = 0; x < cur.w; ++x)
      out.at(x, y) = static_cast<float>(clamp01(cur.at(x, y)));
  return out;
}

EnergyMap texture_energy(const SubbandPyramid& pyramid, int cell) {
  if (cell <= 0) throw ArgumentError("texture_energy: cell must be positive");
  if (cell & 1) throw ArgumentError("texture_energy: cell must be even");
  if (pyramid.details.empty())
    throw ArgumentError("texture_energy: pyramid has no levels");

  EnergyMap map;
  map.cell = cell;
  map.src_width = pyramid.src_width;
  map.src_height = pyramid.src_height;
  map.grid_w = (pyramid.src_width + cell - 1) / cell;
  map.grid_h = (pyramid.src_height + cell - 1) / cell;
  map.values.assign(static_cast<size_t>(map.grid_w) * map.grid_h, 0.0);
  std::vector<long long> counts(map.values.size(), 0);

  const int half = cell / 2;  // cell size on the level-1 grid
  const DetailLevel& d = pyramid.details[0];
  for (const Plane* plane : {&d.lh, &d.hl, &d.hh}) {
    for (int cy = 0; cy < plane->h; ++cy) {
      const int row = std::min(cy / half, map.grid_h - 1);
      for (int cx = 0; cx < plane->w; ++cx) {
        const int col = std::min(cx / half, map.grid_w - 1);
        const double c = plane->at(cx, cy);
        map.values[static_cast<size_t>(row) * map.grid_w + col] += c * c;
        ++counts[static_cast<size_t>(row) * map.grid_w + col];
      }
    }
  }
  for (size_t i = 0; i < map.values.size(); ++i)
    if (counts[i] > 0) map.values[i] /= static_cast<double>(counts[i]);
  return map;
}

std::vector<Region> select_texture_regions(const EnergyMap& map, int k,
                                           int region_size,
                                           double min_separation) {
  if (k < 1) throw ArgumentError("select_texture_regions: k must be >= 1");
  if (region_size <= 0 || region_size > map.src_width ||
      region_size > map.src_height)
    throw ArgumentError(
        "select_texture_regions: region_size does not fit inside the raster");

  struct Candidate {
    double energy;
    int index;  // row-major cell index (tie break)
  };
  std::vector<Candidate> cands;
  for (int i = 0; i < static_cast<int>(map.values.size()); ++i)
    if (map.values[i] > 0.0) cands.push_back({map.values[i], i});
  std::sort(cands.begin(), cands.end(), [](const Candidate& a,
                                           const Candidate& b) {
    if (a.energy != b.energy) return a.energy > b.energy;
    return a.index < b.index;
  });

  std::vector<Region> chosen;
  std::vector<std::pair<double, double>> centers;
  for (const Candidate& c : cands) {
    if (static_cast<int>(chosen.size()) >= k) break;
    const int row = c.index / map.grid_w, col = c.index % map.grid_w;
    const int ccx = col * map.cell + map.cell / 2;
    const int ccy = row * map.cell + map.cell / 2;
    Region r;
    r.w = region_size;
    r.h = region_size;
    r.x = std::clamp(ccx - region_size / 2, 0, map.src_width - region_size);
    r.y = std::clamp(ccy - region_size / 2, 0, map.src_height - region_size);
    const double rcx = r.x + region_size / 2.0;
    const double rcy = r.y + region_size / 2.0;
    bool ok = true;
    for (const auto& [ax, ay] : centers)
      if (std::hypot(rcx - ax, rcy - ay) < min_separation) {
        ok = false;
        break;
      }
    if (!ok) continue;
    chosen.push_back(r);
    centers.emplace_back(rcx, rcy);
  }
  return chosen;
}

}  // namespace piqa::wavelet
