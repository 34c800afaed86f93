#include "patchnorm/scheme.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace patchnorm {

SplitMode split_mode_from_string(const std::string& s) {
  if (s == "equal") return SplitMode::Equal;
  if (s == "random") return SplitMode::Random;
  throw ConfigError("unknown split mode '" + s + "' (expected equal|random)");
}

std::string to_string(SplitMode mode) {
  return mode == SplitMode::Equal ? "equal" : "random";
}

P2Axis p2_axis_from_string(const std::string& s) {
  if (s == "lr") return P2Axis::LeftRight;
  if (s == "ud") return P2Axis::UpDown;
  throw ConfigError("unknown p2 axis '" + s + "' (expected lr|ud)");
}

std::string to_string(P2Axis axis) {
  return axis == P2Axis::LeftRight ? "lr" : "ud";
}

void SchemeConfig::validate() const {
  if (candidate_set.empty()) throw ConfigError("scheme: candidate_set must not be empty");
  for (size_t i = 0; i < candidate_set.size(); ++i) {
    const int p = candidate_set[i];
    if (p != 1 && p != 2 && p != 4 && p != 9)
      throw ConfigError("scheme: candidate patch count must be one of {1,2,4,9}, got " +
                        std::to_string(p));
    if (i > 0 && candidate_set[i - 1] >= p)
      throw ConfigError("scheme: candidate_set must be strictly ascending");
  }
  if (subset_size < 1 || subset_size > static_cast<int>(candidate_set.size()))
    throw ConfigError("scheme: subset_size " + std::to_string(subset_size) +
                      " out of range for candidate set of size " +
                      std::to_string(candidate_set.size()));
  if (lambda < 0.0 || lambda > 1.0)
    throw ConfigError("scheme: lambda must be in [0,1], got " + std::to_string(lambda));
  if (eps <= 0.0) throw ConfigError("scheme: eps must be > 0");
  if (momentum <= 0.0 || momentum >= 1.0)
    throw ConfigError("scheme: momentum must be in (0,1), got " + std::to_string(momentum));
}

std::vector<int> draw_subset(const SchemeConfig& cfg, Rng& rng) {
  const auto& set = cfg.candidate_set;
  const int k = cfg.subset_size;
  if (k < 1 || k > static_cast<int>(set.size()))
    throw ConfigError("draw_subset: subset_size out of range");
  if (k == static_cast<int>(set.size())) return set;  // full set, no draw consumed
  std::vector<int> pool = set;
  for (int i = 0; i < k; ++i) {
    const auto j = rng.uniform_int(i, static_cast<int64_t>(pool.size()) - 1);
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
  }
  pool.resize(static_cast<size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

ChannelGrouping assign_channels(int64_t channels, std::span<const int> subset, Rng& rng) {
  if (channels < 1) throw ConfigError("assign_channels: channel count must be >= 1");
  if (subset.empty()) throw ConfigError("assign_channels: subset must not be empty");
  std::map<int, std::vector<int>> by_count;
  for (int64_t c = 0; c < channels; ++c) {
    const auto idx = rng.uniform_int(0, static_cast<int64_t>(subset.size()) - 1);
    by_count[subset[static_cast<size_t>(idx)]].push_back(static_cast<int>(c));
  }
  ChannelGrouping grouping;
  for (auto& [patches, members] : by_count)
    grouping.groups.push_back(ChannelGroup{patches, std::move(members)});
  return grouping;
}

CutInterval third_interval(int64_t extent) {
  return CutInterval{(extent + 2) / 3, (2 * extent) / 3};
}

std::pair<CutInterval, CutInterval> fifth_intervals(int64_t extent) {
  return {CutInterval{(extent + 4) / 5, (2 * extent) / 5},
          CutInterval{(3 * extent + 4) / 5, (4 * extent) / 5}};
}

namespace {

// Cut positions along one axis for the requested segment count; degrades to
// no cuts (one segment) when the prescribed interval is empty or an equal
// cut would leave an empty segment.
std::vector<int64_t> axis_cuts(int64_t extent, int segments, SplitMode mode, Rng& rng,
                               int patches) {
  if (segments <= 1) return {};
  if (segments == 2) {
    if (mode == SplitMode::Random) {
      const CutInterval iv = third_interval(extent);
      if (iv.empty()) return {};
      return {rng.uniform_int(iv.lo, iv.hi)};
    }
    const int64_t cut = extent / 2;
    if (cut < 1 || cut > extent - 1) return {};
    return {cut};
  }
  // three segments (nine-patch grids)
  (void)patches;
  if (mode == SplitMode::Random) {
    const auto [iv1, iv2] = fifth_intervals(extent);
    if (iv1.empty() || iv2.empty()) return {};
    const int64_t c1 = rng.uniform_int(iv1.lo, iv1.hi);
    const int64_t c2 = rng.uniform_int(iv2.lo, iv2.hi);
    return {c1, c2};
  }
  const int64_t c1 = extent / 3, c2 = (2 * extent) / 3;
  if (c1 < 1 || c2 <= c1 || c2 > extent - 1) return {};
  return {c1, c2};
}

std::vector<std::pair<int64_t, int64_t>> segments_from_cuts(int64_t extent,
                                                            const std::vector<int64_t>& cuts) {
  std::vector<std::pair<int64_t, int64_t>> segs;
  int64_t start = 0;
  for (int64_t cut : cuts) {
    segs.emplace_back(start, cut);
    start = cut;
  }
  segs.emplace_back(start, extent);
  return segs;
}

}  // namespace

PatchGrid generate_grid(int64_t height, int64_t width, int patches, SplitMode mode, Rng& rng,
                        P2Axis p2_axis) {
  if (height < 1 || width < 1)
    throw DimensionError("generate_grid: spatial extents must be >= 1, got " +
                         std::to_string(height) + "x" + std::to_string(width));
  if (patches != 1 && patches != 2 && patches != 4 && patches != 9)
    throw ConfigError("generate_grid: patch count must be one of {1,2,4,9}, got " +
                      std::to_string(patches));

  int row_segments = 1, col_segments = 1;
  if (patches == 2) {
    const P2Axis axis =
        mode == SplitMode::Random ? (rng.uniform_int(0, 1) == 0 ? P2Axis::LeftRight : P2Axis::UpDown)
                                  : p2_axis;
    (axis == P2Axis::LeftRight ? col_segments : row_segments) = 2;
  } else if (patches == 4) {
    row_segments = col_segments = 2;
  } else if (patches == 9) {
    row_segments = col_segments = 3;
  }

  const auto row_cuts = axis_cuts(height, row_segments, mode, rng, patches);
  const auto col_cuts = axis_cuts(width, col_segments, mode, rng, patches);
  const auto row_segs = segments_from_cuts(height, row_cuts);
  const auto col_segs = segments_from_cuts(width, col_cuts);

  PatchGrid grid;
  grid.requested_patches = patches;
  grid.height = height;
  grid.width = width;
  for (const auto& [r0, r1] : row_segs)
    for (const auto& [c0, c1] : col_segs) grid.rects.push_back(Rect{r0, r1, c0, c1});
  return grid;
}

PixelGrouping generate_pixel_groups(int64_t height, int64_t width, int patches, Rng& rng) {
  const PatchGrid grid = generate_grid(height, width, patches, SplitMode::Random, rng);
  PixelGrouping pg;
  pg.height = height;
  pg.width = width;
  for (const Rect& r : grid.rects) pg.group_sizes.push_back(r.area());

  std::vector<int> pixels(static_cast<size_t>(height * width));
  std::iota(pixels.begin(), pixels.end(), 0);
  rng.shuffle(pixels);

  pg.assignment.assign(pixels.size(), 0);
  size_t next = 0;
  for (size_t g = 0; g < pg.group_sizes.size(); ++g)
    for (int64_t i = 0; i < pg.group_sizes[g]; ++i)
      pg.assignment[static_cast<size_t>(pixels[next++])] = static_cast<int>(g);
  return pg;
}

}  // namespace patchnorm
