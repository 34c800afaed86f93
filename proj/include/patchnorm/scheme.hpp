#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "patchnorm/errors.hpp"
#include "patchnorm/rng.hpp"

namespace patchnorm {

// Half-open rectangle inside an H x W plane.
struct Rect {
  int64_t row0 = 0, row1 = 0, col0 = 0, col1 = 0;

  int64_t rows() const { return row1 - row0; }
  int64_t cols() const { return col1 - col0; }
  int64_t area() const { return rows() * cols(); }
  bool operator==(const Rect&) const = default;
};

// Exact partition of the H x W plane into axis-aligned rectangles. When a
// spatial extent is too small for the requested patch count the affected
// axis degrades to a single segment, so patch_count() can be below
// requested_patches (never zero).
struct PatchGrid {
  std::vector<Rect> rects;
  int requested_patches = 1;
  int64_t height = 0, width = 0;

  int patch_count() const { return static_cast<int>(rects.size()); }
  bool degraded() const { return patch_count() != requested_patches; }
};

enum class SplitMode { Equal, Random };

// Orientation of the single cut for two-patch grids.
enum class P2Axis { LeftRight, UpDown };

SplitMode split_mode_from_string(const std::string& s);
std::string to_string(SplitMode mode);
P2Axis p2_axis_from_string(const std::string& s);
std::string to_string(P2Axis axis);

// Full hyper-parameter record for the patch-aware scheme.
struct SchemeConfig {
  std::vector<int> candidate_set{1, 2, 4};  // admissible patch counts, subset of {1,2,4,9}
  int subset_size = 2;                      // patch counts drawn per forward pass
  SplitMode split_mode = SplitMode::Random;
  P2Axis p2_axis = P2Axis::LeftRight;  // used by equal-mode two-patch grids only
  double lambda = 0.5;                 // blend weight for accumulated statistics
  double eps = 1e-5;
  double momentum = 0.1;
  uint64_t rng_seed = 0;

  void validate() const;  // throws ConfigError
};

// Channels partitioned by their drawn patch count, ascending by count.
struct ChannelGroup {
  int patches = 1;
  std::vector<int> channels;
};

struct ChannelGrouping {
  std::vector<ChannelGroup> groups;
  int group_count() const { return static_cast<int>(groups.size()); }
};

// Spatially unstructured counterpart of PatchGrid: every (h, w) coordinate
// carries a group id; group sizes replicate the rect areas of a random grid
// draw with the same patch count.
struct PixelGrouping {
  std::vector<int> assignment;  // length H*W, row-major
  std::vector<int64_t> group_sizes;
  int64_t height = 0, width = 0;

  int group_count() const { return static_cast<int>(group_sizes.size()); }
};

// Uniform sample of subset_size patch counts from the candidate set, without
// replacement. Returns the whole set when subset_size == |candidate_set|.
std::vector<int> draw_subset(const SchemeConfig& cfg, Rng& rng);

// Each channel draws its patch count independently and uniformly from the
// subset; channels with equal counts form one group.
ChannelGrouping assign_channels(int64_t channels, std::span<const int> subset, Rng& rng);

// Builds the spatial partition for one channel group. Random cuts for two
// and four patches are drawn from [ceil(D/3), floor(2D/3)]; nine-patch grids
// draw from [ceil(D/5), floor(2D/5)] and [ceil(3D/5), floor(4D/5)]. Equal
// cuts sit at floor(D/2) (and floor(D/3), floor(2D/3) for nine patches).
PatchGrid generate_grid(int64_t height, int64_t width, int patches, SplitMode mode, Rng& rng,
                        P2Axis p2_axis = P2Axis::LeftRight);

// Same group sizes as a random grid draw, assigned by a uniform permutation
// of all pixels (no spatial structure).
PixelGrouping generate_pixel_groups(int64_t height, int64_t width, int patches, Rng& rng);

// Closed cut-index interval prescribed for a random split; empty (lo > hi)
// when the extent cannot be cut. Exposed for the property tests.
struct CutInterval {
  int64_t lo = 1, hi = 0;
  bool empty() const { return lo > hi; }
  bool contains(int64_t v) const { return v >= lo && v <= hi; }
};
CutInterval third_interval(int64_t extent);
std::pair<CutInterval, CutInterval> fifth_intervals(int64_t extent);

}  // namespace patchnorm
