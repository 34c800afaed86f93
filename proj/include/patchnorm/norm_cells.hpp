#pragma once

#include <cstdint>
#include <vector>

#include "patchnorm/scheme.hpp"
#include "patchnorm/tensor.hpp"

namespace patchnorm {

// One cell is the set of flat element indices that share a single (mean, std)
// pair. A partition covers every element of the tensor exactly once; indices
// inside a cell are ascending so reductions have a fixed order. channel is
// the per-cell channel index when the cell lies inside one channel, -1 when
// it spans channels (layer/group norm cells, which never blend).
struct CellPartition {
  std::vector<std::vector<int64_t>> cells;
  std::vector<int> channel;

  size_t size() const { return cells.size(); }
};

// One cell per channel over all samples and positions (batch norm).
CellPartition bn_cells(const Shape& shape);

// One cell per (sample, channel) (instance norm).
CellPartition in_cells(const Shape& shape);

// One cell per sample over all channels and positions (layer norm).
CellPartition ln_cells(const Shape& shape);

// One cell per (sample, channel group); groups must divide the channel count.
CellPartition gn_cells(const Shape& shape, int groups);

// Patch-aware cells: for each channel group one spatial grid, one cell per
// (patch, member channel) over all samples. Grids are matched to groups by
// index. The regrouping of Algorithm-style patch processing is implicit:
// together the cells tile the tensor, so normalized patches land back at
// their original positions.
CellPartition pbn_cells(const Shape& shape, const ChannelGrouping& grouping,
                        const std::vector<PatchGrid>& grids);

// Pixel-group cells: identical structure with spatially unstructured groups.
CellPartition pixel_cells(const Shape& shape, const ChannelGrouping& grouping,
                          const std::vector<PixelGrouping>& groupings);

}  // namespace patchnorm
