#include "patchnorm/norm_cells.hpp"

namespace patchnorm {

CellPartition bn_cells(const Shape& s) {
  CellPartition part;
  const int64_t hw = s.spatial();
  part.cells.reserve(static_cast<size_t>(s.c));
  for (int64_t c = 0; c < s.c; ++c) {
    std::vector<int64_t> cell;
    cell.reserve(static_cast<size_t>(s.n * hw));
    for (int64_t n = 0; n < s.n; ++n) {
      const int64_t base = (n * s.c + c) * hw;
      for (int64_t i = 0; i < hw; ++i) cell.push_back(base + i);
    }
    part.cells.push_back(std::move(cell));
    part.channel.push_back(static_cast<int>(c));
  }
  return part;
}

CellPartition in_cells(const Shape& s) {
  CellPartition part;
  const int64_t hw = s.spatial();
  for (int64_t n = 0; n < s.n; ++n)
    for (int64_t c = 0; c < s.c; ++c) {
      std::vector<int64_t> cell(static_cast<size_t>(hw));
      const int64_t base = (n * s.c + c) * hw;
      for (int64_t i = 0; i < hw; ++i) cell[static_cast<size_t>(i)] = base + i;
      part.cells.push_back(std::move(cell));
      part.channel.push_back(static_cast<int>(c));
    }
  return part;
}

CellPartition ln_cells(const Shape& s) {
  CellPartition part;
  const int64_t chw = s.c * s.spatial();
  for (int64_t n = 0; n < s.n; ++n) {
    std::vector<int64_t> cell(static_cast<size_t>(chw));
    for (int64_t i = 0; i < chw; ++i) cell[static_cast<size_t>(i)] = n * chw + i;
    part.cells.push_back(std::move(cell));
    part.channel.push_back(-1);
  }
  return part;
}

CellPartition gn_cells(const Shape& s, int groups) {
  if (groups < 1 || s.c % groups != 0)
    throw ConfigError("group norm: group count " + std::to_string(groups) +
                      " must divide channel count " + std::to_string(s.c));
  CellPartition part;
  const int64_t hw = s.spatial();
  const int64_t per = s.c / groups;
  for (int64_t n = 0; n < s.n; ++n)
    for (int64_t g = 0; g < groups; ++g) {
      std::vector<int64_t> cell;
      cell.reserve(static_cast<size_t>(per * hw));
      for (int64_t c = g * per; c < (g + 1) * per; ++c) {
        const int64_t base = (n * s.c + c) * hw;
        for (int64_t i = 0; i < hw; ++i) cell.push_back(base + i);
      }
      part.cells.push_back(std::move(cell));
      part.channel.push_back(per == 1 ? static_cast<int>(g) : -1);
    }
  return part;
}

CellPartition pbn_cells(const Shape& s, const ChannelGrouping& grouping,
                        const std::vector<PatchGrid>& grids) {
  if (grids.size() != grouping.groups.size())
    throw DimensionError("pbn_cells: one grid per channel group required");
  CellPartition part;
  const int64_t hw = s.spatial();
  for (size_t g = 0; g < grouping.groups.size(); ++g) {
    const auto& group = grouping.groups[g];
    const PatchGrid& grid = grids[g];
    if (grid.height != s.h || grid.width != s.w)
      throw DimensionError("pbn_cells: grid extent does not match tensor");
    for (const Rect& r : grid.rects)
      for (int c : group.channels) {
        std::vector<int64_t> cell;
        cell.reserve(static_cast<size_t>(s.n * r.area()));
        for (int64_t n = 0; n < s.n; ++n) {
          const int64_t base = (n * s.c + c) * hw;
          for (int64_t h = r.row0; h < r.row1; ++h)
            for (int64_t w = r.col0; w < r.col1; ++w) cell.push_back(base + h * s.w + w);
        }
        part.cells.push_back(std::move(cell));
        part.channel.push_back(c);
      }
  }
  return part;
}

CellPartition pixel_cells(const Shape& s, const ChannelGrouping& grouping,
                          const std::vector<PixelGrouping>& groupings) {
  if (groupings.size() != grouping.groups.size())
    throw DimensionError("pixel_cells: one pixel grouping per channel group required");
  CellPartition part;
  const int64_t hw = s.spatial();
  for (size_t g = 0; g < grouping.groups.size(); ++g) {
    const auto& group = grouping.groups[g];
    const PixelGrouping& pg = groupings[g];
    if (pg.height != s.h || pg.width != s.w)
      throw DimensionError("pixel_cells: grouping extent does not match tensor");
    // Pixels of each group in ascending position order.
    std::vector<std::vector<int64_t>> members(static_cast<size_t>(pg.group_count()));
    for (int64_t p = 0; p < hw; ++p)
      members[static_cast<size_t>(pg.assignment[static_cast<size_t>(p)])].push_back(p);
    for (const auto& pixels : members)
      for (int c : group.channels) {
        std::vector<int64_t> cell;
        cell.reserve(static_cast<size_t>(s.n) * pixels.size());
        for (int64_t n = 0; n < s.n; ++n) {
          const int64_t base = (n * s.c + c) * hw;
          for (int64_t p : pixels) cell.push_back(base + p);
        }
        part.cells.push_back(std::move(cell));
        part.channel.push_back(c);
      }
  }
  return part;
}

}  // namespace patchnorm
