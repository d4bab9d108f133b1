#pragma once

#include <vector>

#include "grop/grid.hpp"

namespace grop {

/// Layout of the top-down image and of the stand-position sample lattice inside it.
///
/// The image is `width` x `height` cells centered on the unload target. Stand positions
/// are sampled on a `region_cols` x `region_rows` lattice with pitch `stride` cells,
/// symmetric about the target cell. Every other frame cell is outside the region.
struct FrameSpec {
  int width = 64;
  int height = 32;
  int region_cols = 24;
  int region_rows = 8;
  int stride = 2;

  int region_size() const { return region_cols * region_rows; }
  /// Frame cell of the target (the crop is centered on it).
  CellIndex center() const { return {width / 2, height / 2}; }
  /// Frame cell of lattice sample (i, j), i < region_cols, j < region_rows.
  CellIndex lattice_cell(int i, int j) const;
  /// Lattice cells in row-major order (j outer, i inner).
  std::vector<CellIndex> lattice() const;
  bool in_region(const CellIndex& frame_cell) const;
  bool operator==(const FrameSpec&) const = default;
};

/// Per-cell feasibility image centered on an unload target.
struct Heatmap {
  GridGeometry geometry;  // frame placement in world coordinates
  FrameSpec frame;
  Vec2 target = Vec2::Zero();
  Eigen::ArrayXXd values;  // (row, col), each in [0, 1]

  static Heatmap zeros(const GridGeometry& geometry, const FrameSpec& frame, const Vec2& target);

  double at(const CellIndex& frame_cell) const { return values(frame_cell.row, frame_cell.col); }
  double& at(const CellIndex& frame_cell) { return values(frame_cell.row, frame_cell.col); }
  bool in_frame(const CellIndex& c) const { return geometry.in_bounds(c); }
};

}  // namespace grop
