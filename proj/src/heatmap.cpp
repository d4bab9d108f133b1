#include "grop/heatmap.hpp"

namespace grop {

CellIndex FrameSpec::lattice_cell(int i, int j) const {
  // With an even stride the offsets are odd and the lattice is symmetric about the center.
  const CellIndex c = center();
  return {c.col + stride * i - stride * (region_cols - 1) / 2,
          c.row + stride * j - stride * (region_rows - 1) / 2};
}

std::vector<CellIndex> FrameSpec::lattice() const {
  std::vector<CellIndex> out;
  out.reserve(static_cast<std::size_t>(region_size()));
  for (int j = 0; j < region_rows; ++j) {
    for (int i = 0; i < region_cols; ++i) out.push_back(lattice_cell(i, j));
  }
  return out;
}

bool FrameSpec::in_region(const CellIndex& frame_cell) const {
  const CellIndex first = lattice_cell(0, 0);
  const int dc = frame_cell.col - first.col;
  const int dr = frame_cell.row - first.row;
  if (dc < 0 || dr < 0 || dc % stride != 0 || dr % stride != 0) return false;
  return dc / stride < region_cols && dr / stride < region_rows;
}

Heatmap Heatmap::zeros(const GridGeometry& geometry, const FrameSpec& frame, const Vec2& target) {
  Heatmap h;
  h.geometry = geometry;
  h.frame = frame;
  h.target = target;
  h.values = Eigen::ArrayXXd::Zero(geometry.height, geometry.width);
  return h;
}

}  // namespace grop
