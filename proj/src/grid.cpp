#include "grop/grid.hpp"

#include <algorithm>
#include <sstream>

namespace grop {

GridMap::GridMap(const GridGeometry& geometry) : geometry_(geometry) {
  if (geometry.width <= 0 || geometry.height <= 0 || !(geometry.resolution > 0.0)) {
    throw GridError("grid dimensions and resolution must be positive");
  }
  cells_ = Storage::Zero(geometry.height, geometry.width);
}

void GridMap::fill(const Rect& r, Occupancy v) {
  const CellIndex lo = to_cell({r.x0, r.y0});
  const CellIndex hi = to_cell({r.x1, r.y1});
  for (int row = std::max(0, lo.row); row <= std::min(height() - 1, hi.row); ++row) {
    for (int col = std::max(0, lo.col); col <= std::min(width() - 1, hi.col); ++col) {
      const CellIndex c{col, row};
      if (r.contains(to_world(c)) && at(c) == Occupancy::Free) set(c, v);
    }
  }
}

GridMap GridMap::crop(const CellIndex& lower_left, int w, int h) const {
  if (w <= 0 || h <= 0) throw GridError("crop window must be non-empty");
  if (!in_bounds(lower_left) || !in_bounds({lower_left.col + w - 1, lower_left.row + h - 1})) {
    std::ostringstream msg;
    msg << "crop window " << w << "x" << h << " at cell (" << lower_left.col << ", "
        << lower_left.row << ") exceeds map " << width() << "x" << height();
    throw GridError(msg.str());
  }
  GridGeometry g = geometry_;
  g.origin = geometry_.origin + Vec2(lower_left.col, lower_left.row) * geometry_.resolution;
  g.width = w;
  g.height = h;
  GridMap out(g);
  out.cells_ = cells_.block(lower_left.row, lower_left.col, h, w);
  return out;
}

GridMap GridMap::without_chairs() const {
  GridMap out = *this;
  out.cells_ = (cells_ == static_cast<std::uint8_t>(Occupancy::Chair))
                   .select(Storage::Constant(height(), width(), 0), cells_);
  return out;
}

std::size_t GridMap::count(Occupancy v) const {
  return static_cast<std::size_t>((cells_ == static_cast<std::uint8_t>(v)).count());
}

namespace {

std::uint8_t gray_level(Occupancy v) {
  switch (v) {
    case Occupancy::Free: return 255;
    case Occupancy::Chair: return 128;
    case Occupancy::Table: return 0;
  }
  return 0;
}

}  // namespace

std::string to_pgm(const GridMap& map) {
  std::ostringstream out;
  out << "P5\n# occupancy: 255=free 128=chair 0=table; resolution " << map.resolution()
      << " m/cell\n"
      << map.width() << " " << map.height() << "\n255\n";
  for (int row = map.height() - 1; row >= 0; --row) {
    for (int col = 0; col < map.width(); ++col) {
      out.put(static_cast<char>(gray_level(map.at({col, row}))));
    }
  }
  return out.str();
}

std::string to_pgm(const Eigen::ArrayXXd& unit_values, const std::string& comment) {
  std::ostringstream out;
  out << "P5\n# " << comment << "\n" << unit_values.cols() << " " << unit_values.rows() << "\n255\n";
  for (Eigen::Index row = unit_values.rows() - 1; row >= 0; --row) {
    for (Eigen::Index col = 0; col < unit_values.cols(); ++col) {
      const double v = std::clamp(unit_values(row, col), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0))));
    }
  }
  return out.str();
}

}  // namespace grop
