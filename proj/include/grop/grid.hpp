#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace grop {

using Vec2 = Eigen::Vector2d;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar normalize_angle(Scalar a) {
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  a = std::remainder(a, Scalar(2) * kPi);
  if (a <= -kPi) a += Scalar(2) * kPi;
  return a;
}

/// Planar robot pose: position in meters, heading in radians.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose() = default;
  Pose(double px, double py, double heading = 0.0)
      : x(px), y(py), theta(normalize_angle(heading)) {}
  Pose(const Vec2& p, double heading) : Pose(p.x(), p.y(), heading) {}

  Vec2 position() const { return {x, y}; }
  bool operator==(const Pose&) const = default;
};

/// Heading that looks from `from` towards `to`.
inline double bearing(const Vec2& from, const Vec2& to) {
  return std::atan2(to.y() - from.y(), to.x() - from.x());
}

/// Axis-aligned rectangle in meters.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  Vec2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool contains(const Vec2& p) const {
    return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1;
  }
  bool contains(const Rect& r) const {
    return r.x0 >= x0 - 1e-9 && r.x1 <= x1 + 1e-9 && r.y0 >= y0 - 1e-9 && r.y1 <= y1 + 1e-9;
  }
  // Interiors intersect; shared edges do not count.
  bool overlaps(const Rect& r) const {
    constexpr double eps = 1e-9;
    return x0 < r.x1 - eps && r.x0 < x1 - eps && y0 < r.y1 - eps && r.y0 < y1 - eps;
  }
  bool operator==(const Rect&) const = default;
};

struct CellIndex {
  int col = 0;  // x
  int row = 0;  // y
  bool operator==(const CellIndex&) const = default;
  auto operator<=>(const CellIndex&) const = default;
};

/// Occupancy classes of a map cell.
enum class Occupancy : std::uint8_t { Free = 0, Chair = 1, Table = 2 };

/// Placement of a regular grid in the world: lower-left corner, cell pitch, extent.
struct GridGeometry {
  Vec2 origin = Vec2::Zero();
  double resolution = 0.1;
  int width = 0;
  int height = 0;

  bool in_bounds(const CellIndex& c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width && c.row < height;
  }
  CellIndex to_cell(const Vec2& p) const {
    return {static_cast<int>(std::floor((p.x() - origin.x()) / resolution)),
            static_cast<int>(std::floor((p.y() - origin.y()) / resolution))};
  }
  Vec2 to_world(const CellIndex& c) const {
    return {origin.x() + (c.col + 0.5) * resolution, origin.y() + (c.row + 0.5) * resolution};
  }
  std::size_t cell_count() const { return static_cast<std::size_t>(width) * height; }
  bool operator==(const GridGeometry& o) const {
    return origin == o.origin && resolution == o.resolution && width == o.width && height == o.height;
  }
};

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Discretized occupancy of a scene region. Storage is (row = y, col = x).
class GridMap {
 public:
  using Storage = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

  GridMap() = default;
  GridMap(const GridGeometry& geometry);

  const GridGeometry& geometry() const { return geometry_; }
  int width() const { return geometry_.width; }
  int height() const { return geometry_.height; }
  double resolution() const { return geometry_.resolution; }

  bool in_bounds(const CellIndex& c) const { return geometry_.in_bounds(c); }
  CellIndex to_cell(const Vec2& p) const { return geometry_.to_cell(p); }
  Vec2 to_world(const CellIndex& c) const { return geometry_.to_world(c); }

  Occupancy at(const CellIndex& c) const {
    return static_cast<Occupancy>(cells_(c.row, c.col));
  }
  void set(const CellIndex& c, Occupancy v) { cells_(c.row, c.col) = static_cast<std::uint8_t>(v); }

  // Out-of-bounds cells count as occupied.
  bool blocked(const CellIndex& c) const { return !in_bounds(c) || at(c) != Occupancy::Free; }
  bool blocked(const Vec2& p) const { return blocked(to_cell(p)); }
  bool is_chair(const CellIndex& c) const { return in_bounds(c) && at(c) == Occupancy::Chair; }

  /// Marks every cell whose center lies inside `r`; never frees a cell.
  void fill(const Rect& r, Occupancy v);

  /// Sub-window starting at `lower_left`; throws GridError if it leaves the map.
  GridMap crop(const CellIndex& lower_left, int width, int height) const;

  /// Same geometry with every chair cell freed.
  GridMap without_chairs() const;

  std::size_t count(Occupancy v) const;
  const Storage& cells() const { return cells_; }
  bool operator==(const GridMap& o) const {
    return geometry_ == o.geometry_ && (cells_ == o.cells_).all();
  }

 private:
  GridGeometry geometry_;
  Storage cells_;
};

/// Binary PGM (P5). Obstacle classes get distinct gray levels, documented in the header comment.
std::string to_pgm(const GridMap& map);
/// Rows are written top (max y) first so the image reads like a top-down view.
std::string to_pgm(const Eigen::ArrayXXd& unit_values, const std::string& comment);

}  // namespace grop
