#include "grop/world.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "grop/rng.hpp"

namespace grop {

namespace {

const Table& find_table(const SceneSpec& spec, const std::string& name) {
  for (const Table& t : spec.tables) {
    if (t.name == name) return t;
  }
  throw SceneError("no table named '" + name + "'");
}

std::string describe(const Rect& r) {
  std::ostringstream s;
  s << "[" << format_number(r.x0) << ", " << format_number(r.y0) << "; " << format_number(r.x1)
    << ", " << format_number(r.y1) << "]";
  return s.str();
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const Table& Environment::unload_table() const { return find_table(spec_, spec_.unload_table); }
const Table& Environment::loading_table() const { return find_table(spec_, spec_.loading_table); }

Environment Environment::with_chair(const Chair& chair) const {
  SceneSpec s = spec_;
  s.chairs.push_back(chair);
  return build_environment(s);
}

Environment Environment::without_chair(std::size_t index) const {
  SceneSpec s = spec_;
  if (index >= s.chairs.size()) throw SceneError("chair index out of range");
  s.chairs.erase(s.chairs.begin() + static_cast<std::ptrdiff_t>(index));
  return build_environment(s);
}

SceneSpec benchmark_scene() {
  SceneSpec s;
  s.tables.push_back({"banquet", {3.6, 3.5, 8.4, 4.5}});
  s.tables.push_back({"loading", {2.4, 0.4, 3.6, 1.0}});
  s.objects = {{"obj0", {2.7, 0.7}}, {"obj1", {3.0, 0.7}}, {"obj2", {3.3, 0.7}}};
  s.start = Pose(3.0, 1.3, std::numbers::pi / 2);
  return s;
}

Environment build_environment(const SceneSpec& spec) {
  if (!(spec.room_width > 0.0) || !(spec.room_height > 0.0) || !(spec.resolution > 0.0)) {
    throw SceneError("room dimensions and resolution must be positive");
  }
  const Rect room{0.0, 0.0, spec.room_width, spec.room_height};
  for (std::size_t i = 0; i < spec.tables.size(); ++i) {
    const Table& t = spec.tables[i];
    if (!(t.rect.width() > 0.0) || !(t.rect.height() > 0.0)) {
      throw SceneError("table '" + t.name + "' has an empty footprint");
    }
    if (!room.contains(t.rect)) {
      throw SceneError("table '" + t.name + "' " + describe(t.rect) + " is out of bounds");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (t.rect.overlaps(spec.tables[j].rect)) {
        throw SceneError("table '" + spec.tables[j].name + "' overlaps table '" + t.name + "'");
      }
    }
  }
  for (std::size_t i = 0; i < spec.chairs.size(); ++i) {
    const Rect fp = spec.chairs[i].footprint();
    const std::string label = "chair " + std::to_string(i) + " " + describe(fp);
    if (!room.contains(fp)) throw SceneError(label + " is out of bounds");
    for (const Table& t : spec.tables) {
      if (fp.overlaps(t.rect)) throw SceneError(label + " overlaps table '" + t.name + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (fp.overlaps(spec.chairs[j].footprint())) {
        throw SceneError(label + " overlaps chair " + std::to_string(j));
      }
    }
  }
  for (const PlacedObject& o : spec.objects) {
    const bool on_table = std::any_of(spec.tables.begin(), spec.tables.end(),
                                      [&](const Table& t) { return t.rect.contains(o.position); });
    if (!on_table) throw SceneError("object '" + o.id + "' is not on a table");
  }
  find_table(spec, spec.unload_table);
  find_table(spec, spec.loading_table);

  GridGeometry g;
  g.resolution = spec.resolution;
  g.width = static_cast<int>(std::lround(spec.room_width / spec.resolution));
  g.height = static_cast<int>(std::lround(spec.room_height / spec.resolution));

  Environment env;
  env.spec_ = spec;
  env.map_ = GridMap(g);
  for (const Table& t : spec.tables) env.map_.fill(t.rect, Occupancy::Table);
  env.static_map_ = env.map_;
  for (const Chair& c : spec.chairs) env.map_.fill(c.footprint(), Occupancy::Chair);

  if (env.map_.blocked(spec.start.position())) throw SceneError("robot start pose is not free");
  return env;
}

Environment random_environment(std::uint64_t seed, ChairRange range, const SceneSpec& base) {
  if (range.min < 0 || range.max < range.min || range.max > 40) {
    throw SceneError("chair count range must satisfy 0 <= min <= max <= 40");
  }
  Rng rng(derive_seed(seed, {0xC4A1}));
  std::uniform_int_distribution<int> count_dist(range.min, range.max);
  const int n = count_dist(rng);

  SceneSpec spec = base;
  const Rect table = find_table(base, base.unload_table).rect;
  const double res = base.resolution;
  // Chair centers on odd multiples of res/2 so 0.5 m footprints align with cell edges.
  const int col_lo = static_cast<int>(std::ceil((table.x0 - 0.8) / res));
  const int col_hi = static_cast<int>(std::floor((table.x1 + 0.8) / res)) - 1;
  const int row_lo = static_cast<int>(std::ceil((table.y0 - 0.9) / res));
  const int row_hi = static_cast<int>(std::floor((table.y1 + 0.9) / res)) - 1;
  std::uniform_int_distribution<int> col_dist(col_lo, col_hi);
  std::uniform_int_distribution<int> row_dist(row_lo, row_hi);

  constexpr int kMaxAttempts = 1000;
  int attempts = 0;
  const Rect room{0.0, 0.0, base.room_width, base.room_height};
  while (static_cast<int>(spec.chairs.size()) < static_cast<int>(base.chairs.size()) + n) {
    if (attempts >= kMaxAttempts) {
      throw PlacementError("could not place " + std::to_string(n) + " chairs after " +
                               std::to_string(attempts) + " attempts",
                           attempts);
    }
    ++attempts;
    Chair c;
    c.center = {(col_dist(rng) + 0.5) * res, (row_dist(rng) + 0.5) * res};
    const Rect fp = c.footprint();
    if (!room.contains(fp)) continue;
    if (std::any_of(spec.tables.begin(), spec.tables.end(),
                    [&](const Table& t) { return fp.overlaps(t.rect); })) {
      continue;
    }
    if (std::any_of(spec.chairs.begin(), spec.chairs.end(),
                    [&](const Chair& o) { return fp.overlaps(o.footprint()); })) {
      continue;
    }
    if (fp.contains(base.start.position())) continue;
    spec.chairs.push_back(c);
  }
  return build_environment(spec);
}

GridMap render_topdown(const Environment& env, const Vec2& center, int width, int height) {
  const CellIndex c = env.map().to_cell(center);
  return env.map().crop({c.col - width / 2, c.row - height / 2}, width, height);
}

bool SymbolicLocation::contains(const CellIndex& c) const {
  return std::binary_search(region.begin(), region.end(), c);
}

namespace {

double distance_to_rect(const Vec2& p, const Rect& r) {
  const double dx = std::max({r.x0 - p.x(), 0.0, p.x() - r.x1});
  const double dy = std::max({r.y0 - p.y(), 0.0, p.y() - r.y1});
  return std::hypot(dx, dy);
}

}  // namespace

std::vector<SymbolicLocation> symbolic_locations(const Environment& env) {
  const GridMap& map = env.map();
  const Rect t = env.unload_table().rect;
  const Rect lt = env.loading_table().rect;

  const GridGeometry& g = map.geometry();
  SymbolicLocation loading{"loading", {}, g, false, true, env.start()};
  SymbolicLocation north{"north", {}, g, true, false, {}};
  SymbolicLocation south{"south", {}, g, true, false, {}};
  SymbolicLocation east{"east", {}, g, true, false, {}};
  SymbolicLocation west{"west", {}, g, true, false, {}};

  // Corner cells belong to the long sides.
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      const CellIndex c{col, row};
      if (map.blocked(c)) continue;
      const Vec2 p = map.to_world(c);
      if (distance_to_rect(p, lt) <= kLoadingBand) loading.region.push_back(c);
      const bool in_long_span = p.x() >= t.x0 - kSideBand && p.x() <= t.x1 + kSideBand;
      const bool in_short_span = p.y() >= t.y0 && p.y() <= t.y1;
      if (in_long_span && p.y() > t.y1 && p.y() - t.y1 <= kSideBand) north.region.push_back(c);
      if (in_long_span && p.y() < t.y0 && t.y0 - p.y() <= kSideBand) south.region.push_back(c);
      if (in_short_span && p.x() > t.x1 && p.x() - t.x1 <= kSideBand) east.region.push_back(c);
      if (in_short_span && p.x() < t.x0 && t.x0 - p.x() <= kSideBand) west.region.push_back(c);
    }
  }
  std::vector<SymbolicLocation> out{loading, north, south, east, west};
  for (SymbolicLocation& l : out) std::sort(l.region.begin(), l.region.end());
  return out;
}

void validate_task(const Environment& env, const TaskSpec& task) {
  const Rect t = env.unload_table().rect;
  for (const ObjectMove& m : task.moves) {
    const bool known = std::any_of(env.objects().begin(), env.objects().end(),
                                   [&](const PlacedObject& o) { return o.id == m.object_id; });
    if (!known) throw SceneError("unknown object '" + m.object_id + "'");
    if (!t.contains(m.target)) {
      throw SceneError("target of '" + m.object_id + "' is not on the unloading table");
    }
  }
}

TaskSpec random_task(const Environment& env, std::uint64_t seed, int n_targets) {
  if (n_targets < 1 || n_targets > static_cast<int>(env.objects().size())) {
    throw SceneError("target count must be between 1 and the number of objects");
  }
  Rng rng(derive_seed(seed, {0x7A5C}));
  const Rect t = env.unload_table().rect;
  std::uniform_real_distribution<double> along(t.x0 + 0.3, t.x1 - 0.3);
  std::uniform_real_distribution<double> depth(0.15, 0.5);
  std::bernoulli_distribution north_edge(0.5);

  TaskSpec task;
  task.start = env.start();
  constexpr double kMinSeparation = 0.5;
  int attempts = 0;
  while (static_cast<int>(task.moves.size()) < n_targets) {
    if (++attempts > 1000) throw PlacementError("could not place unload targets", attempts);
    const double x = along(rng);
    const double d = depth(rng);
    const double y = north_edge(rng) ? t.y1 - d : t.y0 + d;
    const Vec2 p(x, y);
    const bool crowded = std::any_of(task.moves.begin(), task.moves.end(), [&](const ObjectMove& m) {
      return std::abs(m.target.x() - x) < kMinSeparation;
    });
    if (crowded) continue;
    const std::size_t k = task.moves.size();
    task.moves.push_back({env.objects()[k].id, "loading", p});
  }
  return task;
}

double task_difficulty(const Environment& env, const TaskSpec& task, const HeatmapFn& heatmap_of,
                       double threshold) {
  double total = 0.0;
  for (const ObjectMove& m : task.moves) {
    const Heatmap h = heatmap_of(env, m.target);
    for (const CellIndex& c : h.frame.lattice()) {
      if (h.at(c) >= threshold) total += 1.0;
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Text formats

namespace {

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

double to_double(const std::string& s, int line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw SceneError("line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

struct KeyLine {
  int number;
  std::string key;
  std::vector<std::string> values;
};

std::vector<KeyLine> key_lines(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<KeyLine> out;
  int n = 0;
  bool saw_format = false;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto colon = line.find(':');
    if (tokens(line).empty()) continue;
    if (colon == std::string::npos) {
      throw SceneError("line " + std::to_string(n) + ": expected 'key: values'");
    }
    KeyLine kl{n, tokens(line.substr(0, colon)).empty() ? "" : tokens(line.substr(0, colon))[0],
               tokens(line.substr(colon + 1))};
    if (!saw_format) {
      if (kl.key != "format" || kl.values.size() != 1 || kl.values[0] != "1") {
        throw SceneError("missing or unsupported 'format: 1' header");
      }
      saw_format = true;
      continue;
    }
    out.push_back(std::move(kl));
  }
  if (!saw_format) throw SceneError("missing or unsupported 'format: 1' header");
  return out;
}

void expect_arity(const KeyLine& kl, std::size_t lo, std::size_t hi) {
  if (kl.values.size() < lo || kl.values.size() > hi) {
    throw SceneError("line " + std::to_string(kl.number) + ": wrong number of values for '" +
                     kl.key + "'");
  }
}

Pose parse_pose(const KeyLine& kl) {
  expect_arity(kl, 3, 3);
  return Pose(to_double(kl.values[0], kl.number), to_double(kl.values[1], kl.number),
              to_double(kl.values[2], kl.number));
}

}  // namespace

std::string write_scene(const SceneSpec& s) {
  std::ostringstream out;
  out << "format: 1\n";
  out << "room: " << format_number(s.room_width) << " " << format_number(s.room_height) << "\n";
  out << "resolution: " << format_number(s.resolution) << "\n";
  out << "start: " << format_number(s.start.x) << " " << format_number(s.start.y) << " "
      << format_number(s.start.theta) << "\n";
  out << "unload_table: " << s.unload_table << "\n";
  out << "loading_table: " << s.loading_table << "\n";
  for (const Table& t : s.tables) {
    out << "table: " << t.name << " " << format_number(t.rect.x0) << " " << format_number(t.rect.y0)
        << " " << format_number(t.rect.x1) << " " << format_number(t.rect.y1) << "\n";
  }
  for (const Chair& c : s.chairs) {
    out << "chair: " << format_number(c.center.x()) << " " << format_number(c.center.y()) << " "
        << format_number(c.width) << " " << format_number(c.depth) << "\n";
  }
  for (const PlacedObject& o : s.objects) {
    out << "object: " << o.id << " " << format_number(o.position.x()) << " "
        << format_number(o.position.y()) << "\n";
  }
  return out.str();
}

SceneSpec parse_scene(const std::string& text) {
  SceneSpec s;
  s.tables.clear();
  s.objects.clear();
  for (const KeyLine& kl : key_lines(text)) {
    if (kl.key == "room") {
      expect_arity(kl, 2, 2);
      s.room_width = to_double(kl.values[0], kl.number);
      s.room_height = to_double(kl.values[1], kl.number);
    } else if (kl.key == "resolution") {
      expect_arity(kl, 1, 1);
      s.resolution = to_double(kl.values[0], kl.number);
    } else if (kl.key == "start") {
      s.start = parse_pose(kl);
    } else if (kl.key == "unload_table") {
      expect_arity(kl, 1, 1);
      s.unload_table = kl.values[0];
    } else if (kl.key == "loading_table") {
      expect_arity(kl, 1, 1);
      s.loading_table = kl.values[0];
    } else if (kl.key == "table") {
      expect_arity(kl, 5, 5);
      s.tables.push_back({kl.values[0],
                          {to_double(kl.values[1], kl.number), to_double(kl.values[2], kl.number),
                           to_double(kl.values[3], kl.number), to_double(kl.values[4], kl.number)}});
    } else if (kl.key == "chair") {
      expect_arity(kl, 2, 4);
      Chair c;
      c.center = {to_double(kl.values[0], kl.number), to_double(kl.values[1], kl.number)};
      if (kl.values.size() == 4) {
        c.width = to_double(kl.values[2], kl.number);
        c.depth = to_double(kl.values[3], kl.number);
      } else if (kl.values.size() == 3) {
        throw SceneError("line " + std::to_string(kl.number) + ": chair needs width and depth");
      }
      s.chairs.push_back(c);
    } else if (kl.key == "object") {
      expect_arity(kl, 3, 3);
      s.objects.push_back(
          {kl.values[0], {to_double(kl.values[1], kl.number), to_double(kl.values[2], kl.number)}});
    } else {
      throw SceneError("line " + std::to_string(kl.number) + ": unknown key '" + kl.key + "'");
    }
  }
  return s;
}

std::string write_task(const TaskSpec& task) {
  std::ostringstream out;
  out << "format: 1\n";
  out << "start: " << format_number(task.start.x) << " " << format_number(task.start.y) << " "
      << format_number(task.start.theta) << "\n";
  for (const ObjectMove& m : task.moves) {
    out << "move: " << m.object_id << " " << m.source << " " << format_number(m.target.x()) << " "
        << format_number(m.target.y()) << "\n";
  }
  return out.str();
}

TaskSpec parse_task(const std::string& text) {
  TaskSpec t;
  for (const KeyLine& kl : key_lines(text)) {
    if (kl.key == "start") {
      t.start = parse_pose(kl);
    } else if (kl.key == "move") {
      expect_arity(kl, 4, 4);
      t.moves.push_back({kl.values[0], kl.values[1],
                         {to_double(kl.values[2], kl.number), to_double(kl.values[3], kl.number)}});
    } else {
      throw SceneError("line " + std::to_string(kl.number) + ": unknown key '" + kl.key + "'");
    }
  }
  return t;
}

}  // namespace grop
