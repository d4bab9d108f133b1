#include "grop/feasibility.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "grop/rng.hpp"

namespace grop {

const char* to_string(TrialFailure f) {
  switch (f) {
    case TrialFailure::None: return "none";
    case TrialFailure::OccupiedGoal: return "occupied-goal";
    case TrialFailure::UnreachableGoal: return "unreachable-goal";
    case TrialFailure::NominalManipulation: return "nominal-manipulation";
    case TrialFailure::NavigationCollision: return "navigation-collision";
    case TrialFailure::BumpedChair: return "bumped-chair";
    case TrialFailure::Manipulation: return "manipulation";
    case TrialFailure::Placement: return "placement";
  }
  return "?";
}

Pose stand_pose(const GridMap& map, const CellIndex& x, const Vec2& target) {
  const Vec2 p = map.to_world(x);
  return Pose(p.x(), p.y(), bearing(p, target));
}

std::uint64_t trial_seed(std::uint64_t seed, const CellIndex& x, int k) {
  return derive_seed(seed, {static_cast<std::uint64_t>(x.col), static_cast<std::uint64_t>(x.row),
                            static_cast<std::uint64_t>(k)});
}

namespace {

// Everything after the reachability test.
TrialOutcome finish_trial(const Environment& env, const Pose& stand, const Vec2& target,
                          std::uint64_t seed, const TrialParams& params) {
  const GridMap& map = env.map();
  Rng rng(seed);
  const Trajectory nav{TrajectoryKind::Navigation, {env.start(), stand}, std::nullopt, false};
  const ExecResult exec = execute_navigation(env.static_map(), nav, params.noise, rng);
  if (!exec.ok()) return {false, TrialFailure::NavigationCollision};
  if (map.is_chair(map.to_cell(exec.achieved.position()))) return {false, TrialFailure::BumpedChair};
  if (!plan_manipulation(map, exec.achieved, target, params.arm).ok()) {
    return {false, TrialFailure::Manipulation};
  }
  if (placement_error(stand, exec.achieved, target) > params.tolerance) {
    return {false, TrialFailure::Placement};
  }
  return {true, TrialFailure::None};
}

// Checks that do not depend on the trial's random stream.
TrialFailure static_checks(const Environment& env, const CellIndex& x, const Pose& stand,
                           const Vec2& target, const TrialParams& params) {
  const GridMap& map = env.map();
  if (map.blocked(x)) return TrialFailure::OccupiedGoal;
  if (!plan_manipulation(map, stand, target, params.arm).ok()) return TrialFailure::NominalManipulation;
  return TrialFailure::None;
}

}  // namespace

TrialOutcome run_trial(const Environment& env, const CellIndex& x, const Vec2& target,
                       std::uint64_t seed, const TrialParams& params) {
  const GridMap& map = env.map();
  if (!map.in_bounds(x)) throw std::out_of_range("stand cell outside the map");
  const Pose stand = stand_pose(map, x, target);
  if (TrialFailure f = static_checks(env, x, stand, target, params); f != TrialFailure::None) {
    return {false, f};
  }
  if (!plan_navigation(map, env.start(), stand).ok()) return {false, TrialFailure::UnreachableGoal};
  return finish_trial(env, stand, target, seed, params);
}

GridGeometry frame_geometry(const GridMap& map, const FrameSpec& frame, const Vec2& target) {
  const CellIndex c = map.to_cell(target);
  GridGeometry g;
  g.resolution = map.resolution();
  g.width = frame.width;
  g.height = frame.height;
  const CellIndex ll{c.col - frame.width / 2, c.row - frame.height / 2};
  g.origin = map.geometry().origin + Vec2(ll.col * g.resolution, ll.row * g.resolution);
  return g;
}

CellIndex frame_to_map(const GridMap& map, const FrameSpec& frame, const Vec2& target,
                       const CellIndex& frame_cell) {
  const CellIndex c = map.to_cell(target);
  return {c.col - frame.width / 2 + frame_cell.col, c.row - frame.height / 2 + frame_cell.row};
}

HeatmapCollection collect_heatmap(const Environment& env, const Vec2& target, int trials,
                                  std::uint64_t seed, const TrialParams& params) {
  if (trials < 1) throw std::invalid_argument("trials per cell must be at least 1");
  const GridMap& map = env.map();
  const FrameSpec& frame = params.frame;
  HeatmapCollection out;
  out.heatmap = Heatmap::zeros(frame_geometry(map, frame, target), frame, target);
  const auto reachable = reachable_from(map, map.to_cell(env.start().position()));

  out.outcomes.reserve(static_cast<std::size_t>(frame.region_size()) * static_cast<std::size_t>(trials));
  for (const CellIndex& fc : frame.lattice()) {
    const CellIndex x = frame_to_map(map, frame, target, fc);
    bool possible = map.in_bounds(x);
    Pose stand;
    if (possible) {
      stand = stand_pose(map, x, target);
      possible = static_checks(env, x, stand, target, params) == TrialFailure::None &&
                 reachable(x.row, x.col);
    }
    int successes = 0;
    for (int k = 0; k < trials; ++k) {
      const bool ok = possible && finish_trial(env, stand, target, trial_seed(seed, x, k), params).success;
      successes += ok ? 1 : 0;
      out.outcomes.push_back({fc, k, ok});
    }
    out.heatmap.at(fc) = static_cast<double>(successes) / trials;
  }
  return out;
}

Dataset build_dataset(const DatasetOptions& options, std::uint64_t master_seed) {
  if (options.environments < 1 || options.tasks_per_environment < 1 || options.trials_per_cell < 1) {
    throw std::invalid_argument("dataset sizes must be positive");
  }
  Dataset d;
  d.trials_per_cell = options.trials_per_cell;
  d.seed = master_seed;
  d.frame = options.trial.frame;

  std::vector<Environment> envs;
  for (int e = 0; e < options.environments; ++e) {
    envs.push_back(random_environment(derive_seed(master_seed, {1, static_cast<std::uint64_t>(e)}),
                                      options.chairs));
    d.environments.push_back(envs.back().spec());
    for (int t = 0; t < options.tasks_per_environment; ++t) {
      const auto key = derive_seed(master_seed, {2, static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(t)});
      d.tasks.push_back({e, random_task(envs.back(), key, 1).moves.front().target});
    }
  }

  const std::size_t n_tasks = d.tasks.size();
  std::vector<HeatmapCollection> collected(n_tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_tasks; i = next++) {
      const DatasetTask& t = d.tasks[i];
      collected[i] = collect_heatmap(envs[static_cast<std::size_t>(t.environment)], t.target,
                                     options.trials_per_cell, derive_seed(master_seed, {3, i}),
                                     options.trial);
    }
  };
  const int n_threads = std::max(1, options.threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < n_tasks; ++i) {
    const DatasetTask& t = d.tasks[i];
    for (const CellOutcome& o : collected[i].outcomes) {
      d.records.push_back({static_cast<int>(i), o.frame_cell, o.trial, o.success});
    }
    d.labels.push_back({render_topdown(envs[static_cast<std::size_t>(t.environment)], t.target,
                                       d.frame.width, d.frame.height),
                        std::move(collected[i].heatmap)});
  }
  return d;
}

namespace {

std::string padded(int i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

void save_dataset(const Dataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "envs");
  std::filesystem::create_directories(dir / "heatmaps");

  nlohmann::ordered_json m;
  m["format"] = 1;
  m["seed"] = d.seed;
  m["trials_per_cell"] = d.trials_per_cell;
  m["frame"] = {{"width", d.frame.width},
                {"height", d.frame.height},
                {"region_cols", d.frame.region_cols},
                {"region_rows", d.frame.region_rows},
                {"stride", d.frame.stride}};
  m["environments"] = nlohmann::ordered_json::array();
  for (std::size_t e = 0; e < d.environments.size(); ++e) {
    const std::string name = "envs/env_" + padded(static_cast<int>(e)) + ".scene";
    write_file(dir / name, write_scene(d.environments[e]));
    m["environments"].push_back(name);
  }
  m["tasks"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < d.tasks.size(); ++i) {
    m["tasks"].push_back({{"environment", d.tasks[i].environment},
                          {"target", {d.tasks[i].target.x(), d.tasks[i].target.y()}}});
  }
  m["records"] = d.records.size();
  write_file(dir / "manifest.json", m.dump(2) + "\n");

  std::string csv = "task,cell_x,cell_y,trial,outcome\n";
  for (const TrialRecord& r : d.records) {
    csv += std::to_string(r.task) + "," + std::to_string(r.frame_cell.col) + "," +
           std::to_string(r.frame_cell.row) + "," + std::to_string(r.trial) + "," +
           (r.outcome ? "1" : "0") + "\n";
  }
  write_file(dir / "records.csv", csv);
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    write_file(dir / ("heatmaps/task_" + padded(static_cast<int>(i)) + ".pgm"),
               heatmap_pgm(d.labels[i].heatmap));
  }
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset d;
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file(dir / "manifest.json"));
    if (m.at("format").get<int>() != 1) throw DataError("unsupported dataset format");
    d.seed = m.at("seed").get<std::uint64_t>();
    d.trials_per_cell = m.at("trials_per_cell").get<int>();
    const auto& f = m.at("frame");
    d.frame = {f.at("width").get<int>(), f.at("height").get<int>(), f.at("region_cols").get<int>(),
               f.at("region_rows").get<int>(), f.at("stride").get<int>()};
    for (const auto& e : m.at("environments")) {
      d.environments.push_back(parse_scene(read_file(dir / e.get<std::string>())));
    }
    for (const auto& t : m.at("tasks")) {
      const auto& y = t.at("target");
      d.tasks.push_back({t.at("environment").get<int>(), Vec2(y.at(0).get<double>(), y.at(1).get<double>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad manifest: ") + e.what());
  } catch (const SceneError& e) {
    throw DataError(std::string("bad environment file: ") + e.what());
  }
  if (d.trials_per_cell < 1) throw DataError("trials_per_cell must be positive");

  std::istringstream csv(read_file(dir / "records.csv"));
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    TrialRecord r;
    int outcome = 0;
    char c1, c2, c3, c4;
    std::istringstream ls(line);
    if (!(ls >> r.task >> c1 >> r.frame_cell.col >> c2 >> r.frame_cell.row >> c3 >> r.trial >> c4 >> outcome)) {
      throw DataError("bad record line: " + line);
    }
    if (r.task < 0 || static_cast<std::size_t>(r.task) >= d.tasks.size() || !d.frame.in_region(r.frame_cell)) {
      throw DataError("record out of range: " + line);
    }
    r.outcome = outcome != 0;
    d.records.push_back(r);
  }
  const std::size_t expected = d.tasks.size() * static_cast<std::size_t>(d.trials_per_cell) *
                               static_cast<std::size_t>(d.frame.region_size());
  if (d.records.size() != expected) {
    throw DataError("expected " + std::to_string(expected) + " records, found " +
                    std::to_string(d.records.size()));
  }

  std::vector<Environment> envs;
  for (const SceneSpec& s : d.environments) envs.push_back(build_environment(s));
  for (const DatasetTask& t : d.tasks) {
    if (t.environment < 0 || static_cast<std::size_t>(t.environment) >= envs.size()) {
      throw DataError("task references a missing environment");
    }
    const Environment& env = envs[static_cast<std::size_t>(t.environment)];
    d.labels.push_back({render_topdown(env, t.target, d.frame.width, d.frame.height),
                        Heatmap::zeros(frame_geometry(env.map(), d.frame, t.target), d.frame, t.target)});
  }
  for (const TrialRecord& r : d.records) {
    if (r.outcome) d.labels[static_cast<std::size_t>(r.task)].heatmap.at(r.frame_cell) += 1.0;
  }
  for (LabeledImage& l : d.labels) l.heatmap.values /= d.trials_per_cell;
  return d;
}

double fea_m(const Heatmap& h, const CellIndex& frame_cell) {
  if (!h.in_frame(frame_cell)) throw std::out_of_range("cell outside the heatmap frame");
  return h.at(frame_cell);
}

StandSampler::StandSampler(const SymbolicLocation& location, const Heatmap& heatmap)
    : heatmap_(&heatmap) {
  for (const CellIndex& c : heatmap.frame.lattice()) {
    const double w = heatmap.at(c);
    if (w > 0.0 && location.contains(heatmap.geometry.to_world(c))) {
      cells_.push_back(c);
      weights_.push_back(w);
      total_ += w;
    }
  }
}

Pose StandSampler::draw(std::uint64_t i, std::uint64_t seed, CellIndex* frame_cell) const {
  if (!has_mass()) throw ZeroMassError("location has no feasible stand cell");
  Rng rng(derive_seed(seed, {i}));
  std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
  const CellIndex c = cells_[pick(rng)];
  if (frame_cell) *frame_cell = c;
  const Vec2 p = heatmap_->geometry.to_world(c);
  return Pose(p.x(), p.y(), bearing(p, heatmap_->target));
}

Pose smp(const SymbolicLocation& location, const Heatmap& h, std::uint64_t i, std::uint64_t seed) {
  return StandSampler(location, h).draw(i, seed);
}

double fea_t(const SymbolicLocation& location, const Heatmap& h, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("sample count must be at least 1");
  const StandSampler sampler(location, h);
  if (!sampler.has_mass()) return 0.0;
  // Shifted sum: exact for constant heatmaps.
  double first = 0.0;
  double shift = 0.0;
  for (int i = 0; i < samples; ++i) {
    CellIndex c;
    sampler.draw(static_cast<std::uint64_t>(i), seed, &c);
    const double v = fea_m(h, c);
    if (i == 0) first = v;
    shift += v - first;
  }
  return first + shift / samples;
}

std::string heatmap_csv(const Heatmap& h) {
  std::string out = "col,row,x,y,feasibility\n";
  for (const CellIndex& c : h.frame.lattice()) {
    const Vec2 p = h.geometry.to_world(c);
    out += std::to_string(c.col) + "," + std::to_string(c.row) + "," + format_number(p.x()) + "," +
           format_number(p.y()) + "," + format_number(h.at(c)) + "\n";
  }
  return out;
}

std::string heatmap_pgm(const Heatmap& h) {
  return to_pgm(h.values, "feasibility x 255; target " + format_number(h.target.x()) + " " +
                              format_number(h.target.y()));
}

std::string overlay_pgm(const GridMap& image, const Heatmap& h) {
  if (image.width() != h.values.cols() || image.height() != h.values.rows()) {
    throw std::invalid_argument("image and heatmap sizes differ");
  }
  Eigen::ArrayXXd levels(image.height(), image.width());
  for (int row = 0; row < image.height(); ++row) {
    for (int col = 0; col < image.width(); ++col) {
      const CellIndex c{col, row};
      switch (image.at(c)) {
        case Occupancy::Table: levels(row, col) = 0.0; break;
        case Occupancy::Chair: levels(row, col) = 40.0; break;
        case Occupancy::Free: levels(row, col) = 80.0 + 175.0 * h.at(c); break;
      }
    }
  }
  return to_pgm(levels / 255.0, "overlay: 0=table 40=chair 80..255=free cell feasibility 0..1");
}

HeatmapFn oracle_heatmaps(int trials, std::uint64_t seed, const TrialParams& params) {
  return [=](const Environment& env, const Vec2& y) {
    const std::uint64_t key = derive_seed(seed, {std::bit_cast<std::uint64_t>(y.x()),
                                                 std::bit_cast<std::uint64_t>(y.y())});
    return collect_heatmap(env, y, trials, key, params).heatmap;
  };
}

}  // namespace grop
