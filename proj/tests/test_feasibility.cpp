#include <filesystem>
#include <fstream>
#include <map>

#include "doctest.h"

#include "grop/feasibility.hpp"

using namespace grop;
namespace fs = std::filesystem;

namespace {

// Heatmap on a bare frame plus a location covering every frame cell.
struct Canvas {
  Heatmap heatmap;
  SymbolicLocation everywhere;
};

Canvas canvas() {
  Canvas c;
  const FrameSpec frame;
  GridGeometry g{Vec2::Zero(), 0.1, frame.width, frame.height};
  c.heatmap = Heatmap::zeros(g, frame, Vec2(3.2, 1.6));
  c.everywhere.grid = g;
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) c.everywhere.region.push_back({col, row});
  }
  std::sort(c.everywhere.region.begin(), c.everywhere.region.end());
  return c;
}

// Benchmark scene with a pocket north of the table closed off by chairs.
Environment pocket_scene() {
  SceneSpec s = benchmark_scene();
  for (double y : {4.75, 5.25}) {
    s.chairs.push_back({{4.75, y}});
    s.chairs.push_back({{6.25, y}});
  }
  for (double x : {4.75, 5.25, 5.75, 6.25}) s.chairs.push_back({{x, 5.75}});
  return build_environment(s);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("grop_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("trial failure reasons") {
  const Environment env = build_environment(benchmark_scene());
  const GridMap& map = env.map();
  const Vec2 target(6.0, 3.7);
  CHECK(run_trial(env, map.to_cell(Vec2(6.0, 4.0)), target, 1).reason == TrialFailure::OccupiedGoal);
  CHECK(run_trial(env, map.to_cell(Vec2(6.0, 1.5)), target, 1).reason == TrialFailure::NominalManipulation);
  CHECK_THROWS_AS(run_trial(env, {500, 0}, target, 1), std::out_of_range);

  TrialParams exact;
  exact.noise = NoiseModel::none();
  const TrialOutcome ok = run_trial(env, map.to_cell(Vec2(6.0, 3.1)), target, 1, exact);
  CHECK(ok.success);
  CHECK(ok.reason == TrialFailure::None);
  CHECK(std::string(to_string(TrialFailure::BumpedChair)) != std::string(to_string(TrialFailure::Placement)));
}

TEST_CASE("stand cells sealed off by chairs are unreachable and get zero feasibility") {
  const Environment env = pocket_scene();
  const Vec2 target(5.5, 4.3);
  const auto h = collect_heatmap(env, target, 3, 9);
  int inside = 0;
  for (const CellIndex& fc : h.heatmap.frame.lattice()) {
    const CellIndex x = frame_to_map(env.map(), h.heatmap.frame, target, fc);
    const Vec2 p = env.map().to_world(x);
    if (p.x() > 5.0 && p.x() < 6.0 && p.y() > 4.5 && p.y() < 5.5) {
      ++inside;
      CHECK(h.heatmap.at(fc) == 0.0);
      CHECK(run_trial(env, x, target, 9).reason == TrialFailure::UnreachableGoal);
    }
  }
  CHECK(inside > 0);
}

TEST_CASE("collected heatmaps equal per-cell trial success rates") {
  for (std::uint64_t s : {2u, 3u}) {
    const Environment env = random_environment(s);
    const Vec2 target = random_task(env, s, 1).moves[0].target;
    const int trials = 3;
    const HeatmapCollection hc = collect_heatmap(env, target, trials, 100 + s);
    REQUIRE(hc.outcomes.size() == 192u * trials);
    std::size_t i = 0;
    for (const CellIndex& fc : hc.heatmap.frame.lattice()) {
      const CellIndex x = frame_to_map(env.map(), hc.heatmap.frame, target, fc);
      int wins = 0;
      for (int k = 0; k < trials; ++k, ++i) {
        const bool ok = run_trial(env, x, target, trial_seed(100 + s, x, k)).success;
        CHECK(hc.outcomes[i].success == ok);
        CHECK(hc.outcomes[i].frame_cell == fc);
        wins += ok;
      }
      CHECK(hc.heatmap.at(fc) == doctest::Approx(static_cast<double>(wins) / trials));
    }
    CHECK(hc.heatmap.values.maxCoeff() > 0.0);
  }
}

TEST_CASE("heatmap is zero on occupied cells, beyond reach and off the lattice") {
  const TrialParams params;
  for (std::uint64_t s = 20; s < 30; ++s) {
    const Environment env = random_environment(s);
    const Vec2 target = random_task(env, s, 1).moves[0].target;
    const Heatmap h = collect_heatmap(env, target, 5, s).heatmap;
    for (int row = 0; row < h.values.rows(); ++row) {
      for (int col = 0; col < h.values.cols(); ++col) {
        const CellIndex fc{col, row};
        const double v = h.at(fc);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        if (!h.frame.in_region(fc)) {
          CHECK(v == 0.0);
          continue;
        }
        const CellIndex x = frame_to_map(env.map(), h.frame, target, fc);
        if (env.map().blocked(x)) CHECK(v == 0.0);
        if ((env.map().to_world(x) - target).norm() > params.arm.reach) CHECK(v == 0.0);
      }
    }
  }
}

TEST_CASE("adding a chair never raises any cell") {
  int pairs = 0;
  for (std::uint64_t s = 40; pairs < 20; ++s) {
    const Environment more = random_environment(s);
    const Vec2 target = random_task(more, s, 1).moves[0].target;
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < more.chairs().size(); ++i) {
      if ((more.chairs()[i].center - target).norm() < (more.chairs()[nearest].center - target).norm()) nearest = i;
    }
    const Environment fewer = more.without_chair(nearest);
    const Heatmap a = collect_heatmap(more, target, 5, s).heatmap;
    const Heatmap b = collect_heatmap(fewer, target, 5, s).heatmap;
    CHECK((a.values <= b.values).all());
    ++pairs;
  }
}

TEST_CASE("dataset bookkeeping") {
  DatasetOptions opt;
  opt.environments = 1;
  opt.tasks_per_environment = 1;
  opt.trials_per_cell = 1;
  const Dataset one = build_dataset(opt, 5);
  CHECK(one.records.size() == 192);
  CHECK(one.labels.size() == 1);
  CHECK(one.environments.size() == 1);

  opt.environments = 2;
  opt.tasks_per_environment = 3;
  opt.trials_per_cell = 2;
  const Dataset d = build_dataset(opt, 5);
  CHECK(d.records.size() == 2u * 3u * 2u * 192u);
  CHECK(d.labels.size() == 6);
  std::map<int, int> per_task;
  for (const TrialRecord& r : d.records) per_task[r.task]++;
  CHECK(per_task.size() == 6);
  for (const auto& [t, n] : per_task) CHECK(n == 384);
  for (const LabeledImage& l : d.labels) {
    CHECK(l.image.width() == 64);
    CHECK(l.image.height() == 32);
  }

  opt.threads = 3;
  const Dataset threaded = build_dataset(opt, 5);
  REQUIRE(threaded.records.size() == d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    CHECK(threaded.records[i].outcome == d.records[i].outcome);
  }
  CHECK_THROWS_AS(build_dataset({0, 1, 1}, 1), std::invalid_argument);
}

TEST_CASE("datasets survive a save and load") {
  DatasetOptions opt;
  opt.environments = 2;
  opt.tasks_per_environment = 2;
  opt.trials_per_cell = 2;
  const Dataset d = build_dataset(opt, 8);
  const fs::path dir = scratch("dataset");
  save_dataset(d, dir);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "heatmaps"));
  const Dataset e = load_dataset(dir);
  REQUIRE(e.labels.size() == d.labels.size());
  CHECK(e.environments == d.environments);
  CHECK(e.seed == d.seed);
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    CHECK(e.labels[i].image == d.labels[i].image);
    CHECK((e.labels[i].heatmap.values - d.labels[i].heatmap.values).abs().maxCoeff() < 1e-12);
    CHECK(e.tasks[i].target == d.tasks[i].target);
  }

  std::ifstream in(dir / "records.csv");
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  in.close();
  std::ofstream out(dir / "records.csv");
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) out << lines[i] << "\n";
  out.close();
  CHECK_THROWS_AS(load_dataset(dir), DataError);
  CHECK_THROWS_AS(load_dataset(dir / "missing"), DataError);
  fs::remove_all(dir);
}

TEST_CASE("motion-level feasibility is a lookup") {
  Canvas c = canvas();
  c.heatmap.at({9, 9}) = 0.4;
  CHECK(fea_m(c.heatmap, {9, 9}) == 0.4);
  CHECK_THROWS_AS(fea_m(c.heatmap, {64, 0}), std::out_of_range);
}

TEST_CASE("task-level feasibility of a uniform heatmap is exact") {
  Canvas c = canvas();
  for (double v : {0.377, 0.721, 1.0, 0.1}) {
    for (const CellIndex& x : c.heatmap.frame.lattice()) c.heatmap.at(x) = v;
    for (int n : {1, 2, 5, 33, 1000}) CHECK(fea_t(c.everywhere, c.heatmap, n, 17) == v);
  }
  c.heatmap.values.setZero();
  CHECK(fea_t(c.everywhere, c.heatmap, 5, 1) == 0.0);
  CHECK_THROWS_AS(smp(c.everywhere, c.heatmap, 0, 1), ZeroMassError);
  CHECK_THROWS_AS(fea_t(c.everywhere, c.heatmap, 0, 1), std::invalid_argument);
}

TEST_CASE("task-level feasibility converges to the weighted expectation") {
  Canvas c = canvas();
  Rng rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double s1 = 0.0, s2 = 0.0;
  for (const CellIndex& x : c.heatmap.frame.lattice()) {
    const double v = u(rng) < 0.3 ? 0.0 : u(rng);
    c.heatmap.at(x) = v;
    s1 += v;
    s2 += v * v;
  }
  CHECK(std::abs(fea_t(c.everywhere, c.heatmap, 10000, 99) - s2 / s1) < 0.02);
}

TEST_CASE("stand sampling follows heatmap weights") {
  Canvas c = canvas();
  const auto lattice = c.heatmap.frame.lattice();
  const CellIndex a = lattice[10], b = lattice[50];
  c.heatmap.at(a) = 0.2;
  c.heatmap.at(b) = 0.8;
  const int n = 20000;
  int hits_b = 0;
  for (int i = 0; i < n; ++i) {
    const Pose p = smp(c.everywhere, c.heatmap, static_cast<std::uint64_t>(i), 5);
    const CellIndex cell = c.heatmap.geometry.to_cell(p.position());
    REQUIRE((cell == a || cell == b));
    hits_b += cell == b;
    CHECK(p.theta == doctest::Approx(bearing(p.position(), c.heatmap.target)));
  }
  CHECK(static_cast<double>(hits_b) / (n - hits_b) == doctest::Approx(4.0).epsilon(0.05));

  // Chi-square goodness of fit over a random heatmap restricted to one half of the frame.
  Canvas r = canvas();
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SymbolicLocation half = r.everywhere;
  half.region.clear();
  for (const CellIndex& x : r.everywhere.region) {
    if (x.col < 32) half.region.push_back(x);
  }
  for (const CellIndex& x : lattice) r.heatmap.at(x) = u(rng);
  const StandSampler sampler(half, r.heatmap);
  REQUIRE(sampler.cells().size() == 96);
  double total = 0.0;
  for (double w : sampler.weights()) total += w;
  std::map<CellIndex, int> counts;
  const int draws = 50000;
  for (int i = 0; i < draws; ++i) {
    CellIndex cell;
    sampler.draw(static_cast<std::uint64_t>(i), 11, &cell);
    CHECK(cell.col < 32);
    counts[cell]++;
  }
  double chi2 = 0.0;
  for (std::size_t k = 0; k < sampler.cells().size(); ++k) {
    const double expected = draws * sampler.weights()[k] / total;
    const double d = counts[sampler.cells()[k]] - expected;
    chi2 += d * d / expected;
  }
  // 95 degrees of freedom; the 0.999 quantile is about 143.
  CHECK(chi2 < 143.0);
}

TEST_CASE("heatmap export formats") {
  Canvas c = canvas();
  c.heatmap.at(c.heatmap.frame.lattice()[0]) = 0.5;
  const std::string csv = heatmap_csv(c.heatmap);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 193);
  CHECK(csv.rfind("col,row,x,y,feasibility\n", 0) == 0);
  CHECK(heatmap_pgm(c.heatmap).rfind("P5\n", 0) == 0);
  GridMap img(c.heatmap.geometry);
  CHECK(overlay_pgm(img, c.heatmap).size() > 64u * 32u);
  GridMap small(GridGeometry{Vec2::Zero(), 0.1, 3, 3});
  CHECK_THROWS_AS(overlay_pgm(small, c.heatmap), std::invalid_argument);
}

TEST_CASE("oracle heatmaps are deterministic per target") {
  const Environment env = random_environment(6);
  const Vec2 target = random_task(env, 6, 1).moves[0].target;
  const HeatmapFn f = oracle_heatmaps(3, 4);
  const Heatmap a = f(env, target), b = f(env, target);
  CHECK((a.values == b.values).all());
}
