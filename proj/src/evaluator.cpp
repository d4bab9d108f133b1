#include "grop/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "grop/rng.hpp"

namespace grop {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> pixel_features(const GridMap& image, const CellIndex& cell,
                                                        const Vec2& target, int patch_radius) {
  const FeatureLayout layout{patch_radius};
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> f = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(layout.size());
  int k = 0;
  f(k++) = Scalar(1);
  const int n_patch = layout.patch_cells();
  for (int dr = -patch_radius; dr <= patch_radius; ++dr) {
    for (int dc = -patch_radius; dc <= patch_radius; ++dc, ++k) {
      const CellIndex c{cell.col + dc, cell.row + dr};
      if (!image.in_bounds(c)) continue;
      if (image.at(c) == Occupancy::Chair) f(k) = Scalar(1);
      if (image.at(c) == Occupancy::Table) f(k + n_patch) = Scalar(1);
    }
  }
  k += n_patch;

  const Vec2 p = image.to_world(cell);
  const Vec2 d = target - p;
  const int bin = std::min(FeatureLayout::kDistanceBins - 1, static_cast<int>(d.norm() / 0.1));
  f(k + bin) = Scalar(1);
  k += FeatureLayout::kDistanceBins;

  const double b = std::atan2(d.y(), d.x());
  f(k++) = Scalar(std::sin(b));
  f(k++) = Scalar(std::cos(b));
  f(k++) = Scalar(std::abs(d.x()) / 2.4);
  f(k++) = Scalar(std::abs(d.y()) / 0.8);

  int chairs = 0;
  for (const CellIndex& c : traverse_segment(image.geometry(), p, target)) chairs += image.is_chair(c) ? 1 : 0;
  f(k++) = Scalar(chairs > 0 ? 1 : 0);
  f(k++) = Scalar(chairs / 10.0);
  return f;
}

template Eigen::VectorXd pixel_features<double>(const GridMap&, const CellIndex&, const Vec2&, int);
template Eigen::VectorXf pixel_features<float>(const GridMap&, const CellIndex&, const Vec2&, int);

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double snap(double v) { return v < kPredictionFloor ? 0.0 : std::clamp(v, 0.0, 1.0); }

struct Rows {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

// Free lattice cells of the given tasks.
Rows gather(const Dataset& data, const std::vector<int>& tasks, int patch_radius) {
  const FeatureLayout layout{patch_radius};
  std::vector<std::pair<int, CellIndex>> cells;
  for (int t : tasks) {
    const LabeledImage& l = data.labels[static_cast<std::size_t>(t)];
    for (const CellIndex& c : l.heatmap.frame.lattice()) {
      if (!l.image.blocked(c)) cells.emplace_back(t, c);
    }
  }
  Rows r{Eigen::MatrixXd(static_cast<Eigen::Index>(cells.size()), layout.size()),
         Eigen::VectorXd(static_cast<Eigen::Index>(cells.size()))};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& [t, c] = cells[i];
    const LabeledImage& l = data.labels[static_cast<std::size_t>(t)];
    r.x.row(static_cast<Eigen::Index>(i)) = pixel_features<double>(l.image, c, l.heatmap.target, patch_radius).transpose();
    r.y(static_cast<Eigen::Index>(i)) = l.heatmap.at(c);
  }
  return r;
}

}  // namespace

Evaluator::Evaluator(FrameSpec frame, EvaluatorParams params, Eigen::VectorXd weights, std::uint64_t seed)
    : frame_(frame), params_(params), weights_(std::move(weights)), seed_(seed) {
  if (weights_.size() != FeatureLayout{params_.patch_radius}.size()) {
    throw std::invalid_argument("weight vector does not match the feature layout");
  }
}

double Evaluator::predict_cell(const GridMap& image, const CellIndex& cell, const Vec2& target) const {
  if (image.blocked(cell) || !frame_.in_region(cell)) return 0.0;
  return snap(sigmoid(weights_.dot(pixel_features<double>(image, cell, target, params_.patch_radius))));
}

Heatmap Evaluator::predict(const GridMap& image, const Vec2& target) const {
  if (image.width() != frame_.width || image.height() != frame_.height) {
    throw std::invalid_argument("image is " + std::to_string(image.width()) + "x" +
                                std::to_string(image.height()) + ", evaluator expects " +
                                std::to_string(frame_.width) + "x" + std::to_string(frame_.height));
  }
  Heatmap h = Heatmap::zeros(image.geometry(), frame_, target);
  for (const CellIndex& c : frame_.lattice()) h.at(c) = predict_cell(image, c, target);
  return h;
}

Evaluator train_evaluator(const Dataset& data, const EvaluatorParams& params, std::uint64_t seed) {
  if (data.labels.size() < 2) throw TrainingError("training needs at least two labeled images");
  if (params.epochs < 0 || !(params.learning_rate > 0.0) || params.patch_radius < 0 ||
      !(params.holdout_fraction > 0.0 && params.holdout_fraction < 1.0)) {
    throw std::invalid_argument("invalid evaluator hyperparameters");
  }
  const int n = static_cast<int>(data.labels.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, {0x5EED}));
  std::shuffle(order.begin(), order.end(), rng);
  const int n_holdout = std::clamp(static_cast<int>(std::lround(params.holdout_fraction * n)), 1, n - 1);

  TrainingReport report;
  report.holdout_tasks.assign(order.begin(), order.begin() + n_holdout);
  report.train_tasks.assign(order.begin() + n_holdout, order.end());
  std::sort(report.holdout_tasks.begin(), report.holdout_tasks.end());
  std::sort(report.train_tasks.begin(), report.train_tasks.end());

  const Rows train = gather(data, report.train_tasks, params.patch_radius);
  const Eigen::Index dim = FeatureLayout{params.patch_radius}.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  const double mean = train.y.size() > 0 ? train.y.mean() : 0.0;
  const double m0 = std::clamp(mean, 0.0025, 0.9975);
  w(0) = std::log(m0 / (1.0 - m0));

  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  const double rows = std::max<double>(1.0, static_cast<double>(train.y.size()));
  for (int epoch = 1; epoch <= params.epochs && train.y.size() > 0; ++epoch) {
    const Eigen::ArrayXd p = (train.x * w).array().unaryExpr([](double z) { return sigmoid(z); });
    const Eigen::ArrayXd err = p - train.y.array();
    const double loss = err.square().mean();
    if (!std::isfinite(loss)) throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
    report.loss_curve.push_back(loss);

    Eigen::VectorXd grad = train.x.transpose() * (2.0 * err * p * (1.0 - p)).matrix() / rows;
    grad.tail(dim - 1) += params.l2 * w.tail(dim - 1);
    m = params.beta1 * m + (1.0 - params.beta1) * grad;
    v = params.beta2 * v + (1.0 - params.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(params.beta1, epoch);
    const double c2 = 1.0 - std::pow(params.beta2, epoch);
    w -= (params.learning_rate * (m / c1).array() / ((v / c2).array().sqrt() + 1e-8)).matrix();
    if (!w.allFinite()) throw TrainingError("weights diverged at epoch " + std::to_string(epoch));
  }

  Evaluator ev(data.frame, params, w, seed);
  double sq = 0.0;
  std::size_t count = 0;
  for (int t : report.train_tasks) {
    const LabeledImage& l = data.labels[static_cast<std::size_t>(t)];
    const Heatmap h = ev.predict(l.image, l.heatmap.target);
    for (const CellIndex& c : data.frame.lattice()) {
      if (l.image.blocked(c)) continue;
      sq += std::pow(h.at(c) - l.heatmap.at(c), 2);
      ++count;
    }
  }
  report.train_mse = count ? sq / count : 0.0;
  double mae = 0.0;
  for (int t : report.holdout_tasks) {
    const LabeledImage& l = data.labels[static_cast<std::size_t>(t)];
    mae += heatmap_mae(ev.predict(l.image, l.heatmap.target), l.heatmap);
  }
  report.holdout_mae = mae / n_holdout;
  ev.report() = std::move(report);
  return ev;
}

double heatmap_mae(const Heatmap& a, const Heatmap& b) {
  if (!(a.frame == b.frame)) throw std::invalid_argument("heatmaps use different frames");
  double total = 0.0;
  const auto cells = a.frame.lattice();
  for (const CellIndex& c : cells) total += std::abs(a.at(c) - b.at(c));
  return total / static_cast<double>(cells.size());
}

HeatmapFn evaluator_heatmaps(const Evaluator& evaluator) {
  return [evaluator](const Environment& env, const Vec2& y) {
    const FrameSpec& f = evaluator.frame();
    return evaluator.predict(render_topdown(env, y, f.width, f.height), y);
  };
}

std::string Evaluator::serialize() const {
  std::ostringstream out;
  out << "grop-evaluator 1\n";
  out << "frame " << frame_.width << " " << frame_.height << " " << frame_.region_cols << " "
      << frame_.region_rows << " " << frame_.stride << "\n";
  out << "patch_radius " << params_.patch_radius << "\n";
  out << "epochs " << params_.epochs << "\n";
  out << "learning_rate " << format_number(params_.learning_rate) << "\n";
  out << "beta1 " << format_number(params_.beta1) << "\n";
  out << "beta2 " << format_number(params_.beta2) << "\n";
  out << "l2 " << format_number(params_.l2) << "\n";
  out << "holdout_fraction " << format_number(params_.holdout_fraction) << "\n";
  out << "seed " << seed_ << "\n";
  out << "train_mse " << format_number(report_.train_mse) << "\n";
  out << "holdout_mae " << format_number(report_.holdout_mae) << "\n";
  out << "loss_curve " << report_.loss_curve.size();
  for (double l : report_.loss_curve) out << " " << format_number(l);
  out << "\nweights " << weights_.size();
  for (Eigen::Index i = 0; i < weights_.size(); ++i) out << " " << format_number(weights_(i));
  out << "\n";
  return out.str();
}

Evaluator Evaluator::deserialize(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "grop-evaluator" || version != 1) {
    throw DataError("not a version 1 evaluator file");
  }
  FrameSpec frame;
  EvaluatorParams params;
  std::uint64_t seed = 0;
  TrainingReport report;
  Eigen::VectorXd weights;
  bool have_weights = false;
  std::string key;
  while (in >> key) {
    if (key == "frame") {
      in >> frame.width >> frame.height >> frame.region_cols >> frame.region_rows >> frame.stride;
    } else if (key == "patch_radius") {
      in >> params.patch_radius;
    } else if (key == "epochs") {
      in >> params.epochs;
    } else if (key == "learning_rate") {
      in >> params.learning_rate;
    } else if (key == "beta1") {
      in >> params.beta1;
    } else if (key == "beta2") {
      in >> params.beta2;
    } else if (key == "l2") {
      in >> params.l2;
    } else if (key == "holdout_fraction") {
      in >> params.holdout_fraction;
    } else if (key == "seed") {
      in >> seed;
    } else if (key == "train_mse") {
      in >> report.train_mse;
    } else if (key == "holdout_mae") {
      in >> report.holdout_mae;
    } else if (key == "loss_curve") {
      std::size_t n = 0;
      in >> n;
      report.loss_curve.resize(n);
      for (double& l : report.loss_curve) in >> l;
    } else if (key == "weights") {
      Eigen::Index n = 0;
      in >> n;
      if (n < 0 || n > 1'000'000) throw DataError("bad weight count");
      weights.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) in >> weights(i);
      have_weights = true;
    } else {
      throw DataError("unknown evaluator key '" + key + "'");
    }
    if (!in) throw DataError("malformed value for '" + key + "'");
  }
  if (!have_weights) throw DataError("evaluator file has no weights");
  try {
    Evaluator ev(frame, params, weights, seed);
    ev.report() = std::move(report);
    return ev;
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

}  // namespace grop
