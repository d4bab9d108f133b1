#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grop/feasibility.hpp"

namespace grop {

struct EvaluatorParams {
  int patch_radius = 4;  // cells
  int epochs = 400;
  double learning_rate = 0.05;  // Adam step size
  double beta1 = 0.9;
  double beta2 = 0.999;
  double l2 = 1e-5;
  double holdout_fraction = 0.2;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Feature layout of one pixel. Column counts depend only on the patch radius.
struct FeatureLayout {
  int patch_radius = 4;

  static constexpr int kDistanceBins = 14;  // 0.1 m wide, last one open-ended
  int patch_cells() const { return (2 * patch_radius + 1) * (2 * patch_radius + 1); }
  int size() const { return 1 + 2 * patch_cells() + kDistanceBins + 4 + 2; }
};

/// Features of a stand cell in a frame-sized occupancy image: bias, chair and table
/// indicators over the patch, distance bins to the target, bearing, and chair cells on
/// the line of sight.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> pixel_features(const GridMap& image, const CellIndex& cell,
                                                        const Vec2& target, int patch_radius);

struct TrainingReport {
  double train_mse = 0.0;
  double holdout_mae = 0.0;
  std::vector<double> loss_curve;
  std::vector<int> train_tasks;
  std::vector<int> holdout_tasks;
};

/// Pixel-wise feasibility regressor: sigmoid of a linear model over `pixel_features`,
/// evaluated on the sample lattice only.
class Evaluator {
 public:
  Evaluator() = default;
  Evaluator(FrameSpec frame, EvaluatorParams params, Eigen::VectorXd weights, std::uint64_t seed);

  /// Throws std::invalid_argument if the image is not frame-sized.
  Heatmap predict(const GridMap& image, const Vec2& target) const;
  double predict_cell(const GridMap& image, const CellIndex& cell, const Vec2& target) const;

  const FrameSpec& frame() const { return frame_; }
  const EvaluatorParams& params() const { return params_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  std::uint64_t seed() const { return seed_; }
  TrainingReport& report() { return report_; }
  const TrainingReport& report() const { return report_; }

  /// Versioned text with hyperparameters, seed, loss curve and weights.
  std::string serialize() const;
  static Evaluator deserialize(const std::string& text);

 private:
  FrameSpec frame_;
  EvaluatorParams params_;
  Eigen::VectorXd weights_;
  std::uint64_t seed_ = 0;
  TrainingReport report_;
};

/// Predictions below this snap to zero.
inline constexpr double kPredictionFloor = 0.01;

/// Full-batch gradient descent (Adam) on per-pixel squared error over an 80/20 split by task.
Evaluator train_evaluator(const Dataset& data, const EvaluatorParams& params, std::uint64_t seed);

/// Heatmap source that renders the crop around each target and runs the evaluator.
HeatmapFn evaluator_heatmaps(const Evaluator& evaluator);

/// Mean absolute error over lattice cells.
double heatmap_mae(const Heatmap& a, const Heatmap& b);

}  // namespace grop
