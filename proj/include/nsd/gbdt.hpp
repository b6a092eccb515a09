#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nsd {

/// Dense row-major matrix of training features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  /// Appends a row; the first row fixes the column count.
  void push_row(std::span<const double> values);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct TrainParams {
  int n_rounds = 100;
  int max_depth = 4;
  double learning_rate = 0.1;
  double min_child_weight = 1.0;
  double lambda_l2 = 1.0;
  double gamma_min_gain = 0.0;
  double subsample = 1.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainParams& p);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, TrainParams& p);

/// Flat tree node; internal when `feature >= 0`. Samples with
/// `x[feature] < threshold` go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double leaf = 0.0;  // already scaled by the learning rate
  double gain = 0.0;  // split gain of an internal node

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  /// Number of internal nodes on the longest root-to-leaf path.
  int depth() const;
  bool operator==(const Tree&) const = default;
};

/// Multiclass softmax ensemble: each round holds one tree per class.
struct GbdtModel {
  int n_classes = 0;
  std::vector<std::string> class_labels;
  double learning_rate = 0.1;
  double base_score = 0.0;
  std::size_t feature_count = 0;
  std::vector<std::vector<Tree>> rounds;
  /// Mean training log-loss before the first round and after each round.
  std::vector<double> train_log_loss;

  std::vector<double> predict_margin(std::span<const double> x) const;
  /// Throws ShapeError when `x` has the wrong length.
  std::vector<double> predict_proba(std::span<const double> x) const;
  /// Argmax of predict_proba; ties go to the lowest class index.
  std::size_t predict_index(std::span<const double> x) const;
  const std::string& predict(std::span<const double> x) const;
  /// Total split gain per feature.
  std::vector<double> feature_importance() const;

  bool operator==(const GbdtModel&) const = default;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> margins);
/// Lowest index among the maxima.
std::size_t argmax(std::span<const double> values);

/// Trains with the second-order softmax objective and exact greedy splits.
/// `y` holds class indices into `class_labels`. Throws TrainingError when a
/// class has no examples or the labels are out of range, DataError on
/// non-finite features.
GbdtModel train(const FeatureMatrix& x, std::span<const int> y, std::vector<std::string> class_labels,
                const TrainParams& params);
/// Same, with string labels mapped through `class_labels`.
GbdtModel train(const FeatureMatrix& x, std::span<const std::string> y, std::vector<std::string> class_labels,
                const TrainParams& params);

/// Best split of one node. `feature < 0` when no admissible split exists.
struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;

  bool valid() const noexcept { return feature >= 0; }
};

/// Exact greedy split search over `rows` given per-row gradient statistics.
/// Candidates are midpoints between consecutive distinct values; a split is
/// admissible when both children reach `min_child_weight` hessian mass and
/// its gain (after subtracting gamma) is non-negative.
SplitCandidate find_best_split(const FeatureMatrix& x, std::span<const double> grad, std::span<const double> hess,
                               std::span<const std::size_t> rows, const TrainParams& params);

/// Second-order split gain for the given child sums.
double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda, double gamma);

// Model files: JSON with a canonical field order. Doubles use the shortest
// representation that round-trips exactly.
nlohmann::ordered_json model_to_json(const GbdtModel& model);
GbdtModel model_from_json(const nlohmann::json& j);
std::string serialize_model(const GbdtModel& model);
GbdtModel deserialize_model(const std::string& text);
void save_model(const GbdtModel& model, const std::string& path);
GbdtModel load_model(const std::string& path);

}  // namespace nsd
