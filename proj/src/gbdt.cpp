#include "nsd/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "nsd/errors.hpp"

namespace nsd {

void FeatureMatrix::push_row(std::span<const double> values) {
  if (rows_ == 0 && data_.empty()) cols_ = values.size();
  if (values.size() != cols_) throw ShapeError("row length does not match matrix width");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

void TrainParams::validate() const {
  if (n_rounds < 1) throw std::invalid_argument("n_rounds must be >= 1");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw std::invalid_argument("learning_rate must be in (0, 1]");
  if (!(min_child_weight >= 0.0)) throw std::invalid_argument("min_child_weight must be >= 0");
  if (!(lambda_l2 >= 0.0)) throw std::invalid_argument("lambda_l2 must be >= 0");
  if (!(gamma_min_gain >= 0.0)) throw std::invalid_argument("gamma_min_gain must be >= 0");
  if (!(subsample > 0.0 && subsample <= 1.0)) throw std::invalid_argument("subsample must be in (0, 1]");
}

double Tree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
  }
  return nodes[i].leaf;
}

int Tree::depth() const {
  std::vector<int> depth(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_leaf()) {
      deepest = std::max(deepest, depth[i]);
      continue;
    }
    depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
    depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
  }
  return deepest;
}

std::vector<double> softmax(std::span<const double> margins) {
  std::vector<double> p(margins.begin(), margins.end());
  if (p.empty()) return p;
  double top = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> GbdtModel::predict_margin(std::span<const double> x) const {
  if (x.size() != feature_count) {
    throw ShapeError("expected " + std::to_string(feature_count) + " features, got " + std::to_string(x.size()));
  }
  std::vector<double> margin(static_cast<std::size_t>(n_classes), base_score);
  for (const auto& round : rounds) {
    for (std::size_t k = 0; k < round.size(); ++k) margin[k] += round[k].predict(x);
  }
  return margin;
}

std::vector<double> GbdtModel::predict_proba(std::span<const double> x) const { return softmax(predict_margin(x)); }

std::size_t GbdtModel::predict_index(std::span<const double> x) const { return argmax(predict_proba(x)); }

const std::string& GbdtModel::predict(std::span<const double> x) const { return class_labels[predict_index(x)]; }

std::vector<double> GbdtModel::feature_importance() const {
  std::vector<double> importance(feature_count, 0.0);
  for (const auto& round : rounds) {
    for (const auto& tree : round) {
      for (const auto& node : tree.nodes) {
        if (!node.is_leaf()) importance[static_cast<std::size_t>(node.feature)] += node.gain;
      }
    }
  }
  return importance;
}

double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda, double gamma) {
  double g = g_left + g_right;
  double h = h_left + h_right;
  return 0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda) - g * g / (h + lambda)) -
         gamma;
}

namespace {

// Hessian floor of the softmax objective.
constexpr double kMinHessian = 1e-16;

struct SortedEntry {
  double value;
  std::uint32_t row;
};

// Per feature, the rows in ascending value order (ties by row index).
using SortedColumns = std::vector<std::vector<SortedEntry>>;

SortedColumns presort(const FeatureMatrix& x, std::span<const std::size_t> rows) {
  SortedColumns cols(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    auto& col = cols[j];
    col.reserve(rows.size());
    for (std::size_t r : rows) col.push_back({x.at(r, j), static_cast<std::uint32_t>(r)});
    std::sort(col.begin(), col.end(), [](const SortedEntry& a, const SortedEntry& b) {
      return a.value < b.value || (a.value == b.value && a.row < b.row);
    });
  }
  return cols;
}

struct NodeSums {
  double g = 0.0;
  double h = 0.0;
};

double split_threshold(double lo, double hi) {
  double mid = std::midpoint(lo, hi);
  return mid > lo ? mid : hi;
}

// Finds the best split of every node listed in `slot_of_node` (node id ->
// slot, -1 when the node is not being split) in one pass per feature.
std::vector<SplitCandidate> scan_splits(const SortedColumns& sorted, std::span<const double> grad,
                                        std::span<const double> hess, std::span<const int> position,
                                        std::span<const int> slot_of_node, std::span<const NodeSums> totals,
                                        const TrainParams& params) {
  struct Running {
    double g = 0.0;
    double h = 0.0;
    double last = 0.0;
    bool seen = false;
  };
  const std::size_t slots = totals.size();
  std::vector<SplitCandidate> best(slots);
  std::vector<Running> acc(slots);

  for (std::size_t j = 0; j < sorted.size(); ++j) {
    std::fill(acc.begin(), acc.end(), Running{});
    for (const SortedEntry& e : sorted[j]) {
      int node = position[e.row];
      if (node < 0) continue;
      int slot = slot_of_node[static_cast<std::size_t>(node)];
      if (slot < 0) continue;
      Running& a = acc[static_cast<std::size_t>(slot)];
      if (a.seen && e.value > a.last) {
        const NodeSums& t = totals[static_cast<std::size_t>(slot)];
        double g_right = t.g - a.g;
        double h_right = t.h - a.h;
        if (a.h >= params.min_child_weight && h_right >= params.min_child_weight) {
          double gain = split_gain(a.g, a.h, g_right, h_right, params.lambda_l2, params.gamma_min_gain);
          SplitCandidate& b = best[static_cast<std::size_t>(slot)];
          if (gain >= 0.0 && (!b.valid() || gain > b.gain)) {
            b = {static_cast<int>(j), split_threshold(a.last, e.value), gain};
          }
        }
      }
      a.g += grad[e.row];
      a.h += hess[e.row];
      a.last = e.value;
      a.seen = true;
    }
  }
  return best;
}

double leaf_value(const NodeSums& s, const TrainParams& params) {
  double denom = s.h + params.lambda_l2;
  if (!(denom > 0.0)) return 0.0;
  return -s.g / denom * params.learning_rate;
}

// Level-wise exact greedy growth. `position` holds 0 for rows in the sample
// and -1 for rows left out; it is consumed.
Tree grow_tree(const FeatureMatrix& x, const SortedColumns& sorted, std::span<const double> grad,
               std::span<const double> hess, std::vector<int>& position, const TrainParams& params) {
  Tree tree;
  tree.nodes.emplace_back();
  std::vector<NodeSums> sums(1);
  for (std::size_t r = 0; r < position.size(); ++r) {
    if (position[r] < 0) continue;
    sums[0].g += grad[r];
    sums[0].h += hess[r];
  }

  std::vector<int> frontier{0};
  for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
    std::vector<int> slot_of_node(tree.nodes.size(), -1);
    std::vector<NodeSums> totals;
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      slot_of_node[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
      totals.push_back(sums[static_cast<std::size_t>(frontier[s])]);
    }
    auto best = scan_splits(sorted, grad, hess, position, slot_of_node, totals, params);

    std::vector<int> next;
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      if (!best[s].valid()) continue;
      auto id = static_cast<std::size_t>(frontier[s]);
      int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      sums.resize(tree.nodes.size());
      TreeNode& n = tree.nodes[id];
      n.feature = best[s].feature;
      n.threshold = best[s].threshold;
      n.gain = best[s].gain;
      n.left = left;
      n.right = left + 1;
      next.push_back(left);
      next.push_back(left + 1);
    }
    if (next.empty()) break;

    for (std::size_t r = 0; r < position.size(); ++r) {
      int node = position[r];
      if (node < 0) continue;
      const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
      if (n.is_leaf()) continue;
      int child = x.at(r, static_cast<std::size_t>(n.feature)) < n.threshold ? n.left : n.right;
      position[r] = child;
      sums[static_cast<std::size_t>(child)].g += grad[r];
      sums[static_cast<std::size_t>(child)].h += hess[r];
    }
    frontier = std::move(next);
  }

  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].is_leaf()) tree.nodes[i].leaf = leaf_value(sums[i], params);
  }
  return tree;
}

double mean_log_loss(const std::vector<double>& margins, std::span<const int> y, std::size_t k) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double* m = &margins[i * k];
    double top = *std::max_element(m, m + k);
    double z = 0.0;
    for (std::size_t c = 0; c < k; ++c) z += std::exp(m[c] - top);
    total += top + std::log(z) - m[static_cast<std::size_t>(y[i])];
  }
  return total / static_cast<double>(y.size());
}

// Uniform in [0, 1) from the top 53 bits; stable across standard libraries.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void check_inputs(const FeatureMatrix& x, std::span<const int> y, std::size_t n_classes) {
  if (n_classes < 2) throw TrainingError("need at least two classes");
  if (y.size() != x.rows()) throw ShapeError("label count does not match row count");
  if (x.rows() < n_classes) throw TrainingError("fewer rows than classes");
  if (x.cols() == 0) throw ShapeError("feature matrix has no columns");
  std::vector<std::size_t> counts(n_classes, 0);
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) {
      throw TrainingError("label index " + std::to_string(label) + " out of range");
    }
    ++counts[static_cast<std::size_t>(label)];
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (counts[c] == 0) throw TrainingError("class index " + std::to_string(c) + " has no examples");
  }
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (double v : x.row(r)) {
      if (!std::isfinite(v)) throw DataError("non-finite feature value in row " + std::to_string(r));
    }
  }
}

}  // namespace

SplitCandidate find_best_split(const FeatureMatrix& x, std::span<const double> grad, std::span<const double> hess,
                               std::span<const std::size_t> rows, const TrainParams& params) {
  if (grad.size() != x.rows() || hess.size() != x.rows()) throw ShapeError("gradient length must match row count");
  auto sorted = presort(x, rows);
  std::vector<int> position(x.rows(), -1);
  NodeSums total;
  for (std::size_t r : rows) {
    position[r] = 0;
    total.g += grad[r];
    total.h += hess[r];
  }
  std::vector<int> slot_of_node{0};
  std::vector<NodeSums> totals{total};
  return scan_splits(sorted, grad, hess, position, slot_of_node, totals, params).front();
}

GbdtModel train(const FeatureMatrix& x, std::span<const int> y, std::vector<std::string> class_labels,
                const TrainParams& params) {
  params.validate();
  const std::size_t k = class_labels.size();
  check_inputs(x, y, k);
  const std::size_t n = x.rows();

  GbdtModel model;
  model.n_classes = static_cast<int>(k);
  model.class_labels = std::move(class_labels);
  model.learning_rate = params.learning_rate;
  model.base_score = 0.0;
  model.feature_count = x.cols();

  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
  const SortedColumns sorted = presort(x, all_rows);

  std::vector<double> margins(n * k, model.base_score);
  model.train_log_loss.push_back(mean_log_loss(margins, y, k));

  std::mt19937_64 rng(params.seed);
  std::vector<double> prob(n * k);
  std::vector<double> grad(n);
  std::vector<double> hess(n);
  std::vector<char> sampled(n, 1);
  std::vector<int> position(n);

  for (int round = 0; round < params.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      auto p = softmax(std::span<const double>(&margins[i * k], k));
      std::copy(p.begin(), p.end(), &prob[i * k]);
    }
    if (params.subsample < 1.0) {
      for (std::size_t i = 0; i < n; ++i) sampled[i] = unit_uniform(rng) < params.subsample ? 1 : 0;
    }

    std::vector<Tree> trees;
    trees.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        double p = prob[i * k + c];
        grad[i] = p - (static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0);
        hess[i] = std::max(2.0 * p * (1.0 - p), kMinHessian);
        position[i] = sampled[i] ? 0 : -1;
      }
      trees.push_back(grow_tree(x, sorted, grad, hess, position, params));
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto row = x.row(i);
      for (std::size_t c = 0; c < k; ++c) margins[i * k + c] += trees[c].predict(row);
    }
    model.rounds.push_back(std::move(trees));
    model.train_log_loss.push_back(mean_log_loss(margins, y, k));
  }
  return model;
}

GbdtModel train(const FeatureMatrix& x, std::span<const std::string> y, std::vector<std::string> class_labels,
                const TrainParams& params) {
  std::vector<int> idx;
  idx.reserve(y.size());
  for (const auto& label : y) {
    auto it = std::find(class_labels.begin(), class_labels.end(), label);
    if (it == class_labels.end()) throw TrainingError("label '" + label + "' is not in the class list");
    idx.push_back(static_cast<int>(it - class_labels.begin()));
  }
  for (std::size_t c = 0; c < class_labels.size(); ++c) {
    if (std::find(idx.begin(), idx.end(), static_cast<int>(c)) == idx.end()) {
      throw TrainingError("class '" + class_labels[c] + "' has no examples");
    }
  }
  return train(x, idx, std::move(class_labels), params);
}

}  // namespace nsd
