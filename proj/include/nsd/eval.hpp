#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nsd {

/// Counts indexed (true, predicted) in a fixed class order.
struct ConfusionMatrix {
  std::vector<std::string> class_order;
  std::vector<std::vector<std::size_t>> counts;

  explicit ConfusionMatrix(std::vector<std::string> order = {});

  std::size_t index_of(const std::string& label) const;  // throws std::invalid_argument
  void add(const std::string& truth, const std::string& predicted);
  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(std::size_t i) const;
  std::size_t col_sum(std::size_t j) const;
  /// Elementwise sum; class orders must match.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassRow {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassificationReport {
  std::string slice = "all";
  std::vector<ClassRow> classes;
  double accuracy = 0.0;
  std::size_t total = 0;
  ConfusionMatrix confusion;
  std::vector<std::string> warnings;  // e.g. zero-support classes
};

struct LabeledPrediction {
  std::string truth;
  std::string predicted;
  std::map<std::string, std::string> tags;  // slice tags such as "band"
};

/// Standard per-class metrics. Classes with zero support or zero predictions
/// report 0 for the undefined ratios and add a warning. Throws
/// EmptyReportError on empty input.
ClassificationReport report_from_confusion(const ConfusionMatrix& cm, std::string slice = "all");
ClassificationReport score(std::span<const LabeledPrediction> predictions, const std::vector<std::string>& class_order,
                           std::string slice = "all");
/// "all" followed by one report per distinct value of `tag`, in sorted order.
std::vector<ClassificationReport> score_sliced(std::span<const LabeledPrediction> predictions,
                                               const std::vector<std::string>& class_order, const std::string& tag);

nlohmann::ordered_json report_to_json(const ClassificationReport& r);
/// Human-readable block: one row per class plus an accuracy row.
std::string render_table(const ClassificationReport& r, const std::map<std::string, std::string>& display_names = {});

}  // namespace nsd
