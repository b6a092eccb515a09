#include "nsd/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

#include "nsd/errors.hpp"

namespace nsd {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> order)
    : class_order(std::move(order)), counts(class_order.size(), std::vector<std::size_t>(class_order.size(), 0)) {}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
  auto it = std::find(class_order.begin(), class_order.end(), label);
  if (it == class_order.end()) throw std::invalid_argument("label '" + label + "' not in class order");
  return static_cast<std::size_t>(it - class_order.begin());
}

void ConfusionMatrix::add(const std::string& truth, const std::string& predicted) {
  ++counts[index_of(truth)][index_of(predicted)];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts) n = std::accumulate(row.begin(), row.end(), n);
  return n;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) n += counts[i][i];
  return n;
}

std::size_t ConfusionMatrix::row_sum(std::size_t i) const {
  return std::accumulate(counts[i].begin(), counts[i].end(), std::size_t{0});
}

std::size_t ConfusionMatrix::col_sum(std::size_t j) const {
  std::size_t n = 0;
  for (const auto& row : counts) n += row[j];
  return n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.class_order != class_order) throw std::invalid_argument("cannot merge matrices with different classes");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (std::size_t j = 0; j < counts.size(); ++j) counts[i][j] += other.counts[i][j];
  }
  return *this;
}

ClassificationReport report_from_confusion(const ConfusionMatrix& cm, std::string slice) {
  const std::size_t total = cm.total();
  if (total == 0) throw EmptyReportError("no predictions to score in slice '" + slice + "'");
  ClassificationReport r;
  r.slice = std::move(slice);
  r.confusion = cm;
  r.total = total;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  for (std::size_t i = 0; i < cm.class_order.size(); ++i) {
    ClassRow row;
    row.label = cm.class_order[i];
    row.support = cm.row_sum(i);
    std::size_t predicted = cm.col_sum(i);
    std::size_t hit = cm.counts[i][i];
    if (row.support == 0) r.warnings.push_back("class " + row.label + " has no support");
    if (predicted == 0) r.warnings.push_back("class " + row.label + " was never predicted");
    row.precision = predicted ? static_cast<double>(hit) / static_cast<double>(predicted) : 0.0;
    row.recall = row.support ? static_cast<double>(hit) / static_cast<double>(row.support) : 0.0;
    double denom = row.precision + row.recall;
    row.f1 = denom > 0.0 ? 2.0 * row.precision * row.recall / denom : 0.0;
    r.classes.push_back(row);
  }
  return r;
}

ClassificationReport score(std::span<const LabeledPrediction> predictions, const std::vector<std::string>& class_order,
                           std::string slice) {
  ConfusionMatrix cm(class_order);
  for (const auto& p : predictions) cm.add(p.truth, p.predicted);
  return report_from_confusion(cm, std::move(slice));
}

std::vector<ClassificationReport> score_sliced(std::span<const LabeledPrediction> predictions,
                                               const std::vector<std::string>& class_order, const std::string& tag) {
  std::vector<ClassificationReport> out;
  out.push_back(score(predictions, class_order, "all"));
  std::set<std::string> values;
  for (const auto& p : predictions) {
    auto it = p.tags.find(tag);
    if (it != p.tags.end()) values.insert(it->second);
  }
  for (const auto& v : values) {
    std::vector<LabeledPrediction> subset;
    for (const auto& p : predictions) {
      auto it = p.tags.find(tag);
      if (it != p.tags.end() && it->second == v) subset.push_back(p);
    }
    out.push_back(score(subset, class_order, tag + "=" + v));
  }
  return out;
}

nlohmann::ordered_json report_to_json(const ClassificationReport& r) {
  nlohmann::ordered_json j;
  j["slice"] = r.slice;
  auto classes = nlohmann::ordered_json::array();
  for (const auto& c : r.classes) {
    classes.push_back(
        {{"label", c.label}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}});
  }
  j["classes"] = std::move(classes);
  j["accuracy"] = r.accuracy;
  j["total"] = r.total;
  j["class_order"] = r.confusion.class_order;
  j["confusion"] = r.confusion.counts;
  if (!r.warnings.empty()) j["warnings"] = r.warnings;
  return j;
}

std::string render_table(const ClassificationReport& r, const std::map<std::string, std::string>& display_names) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "[%s]\n%-26s %9s %9s %9s %9s\n", r.slice.c_str(), "", "Precision", "Recall",
                "F1-score", "Support");
  out += line;
  for (const auto& c : r.classes) {
    auto it = display_names.find(c.label);
    const std::string& name = it == display_names.end() ? c.label : it->second;
    std::snprintf(line, sizeof line, "%-26s %9.2f %9.2f %9.2f %9zu\n", name.c_str(), c.precision, c.recall, c.f1,
                  c.support);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-26s %9s %9s %9.2f %9zu\n", "Accuracy", "", "", r.accuracy, r.total);
  out += line;
  return out;
}

}  // namespace nsd
