#include "nsd/workflow.hpp"

#include <algorithm>

#include "nsd/errors.hpp"

namespace nsd {

std::string_view layer_name(Layer layer) {
  switch (layer) {
    case Layer::L1:
      return "l1";
    case Layer::L2Rt:
      return "l2rt";
    case Layer::L2Nrt:
      return "l2nrt";
  }
  return "?";
}

std::optional<Layer> parse_layer(std::string_view text) {
  for (auto l : {Layer::L1, Layer::L2Rt, Layer::L2Nrt}) {
    if (layer_name(l) == text) return l;
  }
  return std::nullopt;
}

std::vector<std::string> layer_classes(Layer layer) {
  switch (layer) {
    case Layer::L1:
      return l1_class_order();
    case Layer::L2Rt:
      return rt_class_order();
    case Layer::L2Nrt:
      return nrt_class_order();
  }
  return {};
}

std::optional<std::string> layer_label(const ManifestRow& row, Layer layer) {
  switch (layer) {
    case Layer::L1:
      return std::string(to_string(row.l1));
    case Layer::L2Rt:
      if (row.l1 == L1Class::Rt && row.sub) return std::string(to_string(*row.sub));
      break;
    case Layer::L2Nrt:
      if (row.l1 == L1Class::Nrt && row.sub) return std::string(to_string(*row.sub));
      break;
  }
  return std::nullopt;
}

TrainingSet build_training_set(const std::vector<ManifestRow>& rows, const CaptureLoader& load, Layer layer,
                               const std::string& split, const PipelineConfig& config) {
  const bool any_split = split.empty() || split == "all";
  // capture -> key -> label, keeping captures in manifest order
  std::vector<std::string> order;
  std::map<std::string, std::map<ConversationKey, std::string>> labels;
  for (const auto& row : rows) {
    if (!any_split && row.split != split) continue;
    auto label = layer_label(row, layer);
    if (!label) continue;
    if (!labels.contains(row.capture)) order.push_back(row.capture);
    labels[row.capture][row.key] = *label;
  }

  TrainingSet set;
  for (const auto& capture : order) {
    const auto& keyed = labels.at(capture);
    auto packets = load(capture);
    std::size_t n = 0;
    for (const auto& v : replay_windows(packets, config)) {
      auto it = keyed.find(v.key);
      if (it == keyed.end()) continue;
      set.x.push_row(v.values);
      set.y.push_back(it->second);
      ++n;
    }
    set.rows_per_capture[capture] = n;
  }
  return set;
}

std::optional<std::string> missing_class(const TrainingSet& set, Layer layer) {
  for (const auto& c : layer_classes(layer)) {
    if (std::find(set.y.begin(), set.y.end(), c) == set.y.end()) return c;
  }
  return std::nullopt;
}

PredictionRow prediction_from_json(const nlohmann::json& j, Stage stage) {
  try {
    PredictionRow p;
    p.capture = j.value("capture", std::string());
    p.key = ConversationKey::parse(j.at("key").get<std::string>());
    const char* l1_field = stage == Stage::Final ? "l1_final" : "l1";
    const char* l2_field = stage == Stage::Final ? "l2_final" : "l2";
    auto l1 = parse_l1(j.at(l1_field).get<std::string>());
    if (!l1) throw ParseError("prediction: unknown L1 label", 0);
    p.l1 = *l1;
    if (j.contains(l2_field) && !j.at(l2_field).is_null()) {
      auto sub = parse_sub(j.at(l2_field).get<std::string>());
      if (!sub) throw ParseError("prediction: unknown L2 label", 0);
      p.sub = sub;
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("prediction: ") + e.what(), 0);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("prediction: ") + e.what(), 0);
  }
}

PredictionRow prediction_from_record(const StepRecord& r, const std::string& capture, Stage stage) {
  PredictionRow p;
  p.capture = capture;
  p.key = r.key;
  if (stage == Stage::Final) {
    p.l1 = r.post.l1_final.value_or(r.raw.l1);
    p.sub = r.post.l2_final;
  } else {
    p.l1 = r.raw.l1;
    p.sub = r.raw.sub;
  }
  return p;
}

Evaluation evaluate_predictions(const std::vector<PredictionRow>& predictions, const std::vector<ManifestRow>& manifest) {
  std::map<std::pair<std::string, ConversationKey>, const ManifestRow*> by_capture;
  std::map<ConversationKey, std::vector<const ManifestRow*>> by_key;
  for (const auto& row : manifest) {
    by_capture[{row.capture, row.key}] = &row;
    by_key[row.key].push_back(&row);
  }

  Evaluation e;
  std::map<Layer, std::vector<LabeledPrediction>> scored;
  for (const auto& p : predictions) {
    const ManifestRow* row = nullptr;
    if (auto it = by_capture.find({p.capture, p.key}); it != by_capture.end()) {
      row = it->second;
    } else if (auto kt = by_key.find(p.key); kt != by_key.end() && kt->second.size() == 1) {
      row = kt->second.front();
    }
    if (!row) {
      ++e.unresolved;
      continue;
    }
    std::map<std::string, std::string> tags{{"band", to_string(row->condition.band)}};
    scored[Layer::L1].push_back({std::string(to_string(row->l1)), std::string(to_string(p.l1)), tags});
    for (auto layer : {Layer::L2Rt, Layer::L2Nrt}) {
      auto truth = layer_label(*row, layer);
      if (!truth) continue;
      auto classes = layer_classes(layer);
      std::string predicted = p.sub ? std::string(to_string(*p.sub)) : std::string();
      if (std::find(classes.begin(), classes.end(), predicted) == classes.end()) {
        ++e.unrouted[layer];
        continue;
      }
      scored[layer].push_back({*truth, predicted, tags});
    }
  }
  for (const auto& [layer, rows] : scored) {
    if (!rows.empty()) e.reports[layer] = score_sliced(rows, layer_classes(layer), "band");
  }
  return e;
}

nlohmann::ordered_json evaluation_to_json(const Evaluation& e) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json layers = nlohmann::ordered_json::object();
  for (const auto& [layer, reports] : e.reports) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) arr.push_back(report_to_json(r));
    layers[std::string(layer_name(layer))] = std::move(arr);
  }
  j["layers"] = std::move(layers);
  j["unresolved"] = e.unresolved;
  nlohmann::ordered_json unrouted = nlohmann::ordered_json::object();
  for (const auto& [layer, n] : e.unrouted) unrouted[std::string(layer_name(layer))] = n;
  j["unrouted"] = std::move(unrouted);
  return j;
}

}  // namespace nsd
