#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsd/config.hpp"
#include "nsd/eval.hpp"
#include "nsd/gbdt.hpp"
#include "nsd/pipeline.hpp"
#include "nsd/postprocess.hpp"
#include "nsd/synth.hpp"

namespace nsd {

std::string_view layer_name(Layer layer);  // "l1", "l2rt", "l2nrt"
std::optional<Layer> parse_layer(std::string_view text);
std::vector<std::string> layer_classes(Layer layer);
/// Ground-truth label of a manifest row for one layer; none when the row is
/// outside that layer's scope (e.g. a CG flow for the L2-RT model).
std::optional<std::string> layer_label(const ManifestRow& row, Layer layer);

/// Training rows built by replaying captures through the serving pipeline.
struct TrainingSet {
  FeatureMatrix x;
  std::vector<std::string> y;
  std::map<std::string, std::size_t> rows_per_capture;
};

using CaptureLoader = std::function<std::vector<PacketRecord>(const std::string& capture)>;

/// Rows of `rows` whose split matches (`split` empty or "all" takes every
/// row) and that fall in the layer's scope contribute one training row per
/// gated window of their conversation.
TrainingSet build_training_set(const std::vector<ManifestRow>& rows, const CaptureLoader& load, Layer layer,
                               const std::string& split, const PipelineConfig& config);

/// Names the first class of the layer with no training rows, if any.
std::optional<std::string> missing_class(const TrainingSet& set, Layer layer);

/// One detect-stream record reduced to what evaluation needs.
struct PredictionRow {
  std::string capture;
  ConversationKey key;
  L1Class l1 = L1Class::Cg;
  std::optional<SubClass> sub;
};

enum class Stage { Raw, Final };

/// Reads one detect JSONL record. Throws ParseError.
PredictionRow prediction_from_json(const nlohmann::json& j, Stage stage);
PredictionRow prediction_from_record(const StepRecord& r, const std::string& capture, Stage stage);

struct Evaluation {
  std::map<Layer, std::vector<ClassificationReport>> reports;  // "all" then one slice per band
  std::size_t unresolved = 0;           // predictions whose key is not in the manifest
  std::map<Layer, std::size_t> unrouted;  // true sub-class rows without a sub-class prediction in scope
};

/// L1 is scored on every resolvable prediction; L2 layers only on rows whose
/// true L1 class is their parent.
Evaluation evaluate_predictions(const std::vector<PredictionRow>& predictions, const std::vector<ManifestRow>& manifest);

nlohmann::ordered_json evaluation_to_json(const Evaluation& e);

}  // namespace nsd
