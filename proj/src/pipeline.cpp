#include "nsd/pipeline.hpp"

#include "nsd/errors.hpp"

namespace nsd {

DetectionPipeline::DetectionPipeline(const PipelineConfig& config, const DetectorBundle& bundle)
    : bundle_(bundle),
      table_(config.input_config()),
      post_(config.history_capacity, config.fusion_config()) {
  bundle_.validate();
  if (bundle_.feature_count() != config.window_steps * StepFeatures::kCount) {
    throw ConfigError("bundle expects " + std::to_string(bundle_.feature_count()) + " features but the window yields " +
                      std::to_string(config.window_steps * StepFeatures::kCount));
  }
}

std::vector<StepRecord> DetectionPipeline::process_step(const TrafficMap& map, const SensorState& sensors) {
  IngestResult ingest = table_.ingest_step(map);
  for (const auto& key : ingest.evicted) post_.reset(key);
  for (const auto& key : ingest.idle_dropped) post_.reset(key);

  CategoryMap cmap;
  for (const auto& v : table_.assemble_all()) cmap.emplace(v.key, detect(bundle_, v));
  const MultiLabelOutput multilabel = step_output(cmap);

  std::vector<StepRecord> out;
  out.reserve(cmap.size());
  for (const auto& [key, det] : cmap) {
    StepRecord r;
    r.step = map.completed_step();
    r.key = key;
    r.raw = det;
    r.post = post_.update(key, det, sensors);
    r.multilabel = multilabel;
    out.push_back(std::move(r));
  }
  return out;
}

Diagnostics run_detection(std::span<const PacketRecord> packets, const PipelineConfig& config,
                          const DetectorBundle& bundle, const SensorTrace& sensors, const RecordSink& sink,
                          const StepHook& before_step) {
  DetectionPipeline pipeline(config, bundle);
  StreamingDecomposer decomposer(config.address_plan(), config.step_ms);
  auto on_step = [&](const TrafficMap& map) {
    if (before_step) before_step(map.completed_step());
    for (const auto& r : pipeline.process_step(map, sensors.at(map.completed_step()))) sink(r);
  };
  for (const auto& p : packets) decomposer.push(p, on_step);
  decomposer.finish(on_step);
  return decomposer.diagnostics();
}

std::vector<InputVector> replay_windows(std::span<const PacketRecord> packets, const PipelineConfig& config) {
  InputTable table(config.input_config());
  std::vector<InputVector> out;
  StreamingDecomposer decomposer(config.address_plan(), config.step_ms);
  auto on_step = [&](const TrafficMap& map) {
    table.ingest_step(map);
    for (auto& v : table.assemble_all()) out.push_back(std::move(v));
  };
  for (const auto& p : packets) decomposer.push(p, on_step);
  decomposer.finish(on_step);
  return out;
}

namespace {

template <typename T>
nlohmann::ordered_json label_or_null(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(std::string(to_string(*v))) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json record_to_json(const StepRecord& r, const std::string& capture) {
  nlohmann::ordered_json j;
  if (!capture.empty()) j["capture"] = capture;
  j["step"] = r.step;
  j["key"] = r.key.to_string();
  j["l1"] = std::string(to_string(r.raw.l1));
  j["l2"] = label_or_null(r.raw.sub);
  j["l1_proba"] = r.raw.l1_proba;
  j["l2_proba"] = r.raw.l2_proba;
  j["l1_voted"] = label_or_null(r.post.l1_voted);
  j["l1_final"] = label_or_null(r.post.l1_final);
  j["l2_voted"] = label_or_null(r.post.l2_voted);
  j["l2_final"] = label_or_null(r.post.l2_final);
  j["multilabel"] = r.multilabel.as_array();
  return j;
}

}  // namespace nsd
