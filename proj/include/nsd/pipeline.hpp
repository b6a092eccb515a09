#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsd/config.hpp"
#include "nsd/decomposition.hpp"
#include "nsd/detector.hpp"
#include "nsd/input_management.hpp"
#include "nsd/postprocess.hpp"

namespace nsd {

/// Output for one gated conversation in one step.
struct StepRecord {
  std::int64_t step = 0;
  ConversationKey key;
  Detection raw;
  PostOutput post;
  MultiLabelOutput multilabel;  // from the step's raw L1 category map
};

/// Window -> classify -> post-process, fed one completed step at a time.
/// Holds a reference to the bundle, which must outlive the pipeline.
class DetectionPipeline {
 public:
  DetectionPipeline(const PipelineConfig& config, const DetectorBundle& bundle);

  std::vector<StepRecord> process_step(const TrafficMap& map, const SensorState& sensors);

  const InputTable& table() const noexcept { return table_; }
  const PostProcessor& postprocessor() const noexcept { return post_; }

 private:
  const DetectorBundle& bundle_;
  InputTable table_;
  PostProcessor post_;
};

using RecordSink = std::function<void(const StepRecord&)>;
using StepHook = std::function<void(std::int64_t step)>;

/// Replays a capture through decomposition and the detection pipeline.
/// `before_step` runs ahead of each step's processing (used for pacing).
Diagnostics run_detection(std::span<const PacketRecord> packets, const PipelineConfig& config,
                          const DetectorBundle& bundle, const SensorTrace& sensors, const RecordSink& sink,
                          const StepHook& before_step = {});

/// Every gated input vector produced while replaying a capture, in step
/// order. This is exactly what the detectors see at serving time.
std::vector<InputVector> replay_windows(std::span<const PacketRecord> packets, const PipelineConfig& config);

nlohmann::ordered_json record_to_json(const StepRecord& r, const std::string& capture = {});

}  // namespace nsd
