#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>

#include "nsd/detector.hpp"

namespace nsd {

enum class Layer : std::uint8_t { L1, L2Rt, L2Nrt };

/// FIFO of recent predictions (class indices within one layer's order).
class HistoryBuffer {
 public:
  explicit HistoryBuffer(std::size_t capacity = 7);

  void push(std::size_t label);
  void clear() { slots_.clear(); }
  std::size_t count(std::size_t label) const;
  bool empty() const noexcept { return slots_.empty(); }
  std::size_t size() const noexcept { return slots_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  const std::deque<std::size_t>& slots() const noexcept { return slots_; }

 private:
  std::size_t capacity_;
  std::deque<std::size_t> slots_;
};

/// Modal label. Ties go to the lowest class index, which every layer's order
/// makes the most latency-sensitive class. None for an empty buffer.
std::optional<std::size_t> vote(const HistoryBuffer& buffer);

struct SensorState {
  bool gaming_flag = false;
  bool camera_active = false;
  std::int64_t step = 0;
};

struct FusionConfig {
  /// RT entries required in the L1 buffer before the camera forces VC.
  std::size_t camera_rt_threshold = 3;
};

/// Sensor hints on top of a voted label:
///  - L1: the gaming flag promotes NRT to RT (never touches CG).
///  - L2-RT: an active camera with enough RT history in `l1_buffer` forces VC.
/// Anything else passes `voted` through.
std::size_t fuse_sensors(Layer layer, std::size_t voted, const SensorState& sensors, const HistoryBuffer& l1_buffer,
                         const FusionConfig& config = {});

struct PostOutput {
  std::optional<L1Class> l1_voted;
  std::optional<L1Class> l1_final;
  std::optional<SubClass> l2_voted;
  std::optional<SubClass> l2_final;
};

/// The three post-processors, with one set of history buffers per
/// conversation.
class PostProcessor {
 public:
  explicit PostProcessor(std::size_t history_capacity = 7, FusionConfig fusion = {});

  /// Records this step's raw detection and returns the voted and fused
  /// labels. The final sub-class always belongs to the final L1 class.
  PostOutput update(const ConversationKey& key, const Detection& raw, const SensorState& sensors);
  /// Forgets a conversation's history (its key may be reused later).
  void reset(const ConversationKey& key);

  struct Buffers {
    HistoryBuffer l1;
    HistoryBuffer rt;
    HistoryBuffer nrt;
  };
  const Buffers* buffers(const ConversationKey& key) const;

 private:
  std::size_t capacity_;
  FusionConfig fusion_;
  std::map<ConversationKey, Buffers> state_;
};

/// Per-step sensor snapshots; steps missing from the trace read as all
/// flags false.
class SensorTrace {
 public:
  void set(const SensorState& s) { states_[s.step] = s; }
  SensorState at(std::int64_t step) const;
  std::size_t size() const noexcept { return states_.size(); }

 private:
  std::map<std::int64_t, SensorState> states_;
};

/// JSONL lines of {"step", "gaming_flag", "camera_active"}. Throws ParseError.
SensorTrace read_sensor_trace(std::istream& in);
SensorTrace load_sensor_trace(const std::filesystem::path& path);

}  // namespace nsd
