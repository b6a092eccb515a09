#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "nsd/decomposition.hpp"

namespace nsd {

struct InputConfig {
  std::size_t table_capacity = 7;
  std::size_t window_steps = 6;
  /// A buffer that receives this many dummy steps in a row is dropped.
  /// Zero disables idle dropping.
  std::size_t idle_drop_steps = 6;
};

/// Sliding window of the most recent step features of one conversation,
/// oldest first.
struct InputBuffer {
  ConversationKey key;
  std::deque<StepFeatures> slots;
  std::int64_t last_active_step = 0;  // last step with real traffic
  std::int64_t last_step = 0;         // last step pushed, dummy or not
  std::size_t fill_count = 0;         // saturates at the window size
  std::size_t idle_steps = 0;         // consecutive dummies at the tail
};

/// Classifier input: `window_steps` feature rows concatenated oldest first.
struct InputVector {
  std::vector<double> values;
  ConversationKey key;
  std::int64_t step_index = 0;
};

/// None until the buffer has seen a full window of steps.
std::optional<InputVector> assemble_input(const InputBuffer& buffer, std::size_t window_steps);

struct IngestResult {
  std::vector<ConversationKey> evicted;     // displaced by table pressure
  std::vector<ConversationKey> idle_dropped;
};

/// Fixed-capacity table of per-conversation input buffers.
class InputTable {
 public:
  explicit InputTable(InputConfig config = {});

  /// Applies one completed step. Known conversations absent from the map get
  /// an all-zero dummy step. New conversations beyond capacity evict the
  /// buffer with the oldest activity (ties: fewest filled steps, then key).
  IngestResult ingest_step(const TrafficMap& map);

  /// Vectors for every buffer that passes the window gate, in key order.
  std::vector<InputVector> assemble_all() const;

  const std::map<ConversationKey, InputBuffer>& buffers() const noexcept { return buffers_; }
  std::size_t size() const noexcept { return buffers_.size(); }
  const InputConfig& config() const noexcept { return config_; }

 private:
  void push(InputBuffer& buffer, const StepFeatures& f, std::int64_t step);

  InputConfig config_;
  std::map<ConversationKey, InputBuffer> buffers_;
};

}  // namespace nsd
