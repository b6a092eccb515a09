#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsd/traffic_model.hpp"

namespace nsd {

inline constexpr int kDefaultStepMs = 500;

/// Counters for packets that never reach a conversation.
struct Diagnostics {
  std::uint64_t direction_ambiguous = 0;
  std::uint64_t irrelevant = 0;
  std::uint64_t before_epoch = 0;
  std::uint64_t out_of_order = 0;

  bool operator==(const Diagnostics&) const = default;
};

/// The ten per-step statistics of one conversation. Sizes are in megabytes,
/// inter-arrival times in milliseconds. A step without packets is all zero.
struct StepFeatures {
  static constexpr std::size_t kCount = 10;

  double ul_max_iat_ms = 0.0;
  double ul_avg_iat_ms = 0.0;
  std::uint32_t ul_pkt_count = 0;
  std::uint32_t dl_pkt_count = 0;
  double ul_min_size_mb = 0.0;
  double dl_min_size_mb = 0.0;
  double ul_max_size_mb = 0.0;
  double dl_max_size_mb = 0.0;
  double ul_avg_size_mb = 0.0;
  double dl_avg_size_mb = 0.0;

  /// Canonical order, matching kFeatureNames.
  std::array<double, kCount> to_array() const;
  bool is_dummy() const { return ul_pkt_count == 0 && dl_pkt_count == 0; }

  bool operator==(const StepFeatures&) const = default;
};

inline constexpr std::array<std::string_view, StepFeatures::kCount> kFeatureNames = {
    "ul_max_iat_ms",  "ul_avg_iat_ms",  "ul_pkt_count",   "dl_pkt_count",   "ul_min_size_mb",
    "dl_min_size_mb", "ul_max_size_mb", "dl_max_size_mb", "ul_avg_size_mb", "dl_avg_size_mb"};

/// Packets of one conversation within one time step, in arrival order.
struct StepGroup {
  std::int64_t step = 0;
  ConversationKey key;
  std::vector<PacketRecord> packets;
};

/// Groups timestamp-sorted packets by (step, conversation). Output is ordered
/// by step, then key. Packets before the epoch, with an ambiguous direction, or
/// belonging to an irrelevant conversation are dropped and counted.
std::vector<StepGroup> bucket_packets(std::span<const PacketRecord> packets, const AddressPlan& plan,
                                      std::int64_t epoch_us, int step_ms = kDefaultStepMs,
                                      Diagnostics* diag = nullptr);

StepFeatures compute_step_features(std::span<const PacketRecord> ul_packets, std::span<const PacketRecord> dl_packets);

/// Per-conversation features of the most recently completed step.
/// `step_index` counts completed steps, so `entries` describe step
/// `step_index - 1` once at least one step has been advanced.
struct TrafficMap {
  std::map<ConversationKey, StepFeatures> entries;
  std::int64_t step_index = 0;
  int step_ms = kDefaultStepMs;

  std::int64_t completed_step() const { return step_index - 1; }
};

using StepPackets = std::map<ConversationKey, std::vector<PacketRecord>>;

/// Replaces the map's entries with features of `groups` (packets of the step
/// `map.step_index`) and advances the step counter. A packet is UL iff its
/// source is the key's local address.
void advance_step(TrafficMap& map, const StepPackets& groups);

/// Incremental decomposition for a live or replayed packet stream. Every
/// step from the epoch onward is emitted, including steps with no traffic.
class StreamingDecomposer {
 public:
  using StepSink = std::function<void(const TrafficMap&)>;

  explicit StreamingDecomposer(AddressPlan plan, int step_ms = kDefaultStepMs,
                               std::optional<std::int64_t> epoch_us = std::nullopt);

  /// Packets must arrive with non-decreasing timestamps; a packet older than
  /// the open step is dropped and counted as out of order.
  void push(const PacketRecord& p, const StepSink& sink);
  /// Emits the open step, if any packet was seen.
  void finish(const StepSink& sink);

  const Diagnostics& diagnostics() const noexcept { return diag_; }
  const AddressPlan& plan() const noexcept { return plan_; }
  std::optional<std::int64_t> epoch_us() const noexcept { return epoch_us_; }

 private:
  void close_step(const StepSink& sink);

  AddressPlan plan_;
  int step_ms_;
  std::optional<std::int64_t> epoch_us_;
  bool started_ = false;
  std::int64_t open_step_ = 0;
  StepPackets pending_;
  TrafficMap map_;
  Diagnostics diag_;
};

/// Batch convenience over StreamingDecomposer: one map per step, in order.
std::vector<TrafficMap> decompose(std::span<const PacketRecord> packets, const AddressPlan& plan,
                                  int step_ms = kDefaultStepMs, std::optional<std::int64_t> epoch_us = std::nullopt,
                                  Diagnostics* diag = nullptr);

/// One feature-dump JSONL line: step, key and the ten features.
std::string feature_dump_line(std::int64_t step, const ConversationKey& key, const StepFeatures& f);

}  // namespace nsd
