#include "nsd/decomposition.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include <nlohmann/json.hpp>

#include "nsd/errors.hpp"

namespace nsd {

std::array<double, StepFeatures::kCount> StepFeatures::to_array() const {
  return {ul_max_iat_ms,
          ul_avg_iat_ms,
          static_cast<double>(ul_pkt_count),
          static_cast<double>(dl_pkt_count),
          ul_min_size_mb,
          dl_min_size_mb,
          ul_max_size_mb,
          dl_max_size_mb,
          ul_avg_size_mb,
          dl_avg_size_mb};
}

namespace {

constexpr double kBytesPerMb = 1e6;

struct SizeStats {
  double min_mb = 0.0;
  double max_mb = 0.0;
  double avg_mb = 0.0;
};

SizeStats size_stats(std::span<const PacketRecord> packets) {
  if (packets.empty()) return {};
  std::uint32_t lo = packets.front().size_bytes;
  std::uint32_t hi = lo;
  std::uint64_t total = 0;
  for (const auto& p : packets) {
    lo = std::min(lo, p.size_bytes);
    hi = std::max(hi, p.size_bytes);
    total += p.size_bytes;
  }
  return {lo / kBytesPerMb, hi / kBytesPerMb,
          static_cast<double>(total) / static_cast<double>(packets.size()) / kBytesPerMb};
}

}  // namespace

StepFeatures compute_step_features(std::span<const PacketRecord> ul_packets, std::span<const PacketRecord> dl_packets) {
  StepFeatures f;
  f.ul_pkt_count = static_cast<std::uint32_t>(ul_packets.size());
  f.dl_pkt_count = static_cast<std::uint32_t>(dl_packets.size());

  if (ul_packets.size() >= 2) {
    std::int64_t max_gap = 0;
    for (std::size_t i = 1; i < ul_packets.size(); ++i) {
      max_gap = std::max(max_gap, ul_packets[i].timestamp_us - ul_packets[i - 1].timestamp_us);
    }
    // Gaps telescope: their sum is last - first.
    std::int64_t span_us = ul_packets.back().timestamp_us - ul_packets.front().timestamp_us;
    f.ul_max_iat_ms = static_cast<double>(max_gap) / 1000.0;
    f.ul_avg_iat_ms = static_cast<double>(span_us) / 1000.0 / static_cast<double>(ul_packets.size() - 1);
  }

  auto ul = size_stats(ul_packets);
  auto dl = size_stats(dl_packets);
  f.ul_min_size_mb = ul.min_mb;
  f.ul_max_size_mb = ul.max_mb;
  f.ul_avg_size_mb = ul.avg_mb;
  f.dl_min_size_mb = dl.min_mb;
  f.dl_max_size_mb = dl.max_mb;
  f.dl_avg_size_mb = dl.avg_mb;
  return f;
}

std::vector<StepGroup> bucket_packets(std::span<const PacketRecord> packets, const AddressPlan& plan,
                                      std::int64_t epoch_us, int step_ms, Diagnostics* diag) {
  if (step_ms <= 0) throw std::invalid_argument("step_ms must be positive");
  const std::int64_t step_us = static_cast<std::int64_t>(step_ms) * 1000;
  Diagnostics local;
  Diagnostics& d = diag ? *diag : local;

  std::map<std::pair<std::int64_t, ConversationKey>, std::vector<PacketRecord>> groups;
  for (const auto& p : packets) {
    if (p.timestamp_us < epoch_us) {
      ++d.before_epoch;
      continue;
    }
    ConversationKey key;
    try {
      key = conversation_key(p, plan);
    } catch (const DirectionError&) {
      ++d.direction_ambiguous;
      continue;
    }
    if (!is_relevant(key, plan)) {
      ++d.irrelevant;
      continue;
    }
    groups[{(p.timestamp_us - epoch_us) / step_us, key}].push_back(p);
  }

  std::vector<StepGroup> out;
  out.reserve(groups.size());
  for (auto& [where, pkts] : groups) out.push_back({where.first, where.second, std::move(pkts)});
  return out;
}

void advance_step(TrafficMap& map, const StepPackets& groups) {
  map.entries.clear();
  std::vector<PacketRecord> ul;
  std::vector<PacketRecord> dl;
  for (const auto& [key, packets] : groups) {
    ul.clear();
    dl.clear();
    for (const auto& p : packets) (p.src_ip == key.local_ip ? ul : dl).push_back(p);
    map.entries.emplace(key, compute_step_features(ul, dl));
  }
  ++map.step_index;
}

StreamingDecomposer::StreamingDecomposer(AddressPlan plan, int step_ms, std::optional<std::int64_t> epoch_us)
    : plan_(std::move(plan)), step_ms_(step_ms), epoch_us_(epoch_us) {
  if (step_ms_ <= 0) throw std::invalid_argument("step_ms must be positive");
  map_.step_ms = step_ms_;
}

void StreamingDecomposer::close_step(const StepSink& sink) {
  advance_step(map_, pending_);
  pending_.clear();
  ++open_step_;
  sink(map_);
}

void StreamingDecomposer::push(const PacketRecord& p, const StepSink& sink) {
  if (!epoch_us_) epoch_us_ = p.timestamp_us;
  if (p.timestamp_us < *epoch_us_) {
    ++diag_.before_epoch;
    return;
  }
  const std::int64_t step = (p.timestamp_us - *epoch_us_) / (static_cast<std::int64_t>(step_ms_) * 1000);
  started_ = true;
  if (step < open_step_) {
    ++diag_.out_of_order;
    return;
  }
  while (open_step_ < step) close_step(sink);

  ConversationKey key;
  try {
    key = conversation_key(p, plan_);
  } catch (const DirectionError&) {
    ++diag_.direction_ambiguous;
    return;
  }
  if (!is_relevant(key, plan_)) {
    ++diag_.irrelevant;
    return;
  }
  pending_[key].push_back(p);
}

void StreamingDecomposer::finish(const StepSink& sink) {
  if (started_) close_step(sink);
  started_ = false;
}

std::vector<TrafficMap> decompose(std::span<const PacketRecord> packets, const AddressPlan& plan, int step_ms,
                                  std::optional<std::int64_t> epoch_us, Diagnostics* diag) {
  StreamingDecomposer dec(plan, step_ms, epoch_us);
  std::vector<TrafficMap> maps;
  auto sink = [&maps](const TrafficMap& m) { maps.push_back(m); };
  for (const auto& p : packets) dec.push(p, sink);
  dec.finish(sink);
  if (diag) *diag = dec.diagnostics();
  return maps;
}

std::string feature_dump_line(std::int64_t step, const ConversationKey& key, const StepFeatures& f) {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["key"] = key.to_string();
  auto values = f.to_array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i == 2) {
      j[std::string(kFeatureNames[i])] = f.ul_pkt_count;
    } else if (i == 3) {
      j[std::string(kFeatureNames[i])] = f.dl_pkt_count;
    } else {
      j[std::string(kFeatureNames[i])] = values[i];
    }
  }
  return j.dump();
}

}  // namespace nsd
