#include "nsd/postprocess.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "nsd/errors.hpp"

namespace nsd {

HistoryBuffer::HistoryBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("history capacity must be at least 1");
}

void HistoryBuffer::push(std::size_t label) {
  slots_.push_back(label);
  if (slots_.size() > capacity_) slots_.pop_front();
}

std::size_t HistoryBuffer::count(std::size_t label) const {
  return static_cast<std::size_t>(std::count(slots_.begin(), slots_.end(), label));
}

std::optional<std::size_t> vote(const HistoryBuffer& buffer) {
  if (buffer.empty()) return std::nullopt;
  std::size_t top = *std::max_element(buffer.slots().begin(), buffer.slots().end());
  std::vector<std::size_t> counts(top + 1, 0);
  for (std::size_t label : buffer.slots()) ++counts[label];
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return best;
}

std::size_t fuse_sensors(Layer layer, std::size_t voted, const SensorState& sensors, const HistoryBuffer& l1_buffer,
                         const FusionConfig& config) {
  constexpr auto kRt = static_cast<std::size_t>(L1Class::Rt);
  constexpr auto kNrt = static_cast<std::size_t>(L1Class::Nrt);
  switch (layer) {
    case Layer::L1:
      if (sensors.gaming_flag && voted == kNrt) return kRt;
      break;
    case Layer::L2Rt:
      if (sensors.camera_active && l1_buffer.count(kRt) >= config.camera_rt_threshold) {
        return sub_index(SubClass::Vc);
      }
      break;
    case Layer::L2Nrt:
      break;
  }
  return voted;
}

PostProcessor::PostProcessor(std::size_t history_capacity, FusionConfig fusion)
    : capacity_(history_capacity), fusion_(fusion) {
  if (capacity_ == 0) throw std::invalid_argument("history capacity must be at least 1");
}

PostOutput PostProcessor::update(const ConversationKey& key, const Detection& raw, const SensorState& sensors) {
  auto it = state_.find(key);
  if (it == state_.end()) {
    it = state_.emplace(key, Buffers{HistoryBuffer(capacity_), HistoryBuffer(capacity_), HistoryBuffer(capacity_)})
             .first;
  }
  Buffers& b = it->second;
  b.l1.push(static_cast<std::size_t>(raw.l1));
  if (raw.sub) {
    (parent_of(*raw.sub) == L1Class::Rt ? b.rt : b.nrt).push(sub_index(*raw.sub));
  }

  PostOutput out;
  auto l1_vote = vote(b.l1);
  out.l1_voted = static_cast<L1Class>(*l1_vote);
  out.l1_final = static_cast<L1Class>(fuse_sensors(Layer::L1, *l1_vote, sensors, b.l1, fusion_));

  if (*out.l1_final == L1Class::Rt) {
    if (auto v = vote(b.rt)) {
      out.l2_voted = rt_sub(*v);
      out.l2_final = rt_sub(fuse_sensors(Layer::L2Rt, *v, sensors, b.l1, fusion_));
    } else if (sensors.camera_active &&
               b.l1.count(static_cast<std::size_t>(L1Class::Rt)) >= fusion_.camera_rt_threshold) {
      // No RT sub-class history yet (e.g. promoted by the gaming flag).
      out.l2_final = SubClass::Vc;
    }
  } else if (*out.l1_final == L1Class::Nrt) {
    if (auto v = vote(b.nrt)) {
      out.l2_voted = nrt_sub(*v);
      out.l2_final = nrt_sub(fuse_sensors(Layer::L2Nrt, *v, sensors, b.l1, fusion_));
    }
  }
  return out;
}

void PostProcessor::reset(const ConversationKey& key) { state_.erase(key); }

const PostProcessor::Buffers* PostProcessor::buffers(const ConversationKey& key) const {
  auto it = state_.find(key);
  return it == state_.end() ? nullptr : &it->second;
}

SensorState SensorTrace::at(std::int64_t step) const {
  auto it = states_.find(step);
  if (it != states_.end()) return it->second;
  SensorState s;
  s.step = step;
  return s;
}

SensorTrace read_sensor_trace(std::istream& in) {
  SensorTrace trace;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(text);
      SensorState s;
      s.step = j.at("step").get<std::int64_t>();
      s.gaming_flag = j.value("gaming_flag", false);
      s.camera_active = j.value("camera_active", false);
      trace.set(s);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("sensor trace line " + std::to_string(line) + ": " + e.what(), line);
    }
  }
  return trace;
}

SensorTrace load_sensor_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sensor trace: " + path.string());
  return read_sensor_trace(in);
}

}  // namespace nsd
