#include "nsd/input_management.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace nsd {

std::optional<InputVector> assemble_input(const InputBuffer& buffer, std::size_t window_steps) {
  if (buffer.fill_count < window_steps || buffer.slots.size() < window_steps) return std::nullopt;
  InputVector v;
  v.key = buffer.key;
  v.step_index = buffer.last_step;
  v.values.reserve(window_steps * StepFeatures::kCount);
  for (auto it = buffer.slots.end() - static_cast<std::ptrdiff_t>(window_steps); it != buffer.slots.end(); ++it) {
    auto row = it->to_array();
    v.values.insert(v.values.end(), row.begin(), row.end());
  }
  return v;
}

InputTable::InputTable(InputConfig config) : config_(config) {
  if (config_.table_capacity == 0 || config_.window_steps == 0) {
    throw std::invalid_argument("input table capacity and window must be at least 1");
  }
}

void InputTable::push(InputBuffer& buffer, const StepFeatures& f, std::int64_t step) {
  buffer.slots.push_back(f);
  if (buffer.slots.size() > config_.window_steps) buffer.slots.pop_front();
  buffer.fill_count = std::min(buffer.fill_count + 1, config_.window_steps);
  buffer.last_step = step;
  if (f.is_dummy()) {
    ++buffer.idle_steps;
  } else {
    buffer.idle_steps = 0;
    buffer.last_active_step = step;
  }
}

IngestResult InputTable::ingest_step(const TrafficMap& map) {
  IngestResult result;
  const std::int64_t step = map.completed_step();
  static const StepFeatures kDummy{};

  std::vector<ConversationKey> fresh;
  for (const auto& [key, features] : map.entries) {
    auto it = buffers_.find(key);
    if (it == buffers_.end()) {
      fresh.push_back(key);
    } else {
      push(it->second, features, step);
    }
  }
  for (auto& [key, buffer] : buffers_) {
    if (!map.entries.contains(key)) push(buffer, kDummy, step);
  }
  if (config_.idle_drop_steps > 0) {
    for (auto it = buffers_.begin(); it != buffers_.end();) {
      if (it->second.idle_steps >= config_.idle_drop_steps) {
        result.idle_dropped.push_back(it->first);
        it = buffers_.erase(it);
      } else {
        ++it;
      }
    }
  }

  for (const auto& key : fresh) {
    if (buffers_.size() >= config_.table_capacity) {
      auto victim = std::min_element(buffers_.begin(), buffers_.end(), [](const auto& a, const auto& b) {
        return std::tie(a.second.last_active_step, a.second.fill_count, a.first) <
               std::tie(b.second.last_active_step, b.second.fill_count, b.first);
      });
      result.evicted.push_back(victim->first);
      buffers_.erase(victim);
    }
    InputBuffer buffer;
    buffer.key = key;
    push(buffer, map.entries.at(key), step);
    buffers_.emplace(key, std::move(buffer));
  }
  return result;
}

std::vector<InputVector> InputTable::assemble_all() const {
  std::vector<InputVector> out;
  for (const auto& [key, buffer] : buffers_) {
    if (auto v = assemble_input(buffer, config_.window_steps)) out.push_back(std::move(*v));
  }
  return out;
}

}  // namespace nsd
