#include "nsd/config.hpp"

#include <fstream>

#include "nsd/errors.hpp"

namespace nsd {

void PipelineConfig::validate() const {
  if (step_ms <= 0) throw ConfigError("config: step_ms must be positive");
  if (window_steps < 1) throw ConfigError("config: window_steps must be >= 1");
  if (table_capacity < 1) throw ConfigError("config: table_capacity must be >= 1");
  if (history_capacity < 1) throw ConfigError("config: history_capacity must be >= 1");
  if (local_ips.empty()) throw ConfigError("config: local_ips must list the device's addresses");
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: train: ") + e.what());
  }
}

nlohmann::ordered_json config_to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["step_ms"] = c.step_ms;
  j["window_steps"] = c.window_steps;
  j["table_capacity"] = c.table_capacity;
  j["history_capacity"] = c.history_capacity;
  j["camera_rt_threshold"] = c.camera_rt_threshold;
  j["idle_drop_steps"] = c.idle_drop_steps;
  auto ips = nlohmann::ordered_json::array();
  for (const auto& ip : c.local_ips) ips.push_back(ip.to_string());
  j["local_ips"] = ips;
  auto nets = nlohmann::ordered_json::array();
  for (const auto& s : c.subnets) nets.push_back(s.to_string());
  j["subnets"] = nets;
  nlohmann::json train = c.train;
  j["train"] = train;
  j["models"] = c.models;
  j["thresholds"] = c.thresholds;
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    c.step_ms = j.value("step_ms", c.step_ms);
    c.window_steps = j.value("window_steps", c.window_steps);
    c.table_capacity = j.value("table_capacity", c.table_capacity);
    c.history_capacity = j.value("history_capacity", c.history_capacity);
    c.camera_rt_threshold = j.value("camera_rt_threshold", c.camera_rt_threshold);
    c.idle_drop_steps = j.value("idle_drop_steps", c.idle_drop_steps);
    if (j.contains("local_ips")) {
      c.local_ips.clear();
      for (const auto& ip : j.at("local_ips")) c.local_ips.push_back(IpAddress::parse(ip.get<std::string>()));
    }
    if (j.contains("subnets")) {
      for (const auto& s : j.at("subnets")) c.subnets.push_back(Subnet::parse(s.get<std::string>()));
    }
    if (j.contains("train")) c.train = j.at("train").get<TrainParams>();
    if (j.contains("models")) c.models = j.at("models").get<std::map<std::string, std::string>>();
    if (j.contains("thresholds")) c.thresholds = j.at("thresholds").get<std::map<std::string, double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace nsd
