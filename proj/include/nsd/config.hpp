#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsd/gbdt.hpp"
#include "nsd/input_management.hpp"
#include "nsd/postprocess.hpp"
#include "nsd/traffic_model.hpp"

namespace nsd {

/// Every tunable of the detection pipeline. Defaults are the reference
/// constants: 500 ms steps, 6-step windows, a 7-entry input table and
/// 7-slot prediction histories.
struct PipelineConfig {
  int step_ms = kDefaultStepMs;
  std::size_t window_steps = 6;
  std::size_t table_capacity = 7;
  std::size_t history_capacity = 7;
  std::size_t camera_rt_threshold = 3;
  std::size_t idle_drop_steps = 6;
  std::vector<IpAddress> local_ips{IpAddress::v4(0xC0A8320Au)};  // 192.168.50.10
  std::vector<Subnet> subnets;
  TrainParams train;
  std::map<std::string, std::string> models;   // layer -> model path
  std::map<std::string, double> thresholds;    // layer -> minimum accuracy

  /// Throws ConfigError when a value is out of range.
  void validate() const;
  AddressPlan address_plan() const { return AddressPlan(local_ips, subnets); }
  InputConfig input_config() const { return {table_capacity, window_steps, idle_drop_steps}; }
  FusionConfig fusion_config() const { return {camera_rt_threshold}; }
};

nlohmann::ordered_json config_to_json(const PipelineConfig& c);
/// Missing keys keep their defaults. Throws ConfigError.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace nsd
