#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "nsd/config.hpp"
#include "nsd/postprocess.hpp"

namespace nsd::cli {

/// Process exit codes; part of the tool's stable interface.
enum ExitCode : int {
  kOk = 0,
  kThresholdMiss = 1,
  kSpecError = 2,
  kDataError = 3,
  kModelError = 4,
};

struct GenerateOptions {
  std::filesystem::path spec;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
};

struct TrainOptions {
  std::filesystem::path manifest;
  Layer layer = Layer::L1;
  std::filesystem::path out;
  std::optional<std::filesystem::path> params;
  std::string split = "train";
};

struct DetectOptions {
  std::optional<std::filesystem::path> capture;
  std::optional<std::filesystem::path> manifest;  // replay every capture of a split
  std::string split = "test";
  std::filesystem::path bundle;
  std::optional<std::filesystem::path> sensors;
  std::optional<std::filesystem::path> out;  // stdout when absent
  bool realtime = false;
};

struct EvaluateOptions {
  std::filesystem::path predictions;
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> thresholds;
  std::optional<std::filesystem::path> report;
  std::string stage = "final";
};

int cmd_generate(const PipelineConfig& config, const GenerateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_train(const PipelineConfig& config, const TrainOptions& opt, std::ostream& out, std::ostream& err);
int cmd_detect(const PipelineConfig& config, const DetectOptions& opt, std::ostream& out, std::ostream& err);
int cmd_evaluate(const PipelineConfig& config, const EvaluateOptions& opt, std::ostream& out, std::ostream& err);

/// Parses the command line and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nsd::cli
