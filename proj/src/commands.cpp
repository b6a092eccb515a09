#include "nsd/commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nsd/capture_io.hpp"
#include "nsd/errors.hpp"
#include "nsd/pipeline.hpp"
#include "nsd/synth.hpp"
#include "nsd/workflow.hpp"

namespace nsd::cli {

namespace {

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int cmd_generate(const PipelineConfig&, const GenerateOptions& opt, std::ostream& out, std::ostream& err) {
  Dataset ds;
  try {
    DatasetSpec spec = parse_dataset_spec(read_json_file(opt.spec), opt.spec.parent_path());
    if (opt.seed) spec.seed = *opt.seed;
    ds = generate_dataset(spec);
  } catch (const ConfigError& e) {
    err << "generate: " << e.what() << '\n';
    return kSpecError;
  }
  write_dataset(ds, opt.out_dir);
  out << "generated " << ds.captures.size() << " captures, " << ds.manifest.size() << " manifest rows in "
      << opt.out_dir.string() << '\n';
  return kOk;
}

int cmd_train(const PipelineConfig& config, const TrainOptions& opt, std::ostream& out, std::ostream& err) {
  TrainParams params = config.train;
  try {
    if (opt.params) {
      params = read_json_file(*opt.params).get<TrainParams>();
      params.validate();
    }
  } catch (const std::exception& e) {
    err << "train: bad params: " << e.what() << '\n';
    return kSpecError;
  }

  Manifest manifest;
  TrainingSet set;
  try {
    manifest = load_manifest(opt.manifest);
    auto loader = [&](const std::string& capture) { return parse_capture(manifest.base_dir / capture); };
    set = build_training_set(manifest.rows, loader, opt.layer, opt.split, config);
  } catch (const std::exception& e) {
    err << "train: " << e.what() << '\n';
    return kDataError;
  }
  if (auto absent = missing_class(set, opt.layer)) {
    err << "train: no training windows for class " << *absent << " (layer " << layer_name(opt.layer) << ")\n";
    return kDataError;
  }

  GbdtModel model;
  try {
    model = train(set.x, set.y, layer_classes(opt.layer), params);
  } catch (const std::exception& e) {
    err << "train: " << e.what() << '\n';
    return kDataError;
  }
  save_model(model, opt.out.string());

  nlohmann::ordered_json report;
  report["layer"] = layer_name(opt.layer);
  report["rows"] = set.y.size();
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& c : model.class_labels) counts[c] = std::count(set.y.begin(), set.y.end(), c);
  report["class_counts"] = counts;
  report["rows_per_capture"] = set.rows_per_capture;
  nlohmann::json p = params;
  report["params"] = p;
  report["train_log_loss"] = model.train_log_loss;
  report["feature_importance"] = model.feature_importance();
  write_text(opt.out.string() + ".report.json", report.dump(2) + "\n");

  out << "trained " << layer_name(opt.layer) << " on " << set.y.size() << " windows; log-loss "
      << model.train_log_loss.front() << " -> " << model.train_log_loss.back() << '\n';
  return kOk;
}

int cmd_detect(const PipelineConfig& config, const DetectOptions& opt, std::ostream& out, std::ostream& err) {
  DetectorBundle bundle;
  try {
    bundle = load_bundle(opt.bundle);
    if (bundle.feature_count() != config.window_steps * StepFeatures::kCount) {
      throw ConfigError("bundle feature count does not match the configured window");
    }
  } catch (const std::exception& e) {
    err << "detect: " << e.what() << '\n';
    return kModelError;
  }

  std::vector<std::pair<std::string, std::filesystem::path>> captures;
  SensorTrace sensors;
  try {
    if (opt.capture) captures.emplace_back(opt.capture->filename().string(), *opt.capture);
    if (opt.manifest) {
      Manifest m = load_manifest(*opt.manifest);
      std::vector<std::string> seen;
      for (const auto& row : m.rows) {
        if (opt.split != "all" && row.split != opt.split) continue;
        if (std::find(seen.begin(), seen.end(), row.capture) != seen.end()) continue;
        seen.push_back(row.capture);
        captures.emplace_back(row.capture, m.capture_path(row));
      }
    }
    if (captures.empty()) throw std::runtime_error("nothing to detect: pass --capture or --manifest");
    if (opt.sensors) sensors = load_sensor_trace(*opt.sensors);
  } catch (const std::exception& e) {
    err << "detect: " << e.what() << '\n';
    return kDataError;
  }

  std::ofstream file;
  if (opt.out) {
    file.open(*opt.out, std::ios::binary);
    if (!file) {
      err << "detect: cannot write " << opt.out->string() << '\n';
      return kDataError;
    }
  }
  std::ostream& sink = opt.out ? file : out;

  for (const auto& [name, path] : captures) {
    std::vector<PacketRecord> packets;
    try {
      packets = parse_capture(path);
    } catch (const std::exception& e) {
      err << "detect: " << e.what() << '\n';
      return kDataError;
    }
    const auto start = std::chrono::steady_clock::now();
    StepHook pace;
    if (opt.realtime) {
      pace = [&](std::int64_t step) {
        std::this_thread::sleep_until(start + std::chrono::milliseconds(config.step_ms) * (step + 1));
      };
    }
    auto diag = run_detection(
        packets, config, bundle, sensors,
        [&](const StepRecord& r) {
          sink << record_to_json(r, name).dump() << '\n';
          if (opt.realtime) sink.flush();
        },
        pace);
    if (diag.direction_ambiguous || diag.out_of_order || diag.before_epoch) {
      err << "detect: " << name << ": dropped " << diag.direction_ambiguous << " ambiguous, " << diag.out_of_order
          << " out-of-order, " << diag.before_epoch << " pre-epoch packets\n";
    }
  }
  return kOk;
}

int cmd_evaluate(const PipelineConfig& config, const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.stage != "final" && opt.stage != "raw") {
    err << "evaluate: --stage must be raw or final\n";
    return kSpecError;
  }
  const Stage stage = opt.stage == "raw" ? Stage::Raw : Stage::Final;
  std::map<std::string, double> thresholds = config.thresholds;
  Manifest manifest;
  std::vector<PredictionRow> predictions;
  try {
    if (opt.thresholds) thresholds = read_json_file(*opt.thresholds).get<std::map<std::string, double>>();
    manifest = load_manifest(opt.manifest);
    std::ifstream in(opt.predictions);
    if (!in) throw std::runtime_error("cannot open " + opt.predictions.string());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        predictions.push_back(prediction_from_json(nlohmann::json::parse(line), stage));
      } catch (const std::exception& e) {
        throw ParseError("predictions line " + std::to_string(n) + ": " + e.what(), n);
      }
    }
  } catch (const std::exception& e) {
    err << "evaluate: " << e.what() << '\n';
    return kDataError;
  }
  if (predictions.empty()) {
    err << "evaluate: no predictions to score\n";
    return kDataError;
  }

  Evaluation ev = evaluate_predictions(predictions, manifest.rows);
  if (ev.unresolved) err << "evaluate: warning: " << ev.unresolved << " predictions not in the manifest (excluded)\n";

  static const std::map<std::string, std::string> kNames = {
      {"CG", "Cloud-gaming (CG)"}, {"RT", "Real-time (RT)"},      {"NRT", "Non-real-time (NRT)"},
      {"MG", "Mobile gaming (MG)"}, {"VC", "Video call (VC)"},    {"AC", "Audio call (AC)"},
      {"FD", "File download (FD)"}, {"VS", "Video streaming (VS)"}};
  for (const auto& [layer, reports] : ev.reports) {
    out << "== " << layer_name(layer) << " (" << opt.stage << ") ==\n";
    for (const auto& r : reports) out << render_table(r, kNames) << '\n';
  }

  bool passed = true;
  nlohmann::ordered_json checks = nlohmann::ordered_json::object();
  for (const auto& [layer_key, minimum] : thresholds) {
    auto layer = parse_layer(layer_key);
    double acc = -1.0;
    if (layer && ev.reports.contains(*layer)) acc = ev.reports.at(*layer).front().accuracy;
    bool ok = acc >= minimum;
    passed = passed && ok;
    checks[layer_key] = {{"accuracy", acc}, {"minimum", minimum}, {"passed", ok}};
    out << "threshold " << layer_key << ": accuracy " << acc << " >= " << minimum << (ok ? " ok" : " FAILED") << '\n';
  }

  auto j = evaluation_to_json(ev);
  j["stage"] = opt.stage;
  j["thresholds"] = checks;
  j["passed"] = passed;
  if (opt.report) write_text(*opt.report, j.dump(2) + "\n");
  return passed ? kOk : kThresholdMiss;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Network service detection: generate, train, detect, evaluate"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Pipeline config JSON")->check(CLI::ExistingFile);

  GenerateOptions gen;
  std::uint64_t seed = 0;
  auto* g = app.add_subcommand("generate", "Generate a labeled synthetic dataset");
  g->add_option("--spec", gen.spec, "Generation spec JSON")->required();
  g->add_option("--out", gen.out_dir, "Output directory")->required();
  auto* seed_opt = g->add_option("--seed", seed, "Override the spec's seed");

  TrainOptions tr;
  std::string layer = "l1";
  std::string params_path;
  auto* t = app.add_subcommand("train", "Train one detector from a manifest");
  t->add_option("--manifest", tr.manifest, "Dataset manifest")->required();
  t->add_option("--layer", layer, "l1, l2rt or l2nrt")->required()->check(CLI::IsMember({"l1", "l2rt", "l2nrt"}));
  t->add_option("--out", tr.out, "Model output path")->required();
  auto* params_opt = t->add_option("--params", params_path, "Training params JSON");
  t->add_option("--split", tr.split, "Manifest split to train on (train, test, all)");

  DetectOptions det;
  std::string capture_path, det_manifest, sensors_path, det_out;
  auto* d = app.add_subcommand("detect", "Run streaming detection over captures");
  auto* cap_opt = d->add_option("--capture", capture_path, "Capture file (.jsonl or .pcap)");
  auto* man_opt = d->add_option("--manifest", det_manifest, "Replay every capture of a manifest split");
  d->add_option("--split", det.split, "Split used with --manifest (default test)");
  d->add_option("--bundle", det.bundle, "Bundle manifest JSON")->required();
  auto* sens_opt = d->add_option("--sensors", sensors_path, "Sensor trace JSONL");
  auto* out_opt = d->add_option("--out", det_out, "Write predictions here instead of stdout");
  d->add_flag("--realtime", det.realtime, "Pace replay at one step per step period");

  EvaluateOptions ev;
  std::string thresholds_path, report_path;
  auto* e = app.add_subcommand("evaluate", "Score predictions against a manifest");
  e->add_option("--pred", ev.predictions, "Detect output JSONL")->required();
  e->add_option("--manifest", ev.manifest, "Dataset manifest")->required();
  auto* thr_opt = e->add_option("--thresholds", thresholds_path, "Per-layer minimum accuracy JSON");
  auto* rep_opt = e->add_option("--report", report_path, "Write the JSON report here");
  e->add_option("--stage", ev.stage, "raw or final (default final)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err);
  }

  PipelineConfig config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
  } catch (const ConfigError& ex) {
    err << ex.what() << '\n';
    return kSpecError;
  }

  try {
    if (g->parsed()) {
      if (*seed_opt) gen.seed = seed;
      return cmd_generate(config, gen, out, err);
    }
    if (t->parsed()) {
      tr.layer = *parse_layer(layer);
      if (*params_opt) tr.params = params_path;
      return cmd_train(config, tr, out, err);
    }
    if (d->parsed()) {
      if (*cap_opt) det.capture = capture_path;
      if (*man_opt) det.manifest = det_manifest;
      if (*sens_opt) det.sensors = sensors_path;
      if (*out_opt) det.out = det_out;
      return cmd_detect(config, det, out, err);
    }
    if (e->parsed()) {
      if (*thr_opt) ev.thresholds = thresholds_path;
      if (*rep_opt) ev.report = report_path;
      return cmd_evaluate(config, ev, out, err);
    }
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kDataError;
  }
  return kSpecError;
}

}  // namespace nsd::cli
