#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "nsd/capture_io.hpp"
#include "nsd/commands.hpp"
#include "nsd/config.hpp"
#include "nsd/decomposition.hpp"
#include "nsd/errors.hpp"
#include "nsd/pipeline.hpp"
#include "nsd/synth.hpp"
#include "nsd/workflow.hpp"

using namespace nsd;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "nsd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = nsd::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::vector<nlohmann::json> read_jsonl(const fs::path& p) {
  std::vector<nlohmann::json> rows;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  }
  return rows;
}

// One small trained dataset shared by the end-to-end cases.
struct Workspace {
  fs::path dir = fs::temp_directory_path() / "nsd_cli_test";
  Workspace() {
    fs::remove_all(dir);
    fs::create_directories(dir);
    spit(dir / "spec.json", R"({
      "seed": 11, "test_fraction": 0.25,
      "grid": [{"profiles":["cg","mg","vc","ac","fd","vs"],"bands":["2.4GHz","5GHz"],"count":2,"duration_s":6}],
      "mixed": [{"name":"cg_vs","profiles":["cg","vs"],"duration_s":8}]
    })");
    spit(dir / "params.json", R"({"n_rounds": 20, "max_depth": 3, "learning_rate": 0.3})");
    REQUIRE(run_cli({"generate", "--spec", (dir / "spec.json").string(), "--out", (dir / "data").string()}).code == 0);
    for (const char* layer : {"l1", "l2rt", "l2nrt"}) {
      auto r = run_cli({"train", "--manifest", (dir / "data/manifest.json").string(), "--layer", layer, "--out",
                    (dir / (std::string(layer) + ".json")).string(), "--params", (dir / "params.json").string()});
      REQUIRE_MESSAGE(r.code == 0, r.err);
    }
    write_bundle_manifest(dir / "bundle.json", "l1.json", "l2rt.json", "l2nrt.json");
  }
  ~Workspace() { fs::remove_all(dir); }
};

Workspace& workspace() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_CASE("config defaults, json round-trip and validation") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.step_ms == 500);
  CHECK(c.window_steps == 6);
  CHECK(c.table_capacity == 7);
  CHECK(c.history_capacity == 7);
  CHECK(c.camera_rt_threshold == 3);
  auto j = config_to_json(c);
  auto back = config_from_json(j);
  CHECK(config_to_json(back).dump() == j.dump());
  auto bad = nlohmann::json::parse(R"({"window_steps": 0})");
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"local_ips": ["x"]})")), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("layer names") {
  CHECK(parse_layer("l2rt") == Layer::L2Rt);
  CHECK_FALSE(parse_layer("L1"));
  CHECK(layer_classes(Layer::L2Nrt) == std::vector<std::string>{"FD", "VS"});
}

TEST_CASE("command line errors") {
  CHECK(run_cli({}).code != 0);
  CHECK(run_cli({"train", "--manifest", "m.json", "--layer", "l3", "--out", "x"}).code != 0);
  CHECK(run_cli({"bogus"}).code != 0);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("generate: minimal spec, determinism, invalid spec") {
  auto dir = fs::temp_directory_path() / "nsd_cli_generate";
  fs::remove_all(dir);
  fs::create_directories(dir);
  spit(dir / "spec.json", R"({"seed": 1, "flows": [{"profile": "cg", "duration_s": 3}]})");
  auto r = run_cli({"generate", "--spec", (dir / "spec.json").string(), "--out", (dir / "a").string()});
  REQUIRE(r.code == 0);
  auto m = load_manifest(dir / "a/manifest.json");
  CHECK(m.rows.size() == 1);
  CHECK(fs::exists(m.capture_path(m.rows[0])));
  run_cli({"generate", "--spec", (dir / "spec.json").string(), "--out", (dir / "b").string(), "--seed", "9"});
  run_cli({"generate", "--spec", (dir / "spec.json").string(), "--out", (dir / "c").string(), "--seed", "9"});
  CHECK(slurp(dir / "b/manifest.json") == slurp(dir / "c/manifest.json"));
  CHECK(slurp(dir / "b" / m.rows[0].capture) == slurp(dir / "c" / m.rows[0].capture));
  CHECK(slurp(dir / "a" / m.rows[0].capture) != slurp(dir / "b" / m.rows[0].capture));

  spit(dir / "bad.json", R"({"flows": [{"profile": "unknown"}]})");
  CHECK(run_cli({"generate", "--spec", (dir / "bad.json").string(), "--out", (dir / "d").string()}).code == nsd::cli::kSpecError);
  spit(dir / "broken.json", "{");
  CHECK(run_cli({"generate", "--spec", (dir / "broken.json").string(), "--out", (dir / "d").string()}).code ==
        nsd::cli::kSpecError);
  fs::remove_all(dir);
}

TEST_CASE("train: metadata, L2 row counts and log-loss") {
  auto& w = workspace();
  auto l1 = load_model((w.dir / "l1.json").string());
  CHECK(l1.class_labels == std::vector<std::string>{"CG", "RT", "NRT"});
  CHECK(l1.feature_count == 60);

  // Independent window count: a single-flow capture of S steps yields S - 5 windows.
  auto m = load_manifest(w.dir / "data/manifest.json");
  std::size_t expected = 0;
  for (const auto& row : m.rows) {
    if (row.split != "train" || row.l1 != L1Class::Rt) continue;
    auto steps = decompose(parse_capture(m.capture_path(row)), AddressPlan({m.local_ip})).size();
    expected += steps >= 6 ? steps - 5 : 0;
  }
  auto report = nlohmann::json::parse(slurp(w.dir / "l2rt.json.report.json"));
  CHECK(report["rows"].get<std::size_t>() == expected);
  CHECK(load_model((w.dir / "l2rt.json").string()).class_labels == std::vector<std::string>{"MG", "VC", "AC"});

  auto curve = report["train_log_loss"].get<std::vector<double>>();
  CHECK(curve.size() == 21);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] <= curve[i - 1] + 1e-12);
}

TEST_CASE("train: a missing class exits 3 and names it") {
  auto dir = fs::temp_directory_path() / "nsd_cli_missing";
  fs::remove_all(dir);
  fs::create_directories(dir);
  spit(dir / "spec.json", R"({"flows": [{"profile": "mg", "duration_s": 4}, {"profile": "vc", "duration_s": 4}]})");
  REQUIRE(run_cli({"generate", "--spec", (dir / "spec.json").string(), "--out", dir.string()}).code == 0);
  auto r = run_cli({"train", "--manifest", (dir / "manifest.json").string(), "--layer", "l2rt", "--out",
                (dir / "m.json").string()});
  CHECK(r.code == nsd::cli::kDataError);
  CHECK(r.err.find("AC") != std::string::npos);
  r = run_cli({"train", "--manifest", (dir / "manifest.json").string(), "--layer", "l1", "--out",
           (dir / "m.json").string()});
  CHECK(r.code == nsd::cli::kDataError);
  CHECK(r.err.find("CG") != std::string::npos);
  CHECK(run_cli({"train", "--manifest", (dir / "nope.json").string(), "--layer", "l1", "--out", "x"}).code ==
        nsd::cli::kDataError);
  fs::remove_all(dir);
}

TEST_CASE("detect: window gate, single flow, mixed flows") {
  auto& w = workspace();
  const auto local = IpAddress::parse("192.168.50.10");
  const auto remote = IpAddress::parse("203.0.113.200");

  auto short_flow = generate_flow(default_profiles().at("cg"), {}, 2.0, local, remote, 1);
  write_jsonl_capture(w.dir / "short.jsonl", short_flow.packets);
  auto r = run_cli({"detect", "--capture", (w.dir / "short.jsonl").string(), "--bundle", (w.dir / "bundle.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());

  auto cg = generate_flow(default_profiles().at("cg"), {}, 10.0, local, remote, 2);
  write_jsonl_capture(w.dir / "cg.jsonl", cg.packets);
  r = run_cli({"detect", "--capture", (w.dir / "cg.jsonl").string(), "--bundle", (w.dir / "bundle.json").string(),
           "--out", (w.dir / "cg_pred.jsonl").string()});
  REQUIRE(r.code == 0);
  auto rows = read_jsonl(w.dir / "cg_pred.jsonl");
  CHECK(rows.size() >= 14);
  for (const auto& row : rows) {
    CHECK(row["step"].get<int>() >= 5);
    CHECK(row["l1"] == "CG");
    CHECK(row["multilabel"] == nlohmann::json({true, false, false}));
  }

  // Mixed CG + VS from the generated manifest.
  auto m = load_manifest(w.dir / "data/manifest.json");
  std::map<ConversationKey, std::string> truth;
  std::string mixed;
  for (const auto& row : m.rows) {
    if (row.capture.find("mixed") == std::string::npos) continue;
    mixed = row.capture;
    truth[row.key] = std::string(to_string(row.l1));
  }
  REQUIRE(truth.size() == 2);
  r = run_cli({"detect", "--capture", (m.base_dir / mixed).string(), "--bundle", (w.dir / "bundle.json").string(),
           "--out", (w.dir / "mixed_pred.jsonl").string()});
  REQUIRE(r.code == 0);
  std::map<int, std::vector<nlohmann::json>> by_step;
  for (auto& row : read_jsonl(w.dir / "mixed_pred.jsonl")) by_step[row["step"].get<int>()].push_back(row);
  int checked = 0;
  for (const auto& [step, recs] : by_step) {
    if (recs.size() != 2) continue;
    bool correct = true;
    for (const auto& rec : recs) correct = correct && rec["l1"] == truth.at(ConversationKey::parse(rec["key"].get<std::string>()));
    if (!correct) continue;
    ++checked;
    for (const auto& rec : recs) CHECK(rec["multilabel"] == nlohmann::json({true, false, true}));
  }
  CHECK(checked > 0);
}

TEST_CASE("detect: bundle problems exit 4, capture problems exit 3") {
  auto& w = workspace();
  write_bundle_manifest(w.dir / "swapped.json", "l2rt.json", "l1.json", "l2nrt.json");
  CHECK(run_cli({"detect", "--capture", (w.dir / "cg.jsonl").string(), "--bundle", (w.dir / "swapped.json").string()})
            .code == nsd::cli::kModelError);
  CHECK(run_cli({"detect", "--capture", (w.dir / "cg.jsonl").string(), "--bundle", (w.dir / "none.json").string()}).code ==
        nsd::cli::kModelError);
  spit(w.dir / "bad.jsonl", "{\"ts_us\":1}\n");
  CHECK(run_cli({"detect", "--capture", (w.dir / "bad.jsonl").string(), "--bundle", (w.dir / "bundle.json").string()})
            .code == nsd::cli::kDataError);
  CHECK(run_cli({"detect", "--bundle", (w.dir / "bundle.json").string()}).code == nsd::cli::kDataError);
}

TEST_CASE("detect: sensor trace drives the fused outputs") {
  auto& w = workspace();
  DetectorBundle b = fixture::selector_bundle();
  save_model(b.l1, (w.dir / "sel_l1.json").string());
  save_model(*b.l2_rt, (w.dir / "sel_rt.json").string());
  save_model(*b.l2_nrt, (w.dir / "sel_nrt.json").string());
  write_bundle_manifest(w.dir / "sel.json", "sel_l1.json", "sel_rt.json", "sel_nrt.json");
  // Feature 0 is ul_max_iat_ms: 2 ms gaps give NRT (class 2), and feature 1 (avg IAT) 2 gives VS.
  std::vector<PacketRecord> pkts;
  for (int s = 0; s < 12; ++s) {
    for (int i = 0; i < 3; ++i) {
      PacketRecord p;
      p.timestamp_us = s * 500'000 + i * 2000;
      p.src_ip = IpAddress::parse("192.168.50.10");
      p.dst_ip = IpAddress::parse("203.0.113.1");
      p.size_bytes = 100;
      pkts.push_back(p);
    }
  }
  write_jsonl_capture(w.dir / "sel.jsonl", pkts);
  spit(w.dir / "sensors.jsonl", R"({"step": 8, "gaming_flag": true})" "\n");
  auto r = run_cli({"detect", "--capture", (w.dir / "sel.jsonl").string(), "--bundle", (w.dir / "sel.json").string(),
                "--sensors", (w.dir / "sensors.jsonl").string(), "--out", (w.dir / "sel_pred.jsonl").string()});
  REQUIRE(r.code == 0);
  auto rows = read_jsonl(w.dir / "sel_pred.jsonl");
  REQUIRE(rows.size() == 7);
  for (const auto& row : rows) {
    CHECK(row["l1"] == "NRT");
    CHECK(row["l2"] == "VS");
    CHECK(row["l1_voted"] == "NRT");
    bool promoted = row["step"] == 8;
    CHECK(row["l1_final"] == (promoted ? "RT" : "NRT"));
    CHECK(row["multilabel"] == nlohmann::json({false, false, true}));
  }
}

TEST_CASE("evaluate: perfect predictions, slicing, thresholds") {
  auto& w = workspace();
  auto m = load_manifest(w.dir / "data/manifest.json");
  // Perfect predictions built from the manifest itself.
  std::ofstream pred(w.dir / "perfect.jsonl");
  std::set<std::string> bands;
  for (const auto& row : m.rows) {
    nlohmann::json j;
    j["capture"] = row.capture;
    j["key"] = row.key.to_string();
    j["l1"] = j["l1_final"] = to_string(row.l1);
    j["l2"] = j["l2_final"] = row.sub ? nlohmann::json(to_string(*row.sub)) : nlohmann::json(nullptr);
    pred << j.dump() << '\n';
    bands.insert(to_string(row.condition.band));
  }
  pred << R"({"capture":"elsewhere","key":"10.0.0.1-10.0.0.2","l1_final":"CG","l2_final":null})" << '\n';
  pred.close();
  auto r = run_cli({"evaluate", "--pred", (w.dir / "perfect.jsonl").string(), "--manifest",
                (w.dir / "data/manifest.json").string(), "--report", (w.dir / "eval.json").string()});
  CHECK(r.code == 0);
  CHECK(r.err.find("1 predictions not in the manifest") != std::string::npos);
  auto rep = nlohmann::json::parse(slurp(w.dir / "eval.json"));
  std::size_t reports = 0;
  for (auto& [layer, arr] : rep["layers"].items()) {
    reports += arr.size();
    for (auto& one : arr) CHECK(one["accuracy"].get<double>() == 1.0);
  }
  CHECK(reports == 3 * (1 + bands.size()));
  CHECK(rep["unresolved"] == 1);

  // L2-RT only counts rows whose true L1 is RT.
  std::size_t rt_rows = 0;
  for (const auto& row : m.rows) rt_rows += row.l1 == L1Class::Rt;
  CHECK(rep["layers"]["l2rt"][0]["total"].get<std::size_t>() == rt_rows);

  spit(w.dir / "strict.json", R"({"l1": 1.01})");
  r = run_cli({"evaluate", "--pred", (w.dir / "perfect.jsonl").string(), "--manifest",
           (w.dir / "data/manifest.json").string(), "--thresholds", (w.dir / "strict.json").string()});
  CHECK(r.code == nsd::cli::kThresholdMiss);
  spit(w.dir / "ok.json", R"({"l1": 0.99, "l2rt": 0.9})");
  r = run_cli({"evaluate", "--pred", (w.dir / "perfect.jsonl").string(), "--manifest",
           (w.dir / "data/manifest.json").string(), "--thresholds", (w.dir / "ok.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("Accuracy") != std::string::npos);
  CHECK(run_cli({"evaluate", "--pred", (w.dir / "perfect.jsonl").string(), "--manifest",
             (w.dir / "data/manifest.json").string(), "--stage", "middle"})
            .code == nsd::cli::kSpecError);
  spit(w.dir / "garbage.jsonl", "not json\n");
  CHECK(run_cli({"evaluate", "--pred", (w.dir / "garbage.jsonl").string(), "--manifest",
             (w.dir / "data/manifest.json").string()})
            .code == nsd::cli::kDataError);
}

TEST_CASE("evaluate: full detect output round trip on the test split") {
  auto& w = workspace();
  auto r = run_cli({"detect", "--manifest", (w.dir / "data/manifest.json").string(), "--bundle",
                (w.dir / "bundle.json").string(), "--out", (w.dir / "test_pred.jsonl").string()});
  REQUIRE(r.code == 0);
  r = run_cli({"evaluate", "--pred", (w.dir / "test_pred.jsonl").string(), "--manifest",
           (w.dir / "data/manifest.json").string(), "--stage", "raw"});
  CHECK(r.code == 0);
  CHECK(r.out.find("== l1 (raw) ==") != std::string::npos);
}

TEST_CASE("config file is honoured") {
  auto& w = workspace();
  PipelineConfig c;
  c.window_steps = 4;
  spit(w.dir / "cfg.json", config_to_json(c).dump());
  // The bundle expects 60 features; a 4-step window is a model mismatch.
  auto r = run_cli({"--config", (w.dir / "cfg.json").string(), "detect", "--capture", (w.dir / "cg.jsonl").string(),
                "--bundle", (w.dir / "bundle.json").string()});
  CHECK(r.code == nsd::cli::kModelError);
  spit(w.dir / "badcfg.json", R"({"step_ms": -1})");
  r = run_cli({"--config", (w.dir / "badcfg.json").string(), "detect", "--capture", (w.dir / "cg.jsonl").string(),
           "--bundle", (w.dir / "bundle.json").string()});
  CHECK(r.code == nsd::cli::kSpecError);
}
