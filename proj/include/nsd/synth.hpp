#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsd/detector.hpp"
#include "nsd/traffic_model.hpp"

namespace nsd {

/// Truncated normal packet-size model, in bytes.
struct SizeDist {
  double mean = 0.0;
  double sigma = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Timing and size signature of one service. Gaps are Gamma distributed with
/// coefficient of variation sqrt(1 + burstiness), so burstiness 0 is Poisson.
/// A positive `on_s`/`off_s` pair turns the flow into ON/OFF bursts.
struct TrafficProfile {
  std::string name;
  L1Class l1 = L1Class::Cg;
  std::optional<SubClass> sub;
  Protocol protocol = Protocol::Udp;
  double ul_rate_pps = 0.0;
  double dl_rate_pps = 0.0;
  SizeDist ul_size;
  SizeDist dl_size;
  double burstiness = 0.0;
  double on_s = 0.0;
  double off_s = 0.0;

  /// Ratio of the weaker to the stronger direction's mean byte rate, in [0, 1].
  double bidirectionality() const;
  /// Throws std::invalid_argument when the profile contradicts its class
  /// (RT needs bidirectionality >= 0.5, NRT <= 0.3, CG a downlink-heavy
  /// stream of large packets) or has nonsensical parameters.
  void validate() const;
};

void to_json(nlohmann::json& j, const TrafficProfile& p);
void from_json(const nlohmann::json& j, TrafficProfile& p);

/// Shipped stand-in profiles: cg, mg, vc, ac, fd, vs.
std::map<std::string, TrafficProfile> default_profiles();
std::map<std::string, TrafficProfile> load_profiles(const std::filesystem::path& path);

enum class Band : std::uint8_t { GHz2_4, GHz5, GHz6 };
enum class Rssi : std::uint8_t { Normal, Edge };                  // >= -55 dBm, <= -65 dBm
enum class Congestion : std::uint8_t { Normal, Mild, High };      // cca/radio_on < 0.1, 0.2-0.4, > 0.55

std::string to_string(Band b);
std::string to_string(Rssi r);
std::string to_string(Congestion c);
std::optional<Band> parse_band(std::string_view text);
std::optional<Rssi> parse_rssi(std::string_view text);
std::optional<Congestion> parse_congestion(std::string_view text);

struct ChannelEffects {
  double jitter_ms = 0.0;    // std deviation of timestamp noise
  double drop_prob = 0.0;
  double rate_scale = 1.0;   // multiplies both directions' packet rates
};

struct ChannelCondition {
  Band band = Band::GHz5;
  Rssi rssi = Rssi::Normal;
  Congestion congestion = Congestion::Normal;

  /// Monotone in congestion and worse at the cell edge.
  ChannelEffects effects() const;
  bool operator==(const ChannelCondition&) const = default;
};

struct GeneratedFlow {
  std::vector<PacketRecord> packets;  // timestamp sorted
  ConversationKey key;
  L1Class l1 = L1Class::Cg;
  std::optional<SubClass> sub;
};

/// Packets of one flow over [start_us, start_us + duration). Deterministic in
/// (profile, condition, duration, endpoints, seed, start).
GeneratedFlow generate_flow(const TrafficProfile& profile, const ChannelCondition& condition, double duration_s,
                            const IpAddress& local_ip, const IpAddress& remote_ip, std::uint64_t seed,
                            std::int64_t start_us = 0);

struct FlowSpec {
  std::string profile;
  ChannelCondition condition;
  double duration_s = 20.0;
  int count = 1;
};

/// Several flows interleaved in one capture.
struct MixedSpec {
  std::string name;
  std::vector<std::string> profiles;
  ChannelCondition condition;
  double duration_s = 20.0;
  int count = 1;
};

struct DatasetSpec {
  std::uint64_t seed = 1;
  IpAddress local_ip = IpAddress::v4(0xC0A8320Au);  // 192.168.50.10
  /// Fraction of single-flow captures per label assigned to the test split.
  double test_fraction = 0.0;
  std::vector<FlowSpec> flows;
  std::vector<MixedSpec> mixed;
  std::map<std::string, TrafficProfile> profiles = default_profiles();
};

/// Parses a generation spec. `base_dir` resolves "profiles_file". Throws
/// ConfigError on any invalid field.
DatasetSpec parse_dataset_spec(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

struct ManifestRow {
  std::string capture;
  ConversationKey key;
  L1Class l1 = L1Class::Cg;
  std::optional<SubClass> sub;
  ChannelCondition condition;
  std::uint64_t seed = 0;
  std::string profile;
  std::string split = "train";
  double duration_s = 0.0;
};

struct Capture {
  std::string name;
  std::vector<PacketRecord> packets;
};

struct Dataset {
  std::vector<Capture> captures;
  std::vector<ManifestRow> manifest;
  std::uint64_t seed = 0;
  IpAddress local_ip;
};

/// One capture per (flow spec, instance) plus one per mixed instance. Remote
/// addresses are unique across the dataset.
Dataset generate_dataset(const DatasetSpec& spec);

nlohmann::ordered_json manifest_to_json(const Dataset& ds);
/// Writes captures/<name> and manifest.json under `out_dir`.
void write_dataset(const Dataset& ds, const std::filesystem::path& out_dir);

struct Manifest {
  std::filesystem::path base_dir;  // capture paths are relative to this
  IpAddress local_ip;
  std::uint64_t seed = 0;
  std::vector<ManifestRow> rows;

  std::filesystem::path capture_path(const ManifestRow& row) const { return base_dir / row.capture; }
};

/// Throws ConfigError on schema violations.
Manifest load_manifest(const std::filesystem::path& path);
Manifest manifest_from_json(const nlohmann::json& j, std::filesystem::path base_dir);

}  // namespace nsd
