#include "nsd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "nsd/capture_io.hpp"
#include "nsd/errors.hpp"

namespace nsd {

// -- profiles -------------------------------------------------------------

double TrafficProfile::bidirectionality() const {
  double ul = ul_rate_pps * ul_size.mean;
  double dl = dl_rate_pps * dl_size.mean;
  double hi = std::max(ul, dl);
  return hi > 0.0 ? std::min(ul, dl) / hi : 0.0;
}

void TrafficProfile::validate() const {
  auto check_size = [this](const SizeDist& d, const char* dir) {
    if (!(d.min >= 0.0 && d.min <= d.mean && d.mean <= d.max && d.sigma >= 0.0)) {
      throw std::invalid_argument("profile '" + name + "': bad " + dir + " size distribution");
    }
  };
  check_size(ul_size, "ul");
  check_size(dl_size, "dl");
  if (!(ul_rate_pps >= 0.0 && dl_rate_pps >= 0.0) || ul_rate_pps + dl_rate_pps <= 0.0) {
    throw std::invalid_argument("profile '" + name + "': rates must be non-negative and not both zero");
  }
  if (!(burstiness >= 0.0) || !(on_s >= 0.0) || !(off_s >= 0.0) || (off_s > 0.0 && on_s <= 0.0)) {
    throw std::invalid_argument("profile '" + name + "': bad burstiness or on/off periods");
  }
  if (!is_legal(l1, sub) || (l1 != L1Class::Cg && !sub)) {
    throw std::invalid_argument("profile '" + name + "': sub-class does not fit the L1 class");
  }
  double b = bidirectionality();
  if (l1 == L1Class::Rt && b < 0.5) {
    throw std::invalid_argument("profile '" + name + "': RT traffic must be bidirectional (>= 0.5)");
  }
  if (l1 == L1Class::Nrt && b > 0.3) {
    throw std::invalid_argument("profile '" + name + "': NRT traffic must be one-directional (<= 0.3)");
  }
  if (l1 == L1Class::Cg && !(dl_rate_pps >= 5.0 * ul_rate_pps && dl_size.mean >= 500.0)) {
    throw std::invalid_argument("profile '" + name + "': CG needs a dominant downlink of large packets");
  }
}

namespace {

nlohmann::json size_json(const SizeDist& d) {
  return {{"mean", d.mean}, {"sigma", d.sigma}, {"min", d.min}, {"max", d.max}};
}

SizeDist size_from(const nlohmann::json& j) {
  return {j.at("mean").get<double>(), j.at("sigma").get<double>(), j.at("min").get<double>(),
          j.at("max").get<double>()};
}

TrafficProfile make_profile(std::string name, L1Class l1, std::optional<SubClass> sub, Protocol proto, double ul_pps,
                            SizeDist ul, double dl_pps, SizeDist dl, double burstiness, double on_s = 0.0,
                            double off_s = 0.0) {
  TrafficProfile p;
  p.name = std::move(name);
  p.l1 = l1;
  p.sub = sub;
  p.protocol = proto;
  p.ul_rate_pps = ul_pps;
  p.ul_size = ul;
  p.dl_rate_pps = dl_pps;
  p.dl_size = dl;
  p.burstiness = burstiness;
  p.on_s = on_s;
  p.off_s = off_s;
  return p;
}

}  // namespace

void to_json(nlohmann::json& j, const TrafficProfile& p) {
  j = nlohmann::json{{"name", p.name},
                     {"l1", std::string(to_string(p.l1))},
                     {"l2", p.sub ? nlohmann::json(std::string(to_string(*p.sub))) : nlohmann::json(nullptr)},
                     {"proto", std::string(to_string(p.protocol))},
                     {"ul_rate_pps", p.ul_rate_pps},
                     {"dl_rate_pps", p.dl_rate_pps},
                     {"ul_size", size_json(p.ul_size)},
                     {"dl_size", size_json(p.dl_size)},
                     {"burstiness", p.burstiness},
                     {"on_s", p.on_s},
                     {"off_s", p.off_s}};
}

void from_json(const nlohmann::json& j, TrafficProfile& p) {
  p.name = j.at("name").get<std::string>();
  auto l1 = parse_l1(j.at("l1").get<std::string>());
  if (!l1) throw std::invalid_argument("profile '" + p.name + "': unknown l1 class");
  p.l1 = *l1;
  p.sub.reset();
  if (j.contains("l2") && !j.at("l2").is_null()) {
    auto sub = parse_sub(j.at("l2").get<std::string>());
    if (!sub) throw std::invalid_argument("profile '" + p.name + "': unknown l2 class");
    p.sub = *sub;
  }
  auto proto = parse_protocol(j.value("proto", std::string("udp")));
  if (!proto) throw std::invalid_argument("profile '" + p.name + "': unknown proto");
  p.protocol = *proto;
  p.ul_rate_pps = j.at("ul_rate_pps").get<double>();
  p.dl_rate_pps = j.at("dl_rate_pps").get<double>();
  p.ul_size = size_from(j.at("ul_size"));
  p.dl_size = size_from(j.at("dl_size"));
  p.burstiness = j.value("burstiness", 0.0);
  p.on_s = j.value("on_s", 0.0);
  p.off_s = j.value("off_s", 0.0);
}

std::map<std::string, TrafficProfile> default_profiles() {
  using L = L1Class;
  using S = SubClass;
  const SizeDist ack{60, 4, 52, 80};
  std::map<std::string, TrafficProfile> m;
  // Rendered video frames down, controller input up.
  m["cg"] = make_profile("cg", L::Cg, std::nullopt, Protocol::Udp, 60, {100, 20, 60, 200}, 800,
                         {1200, 150, 600, 1450}, 0.2);
  m["mg"] = make_profile("mg", L::Rt, S::Mg, Protocol::Udp, 30, {120, 30, 60, 250}, 30, {150, 40, 60, 300}, 0.3);
  m["vc"] = make_profile("vc", L::Rt, S::Vc, Protocol::Udp, 30, {1000, 150, 500, 1300}, 30, {1000, 150, 500, 1300},
                         0.2);
  m["ac"] = make_profile("ac", L::Rt, S::Ac, Protocol::Udp, 50, {200, 20, 120, 300}, 50, {200, 20, 120, 300}, 0.1);
  // Saturated download, MTU-sized data with TCP acks up.
  m["fd"] = make_profile("fd", L::Nrt, S::Fd, Protocol::Tcp, 450, ack, 900, {1400, 30, 1300, 1460}, 0.1);
  // Segment fetches separated by idle gaps.
  m["vs"] = make_profile("vs", L::Nrt, S::Vs, Protocol::Tcp, 150, ack, 400, {1300, 120, 800, 1460}, 1.0, 1.5, 1.5);
  return m;
}

std::map<std::string, TrafficProfile> load_profiles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profiles file: " + path.string());
  std::map<std::string, TrafficProfile> m;
  try {
    nlohmann::json j;
    in >> j;
    for (const auto& item : j.at("profiles")) {
      auto p = item.get<TrafficProfile>();
      p.validate();
      m[p.name] = p;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("profiles file: " + std::string(e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return m;
}

// -- channel --------------------------------------------------------------

std::string to_string(Band b) {
  switch (b) {
    case Band::GHz2_4:
      return "2.4GHz";
    case Band::GHz5:
      return "5GHz";
    case Band::GHz6:
      return "6GHz";
  }
  return "?";
}

std::string to_string(Rssi r) { return r == Rssi::Normal ? "normal" : "edge"; }

std::string to_string(Congestion c) {
  switch (c) {
    case Congestion::Normal:
      return "normal";
    case Congestion::Mild:
      return "mild";
    case Congestion::High:
      return "high";
  }
  return "?";
}

std::optional<Band> parse_band(std::string_view text) {
  for (auto b : {Band::GHz2_4, Band::GHz5, Band::GHz6}) {
    if (to_string(b) == text) return b;
  }
  return std::nullopt;
}

std::optional<Rssi> parse_rssi(std::string_view text) {
  for (auto r : {Rssi::Normal, Rssi::Edge}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

std::optional<Congestion> parse_congestion(std::string_view text) {
  for (auto c : {Congestion::Normal, Congestion::Mild, Congestion::High}) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

ChannelEffects ChannelCondition::effects() const {
  ChannelEffects e;
  switch (congestion) {
    case Congestion::Normal:
      e = {0.5, 0.0, 1.0};
      break;
    case Congestion::Mild:
      e = {2.0, 0.01, 0.9};
      break;
    case Congestion::High:
      e = {6.0, 0.03, 0.75};
      break;
  }
  if (rssi == Rssi::Edge) {
    e.jitter_ms = e.jitter_ms * 1.5 + 2.0;
    e.drop_prob += 0.01;
    e.rate_scale *= 0.85;
  }
  if (band == Band::GHz2_4) {
    e.jitter_ms += 1.0;
    e.rate_scale *= 0.95;
  }
  return e;
}

// -- generation -----------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint32_t draw_size(std::mt19937_64& rng, const SizeDist& d) {
  std::normal_distribution<double> n(d.mean, d.sigma > 0.0 ? d.sigma : 1e-12);
  double v = std::clamp(std::round(n(rng)), d.min, d.max);
  return static_cast<std::uint32_t>(v);
}

void emit_direction(std::vector<PacketRecord>& out, std::mt19937_64& rng, const TrafficProfile& profile,
                    const ChannelEffects& fx, bool uplink, double duration_s, double phase_s,
                    const ConversationKey& key, std::uint16_t local_port, std::uint16_t remote_port,
                    std::int64_t start_us) {
  const double rate = (uplink ? profile.ul_rate_pps : profile.dl_rate_pps) * fx.rate_scale;
  if (rate <= 0.0) return;
  const SizeDist& size = uplink ? profile.ul_size : profile.dl_size;
  const double shape = 1.0 / (1.0 + profile.burstiness);
  std::gamma_distribution<double> gap(shape, 1.0 / (rate * shape));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, fx.jitter_ms / 1000.0);
  const double cycle = profile.on_s + profile.off_s;
  const bool on_off = profile.off_s > 0.0;
  const std::int64_t end_us = start_us + static_cast<std::int64_t>(std::llround(duration_s * 1e6));

  double t = gap(rng) * unit(rng);  // start mid-gap
  while (t < duration_s) {
    if (on_off) {
      double pos = std::fmod(t + phase_s, cycle);
      if (pos >= profile.on_s) {
        t += cycle - pos;
        continue;
      }
    }
    bool dropped = unit(rng) < fx.drop_prob;
    double noisy = t + (fx.jitter_ms > 0.0 ? jitter(rng) : 0.0);
    std::uint32_t bytes = draw_size(rng, size);
    if (!dropped) {
      PacketRecord p;
      p.timestamp_us = std::clamp<std::int64_t>(start_us + std::llround(noisy * 1e6), start_us, end_us - 1);
      p.src_ip = uplink ? key.local_ip : key.remote_ip;
      p.dst_ip = uplink ? key.remote_ip : key.local_ip;
      p.size_bytes = bytes;
      p.protocol = profile.protocol;
      if (profile.protocol != Protocol::Other) {
        p.src_port = uplink ? local_port : remote_port;
        p.dst_port = uplink ? remote_port : local_port;
      }
      out.push_back(p);
    }
    t += gap(rng);
  }
}

void sort_packets(std::vector<PacketRecord>& packets) {
  std::stable_sort(packets.begin(), packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp_us < b.timestamp_us; });
}

// Sequential remotes from the three documentation ranges.
IpAddress remote_for(std::size_t index) {
  static constexpr std::uint32_t kRanges[] = {0xCB007100u, 0xC6336400u, 0xC0000200u};  // 203.0.113/24 etc.
  std::size_t range = index / 254;
  if (range >= std::size(kRanges)) throw ConfigError("dataset needs more than 762 distinct remote addresses");
  return IpAddress::v4(kRanges[range] + static_cast<std::uint32_t>(index % 254) + 1);
}

}  // namespace

GeneratedFlow generate_flow(const TrafficProfile& profile, const ChannelCondition& condition, double duration_s,
                            const IpAddress& local_ip, const IpAddress& remote_ip, std::uint64_t seed,
                            std::int64_t start_us) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("duration must be positive");
  GeneratedFlow flow;
  flow.key = {local_ip, remote_ip};
  flow.l1 = profile.l1;
  flow.sub = profile.sub;

  std::mt19937_64 rng(splitmix64(seed));
  const ChannelEffects fx = condition.effects();
  const auto local_port = static_cast<std::uint16_t>(1024 + rng() % 64000);
  const std::uint16_t remote_port = profile.protocol == Protocol::Tcp ? 443 : 3478;
  const double cycle = profile.on_s + profile.off_s;
  const double phase = cycle > 0.0 ? std::uniform_real_distribution<double>(0.0, cycle)(rng) : 0.0;

  std::mt19937_64 ul_rng(splitmix64(seed ^ 0x55AA55AA55AA55AAull));
  std::mt19937_64 dl_rng(splitmix64(seed ^ 0xAA55AA55AA55AA55ull));
  emit_direction(flow.packets, ul_rng, profile, fx, true, duration_s, phase, flow.key, local_port, remote_port,
                 start_us);
  emit_direction(flow.packets, dl_rng, profile, fx, false, duration_s, phase, flow.key, local_port, remote_port,
                 start_us);
  sort_packets(flow.packets);
  return flow;
}

// -- datasets ---------------------------------------------------------------

namespace {

ChannelCondition condition_from(const nlohmann::json& j) {
  ChannelCondition c;
  auto band = parse_band(j.value("band", std::string("5GHz")));
  auto rssi = parse_rssi(j.value("rssi", std::string("normal")));
  auto cong = parse_congestion(j.value("congestion", std::string("normal")));
  if (!band || !rssi || !cong) throw ConfigError("spec: bad band/rssi/congestion value");
  c.band = *band;
  c.rssi = *rssi;
  c.congestion = *cong;
  return c;
}

template <typename T>
std::vector<T> list_or(const nlohmann::json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<std::vector<T>>();
}

}  // namespace

DatasetSpec parse_dataset_spec(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  DatasetSpec spec;
  try {
    if (!j.is_object()) throw ConfigError("spec: expected a JSON object");
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("local_ip")) spec.local_ip = IpAddress::parse(j.at("local_ip").get<std::string>());
    spec.test_fraction = j.value("test_fraction", 0.0);
    if (!(spec.test_fraction >= 0.0 && spec.test_fraction < 1.0)) throw ConfigError("spec: test_fraction in [0, 1)");
    if (j.contains("profiles_file")) {
      std::filesystem::path p = j.at("profiles_file").get<std::string>();
      spec.profiles = load_profiles(p.is_relative() ? base_dir / p : p);
    }
    if (j.contains("profiles")) {
      for (const auto& item : j.at("profiles")) {
        auto p = item.get<TrafficProfile>();
        p.validate();
        spec.profiles[p.name] = p;
      }
    }
    auto known = [&spec](const std::string& name) {
      if (!spec.profiles.contains(name)) throw ConfigError("spec: unknown profile '" + name + "'");
      return name;
    };
    auto check_common = [](double duration, int count) {
      if (!(duration > 0.0)) throw ConfigError("spec: duration_s must be positive");
      if (count < 1) throw ConfigError("spec: count must be >= 1");
    };
    for (const auto& f : j.value("flows", nlohmann::json::array())) {
      FlowSpec fs;
      fs.profile = known(f.at("profile").get<std::string>());
      fs.condition = condition_from(f);
      fs.duration_s = f.value("duration_s", fs.duration_s);
      fs.count = f.value("count", 1);
      check_common(fs.duration_s, fs.count);
      spec.flows.push_back(fs);
    }
    // Cartesian product of profiles x bands x rssi x congestion.
    for (const auto& g : j.value("grid", nlohmann::json::array())) {
      auto profiles = g.at("profiles").get<std::vector<std::string>>();
      auto bands = list_or<std::string>(g, "bands", {"5GHz"});
      auto rssis = list_or<std::string>(g, "rssi", {"normal"});
      auto congs = list_or<std::string>(g, "congestion", {"normal"});
      for (const auto& p : profiles) {
        for (const auto& b : bands) {
          for (const auto& r : rssis) {
            for (const auto& c : congs) {
              FlowSpec fs;
              fs.profile = known(p);
              fs.condition = condition_from({{"band", b}, {"rssi", r}, {"congestion", c}});
              fs.duration_s = g.value("duration_s", fs.duration_s);
              fs.count = g.value("count", 1);
              check_common(fs.duration_s, fs.count);
              spec.flows.push_back(fs);
            }
          }
        }
      }
    }
    for (const auto& m : j.value("mixed", nlohmann::json::array())) {
      MixedSpec ms;
      ms.name = m.value("name", std::string("mixed"));
      for (const auto& p : m.at("profiles")) ms.profiles.push_back(known(p.get<std::string>()));
      if (ms.profiles.empty()) throw ConfigError("spec: mixed entry needs profiles");
      ms.condition = condition_from(m);
      ms.duration_s = m.value("duration_s", ms.duration_s);
      ms.count = m.value("count", 1);
      check_common(ms.duration_s, ms.count);
      spec.mixed.push_back(ms);
    }
    if (spec.flows.empty() && spec.mixed.empty()) throw ConfigError("spec: no flows requested");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("spec: ") + e.what());
  }
  return spec;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  if (spec.flows.empty() && spec.mixed.empty()) throw ConfigError("spec: no flows requested");
  Dataset ds;
  ds.seed = spec.seed;
  ds.local_ip = spec.local_ip;
  std::size_t flow_index = 0;
  auto next_seed = [&]() { return splitmix64(spec.seed * 0x100000001B3ull + flow_index); };
  char name[96];

  for (const auto& fs : spec.flows) {
    const TrafficProfile& profile = spec.profiles.at(fs.profile);
    for (int i = 0; i < fs.count; ++i) {
      std::uint64_t seed = next_seed();
      auto flow = generate_flow(profile, fs.condition, fs.duration_s, spec.local_ip, remote_for(flow_index), seed);
      std::snprintf(name, sizeof name, "captures/flow_%05zu_%s.jsonl", ds.captures.size(), profile.name.c_str());
      ds.manifest.push_back({name, flow.key, profile.l1, profile.sub, fs.condition, seed, profile.name, "train",
                             fs.duration_s});
      ds.captures.push_back({name, std::move(flow.packets)});
      ++flow_index;
    }
  }

  // Hold out a fixed fraction of each label's single-flow captures.
  if (spec.test_fraction > 0.0) {
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < ds.manifest.size(); ++i) {
      const auto& row = ds.manifest[i];
      by_label[std::string(to_string(row.l1)) + "/" + (row.sub ? std::string(to_string(*row.sub)) : "")].push_back(i);
    }
    std::mt19937_64 rng(splitmix64(spec.seed ^ 0x5EEDull));
    for (auto& [label, rows] : by_label) {
      std::shuffle(rows.begin(), rows.end(), rng);
      auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(rows.size())));
      for (std::size_t i = 0; i < n_test && i < rows.size(); ++i) ds.manifest[rows[i]].split = "test";
    }
  }

  for (const auto& ms : spec.mixed) {
    for (int i = 0; i < ms.count; ++i) {
      std::snprintf(name, sizeof name, "captures/mixed_%05zu_%s.jsonl", ds.captures.size(), ms.name.c_str());
      Capture cap{name, {}};
      for (const auto& pname : ms.profiles) {
        const TrafficProfile& profile = spec.profiles.at(pname);
        std::uint64_t seed = next_seed();
        auto flow = generate_flow(profile, ms.condition, ms.duration_s, spec.local_ip, remote_for(flow_index), seed);
        ds.manifest.push_back({name, flow.key, profile.l1, profile.sub, ms.condition, seed, profile.name, "test",
                               ms.duration_s});
        cap.packets.insert(cap.packets.end(), flow.packets.begin(), flow.packets.end());
        ++flow_index;
      }
      sort_packets(cap.packets);
      ds.captures.push_back(std::move(cap));
    }
  }
  return ds;
}

nlohmann::ordered_json manifest_to_json(const Dataset& ds) {
  nlohmann::ordered_json j;
  j["seed"] = ds.seed;
  j["local_ip"] = ds.local_ip.to_string();
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : ds.manifest) {
    nlohmann::ordered_json row;
    row["capture"] = r.capture;
    row["conversation_key"] = r.key.to_string();
    row["l1"] = std::string(to_string(r.l1));
    row["l2"] = r.sub ? nlohmann::ordered_json(std::string(to_string(*r.sub))) : nlohmann::ordered_json(nullptr);
    row["band"] = to_string(r.condition.band);
    row["rssi"] = to_string(r.condition.rssi);
    row["congestion"] = to_string(r.condition.congestion);
    row["seed"] = r.seed;
    row["profile"] = r.profile;
    row["split"] = r.split;
    row["duration_s"] = r.duration_s;
    rows.push_back(std::move(row));
  }
  j["captures"] = std::move(rows);
  return j;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "captures");
  for (const auto& cap : ds.captures) write_jsonl_capture(out_dir / cap.name, cap.packets);
  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest in " + out_dir.string());
  out << manifest_to_json(ds).dump(2) << '\n';
}

Manifest manifest_from_json(const nlohmann::json& j, std::filesystem::path base_dir) {
  Manifest m;
  m.base_dir = std::move(base_dir);
  try {
    m.seed = j.value("seed", std::uint64_t{0});
    m.local_ip = IpAddress::parse(j.at("local_ip").get<std::string>());
    for (const auto& r : j.at("captures")) {
      ManifestRow row;
      row.capture = r.at("capture").get<std::string>();
      row.key = ConversationKey::parse(r.at("conversation_key").get<std::string>());
      auto l1 = parse_l1(r.at("l1").get<std::string>());
      if (!l1) throw ConfigError("manifest: unknown l1 label");
      row.l1 = *l1;
      if (r.contains("l2") && !r.at("l2").is_null()) {
        auto sub = parse_sub(r.at("l2").get<std::string>());
        if (!sub || !is_legal(row.l1, sub)) throw ConfigError("manifest: bad l2 label");
        row.sub = sub;
      }
      row.condition = condition_from(r);
      row.seed = r.value("seed", std::uint64_t{0});
      row.profile = r.value("profile", std::string());
      row.split = r.value("split", std::string("train"));
      row.duration_s = r.value("duration_s", 0.0);
      m.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  return manifest_from_json(j, path.parent_path());
}

}  // namespace nsd
