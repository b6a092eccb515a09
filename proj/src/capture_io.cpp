#include "nsd/capture_io.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nsd/errors.hpp"

namespace nsd {

namespace {

using json = nlohmann::json;

void sort_by_time(std::vector<PacketRecord>& packets) {
  std::stable_sort(packets.begin(), packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp_us < b.timestamp_us; });
}

template <typename T>
T required_int(const json& obj, const char* field, std::size_t line, std::int64_t lo, std::int64_t hi) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_number_integer()) {
    throw ParseError("line " + std::to_string(line) + ": field '" + field + "' missing or not an integer", line);
  }
  auto v = it->get<std::int64_t>();
  if (it->is_number_unsigned() && it->get<std::uint64_t>() > static_cast<std::uint64_t>(hi)) v = hi + 1;
  if (v < lo || v > hi) {
    throw ParseError("line " + std::to_string(line) + ": field '" + field + "' out of range", line);
  }
  return static_cast<T>(v);
}

IpAddress required_ip(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string()) {
    throw ParseError("line " + std::to_string(line) + ": field '" + field + "' missing or not a string", line);
  }
  auto ip = IpAddress::try_parse(it->get_ref<const std::string&>());
  if (!ip) throw ParseError("line " + std::to_string(line) + ": bad IP in '" + field + "'", line);
  return *ip;
}

PacketRecord parse_jsonl_line(const std::string& text, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
  }
  if (!obj.is_object()) throw ParseError("line " + std::to_string(line) + ": expected a JSON object", line);

  PacketRecord p;
  p.timestamp_us = required_int<std::int64_t>(obj, "ts_us", line, 0, INT64_MAX);
  p.src_ip = required_ip(obj, "src", line);
  p.dst_ip = required_ip(obj, "dst", line);
  p.size_bytes = required_int<std::uint32_t>(obj, "len", line, 0, UINT32_MAX);
  auto proto = obj.find("proto");
  if (proto == obj.end() || !proto->is_string()) {
    throw ParseError("line " + std::to_string(line) + ": field 'proto' missing", line);
  }
  auto parsed = parse_protocol(proto->get_ref<const std::string&>());
  if (!parsed) throw ParseError("line " + std::to_string(line) + ": unknown proto", line);
  p.protocol = *parsed;
  if (obj.contains("sport")) p.src_port = required_int<std::uint16_t>(obj, "sport", line, 0, 65535);
  if (obj.contains("dport")) p.dst_port = required_int<std::uint16_t>(obj, "dport", line, 0, 65535);
  try {
    validate(p);
  } catch (const std::invalid_argument& e) {
    throw ParseError("line " + std::to_string(line) + ": " + e.what(), line);
  }
  return p;
}

// -- pcap ---------------------------------------------------------------

constexpr std::uint32_t kPcapMagic = 0xA1B2C3D4u;
constexpr std::uint32_t kPcapMagicSwapped = 0xD4C3B2A1u;
constexpr std::uint32_t kLinkTypeEthernet = 1;

std::uint32_t load_le32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

std::uint32_t bswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xFF00u) | ((v << 8) & 0xFF0000u) | (v << 24);
}

std::uint16_t load_be16(const unsigned char* p) { return static_cast<std::uint16_t>((p[0] << 8) | p[1]); }

// Fills endpoints/protocol/ports from an Ethernet frame; false for non-IP.
bool decode_frame(const std::vector<unsigned char>& frame, PacketRecord& p) {
  std::size_t off = 12;
  if (frame.size() < off + 2) return false;
  std::uint16_t ethertype = load_be16(&frame[off]);
  off += 2;
  while (ethertype == 0x8100 || ethertype == 0x88A8) {
    if (frame.size() < off + 4) return false;
    ethertype = load_be16(&frame[off + 2]);
    off += 4;
  }

  std::uint8_t l4 = 0;
  std::size_t l4_off = 0;
  bool first_fragment = true;
  if (ethertype == 0x0800) {
    if (frame.size() < off + 20) return false;
    std::size_t ihl = static_cast<std::size_t>(frame[off] & 0x0F) * 4;
    l4 = frame[off + 9];
    first_fragment = (load_be16(&frame[off + 6]) & 0x1FFF) == 0;
    p.src_ip = IpAddress::v4((std::uint32_t{frame[off + 12]} << 24) | (std::uint32_t{frame[off + 13]} << 16) |
                             (std::uint32_t{frame[off + 14]} << 8) | frame[off + 15]);
    p.dst_ip = IpAddress::v4((std::uint32_t{frame[off + 16]} << 24) | (std::uint32_t{frame[off + 17]} << 16) |
                             (std::uint32_t{frame[off + 18]} << 8) | frame[off + 19]);
    l4_off = off + ihl;
  } else if (ethertype == 0x86DD) {
    if (frame.size() < off + 40) return false;
    l4 = frame[off + 6];
    std::array<std::uint8_t, 16> src{}, dst{};
    std::copy_n(&frame[off + 8], 16, src.begin());
    std::copy_n(&frame[off + 24], 16, dst.begin());
    p.src_ip = IpAddress::v6(src);
    p.dst_ip = IpAddress::v6(dst);
    l4_off = off + 40;
  } else {
    return false;
  }

  if ((l4 == 6 || l4 == 17) && first_fragment && frame.size() >= l4_off + 4) {
    p.protocol = l4 == 6 ? Protocol::Tcp : Protocol::Udp;
    p.src_port = load_be16(&frame[l4_off]);
    p.dst_port = load_be16(&frame[l4_off + 2]);
  } else {
    p.protocol = Protocol::Other;
  }
  return true;
}

}  // namespace

CaptureFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".pcap" ? CaptureFormat::Pcap : CaptureFormat::Jsonl;
}

std::vector<PacketRecord> read_jsonl_capture(std::istream& in) {
  std::vector<PacketRecord> packets;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    packets.push_back(parse_jsonl_line(text, line));
  }
  sort_by_time(packets);
  return packets;
}

std::vector<PacketRecord> read_pcap_capture(std::istream& in) {
  std::array<unsigned char, 24> header{};
  if (!in.read(reinterpret_cast<char*>(header.data()), header.size())) {
    throw FormatError("pcap: file shorter than the global header");
  }
  std::uint32_t magic = load_le32(header.data());
  bool swapped;
  if (magic == kPcapMagic) {
    swapped = false;
  } else if (magic == kPcapMagicSwapped) {
    swapped = true;
  } else {
    std::ostringstream msg;
    msg << "pcap: unsupported magic 0x" << std::hex << magic;
    throw FormatError(msg.str());
  }
  auto field = [swapped](const unsigned char* p) { return swapped ? bswap32(load_le32(p)) : load_le32(p); };
  std::uint32_t link_type = field(&header[20]);
  if (link_type != kLinkTypeEthernet) {
    throw FormatError("pcap: unsupported link type " + std::to_string(link_type));
  }

  std::vector<PacketRecord> packets;
  std::vector<unsigned char> frame;
  std::size_t offset = header.size();
  std::array<unsigned char, 16> rec{};
  while (true) {
    in.read(reinterpret_cast<char*>(rec.data()), rec.size());
    if (in.gcount() == 0) break;
    if (in.gcount() != static_cast<std::streamsize>(rec.size())) {
      throw ParseError("pcap: truncated record header at offset " + std::to_string(offset), offset);
    }
    std::uint32_t sec = field(&rec[0]);
    std::uint32_t usec = field(&rec[4]);
    std::uint32_t incl = field(&rec[8]);
    std::uint32_t orig = field(&rec[12]);
    if (incl > 262144 || usec >= 1000000) {
      throw ParseError("pcap: implausible record header at offset " + std::to_string(offset), offset);
    }
    frame.resize(incl);
    if (!in.read(reinterpret_cast<char*>(frame.data()), incl)) {
      throw ParseError("pcap: truncated packet data at offset " + std::to_string(offset), offset);
    }
    PacketRecord p;
    p.timestamp_us = static_cast<std::int64_t>(sec) * 1000000 + usec;
    p.size_bytes = orig;
    if (decode_frame(frame, p)) packets.push_back(p);
    offset += rec.size() + incl;
  }
  sort_by_time(packets);
  return packets;
}

std::vector<PacketRecord> parse_capture(const std::filesystem::path& path, CaptureFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open capture: " + path.string());
  return format == CaptureFormat::Pcap ? read_pcap_capture(in) : read_jsonl_capture(in);
}

std::vector<PacketRecord> parse_capture(const std::filesystem::path& path) {
  return parse_capture(path, format_from_path(path));
}

std::string to_jsonl(const PacketRecord& p) {
  std::string s;
  s.reserve(128);
  s += "{\"ts_us\":";
  s += std::to_string(p.timestamp_us);
  s += ",\"src\":\"";
  s += p.src_ip.to_string();
  s += "\",\"dst\":\"";
  s += p.dst_ip.to_string();
  s += "\",\"len\":";
  s += std::to_string(p.size_bytes);
  s += ",\"proto\":\"";
  s += to_string(p.protocol);
  s += '"';
  if (p.src_port) {
    s += ",\"sport\":";
    s += std::to_string(*p.src_port);
  }
  if (p.dst_port) {
    s += ",\"dport\":";
    s += std::to_string(*p.dst_port);
  }
  s += '}';
  return s;
}

void write_jsonl_capture(std::ostream& out, std::span<const PacketRecord> packets) {
  for (const auto& p : packets) out << to_jsonl(p) << '\n';
}

void write_jsonl_capture(const std::filesystem::path& path, std::span<const PacketRecord> packets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write capture: " + path.string());
  write_jsonl_capture(out, packets);
}

}  // namespace nsd
