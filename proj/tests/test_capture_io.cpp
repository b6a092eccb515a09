#include <doctest.h>

#include <filesystem>
#include <random>
#include <fstream>
#include <sstream>

#include "nsd/capture_io.hpp"
#include "nsd/errors.hpp"

using namespace nsd;

namespace {

void le32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void le16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xFF));
  s.push_back(static_cast<char>(v >> 8));
}
void be16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v >> 8));
  s.push_back(static_cast<char>(v & 0xFF));
}

std::string pcap_header(std::uint32_t magic = 0xA1B2C3D4u, std::uint32_t link = 1) {
  std::string s;
  le32(s, magic);
  le16(s, 2);
  le16(s, 4);
  le32(s, 0);
  le32(s, 0);
  le32(s, 65535);
  le32(s, link);
  return s;
}

// Ethernet + IPv4 + UDP/TCP header, optionally VLAN-tagged.
std::string ipv4_frame(std::uint32_t src, std::uint32_t dst, std::uint8_t proto, std::uint16_t sport,
                       std::uint16_t dport, bool vlan = false) {
  std::string f(12, '\0');
  if (vlan) {
    be16(f, 0x8100);
    be16(f, 42);
  }
  be16(f, 0x0800);
  f.push_back(0x45);
  f.push_back(0);
  be16(f, 48);
  be16(f, 0);
  be16(f, 0);
  f.push_back(64);
  f.push_back(static_cast<char>(proto));
  be16(f, 0);
  for (int i = 3; i >= 0; --i) f.push_back(static_cast<char>((src >> (8 * i)) & 0xFF));
  for (int i = 3; i >= 0; --i) f.push_back(static_cast<char>((dst >> (8 * i)) & 0xFF));
  be16(f, sport);
  be16(f, dport);
  f.append(8, '\0');
  return f;
}

void add_record(std::string& s, std::uint32_t sec, std::uint32_t usec, const std::string& frame, std::uint32_t orig) {
  le32(s, sec);
  le32(s, usec);
  le32(s, static_cast<std::uint32_t>(frame.size()));
  le32(s, orig);
  s += frame;
}

PacketRecord random_packet(std::mt19937_64& rng) {
  PacketRecord p;
  p.timestamp_us = static_cast<std::int64_t>(rng() % 100'000'000);
  p.src_ip = (rng() & 1) ? IpAddress::v4(static_cast<std::uint32_t>(rng())) : IpAddress::parse("2001:db8::7");
  p.dst_ip = IpAddress::v4(static_cast<std::uint32_t>(rng()));
  p.size_bytes = static_cast<std::uint32_t>(rng());
  switch (rng() % 3) {
    case 0: p.protocol = Protocol::Tcp; break;
    case 1: p.protocol = Protocol::Udp; break;
    default: p.protocol = Protocol::Other; break;
  }
  if (p.protocol != Protocol::Other) {
    p.src_port = static_cast<std::uint16_t>(rng());
    p.dst_port = static_cast<std::uint16_t>(rng());
  }
  return p;
}

}  // namespace

TEST_CASE("jsonl: empty input gives no packets") {
  std::istringstream in("");
  CHECK(read_jsonl_capture(in).empty());
  std::istringstream blank("\n  \n");
  CHECK(read_jsonl_capture(blank).empty());
}

TEST_CASE("jsonl: shuffled timestamps come back sorted") {
  std::istringstream in(
      R"({"ts_us":300,"src":"10.0.0.1","dst":"10.0.0.2","len":10,"proto":"udp","sport":1,"dport":2}
{"ts_us":100,"src":"10.0.0.1","dst":"10.0.0.2","len":20,"proto":"udp","sport":1,"dport":2}
{"ts_us":200,"src":"10.0.0.1","dst":"10.0.0.2","len":30,"proto":"other"})");
  auto pkts = read_jsonl_capture(in);
  REQUIRE(pkts.size() == 3);
  CHECK(pkts[0].timestamp_us == 100);
  CHECK(pkts[0].size_bytes == 20);
  CHECK(pkts[1].timestamp_us == 200);
  CHECK_FALSE(pkts[1].src_port);
  CHECK(pkts[2].timestamp_us == 300);
}

TEST_CASE("jsonl: malformed records report their line") {
  auto fails_at = [](const std::string& text, std::size_t line) {
    std::istringstream in(text);
    try {
      read_jsonl_capture(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.location() == line);
    }
  };
  const std::string good = R"({"ts_us":1,"src":"10.0.0.1","dst":"10.0.0.2","len":1,"proto":"other"})";
  fails_at(good + "\n{not json\n", 2);
  fails_at(good + "\n" + good + "\n" + R"({"ts_us":1,"src":"10.0.0.1","dst":"10.0.0.2","proto":"other"})", 3);
  fails_at(R"({"ts_us":-5,"src":"10.0.0.1","dst":"10.0.0.2","len":1,"proto":"other"})", 1);
  fails_at(R"({"ts_us":1,"src":"10.0.0.999","dst":"10.0.0.2","len":1,"proto":"other"})", 1);
  fails_at(R"({"ts_us":1,"src":"10.0.0.1","dst":"10.0.0.2","len":1,"proto":"udp"})", 1);
  fails_at(R"({"ts_us":1,"src":"10.0.0.1","dst":"10.0.0.2","len":1,"proto":"udp","sport":70000,"dport":1})", 1);
  fails_at(R"([1,2])", 1);
}

TEST_CASE("jsonl: 10k random packets round-trip exactly") {
  std::mt19937_64 rng(99);
  std::vector<PacketRecord> pkts;
  for (int i = 0; i < 10000; ++i) pkts.push_back(random_packet(rng));
  std::stable_sort(pkts.begin(), pkts.end(),
                   [](const auto& a, const auto& b) { return a.timestamp_us < b.timestamp_us; });
  std::stringstream buf;
  write_jsonl_capture(buf, pkts);
  CHECK(read_jsonl_capture(buf) == pkts);
}

TEST_CASE("jsonl: canonical line format") {
  PacketRecord p;
  p.timestamp_us = 5;
  p.src_ip = IpAddress::parse("10.0.0.1");
  p.dst_ip = IpAddress::parse("10.0.0.2");
  p.size_bytes = 60;
  p.protocol = Protocol::Tcp;
  p.src_port = 443;
  p.dst_port = 5000;
  CHECK(to_jsonl(p) == R"({"ts_us":5,"src":"10.0.0.1","dst":"10.0.0.2","len":60,"proto":"tcp","sport":443,"dport":5000})");
}

TEST_CASE("pcap: decodes ethernet, vlan and original length") {
  for (std::uint32_t magic : {0xA1B2C3D4u, 0xD4C3B2A1u}) {
    std::string s = pcap_header(0xA1B2C3D4u);
    add_record(s, 2, 500, ipv4_frame(0xC0A8320A, 0x08080808, 17, 5000, 53), 1200);
    add_record(s, 1, 0, ipv4_frame(0x08080808, 0xC0A8320A, 6, 443, 6000, true), 60);
    std::string arp(12, '\0');
    be16(arp, 0x0806);
    arp.append(28, '\0');
    add_record(s, 3, 0, arp, 42);
    if (magic == 0xD4C3B2A1u) {
      // Rewrite every 32-bit header field big-endian to emulate a swapped file.
      std::string big;
      auto be32 = [&big](std::uint32_t v) {
        for (int i = 3; i >= 0; --i) big.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
      };
      be32(0xA1B2C3D4u);
      big.push_back(0); big.push_back(2); big.push_back(0); big.push_back(4);
      be32(0); be32(0); be32(65535); be32(1);
      std::size_t off = 24;
      while (off < s.size()) {
        auto rd = [&](std::size_t o) {
          return std::uint32_t(std::uint8_t(s[o])) | std::uint32_t(std::uint8_t(s[o + 1])) << 8 |
                 std::uint32_t(std::uint8_t(s[o + 2])) << 16 | std::uint32_t(std::uint8_t(s[o + 3])) << 24;
        };
        std::uint32_t incl = rd(off + 8);
        for (int k = 0; k < 4; ++k) be32(rd(off + 4 * k));
        big += s.substr(off + 16, incl);
        off += 16 + incl;
      }
      s = big;
    }
    std::istringstream in(s);
    auto pkts = read_pcap_capture(in);
    REQUIRE(pkts.size() == 2);
    CHECK(pkts[0].timestamp_us == 1'000'000);
    CHECK(pkts[0].protocol == Protocol::Tcp);
    CHECK(pkts[0].src_port == 443);
    CHECK(pkts[0].size_bytes == 60);
    CHECK(pkts[1].timestamp_us == 2'000'500);
    CHECK(pkts[1].src_ip == IpAddress::parse("192.168.50.10"));
    CHECK(pkts[1].dst_ip == IpAddress::parse("8.8.8.8"));
    CHECK(pkts[1].protocol == Protocol::Udp);
    CHECK(pkts[1].dst_port == 53);
    CHECK(pkts[1].size_bytes == 1200);
  }
}

TEST_CASE("pcap: bad magic, link type and truncation") {
  std::istringstream bad_magic(pcap_header(0x0A0D0D0Au));
  CHECK_THROWS_AS(read_pcap_capture(bad_magic), FormatError);
  std::istringstream bad_link(pcap_header(0xA1B2C3D4u, 105));
  CHECK_THROWS_AS(read_pcap_capture(bad_link), FormatError);
  std::istringstream short_header("abc");
  CHECK_THROWS_AS(read_pcap_capture(short_header), FormatError);

  std::string s = pcap_header();
  add_record(s, 0, 0, ipv4_frame(1, 2, 17, 1, 2), 100);
  std::string truncated = s.substr(0, s.size() - 5);
  std::istringstream in(truncated);
  try {
    read_pcap_capture(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.location() == 24);
  }
  std::string half_record = pcap_header() + std::string(7, '\0');
  std::istringstream in2(half_record);
  CHECK_THROWS_AS(read_pcap_capture(in2), ParseError);
}

TEST_CASE("parse_capture dispatches on extension") {
  auto dir = std::filesystem::temp_directory_path() / "nsd_capture_io_test";
  std::filesystem::create_directories(dir);
  std::string s = pcap_header();
  add_record(s, 0, 7, ipv4_frame(1, 2, 17, 1, 2), 100);
  {
    std::ofstream(dir / "a.pcap", std::ios::binary) << s;
  }
  CHECK(format_from_path(dir / "a.pcap") == CaptureFormat::Pcap);
  CHECK(format_from_path(dir / "a.jsonl") == CaptureFormat::Jsonl);
  auto pkts = parse_capture(dir / "a.pcap");
  REQUIRE(pkts.size() == 1);
  write_jsonl_capture(dir / "a.jsonl", pkts);
  CHECK(parse_capture(dir / "a.jsonl") == pkts);
  CHECK_THROWS(parse_capture(dir / "missing.jsonl"));
  std::filesystem::remove_all(dir);
}
