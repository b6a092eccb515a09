#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nsd/traffic_model.hpp"

namespace nsd {

enum class CaptureFormat { Jsonl, Pcap };

/// ".pcap" selects PCAP, anything else JSONL.
CaptureFormat format_from_path(const std::filesystem::path& path);

/// Reads a capture and returns its packets stably sorted by timestamp.
/// Throws ParseError (with line or byte offset) on malformed records and
/// FormatError on an unsupported file magic or link type.
std::vector<PacketRecord> parse_capture(const std::filesystem::path& path, CaptureFormat format);
std::vector<PacketRecord> parse_capture(const std::filesystem::path& path);

std::vector<PacketRecord> read_jsonl_capture(std::istream& in);
/// Classic libpcap, Ethernet link type only. Non-IP frames are skipped.
std::vector<PacketRecord> read_pcap_capture(std::istream& in);

/// One canonical JSONL line (no trailing newline).
std::string to_jsonl(const PacketRecord& p);
void write_jsonl_capture(std::ostream& out, std::span<const PacketRecord> packets);
void write_jsonl_capture(const std::filesystem::path& path, std::span<const PacketRecord> packets);

}  // namespace nsd
