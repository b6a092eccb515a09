#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nsd/ip_address.hpp"

namespace nsd {

enum class Protocol : std::uint8_t { Tcp, Udp, Other };

std::string_view to_string(Protocol p);
/// Accepts "tcp", "udp", "other".
std::optional<Protocol> parse_protocol(std::string_view text);

/// One observed packet. Ports are present iff the protocol is TCP or UDP.
struct PacketRecord {
  std::int64_t timestamp_us = 0;
  IpAddress src_ip;
  IpAddress dst_ip;
  std::uint32_t size_bytes = 0;
  Protocol protocol = Protocol::Other;
  std::optional<std::uint16_t> src_port;
  std::optional<std::uint16_t> dst_port;

  bool operator==(const PacketRecord&) const = default;
};

/// Checks the record invariants; throws std::invalid_argument when violated.
void validate(const PacketRecord& p);

/// Direction-normalized identity of a conversation: all packets between one
/// local and one remote IP address, regardless of ports or protocol.
struct ConversationKey {
  IpAddress local_ip;
  IpAddress remote_ip;

  auto operator<=>(const ConversationKey&) const = default;

  /// "local-remote", e.g. "192.168.50.10-203.0.113.7".
  std::string to_string() const;
  static ConversationKey parse(std::string_view text);
};

enum class Direction : std::uint8_t { Ul, Dl };

/// The device's own addresses plus the subnets it sits on. Subnets only feed
/// the directed-broadcast filter.
class AddressPlan {
 public:
  AddressPlan() = default;
  explicit AddressPlan(std::vector<IpAddress> local, std::vector<Subnet> subnets = {});

  bool is_local(const IpAddress& addr) const;
  const std::vector<IpAddress>& local_addresses() const noexcept { return local_; }
  const std::vector<Subnet>& subnets() const noexcept { return subnets_; }

 private:
  std::vector<IpAddress> local_;  // sorted, unique
  std::vector<Subnet> subnets_;
};

/// Throws DirectionError unless exactly one endpoint is local.
Direction classify_direction(const PacketRecord& p, const AddressPlan& plan);
ConversationKey conversation_key(const PacketRecord& p, const AddressPlan& plan);

/// False for broadcast (limited or subnet-directed), multicast and IPv4
/// link-local remotes.
bool is_relevant(const ConversationKey& key, const AddressPlan& plan);

}  // namespace nsd
