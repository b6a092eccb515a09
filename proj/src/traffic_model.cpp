#include "nsd/traffic_model.hpp"

#include <algorithm>
#include <stdexcept>

#include "nsd/errors.hpp"

namespace nsd {

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::Tcp:
      return "tcp";
    case Protocol::Udp:
      return "udp";
    case Protocol::Other:
      break;
  }
  return "other";
}

std::optional<Protocol> parse_protocol(std::string_view text) {
  if (text == "tcp") return Protocol::Tcp;
  if (text == "udp") return Protocol::Udp;
  if (text == "other") return Protocol::Other;
  return std::nullopt;
}

void validate(const PacketRecord& p) {
  if (p.timestamp_us < 0) throw std::invalid_argument("negative packet timestamp");
  bool needs_ports = p.protocol == Protocol::Tcp || p.protocol == Protocol::Udp;
  if (needs_ports != (p.src_port.has_value() && p.dst_port.has_value()) ||
      p.src_port.has_value() != p.dst_port.has_value()) {
    throw std::invalid_argument("ports must be present exactly for tcp/udp packets");
  }
}

std::string ConversationKey::to_string() const { return local_ip.to_string() + "-" + remote_ip.to_string(); }

ConversationKey ConversationKey::parse(std::string_view text) {
  auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw std::invalid_argument("conversation key needs 'local-remote': '" + std::string(text) + "'");
  }
  return {IpAddress::parse(text.substr(0, dash)), IpAddress::parse(text.substr(dash + 1))};
}

AddressPlan::AddressPlan(std::vector<IpAddress> local, std::vector<Subnet> subnets)
    : local_(std::move(local)), subnets_(std::move(subnets)) {
  std::sort(local_.begin(), local_.end());
  local_.erase(std::unique(local_.begin(), local_.end()), local_.end());
}

bool AddressPlan::is_local(const IpAddress& addr) const {
  return std::binary_search(local_.begin(), local_.end(), addr);
}

Direction classify_direction(const PacketRecord& p, const AddressPlan& plan) {
  bool src_local = plan.is_local(p.src_ip);
  bool dst_local = plan.is_local(p.dst_ip);
  if (src_local == dst_local) {
    throw DirectionError(std::string(src_local ? "both" : "neither") + " endpoint local: " + p.src_ip.to_string() +
                         " -> " + p.dst_ip.to_string());
  }
  return src_local ? Direction::Ul : Direction::Dl;
}

ConversationKey conversation_key(const PacketRecord& p, const AddressPlan& plan) {
  if (classify_direction(p, plan) == Direction::Ul) return {p.src_ip, p.dst_ip};
  return {p.dst_ip, p.src_ip};
}

bool is_relevant(const ConversationKey& key, const AddressPlan& plan) {
  const IpAddress& r = key.remote_ip;
  if (r.is_v4()) {
    std::uint32_t v = r.v4_value();
    if (v == 0xFFFFFFFFu) return false;
    if ((v & 0xF0000000u) == 0xE0000000u) return false;  // 224.0.0.0/4
    if ((v & 0xFFFF0000u) == 0xA9FE0000u) return false;  // 169.254.0.0/16
    for (const auto& net : plan.subnets()) {
      if (net.network.is_v4() && net.prefix_len < 31 && net.broadcast() == r) return false;
    }
    return true;
  }
  return r.bytes()[0] != 0xFF;  // ff00::/8
}

}  // namespace nsd
