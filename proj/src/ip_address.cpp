#include "nsd/ip_address.hpp"

#include <arpa/inet.h>

#include <cstring>
#include <stdexcept>
#include <string>

namespace nsd {

IpAddress IpAddress::v4(std::uint32_t host_order) {
  IpAddress a;
  a.family_ = Family::V4;
  a.bytes_[0] = static_cast<std::uint8_t>(host_order >> 24);
  a.bytes_[1] = static_cast<std::uint8_t>(host_order >> 16);
  a.bytes_[2] = static_cast<std::uint8_t>(host_order >> 8);
  a.bytes_[3] = static_cast<std::uint8_t>(host_order);
  return a;
}

IpAddress IpAddress::v6(const std::array<std::uint8_t, 16>& bytes) {
  IpAddress a;
  a.family_ = Family::V6;
  a.bytes_ = bytes;
  return a;
}

std::optional<IpAddress> IpAddress::try_parse(std::string_view text) {
  std::string s(text);
  if (s.find(':') == std::string::npos) {
    in_addr v4{};
    if (inet_pton(AF_INET, s.c_str(), &v4) != 1) return std::nullopt;
    IpAddress a;
    std::memcpy(a.bytes_.data(), &v4, 4);
    return a;
  }
  in6_addr v6{};
  if (inet_pton(AF_INET6, s.c_str(), &v6) != 1) return std::nullopt;
  IpAddress a;
  a.family_ = Family::V6;
  std::memcpy(a.bytes_.data(), &v6, 16);
  return a;
}

IpAddress IpAddress::parse(std::string_view text) {
  auto a = try_parse(text);
  if (!a) throw std::invalid_argument("invalid IP address: '" + std::string(text) + "'");
  return *a;
}

std::uint32_t IpAddress::v4_value() const noexcept {
  return (std::uint32_t{bytes_[0]} << 24) | (std::uint32_t{bytes_[1]} << 16) |
         (std::uint32_t{bytes_[2]} << 8) | std::uint32_t{bytes_[3]};
}

std::string IpAddress::to_string() const {
  char buf[INET6_ADDRSTRLEN] = {};
  if (is_v4()) {
    inet_ntop(AF_INET, bytes_.data(), buf, sizeof buf);
  } else {
    inet_ntop(AF_INET6, bytes_.data(), buf, sizeof buf);
  }
  return buf;
}

namespace {

int max_prefix(const IpAddress& a) { return a.is_v4() ? 32 : 128; }

bool prefix_equal(const IpAddress& a, const IpAddress& b, int prefix_len) {
  const auto& x = a.bytes();
  const auto& y = b.bytes();
  int full = prefix_len / 8;
  for (int i = 0; i < full; ++i) {
    if (x[i] != y[i]) return false;
  }
  int rem = prefix_len % 8;
  if (rem == 0) return true;
  auto mask = static_cast<std::uint8_t>(0xFF << (8 - rem));
  return (x[full] & mask) == (y[full] & mask);
}

}  // namespace

Subnet Subnet::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw std::invalid_argument("subnet needs a /prefix: '" + std::string(text) + "'");
  }
  Subnet s;
  s.network = IpAddress::parse(text.substr(0, slash));
  std::string len(text.substr(slash + 1));
  std::size_t used = 0;
  try {
    s.prefix_len = std::stoi(len, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != len.size() || len.empty() || s.prefix_len < 0 || s.prefix_len > max_prefix(s.network)) {
    throw std::invalid_argument("bad subnet prefix: '" + std::string(text) + "'");
  }
  auto bytes = s.network.bytes();
  for (int bit = s.prefix_len; bit < max_prefix(s.network); ++bit) {
    bytes[bit / 8] &= static_cast<std::uint8_t>(~(0x80 >> (bit % 8)));
  }
  s.network = s.network.is_v4() ? IpAddress::v4((std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
                                                (std::uint32_t{bytes[2]} << 8) | bytes[3])
                                : IpAddress::v6(bytes);
  return s;
}

bool Subnet::contains(const IpAddress& addr) const {
  return addr.family() == network.family() && prefix_equal(addr, network, prefix_len);
}

IpAddress Subnet::broadcast() const {
  if (!network.is_v4()) return network;
  std::uint32_t host_mask = prefix_len == 0 ? 0xFFFFFFFFu : (prefix_len == 32 ? 0u : (0xFFFFFFFFu >> prefix_len));
  return IpAddress::v4(network.v4_value() | host_mask);
}

std::string Subnet::to_string() const { return network.to_string() + "/" + std::to_string(prefix_len); }

}  // namespace nsd
