#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace nsd {

/// IPv4 or IPv6 address, stored as 16 bytes in network order. IPv4 occupies
/// the first four bytes. Ordering is family first, then bytes.
class IpAddress {
 public:
  enum class Family : std::uint8_t { V4 = 0, V6 = 1 };

  IpAddress() = default;

  static IpAddress v4(std::uint32_t host_order);
  static IpAddress v6(const std::array<std::uint8_t, 16>& bytes);
  static std::optional<IpAddress> try_parse(std::string_view text);
  /// Throws std::invalid_argument on malformed input.
  static IpAddress parse(std::string_view text);

  Family family() const noexcept { return family_; }
  bool is_v4() const noexcept { return family_ == Family::V4; }
  std::uint32_t v4_value() const noexcept;
  const std::array<std::uint8_t, 16>& bytes() const noexcept { return bytes_; }
  std::string to_string() const;

  auto operator<=>(const IpAddress&) const = default;

 private:
  Family family_ = Family::V4;
  std::array<std::uint8_t, 16> bytes_{};
};

/// An address prefix such as 192.168.50.0/24.
struct Subnet {
  IpAddress network;
  int prefix_len = 0;

  /// Parses "a.b.c.d/n" or "x::/n". Host bits are cleared.
  static Subnet parse(std::string_view text);
  bool contains(const IpAddress& addr) const;
  /// All-ones host part. Only meaningful for IPv4.
  IpAddress broadcast() const;
  std::string to_string() const;

  bool operator==(const Subnet&) const = default;
};

}  // namespace nsd

template <>
struct std::hash<nsd::IpAddress> {
  std::size_t operator()(const nsd::IpAddress& a) const noexcept {
    std::uint64_t h = 1469598103934665603ull ^ static_cast<std::uint64_t>(a.family());
    for (auto b : a.bytes()) {
      h ^= b;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};
