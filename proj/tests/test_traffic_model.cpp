#include <doctest.h>

#include "nsd/errors.hpp"
#include "nsd/traffic_model.hpp"

using namespace nsd;

namespace {

PacketRecord pkt(const char* src, const char* dst) {
  PacketRecord p;
  p.src_ip = IpAddress::parse(src);
  p.dst_ip = IpAddress::parse(dst);
  p.size_bytes = 100;
  p.protocol = Protocol::Udp;
  p.src_port = 1000;
  p.dst_port = 2000;
  return p;
}

const AddressPlan kPlan({IpAddress::parse("192.168.1.5"), IpAddress::parse("192.168.1.6")},
                        {Subnet::parse("192.168.1.0/24")});

}  // namespace

TEST_CASE("ip address parsing and formatting") {
  auto a = IpAddress::parse("10.1.2.3");
  CHECK(a.is_v4());
  CHECK(a.v4_value() == 0x0A010203u);
  CHECK(a.to_string() == "10.1.2.3");
  auto b = IpAddress::parse("2001:db8::1");
  CHECK_FALSE(b.is_v4());
  CHECK(b.to_string() == "2001:db8::1");
  CHECK_FALSE(IpAddress::try_parse("300.1.1.1"));
  CHECK_THROWS_AS(IpAddress::parse("nope"), std::invalid_argument);
  CHECK(IpAddress::parse("1.2.3.4") < IpAddress::parse("1.2.3.5"));
}

TEST_CASE("subnet masks host bits and computes broadcast") {
  auto s = Subnet::parse("192.168.1.77/24");
  CHECK(s.to_string() == "192.168.1.0/24");
  CHECK(s.contains(IpAddress::parse("192.168.1.200")));
  CHECK_FALSE(s.contains(IpAddress::parse("192.168.2.1")));
  CHECK(s.broadcast() == IpAddress::parse("192.168.1.255"));
  CHECK_THROWS(Subnet::parse("192.168.1.0/33"));
}

TEST_CASE("direction classification") {
  CHECK(classify_direction(pkt("192.168.1.5", "8.8.8.8"), kPlan) == Direction::Ul);
  CHECK(classify_direction(pkt("8.8.8.8", "192.168.1.5"), kPlan) == Direction::Dl);
  CHECK_THROWS_AS(classify_direction(pkt("192.168.1.5", "192.168.1.6"), kPlan), DirectionError);
  CHECK_THROWS_AS(classify_direction(pkt("1.1.1.1", "8.8.8.8"), kPlan), DirectionError);
}

TEST_CASE("conversation key normalizes direction") {
  auto ul = conversation_key(pkt("192.168.1.5", "8.8.8.8"), kPlan);
  auto dl = conversation_key(pkt("8.8.8.8", "192.168.1.5"), kPlan);
  CHECK(ul.local_ip == IpAddress::parse("192.168.1.5"));
  CHECK(ul.remote_ip == IpAddress::parse("8.8.8.8"));
  CHECK(ul == dl);
  auto other = conversation_key(pkt("192.168.1.6", "8.8.8.8"), kPlan);
  CHECK(other != ul);
  CHECK(ul.to_string() == "192.168.1.5-8.8.8.8");
  CHECK(ConversationKey::parse(ul.to_string()) == ul);
  CHECK(ConversationKey::parse("fe80::1-2001:db8::2").remote_ip == IpAddress::parse("2001:db8::2"));
}

TEST_CASE("relevance filter") {
  auto key = [](const char* remote) { return ConversationKey{IpAddress::parse("192.168.1.5"), IpAddress::parse(remote)}; };
  CHECK_FALSE(is_relevant(key("255.255.255.255"), kPlan));
  CHECK_FALSE(is_relevant(key("224.0.0.251"), kPlan));
  CHECK_FALSE(is_relevant(key("239.255.255.250"), kPlan));
  CHECK_FALSE(is_relevant(key("192.168.1.255"), kPlan));
  CHECK_FALSE(is_relevant(key("169.254.10.1"), kPlan));
  CHECK_FALSE(is_relevant(key("ff02::fb"), kPlan));
  CHECK(is_relevant(key("142.250.64.110"), kPlan));
  CHECK(is_relevant(key("192.168.1.254"), kPlan));
}

TEST_CASE("packet validation") {
  auto p = pkt("192.168.1.5", "8.8.8.8");
  CHECK_NOTHROW(validate(p));
  p.src_port.reset();
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  auto q = pkt("192.168.1.5", "8.8.8.8");
  q.timestamp_us = -1;
  CHECK_THROWS_AS(validate(q), std::invalid_argument);
  auto o = pkt("192.168.1.5", "8.8.8.8");
  o.protocol = Protocol::Other;
  CHECK_THROWS_AS(validate(o), std::invalid_argument);
  o.src_port.reset();
  o.dst_port.reset();
  CHECK_NOTHROW(validate(o));
  CHECK(parse_protocol("tcp") == Protocol::Tcp);
  CHECK_FALSE(parse_protocol("icmp"));
}
