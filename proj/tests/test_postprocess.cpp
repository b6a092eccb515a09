#include <doctest.h>

#include <sstream>

#include "nsd/errors.hpp"
#include "nsd/postprocess.hpp"

using namespace nsd;

namespace {

constexpr std::size_t CG = 0, RT = 1, NRT = 2;

HistoryBuffer buffer_of(std::initializer_list<std::size_t> labels, std::size_t cap = 7) {
  HistoryBuffer b(cap);
  for (auto l : labels) b.push(l);
  return b;
}

Detection raw(L1Class l1, std::optional<SubClass> sub = std::nullopt) {
  Detection d;
  d.l1 = l1;
  d.sub = sub;
  return d;
}

const ConversationKey kKey{IpAddress::v4(1), IpAddress::v4(2)};

}  // namespace

TEST_CASE("history buffer keeps the newest entries") {
  auto b = buffer_of({CG, RT, NRT, RT}, 3);
  CHECK(b.size() == 3);
  CHECK(b.slots().front() == RT);
  CHECK(b.count(RT) == 2);
  CHECK_THROWS_AS(HistoryBuffer(0), std::invalid_argument);
}

TEST_CASE("majority vote") {
  CHECK(vote(buffer_of({RT, RT, NRT, RT, NRT, RT, RT})) == RT);
  CHECK(vote(buffer_of({RT, RT, RT, NRT, NRT, NRT})) == RT);
  CHECK(vote(buffer_of({NRT, NRT, NRT, RT, RT, RT})) == RT);
  CHECK(vote(buffer_of({NRT, CG, NRT, CG})) == CG);
  CHECK(vote(buffer_of({CG})) == CG);
  CHECK_FALSE(vote(HistoryBuffer(7)));
}

TEST_CASE("sensor fusion rules") {
  HistoryBuffer l1 = buffer_of({RT, RT, RT, RT, RT});
  SensorState none;
  for (std::size_t v : {CG, RT, NRT}) CHECK(fuse_sensors(Layer::L1, v, none, l1) == v);
  for (std::size_t v : {0u, 1u, 2u}) CHECK(fuse_sensors(Layer::L2Rt, v, none, l1) == v);
  SensorState gaming{true, false, 0};
  CHECK(fuse_sensors(Layer::L1, NRT, gaming, l1) == RT);
  CHECK(fuse_sensors(Layer::L1, CG, gaming, l1) == CG);
  CHECK(fuse_sensors(Layer::L1, RT, gaming, l1) == RT);
  SensorState camera{false, true, 0};
  const auto ac = sub_index(SubClass::Ac), vc = sub_index(SubClass::Vc);
  CHECK(fuse_sensors(Layer::L2Rt, ac, camera, l1) == vc);
  CHECK(fuse_sensors(Layer::L2Rt, ac, camera, buffer_of({RT, RT, CG, CG})) == ac);
  CHECK(fuse_sensors(Layer::L2Rt, ac, camera, buffer_of({RT, RT, RT, CG})) == vc);
  CHECK(fuse_sensors(Layer::L2Rt, ac, camera, buffer_of({RT, RT, RT}), FusionConfig{4}) == ac);
  CHECK(fuse_sensors(Layer::L2Nrt, 1, SensorState{true, true, 0}, l1) == 1);
  CHECK(fuse_sensors(Layer::L1, NRT, camera, l1) == NRT);
}

TEST_CASE("post-processor smooths and keeps L2 inside the final L1") {
  PostProcessor pp;
  SensorState s;
  auto o = pp.update(kKey, raw(L1Class::Rt, SubClass::Ac), s);
  CHECK(o.l1_final == L1Class::Rt);
  CHECK(o.l2_final == SubClass::Ac);
  pp.update(kKey, raw(L1Class::Rt, SubClass::Ac), s);
  o = pp.update(kKey, raw(L1Class::Nrt, SubClass::Fd), s);
  CHECK(o.l1_voted == L1Class::Rt);
  CHECK(o.l1_final == L1Class::Rt);
  CHECK(o.l2_final == SubClass::Ac);

  o = pp.update(kKey, raw(L1Class::Cg), s);
  CHECK(o.l1_final == L1Class::Rt);
  for (int i = 0; i < 3; ++i) o = pp.update(kKey, raw(L1Class::Cg), s);
  CHECK(o.l1_final == L1Class::Cg);
  CHECK_FALSE(o.l2_final);
  CHECK_FALSE(o.l2_voted);
}

TEST_CASE("gaming flag promotes NRT and the camera forces VC") {
  PostProcessor pp;
  SensorState gaming{true, false, 0};
  auto o = pp.update(kKey, raw(L1Class::Nrt, SubClass::Vs), gaming);
  CHECK(o.l1_voted == L1Class::Nrt);
  CHECK(o.l1_final == L1Class::Rt);
  CHECK_FALSE(o.l2_final);  // no RT sub-class history yet

  PostProcessor cam;
  SensorState camera{false, true, 0};
  for (int i = 0; i < 2; ++i) {
    o = cam.update(kKey, raw(L1Class::Rt, SubClass::Ac), camera);
    CHECK(o.l2_final == SubClass::Ac);
  }
  o = cam.update(kKey, raw(L1Class::Rt, SubClass::Ac), camera);
  CHECK(o.l2_voted == SubClass::Ac);
  CHECK(o.l2_final == SubClass::Vc);
  o = cam.update(kKey, raw(L1Class::Rt, SubClass::Ac), SensorState{});
  CHECK(o.l2_final == SubClass::Ac);
}

TEST_CASE("reset clears a conversation's history") {
  PostProcessor pp;
  for (int i = 0; i < 5; ++i) pp.update(kKey, raw(L1Class::Cg), {});
  REQUIRE(pp.buffers(kKey));
  CHECK(pp.buffers(kKey)->l1.size() == 5);
  pp.reset(kKey);
  CHECK(pp.buffers(kKey) == nullptr);
  auto o = pp.update(kKey, raw(L1Class::Nrt, SubClass::Fd), {});
  CHECK(o.l1_final == L1Class::Nrt);
}

TEST_CASE("sensor trace parsing") {
  std::istringstream in(R"({"step":3,"gaming_flag":true}
{"step":5,"camera_active":true,"gaming_flag":false}

)");
  auto t = read_sensor_trace(in);
  CHECK(t.size() == 2);
  CHECK(t.at(3).gaming_flag);
  CHECK_FALSE(t.at(3).camera_active);
  CHECK(t.at(5).camera_active);
  CHECK_FALSE(t.at(4).gaming_flag);
  CHECK(t.at(4).step == 4);
  std::istringstream bad("{\"gaming_flag\":true}\n");
  CHECK_THROWS_AS(read_sensor_trace(bad), ParseError);
}
