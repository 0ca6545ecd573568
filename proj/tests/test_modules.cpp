#include <cmath>

#include <gtest/gtest.h>

#include "obusim/errors.hpp"
#include "obusim/modules.hpp"
#include "obusim/pot.hpp"
#include "obusim/vehicle_types.hpp"

using namespace obusim;

namespace {

struct Harness {
  ModuleRegistry modules = ModuleRegistry::with_builtins();
  VehicleTypeRegistry types = VehicleTypeRegistry::builtin();
  Vehicle vehicle;

  Harness(const std::string& type, VehicleId id, std::optional<StationId> station)
      : vehicle(build_vehicle(types.get(type), id, "v" + std::to_string(id), station, modules)) {}

  TickResult tick(Tick t, std::vector<PlateId> seen = {}, std::vector<CpmPtr> inbox = {}) {
    std::vector<PerceivedObject> objects;
    for (auto p : seen) objects.push_back({p, 1.0 * p, 0.0, 0.0, t});
    SandboxEnv env;
    env.tick = t;
    env.pose = {vehicle.id(), 100.0, 200.0, 0.0};
    env.perception = &objects;
    env.comm_range = 300.0;
    env.seed = 99;
    return tick_vehicle(vehicle, inbox, env);
  }
};

CpmPtr remote(StationId sender, std::vector<PlateId> objects, std::vector<pot::ProofToken> proofs = {}) {
  Cpm c;
  c.sender_station = sender;
  for (auto p : objects) c.objects.push_back({p, 0, 0, 0, 0});
  for (auto& t : proofs) {
    t.prover = sender;
    c.objects.push_back(pot::to_wire(t));
  }
  return std::make_shared<const Cpm>(c);
}

pot::ProofToken proof_of(PlateId target, Tick tick = 0) { return {0, target, tick, 1234}; }

}  // namespace

TEST(Pot, EncodeDecodeRoundTrip) {
  const std::vector<pot::ProofToken> tokens{{1, 2, 3, 4}, {0xffffffff, 7, 100000, 0xdeadbeef}};
  EXPECT_EQ(pot::decode(pot::encode(tokens)), tokens);
  EXPECT_THROW(pot::decode(Bytes(7, 0)), ParseError);
  EXPECT_TRUE(pot::decode({}).empty());
}

TEST(Pot, WireMapping) {
  const pot::ProofToken t{5, 42, 17, 999};
  const auto w = pot::to_wire(t);
  EXPECT_TRUE(pot::is_proof(w));
  EXPECT_EQ(w.plate, pot::kProofFlag | 42u);
  EXPECT_EQ(pot::from_wire(w, 5), t);
  Cpm c;
  c.objects.push_back({3, 0, 0, 0, 0});
  c.extensions[pot::kExtension] = pot::encode(std::vector<pot::ProofToken>{t});
  pot::map_to_wire(c);
  ASSERT_EQ(c.objects.size(), 2u);
  EXPECT_TRUE(pot::is_proof(c.objects[1]));
  EXPECT_FALSE(c.extensions.contains(pot::kExtension));
}

TEST(ConnectedVehicle, BroadcastsWhatItSees) {
  Harness h("ConnectedVehicle", 1, StationId{0});
  EXPECT_TRUE(h.tick(0).broadcasts.empty());
  const auto r = h.tick(1, {7, 8});
  ASSERT_EQ(r.broadcasts.size(), 1u);
  const auto cpm = deserialize(r.broadcasts[0]);
  EXPECT_EQ(cpm.objects.size(), 2u);
  EXPECT_EQ(cpm.gen_tick, 1);
  EXPECT_EQ(cpm.sender_x, 100.0);
  EXPECT_EQ(r.record.bytes_sent, wire_size(2));
  EXPECT_EQ(r.record.local_objects, 2u);
}

TEST(ConnectedVehicle, CountsReceivedObjectsButNotItself) {
  Harness h("ConnectedVehicle", 1, StationId{0});
  auto r = h.tick(0, {7}, {remote(3, {1, 7, 8}), remote(4, {8, 9})});
  EXPECT_EQ(r.record.local_objects, 1u);
  EXPECT_EQ(r.record.received_objects, 3u);  // 7, 8, 9
  EXPECT_EQ(r.record.all_objects, 3u);
  r = h.tick(1, {}, {remote(3, {10})});
  EXPECT_EQ(r.record.received_objects, 4u);
  EXPECT_EQ(r.record.all_objects, 4u);
}

TEST(Unconnected, NeverSendsOrReceives) {
  Harness h("UnconnectedVehicle", 1, std::nullopt);
  const auto r = h.tick(0, {5, 6});
  EXPECT_TRUE(r.broadcasts.empty());
  EXPECT_EQ(r.record.local_objects, 2u);
  EXPECT_EQ(r.record.received_objects, 0u);
}

TEST(SilenceAttacker, PerceivesButStaysQuiet) {
  Harness h("SilenceAttacker", 1, StationId{0});
  const auto r = h.tick(0, {5, 6}, {remote(2, {9})});
  EXPECT_TRUE(r.broadcasts.empty());
  EXPECT_EQ(r.record.bytes_sent, 0u);
  EXPECT_EQ(r.record.local_objects, 2u);
  EXPECT_EQ(r.record.received_objects, 1u);
}

TEST(SpamAttacker, ForgesObjectsInsideRadioRange) {
  Harness h("SpamAttacker", 1, StationId{0});
  for (Tick t = 0; t < 20; ++t) {
    const auto r = h.tick(t, {5});
    ASSERT_EQ(r.broadcasts.size(), 1u);
    const auto cpm = deserialize(r.broadcasts[0]);
    ASSERT_EQ(cpm.objects.size(), 5u);
    for (const auto& o : cpm.objects) {
      EXPECT_GE(o.plate, kForgedPlateBase);
      EXPECT_LT(o.plate, pot::kProofFlag);
      EXPECT_LE(std::hypot(o.x - 100.0, o.y - 200.0), 300.0);
    }
  }
}

TEST(SpamAttacker, DeterministicPerSeed) {
  Harness a("SpamAttacker", 1, StationId{0});
  Harness b("SpamAttacker", 1, StationId{0});
  EXPECT_EQ(a.tick(3).broadcasts, b.tick(3).broadcasts);
}

TEST(ReplayAttacker, RebroadcastsStoredMessages) {
  Harness h("ReplayAttacker", 1, StationId{0});
  EXPECT_TRUE(h.tick(0).broadcasts.empty());
  const auto first = remote(4, {11, 12, 13});
  auto r = h.tick(1, {}, {first});
  ASSERT_EQ(r.broadcasts.size(), 1u);
  EXPECT_EQ(deserialize(r.broadcasts[0]), *first);
  // With only one stored message it keeps replaying it.
  r = h.tick(2);
  ASSERT_EQ(r.broadcasts.size(), 1u);
  EXPECT_EQ(deserialize(r.broadcasts[0]).objects.size(), 3u);
}

TEST(PotVehicle, SendsOneProofPerNewPlate) {
  Harness h("PoTVehicle", 1, StationId{0});
  auto r = h.tick(0, {7, 8});
  ASSERT_EQ(r.broadcasts.size(), 1u);
  auto cpm = deserialize(r.broadcasts[0]);
  std::size_t proofs = 0;
  for (const auto& o : cpm.objects) {
    if (!pot::is_proof(o)) continue;
    ++proofs;
    const auto t = pot::from_wire(o, cpm.sender_station);
    EXPECT_EQ(t.prover, 0u);
    EXPECT_EQ(t.tick, 0);
  }
  EXPECT_EQ(proofs, 2u);
  EXPECT_EQ(r.record.bytes_sent, wire_size(4));
  r = h.tick(1, {7, 8, 9});
  EXPECT_EQ(r.record.bytes_sent, wire_size(4));  // 3 objects + 1 new proof
  EXPECT_EQ(r.record.local_objects, 3u);
}

TEST(PotVehicle, VerifiesAfterTwoDistinctProvers) {
  Harness h("PoTVehicle", 1, StationId{0});
  EXPECT_TRUE(h.tick(0, {9}).record.ttv.empty());
  EXPECT_TRUE(h.tick(1, {}, {remote(3, {}, {proof_of(9)})}).record.ttv.empty());
  // Same prover again and a proof by this vehicle's own station do not count.
  EXPECT_TRUE(h.tick(2, {}, {remote(3, {}, {proof_of(9)}), remote(0, {}, {proof_of(9)})}).record.ttv.empty());
  auto r = h.tick(3, {}, {remote(5, {}, {proof_of(9)})});
  EXPECT_EQ(r.record.ttv, (TtvHistogram{{3, 1}}));
  r = h.tick(4, {}, {remote(6, {}, {proof_of(9)})});
  EXPECT_EQ(r.record.ttv, (TtvHistogram{{3, 1}}));
}

TEST(PotVehicle, ProofsBeforeTheObjectVerifyWithZeroDelay) {
  Harness h("PoTVehicle", 1, StationId{0});
  h.tick(0, {}, {remote(3, {}, {proof_of(9)}), remote(4, {}, {proof_of(9)})});
  const auto r = h.tick(1, {}, {remote(3, {9})});
  EXPECT_EQ(r.record.ttv, (TtvHistogram{{0, 1}}));
  EXPECT_EQ(r.record.received_objects, 1u);
}

TEST(PotVehicle, ProofEntriesAreNotObjects) {
  Harness h("PoTVehicle", 1, StationId{0});
  const auto r = h.tick(0, {}, {remote(3, {}, {proof_of(9), proof_of(10)})});
  EXPECT_EQ(r.record.received_objects, 0u);
  EXPECT_EQ(r.record.all_objects, 0u);
}

TEST(Modules, ParameterErrors) {
  auto reg = ModuleRegistry::with_builtins();
  ModuleParams zero;
  zero.set("provers", "0");
  EXPECT_THROW(reg.create("proof_verifier", zero), ConfigError);
  ModuleParams cap;
  cap.set("capacity", "0");
  EXPECT_THROW(reg.create("replay", cap), ConfigError);
  EXPECT_THROW(reg.create("nonexistent", {}), SchemaError);
}
