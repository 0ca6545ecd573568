#include "obusim/modules.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "obusim/errors.hpp"
#include "obusim/pot.hpp"

namespace obusim {
namespace {

bool is_local(const Cpm& cpm) {
  auto it = cpm.extensions.find(kOriginExtension);
  if (it == cpm.extensions.end()) return false;
  static constexpr std::string_view kLocal = "local";
  return std::equal(it->second.begin(), it->second.end(), kLocal.begin(), kLocal.end());
}

void mark_local(Cpm& cpm) {
  static constexpr std::string_view kLocal = "local";
  cpm.extensions[kOriginExtension] = Bytes(kLocal.begin(), kLocal.end());
}

class PerceptionModule final : public ObuModule {
 public:
  std::vector<CpmPtr> process(std::span<const CpmPtr>, VehicleContext& ctx) override {
    Cpm cpm = ctx.make_cpm();
    const auto seen = ctx.perceive();
    cpm.objects.assign(seen.begin(), seen.end());
    mark_local(cpm);
    return {std::make_shared<const Cpm>(std::move(cpm))};
  }
};

class ObjectStore final : public ObuModule {
 public:
  std::vector<CpmPtr> process(std::span<const CpmPtr> inbox, VehicleContext& ctx) override {
    for (const auto& cpm : inbox) {
      const bool local = is_local(*cpm);
      for (const auto& o : cpm->objects) {
        if (pot::is_proof(o) || o.plate == ctx.self()) continue;
        if (local) ctx.note_local(o.plate);
        else ctx.note_received(o.plate);
      }
    }
    return {};
  }
};

class CpmAssembler final : public ObuModule {
 public:
  std::vector<CpmPtr> process(std::span<const CpmPtr> inbox, VehicleContext& ctx) override {
    Cpm out = ctx.make_cpm();
    std::unordered_set<PlateId> listed;
    for (const auto& cpm : inbox) {
      if (!is_local(*cpm)) continue;
      for (const auto& o : cpm->objects) {
        if (listed.insert(o.plate).second) out.objects.push_back(o);
      }
      for (const auto& [key, value] : cpm->extensions) {
        if (key == kOriginExtension) continue;
        auto& merged = out.extensions[key];
        merged.insert(merged.end(), value.begin(), value.end());
      }
    }
    if (out.objects.empty() && out.extensions.empty()) return {};
    mark_local(out);
    return {std::make_shared<const Cpm>(std::move(out))};
  }
};

class CpmTx final : public ObuModule {
 public:
  std::vector<CpmPtr> process(std::span<const CpmPtr> inbox, VehicleContext& ctx) override {
    for (const auto& cpm : inbox) {
      Cpm wire = *cpm;
      pot::map_to_wire(wire);
      if (wire.objects.empty()) continue;
      ctx.broadcast(wire);
    }
    return {};
  }
};

class ProofGenerator final : public ObuModule {
 public:
  std::vector<CpmPtr> process(std::span<const CpmPtr> inbox, VehicleContext& ctx) override {
    std::vector<pot::ProofToken> tokens;
    for (const auto& cpm : inbox) {
      if (!is_local(*cpm)) continue;
      for (const auto& o : cpm->objects) {
        if (pot::is_proof(o) || !proven_.insert(o.plate).second) continue;
        tokens.push_back({ctx.station().value_or(0), o.plate, ctx.tick(),
                          static_cast<std::uint32_t>(ctx.rng().next_u64())});
      }
    }
    if (tokens.empty()) return {};
    Cpm out = ctx.make_cpm();
    out.extensions[pot::kExtension] = pot::encode(tokens);
    mark_local(out);
    return {std::make_shared<const Cpm>(std::move(out))};
  }

 private:
  std::unordered_set<PlateId> proven_;
};

// An object is believed once proofs about it from `threshold` distinct other
// stations are held; its time-to-verify is counted from when the vehicle
// first learned of it.
class ProofVerifier final : public ObuModule {
 public:
  explicit ProofVerifier(std::size_t threshold) : threshold_(threshold) {}

  std::vector<CpmPtr> process(std::span<const CpmPtr> inbox, VehicleContext& ctx) override {
    std::vector<PlateId> touched;
    auto learn = [&](PlateId plate) {
      if (plate == ctx.self()) return;
      if (first_seen_.try_emplace(plate, ctx.tick()).second) touched.push_back(plate);
    };
    for (const auto& cpm : inbox) {
      const bool local = is_local(*cpm);
      for (const auto& o : cpm->objects) {
        if (!pot::is_proof(o)) {
          learn(o.plate);
          continue;
        }
        if (local) continue;
        const auto token = pot::from_wire(o, cpm->sender_station);
        if (ctx.station() && token.prover == *ctx.station()) continue;
        auto& who = provers_[token.target];
        if (std::find(who.begin(), who.end(), token.prover) == who.end()) {
          who.push_back(token.prover);
          touched.push_back(token.target);
        }
      }
    }
    for (PlateId plate : touched) {
      auto seen = first_seen_.find(plate);
      auto who = provers_.find(plate);
      if (seen == first_seen_.end() || who == provers_.end()) continue;
      if (who->second.size() < threshold_ || !verified_.insert(plate).second) continue;
      ctx.note_verified(ctx.tick() - seen->second);
    }
    return {};
  }

 private:
  std::size_t threshold_;
  std::unordered_map<PlateId, Tick> first_seen_;
  std::unordered_map<PlateId, std::vector<StationId>> provers_;
  std::unordered_set<PlateId> verified_;
};

class SpamGenerator final : public ObuModule {
 public:
  explicit SpamGenerator(std::size_t k) : k_(k) {}

  std::vector<CpmPtr> process(std::span<const CpmPtr>, VehicleContext& ctx) override {
    if (k_ == 0) return {};
    Cpm out = ctx.make_cpm();
    auto& rng = ctx.rng();
    const auto& pose = ctx.pose();
    for (std::size_t i = 0; i < k_; ++i) {
      PerceivedObject o;
      o.plate = kForgedPlateBase + static_cast<PlateId>(rng.below(pot::kProofFlag - kForgedPlateBase));
      const double r = ctx.comm_range() * std::sqrt(rng.uniform());
      const double theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
      o.x = pose.x + r * std::cos(theta);
      o.y = pose.y + r * std::sin(theta);
      o.heading = normalize_angle(rng.uniform(-std::numbers::pi, std::numbers::pi));
      o.observed_tick = ctx.tick();
      out.objects.push_back(o);
    }
    return {std::make_shared<const Cpm>(std::move(out))};
  }

 private:
  std::size_t k_;
};

class Replay final : public ObuModule {
 public:
  Replay(std::size_t capacity, std::size_t per_tick) : capacity_(capacity), per_tick_(per_tick) {}

  std::vector<CpmPtr> process(std::span<const CpmPtr> inbox, VehicleContext& ctx) override {
    for (const auto& cpm : inbox) {
      if (cpm->objects.empty()) continue;
      if (is_local(*cpm)) {
        Cpm wire = strip_extensions(*cpm);
        if (wire.objects.empty()) continue;
        history_.push_back(std::make_shared<const Cpm>(std::move(wire)));
      } else {
        history_.push_back(cpm);
      }
      if (history_.size() > capacity_) history_.pop_front();
    }
    const std::size_t n = std::min(per_tick_, history_.size());
    if (n == 0) return {};
    std::vector<std::size_t> pick(history_.size());
    std::iota(pick.begin(), pick.end(), std::size_t{0});
    auto& rng = ctx.rng();
    for (std::size_t i = 0; i < n; ++i) {
      std::swap(pick[i], pick[i + rng.below(pick.size() - i)]);
    }
    std::vector<CpmPtr> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(history_[pick[i]]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t per_tick_;
  std::deque<CpmPtr> history_;
};

}  // namespace

void register_builtin_modules(ModuleRegistry& registry) {
  registry.add("perception", [](const ModuleParams&) { return std::make_unique<PerceptionModule>(); });
  registry.add("object_store", [](const ModuleParams&) { return std::make_unique<ObjectStore>(); });
  registry.add("cpm_assembler", [](const ModuleParams&) { return std::make_unique<CpmAssembler>(); });
  registry.add("cpm_tx", [](const ModuleParams&) { return std::make_unique<CpmTx>(); });
  registry.add("proof_generator", [](const ModuleParams&) { return std::make_unique<ProofGenerator>(); });
  registry.add("proof_verifier", [](const ModuleParams& p) {
    const auto threshold = p.get_uint("provers", 2);
    if (threshold == 0) throw ConfigError("proof_verifier.provers must be positive");
    return std::make_unique<ProofVerifier>(threshold);
  });
  registry.add("spam_generator", [](const ModuleParams& p) {
    return std::make_unique<SpamGenerator>(p.get_uint("k", 5));
  });
  registry.add("replay", [](const ModuleParams& p) {
    const auto capacity = p.get_uint("capacity", 50);
    if (capacity == 0) throw ConfigError("replay.capacity must be positive");
    return std::make_unique<Replay>(capacity, p.get_uint("per_tick", 1));
  });
}

ModuleRegistry ModuleRegistry::with_builtins() {
  ModuleRegistry r;
  register_builtin_modules(r);
  return r;
}

}  // namespace obusim
