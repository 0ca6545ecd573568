#include "obusim/pot.hpp"

#include <string>

#include "obusim/errors.hpp"

namespace obusim::pot {
namespace {

constexpr std::size_t kTokenBytes = 4 + 4 + 8 + 4;

void put(Bytes& out, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get(std::span<const std::uint8_t> in, std::size_t at, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= std::uint64_t{in[at + i]} << (8 * i);
  return v;
}

}  // namespace

Bytes encode(std::span<const ProofToken> tokens) {
  Bytes out;
  out.reserve(tokens.size() * kTokenBytes);
  for (const auto& t : tokens) {
    put(out, t.prover, 4);
    put(out, t.target, 4);
    put(out, static_cast<std::uint64_t>(t.tick), 8);
    put(out, t.nonce, 4);
  }
  return out;
}

std::vector<ProofToken> decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % kTokenBytes != 0) {
    throw ParseError("proof extension length " + std::to_string(bytes.size()) +
                         " is not a multiple of the token size",
                     0);
  }
  std::vector<ProofToken> out;
  out.reserve(bytes.size() / kTokenBytes);
  for (std::size_t at = 0; at < bytes.size(); at += kTokenBytes) {
    ProofToken t;
    t.prover = static_cast<StationId>(get(bytes, at, 4));
    t.target = static_cast<PlateId>(get(bytes, at + 4, 4));
    t.tick = static_cast<Tick>(get(bytes, at + 8, 8));
    t.nonce = static_cast<std::uint32_t>(get(bytes, at + 16, 4));
    out.push_back(t);
  }
  return out;
}

PerceivedObject to_wire(const ProofToken& token) {
  return {kProofFlag | token.target, static_cast<double>(token.nonce), 0.0, 0.0, token.tick};
}

ProofToken from_wire(const PerceivedObject& entry, StationId sender) {
  return {sender, entry.plate & ~kProofFlag, entry.observed_tick,
          static_cast<std::uint32_t>(entry.x)};
}

void map_to_wire(Cpm& cpm) {
  auto it = cpm.extensions.find(kExtension);
  if (it == cpm.extensions.end()) return;
  for (const auto& t : decode(it->second)) cpm.objects.push_back(to_wire(t));
  cpm.extensions.erase(it);
}

}  // namespace obusim::pot
