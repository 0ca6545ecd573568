#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "obusim/cpm.hpp"
#include "obusim/types.hpp"

namespace obusim::pot {

/// Opaque stand-in for a zero-knowledge proof that `prover` saw `target`.
struct ProofToken {
  StationId prover = 0;
  PlateId target = 0;
  Tick tick = 0;
  std::uint32_t nonce = 0;

  friend bool operator==(const ProofToken&, const ProofToken&) = default;
};

/// Extension key under which tokens travel inside a vehicle.
inline constexpr const char* kExtension = "pot.proofs";

/// On the wire a token is an object entry whose plate has this bit set. Real
/// plates stay below it.
inline constexpr PlateId kProofFlag = 0x80000000u;

Bytes encode(std::span<const ProofToken> tokens);
/// Throws ParseError on a length that is not a whole number of tokens.
std::vector<ProofToken> decode(std::span<const std::uint8_t> bytes);

/// Wire entry: plate = flag | target, x = nonce, observed_tick = tick. The
/// prover is the carrying CPM's sender.
PerceivedObject to_wire(const ProofToken& token);
ProofToken from_wire(const PerceivedObject& entry, StationId sender);

inline bool is_proof(const PerceivedObject& o) noexcept { return (o.plate & kProofFlag) != 0; }

/// Moves tokens from the private extension into object entries so they
/// survive extension stripping.
void map_to_wire(Cpm& cpm);

}  // namespace obusim::pot
