#pragma once

#include "obusim/sandbox.hpp"

namespace obusim {

/// Fake plates forged by spam attackers fall in [kForgedPlateBase, pot::kProofFlag).
inline constexpr PlateId kForgedPlateBase = 0x40000000u;

/// Extension key marking a CPM that carries this vehicle's own camera output.
inline constexpr const char* kOriginExtension = "origin";

/// Adds the built-in module kinds:
///   perception       camera output as one local CPM
///   object_store     records local and received objects
///   cpm_assembler    merges local CPMs into one outgoing CPM
///   cpm_tx           broadcasts every non-empty CPM it gets
///   proof_generator  one proof token per newly perceived plate
///   proof_verifier   cross-verification and time-to-verify
///   spam_generator   `k` forged objects per tick (param k, default 5)
///   replay           rebroadcasts `per_tick` of the last `capacity` CPMs
///                    (defaults 1 and 50)
void register_builtin_modules(ModuleRegistry& registry);

}  // namespace obusim
