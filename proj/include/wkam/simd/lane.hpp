#pragma once

#include <optional>
#include <string>

namespace wkam::simd {

// Kernel lanes. The scalar lane is the reference implementation; vector lanes
// must produce bit-identical outputs (same operation sequence, explicit fma).
enum class Lane { scalar, avx2 };

bool lane_available(Lane lane);

// Active lane: WKAM_SIMD=scalar|avx2 overrides, else best available.
Lane active_lane();

// Test hook; pass nullopt to restore automatic selection.
void force_lane(std::optional<Lane> lane);

std::string lane_name(Lane lane);

}  // namespace wkam::simd
