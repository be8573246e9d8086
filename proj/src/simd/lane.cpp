#include "wkam/simd/lane.hpp"

#include <cstdlib>
#include <stdexcept>

namespace wkam::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::optional<Lane>& forced() {
  static std::optional<Lane> f;
  return f;
}

Lane env_or_best() {
  if (const char* env = std::getenv("WKAM_SIMD")) {
    std::string v(env);
    if (v == "scalar") return Lane::scalar;
    if (v == "avx2" && cpu_has_avx2()) return Lane::avx2;
  }
  return cpu_has_avx2() ? Lane::avx2 : Lane::scalar;
}

}  // namespace

bool lane_available(Lane lane) {
  return lane == Lane::scalar || (lane == Lane::avx2 && cpu_has_avx2());
}

Lane active_lane() {
  if (forced()) {
    if (!lane_available(*forced())) throw std::runtime_error("forced lane unavailable");
    return *forced();
  }
  static Lane selected = env_or_best();
  return selected;
}

void force_lane(std::optional<Lane> lane) { forced() = lane; }

std::string lane_name(Lane lane) { return lane == Lane::scalar ? "scalar" : "avx2"; }

}  // namespace wkam::simd
