#pragma once

// Per-element reference implementations shared by the scalar lane and by the
// AVX2 lane's tail handling. Keeping one definition is what guarantees the
// lanes agree on remainder elements.

#include <cmath>
#include <cstdint>

#include "wkam/simd/batch.hpp"
#include "wkam/simd/philox.hpp"
#include "wkam/simd/vm.hpp"

namespace wkam::simd::detail {

inline constexpr double TWO_PI = 6.283185307179586476925287e+00;

inline double eval_program_one(const BatchProgram& p, const double* const* vars,
                               std::size_t i, double* regs) {
  for (const BatchOp& op : p.ops) {
    switch (op.code) {
      case OpCode::load_const:
        regs[op.dst] = op.cval;
        break;
      case OpCode::load_var:
        regs[op.dst] = vars[op.a][i];
        break;
      case OpCode::neg:
        regs[op.dst] = -regs[op.a];
        break;
      case OpCode::add:
        regs[op.dst] = regs[op.a] + regs[op.b];
        break;
      case OpCode::mul:
        regs[op.dst] = regs[op.a] * regs[op.b];
        break;
      case OpCode::div:
        regs[op.dst] = regs[op.a] / regs[op.b];
        break;
      case OpCode::powi: {
        double base = regs[op.a];
        int e = op.b;
        unsigned k = e < 0 ? static_cast<unsigned>(-e) : static_cast<unsigned>(e);
        double acc = 1.0;
        while (k) {
          if (k & 1) acc = acc * base;
          base = base * base;
          k >>= 1;
        }
        regs[op.dst] = e < 0 ? 1.0 / acc : acc;
        break;
      }
      case OpCode::sin:
        regs[op.dst] = vm_sin(regs[op.a]);
        break;
      case OpCode::cos:
        regs[op.dst] = vm_cos(regs[op.a]);
        break;
      case OpCode::exp:
        regs[op.dst] = vm_exp(regs[op.a]);
        break;
    }
  }
  return regs[p.out];
}

inline void normal_pair_one(std::uint64_t seed, std::uint64_t chain, std::uint64_t step,
                            std::uint32_t sub, double& z0, double& z1) {
  std::uint32_t ctr[4] = {static_cast<std::uint32_t>(chain),
                          static_cast<std::uint32_t>(chain >> 32),
                          static_cast<std::uint32_t>(step), sub};
  std::uint32_t key[2] = {static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32)};
  std::uint32_t out[4];
  philox4x32(ctr, key, out);
  std::uint64_t a = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  std::uint64_t b = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  double u1 = static_cast<double>(a >> 12) * 0x1p-52 + 0x1p-53;
  double u2 = static_cast<double>(b >> 12) * 0x1p-52 + 0x1p-53;
  double r = std::sqrt(-2.0 * vm_log(u1));
  double theta = TWO_PI * u2;
  z0 = r * vm_cos(theta);
  z1 = r * vm_sin(theta);
}

inline void em_step_one(int d, int r, double* const* x, const double* const* sigma,
                        const double* const* bbar, const double* const* z, double dt,
                        double noise_amp, const double* periods, std::size_t i) {
  double u[8];
  for (int k = 0; k < r; ++k) u[k] = std::fma(bbar[k][i], dt, noise_amp * z[k][i]);
  for (int j = 0; j < d; ++j) {
    double acc = sigma[static_cast<std::size_t>(j) * r][i] * u[0];
    for (int k = 1; k < r; ++k)
      acc = std::fma(sigma[static_cast<std::size_t>(j) * r + k][i], u[k], acc);
    double v = x[j][i] + acc;
    double L = periods[j];
    v = v - L * std::floor(v / L);
    x[j][i] = v;
  }
}

inline void gather_fma_acc_one(const double* m, const std::uint32_t* ip, const double* cp,
                               const std::uint32_t* im, const double* cm, double* out,
                               std::size_t i) {
  out[i] = std::fma(cp[i], m[ip[i]], std::fma(cm[i], m[im[i]], out[i]));
}

}  // namespace wkam::simd::detail
