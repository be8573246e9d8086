#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

#include "wkam/expr.hpp"
#include "wkam/simd/lane.hpp"

// Data-parallel kernels with scalar reference and AVX2 variants. All kernels
// are bit-identical across lanes for identical inputs; equivalence is enforced
// by tests/test_simd.cpp. Unlike wkam::evaluate, batch evaluation does not
// trap division by zero (IEEE inf/nan propagate).

namespace wkam::simd {

enum class OpCode : std::uint8_t {
  load_const,
  load_var,
  neg,
  add,
  mul,
  div,
  powi,
  sin,
  cos,
  exp,
};

struct BatchOp {
  OpCode code;
  std::int32_t dst = 0;
  std::int32_t a = 0;
  std::int32_t b = 0;    // second operand or integer exponent
  double cval = 0.0;     // load_const
};

struct BatchProgram {
  int dim = 0;
  int nregs = 0;
  int out = 0;
  std::vector<BatchOp> ops;
};

BatchProgram compile_batch(const Expr& e, int dim);

// out[i] = program(vars[0][i], ..., vars[dim-1][i])
void eval_batch(const BatchProgram& p, const double* const* vars, double* out,
                std::size_t n);
void eval_batch_lane(Lane lane, const BatchProgram& p, const double* const* vars,
                     double* out, std::size_t n);

// Standard normal pair for each chain c in [0,n): Box-Muller on the Philox
// block keyed (seed) with counter (chain0+c, step, sub, 0).
void normal_pairs(std::uint64_t seed, std::uint64_t chain0, std::uint64_t step,
                  std::uint32_t sub, double* z0, double* z1, std::size_t n);
void normal_pairs_lane(Lane lane, std::uint64_t seed, std::uint64_t chain0,
                       std::uint64_t step, std::uint32_t sub, double* z0, double* z1,
                       std::size_t n);

// out[i] = diag[i] * m[i]
void diag_mul(const double* diag, const double* m, double* out, std::size_t n);
void diag_mul_lane(Lane lane, const double* diag, const double* m, double* out,
                   std::size_t n);

// out[i] += cp[i] * m[ip[i]] + cm[i] * m[im[i]]
void gather_fma_acc(const double* m, const std::uint32_t* ip, const double* cp,
                    const std::uint32_t* im, const double* cm, double* out,
                    std::size_t n);
void gather_fma_acc_lane(Lane lane, const double* m, const std::uint32_t* ip,
                         const double* cp, const std::uint32_t* im, const double* cm,
                         double* out, std::size_t n);

// x[i] += s * y[i]
void axpy(double s, const double* y, double* x, std::size_t n);
void axpy_lane(Lane lane, double s, const double* y, double* x, std::size_t n);

void scale(double* x, double s, std::size_t n);

// Blocked reductions (4-wide partial sums, fixed combine order in all lanes).
double blocked_sum(const double* x, std::size_t n);
double blocked_sum_lane(Lane lane, const double* x, std::size_t n);
double blocked_l1(const double* x, std::size_t n);
double blocked_l1_lane(Lane lane, const double* x, std::size_t n);
double min_value(const double* x, std::size_t n);

// One Euler-Maruyama step for n chains in SoA layout:
//   u_k     = bbar_k[i]*dt + noise_amp*z_k[i]            (k < r)
//   x_j[i]  = wrap(x_j[i] + sum_k sigma_{jk}[i]*u_k, L_j) (j < d)
// sigma is d*r pointers, row-major [j*r+k].
void em_step(int d, int r, double* const* x, const double* const* sigma,
             const double* const* bbar, const double* const* z, double dt,
             double noise_amp, const double* periods, std::size_t n);
void em_step_lane(Lane lane, int d, int r, double* const* x, const double* const* sigma,
                  const double* const* bbar, const double* const* z, double dt,
                  double noise_amp, const double* periods, std::size_t n);

}  // namespace wkam::simd
