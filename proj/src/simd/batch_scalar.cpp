#include <cassert>
#include <stdexcept>

#include "scalar_impl.hpp"
#include "wkam/simd/batch.hpp"

namespace wkam::simd {

namespace detail {

// AVX2 lane entry points (batch_avx2.cpp, compiled with -mavx2 -mfma).
#ifdef WKAM_WITH_AVX2
void avx2_eval_batch(const BatchProgram&, const double* const*, double*, std::size_t);
void avx2_normal_pairs(std::uint64_t, std::uint64_t, std::uint64_t, std::uint32_t,
                       double*, double*, std::size_t);
void avx2_diag_mul(const double*, const double*, double*, std::size_t);
void avx2_gather_fma_acc(const double*, const std::uint32_t*, const double*,
                         const std::uint32_t*, const double*, double*, std::size_t);
void avx2_axpy(double, const double*, double*, std::size_t);
double avx2_blocked_sum(const double*, std::size_t);
double avx2_blocked_l1(const double*, std::size_t);
void avx2_em_step(int, int, double* const*, const double* const*, const double* const*,
                  const double* const*, double, double, const double*, std::size_t);
#endif

}  // namespace detail

namespace {

int compile_rec(const Expr& e, BatchProgram& p) {
  auto emit = [&p](BatchOp op) {
    p.ops.push_back(op);
    return op.dst;
  };
  switch (e->kind) {
    case ExprKind::constant:
      return emit({OpCode::load_const, p.nregs++, 0, 0, e->value});
    case ExprKind::variable:
      if (e->var >= p.dim) throw std::invalid_argument("variable exceeds program dimension");
      return emit({OpCode::load_var, p.nregs++, e->var, 0, 0.0});
    case ExprKind::negate: {
      int a = compile_rec(e->kids[0], p);
      return emit({OpCode::neg, p.nregs++, a, 0, 0.0});
    }
    case ExprKind::sum: {
      int a = compile_rec(e->kids[0], p);
      int b = compile_rec(e->kids[1], p);
      return emit({OpCode::add, p.nregs++, a, b, 0.0});
    }
    case ExprKind::product: {
      int a = compile_rec(e->kids[0], p);
      int b = compile_rec(e->kids[1], p);
      return emit({OpCode::mul, p.nregs++, a, b, 0.0});
    }
    case ExprKind::quotient: {
      int a = compile_rec(e->kids[0], p);
      int b = compile_rec(e->kids[1], p);
      return emit({OpCode::div, p.nregs++, a, b, 0.0});
    }
    case ExprKind::power: {
      int a = compile_rec(e->kids[0], p);
      return emit({OpCode::powi, p.nregs++, a, e->exponent, 0.0});
    }
    case ExprKind::sin: {
      int a = compile_rec(e->kids[0], p);
      return emit({OpCode::sin, p.nregs++, a, 0, 0.0});
    }
    case ExprKind::cos: {
      int a = compile_rec(e->kids[0], p);
      return emit({OpCode::cos, p.nregs++, a, 0, 0.0});
    }
    case ExprKind::exp: {
      int a = compile_rec(e->kids[0], p);
      return emit({OpCode::exp, p.nregs++, a, 0, 0.0});
    }
  }
  throw std::logic_error("unreachable expr kind");
}

void scalar_eval_batch(const BatchProgram& p, const double* const* vars, double* out,
                       std::size_t n) {
  std::vector<double> regs(static_cast<std::size_t>(p.nregs));
  for (std::size_t i = 0; i < n; ++i)
    out[i] = detail::eval_program_one(p, vars, i, regs.data());
}

}  // namespace

BatchProgram compile_batch(const Expr& e, int dim) {
  BatchProgram p;
  p.dim = dim;
  p.out = compile_rec(e, p);
  return p;
}

void eval_batch_lane(Lane lane, const BatchProgram& p, const double* const* vars,
                     double* out, std::size_t n) {
#ifdef WKAM_WITH_AVX2
  if (lane == Lane::avx2) {
    detail::avx2_eval_batch(p, vars, out, n);
    return;
  }
#endif
  (void)lane;
  scalar_eval_batch(p, vars, out, n);
}

void eval_batch(const BatchProgram& p, const double* const* vars, double* out,
                std::size_t n) {
  eval_batch_lane(active_lane(), p, vars, out, n);
}

void normal_pairs_lane(Lane lane, std::uint64_t seed, std::uint64_t chain0,
                       std::uint64_t step, std::uint32_t sub, double* z0, double* z1,
                       std::size_t n) {
#ifdef WKAM_WITH_AVX2
  if (lane == Lane::avx2) {
    detail::avx2_normal_pairs(seed, chain0, step, sub, z0, z1, n);
    return;
  }
#endif
  (void)lane;
  for (std::size_t c = 0; c < n; ++c)
    detail::normal_pair_one(seed, chain0 + c, step, sub, z0[c], z1[c]);
}

void normal_pairs(std::uint64_t seed, std::uint64_t chain0, std::uint64_t step,
                  std::uint32_t sub, double* z0, double* z1, std::size_t n) {
  normal_pairs_lane(active_lane(), seed, chain0, step, sub, z0, z1, n);
}

void diag_mul_lane(Lane lane, const double* diag, const double* m, double* out,
                   std::size_t n) {
#ifdef WKAM_WITH_AVX2
  if (lane == Lane::avx2) {
    detail::avx2_diag_mul(diag, m, out, n);
    return;
  }
#endif
  (void)lane;
  for (std::size_t i = 0; i < n; ++i) out[i] = diag[i] * m[i];
}

void diag_mul(const double* diag, const double* m, double* out, std::size_t n) {
  diag_mul_lane(active_lane(), diag, m, out, n);
}

void gather_fma_acc_lane(Lane lane, const double* m, const std::uint32_t* ip,
                         const double* cp, const std::uint32_t* im, const double* cm,
                         double* out, std::size_t n) {
#ifdef WKAM_WITH_AVX2
  if (lane == Lane::avx2) {
    detail::avx2_gather_fma_acc(m, ip, cp, im, cm, out, n);
    return;
  }
#endif
  (void)lane;
  for (std::size_t i = 0; i < n; ++i) detail::gather_fma_acc_one(m, ip, cp, im, cm, out, i);
}

void gather_fma_acc(const double* m, const std::uint32_t* ip, const double* cp,
                    const std::uint32_t* im, const double* cm, double* out,
                    std::size_t n) {
  gather_fma_acc_lane(active_lane(), m, ip, cp, im, cm, out, n);
}

void axpy_lane(Lane lane, double s, const double* y, double* x, std::size_t n) {
#ifdef WKAM_WITH_AVX2
  if (lane == Lane::avx2) {
    detail::avx2_axpy(s, y, x, n);
    return;
  }
#endif
  (void)lane;
  for (std::size_t i = 0; i < n; ++i) x[i] = std::fma(s, y[i], x[i]);
}

void axpy(double s, const double* y, double* x, std::size_t n) {
  axpy_lane(active_lane(), s, y, x, n);
}

void scale(double* x, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

namespace {

// 4 partial accumulators, lane j takes elements i % 4 == j; combined as
// (a0 + a1) + (a2 + a3). The AVX2 lane reproduces this exactly.
template <typename F>
double blocked_reduce(const double* x, std::size_t n, F&& f) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc[0] += f(x[i]);
    acc[1] += f(x[i + 1]);
    acc[2] += f(x[i + 2]);
    acc[3] += f(x[i + 3]);
  }
  for (std::size_t i = n4; i < n; ++i) acc[i - n4] += f(x[i]);
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

}  // namespace

double blocked_sum_lane(Lane lane, const double* x, std::size_t n) {
#ifdef WKAM_WITH_AVX2
  if (lane == Lane::avx2) return detail::avx2_blocked_sum(x, n);
#endif
  (void)lane;
  return blocked_reduce(x, n, [](double v) { return v; });
}

double blocked_sum(const double* x, std::size_t n) {
  return blocked_sum_lane(active_lane(), x, n);
}

double blocked_l1_lane(Lane lane, const double* x, std::size_t n) {
#ifdef WKAM_WITH_AVX2
  if (lane == Lane::avx2) return detail::avx2_blocked_l1(x, n);
#endif
  (void)lane;
  return blocked_reduce(x, n, [](double v) { return std::fabs(v); });
}

double blocked_l1(const double* x, std::size_t n) {
  return blocked_l1_lane(active_lane(), x, n);
}

double min_value(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i)
    if (x[i] < m) m = x[i];
  return m;
}

void em_step_lane(Lane lane, int d, int r, double* const* x, const double* const* sigma,
                  const double* const* bbar, const double* const* z, double dt,
                  double noise_amp, const double* periods, std::size_t n) {
  assert(r <= 8);
#ifdef WKAM_WITH_AVX2
  if (lane == Lane::avx2) {
    detail::avx2_em_step(d, r, x, sigma, bbar, z, dt, noise_amp, periods, n);
    return;
  }
#endif
  (void)lane;
  for (std::size_t i = 0; i < n; ++i)
    detail::em_step_one(d, r, x, sigma, bbar, z, dt, noise_amp, periods, i);
}

void em_step(int d, int r, double* const* x, const double* const* sigma,
             const double* const* bbar, const double* const* z, double dt,
             double noise_amp, const double* periods, std::size_t n) {
  em_step_lane(active_lane(), d, r, x, sigma, bbar, z, dt, noise_amp, periods, n);
}

}  // namespace wkam::simd
