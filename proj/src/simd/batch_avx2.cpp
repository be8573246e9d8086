// AVX2 lane. Compiled with -mavx2 -mfma (see src/CMakeLists.txt); every kernel
// reproduces the scalar lane's operation sequence exactly (explicit fmadd,
// same reduction splits, shared tail code), so outputs are bit-identical.

#include <immintrin.h>

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "scalar_impl.hpp"
#include "wkam/simd/batch.hpp"
#include "wkam/simd/philox.hpp"
#include "wkam/simd/vm.hpp"

namespace wkam::simd::detail {

namespace {

using vd = __m256d;
using vi = __m256i;

inline vd vset(double v) { return _mm256_set1_pd(v); }

inline vd vfma(vd a, vd b, vd c) { return _mm256_fmadd_pd(a, b, c); }

inline vd vnearbyint(vd x) {
  return _mm256_round_pd(x, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
}

inline vd vabs(vd x) {
  return _mm256_andnot_pd(vset(-0.0), x);
}

// int64 lanes in [-2^51, 2^51) to double, exact
inline vd vcvt_i64_pd(vi v) {
  const vi magic = _mm256_set1_epi64x(0x4338000000000000LL);
  vd d = _mm256_castsi256_pd(_mm256_add_epi64(v, magic));
  return _mm256_sub_pd(d, vset(6755399441055744.0));
}

struct SinCos {
  vd s;
  vd c;
  vi j;  // quadrant in int64 lanes
};

inline SinCos sincos_kernel(vd x) {
  vd k = vnearbyint(_mm256_mul_pd(x, vset(vmc::TWO_OVER_PI)));
  vd r = vfma(_mm256_sub_pd(_mm256_setzero_pd(), k), vset(vmc::PIO2_1), x);
  r = vfma(_mm256_sub_pd(_mm256_setzero_pd(), k), vset(vmc::PIO2_2), r);
  r = vfma(_mm256_sub_pd(_mm256_setzero_pd(), k), vset(vmc::PIO2_3), r);

  vd z = _mm256_mul_pd(r, r);
  vd ps = vset(vmc::S6);
  ps = vfma(ps, z, vset(vmc::S5));
  ps = vfma(ps, z, vset(vmc::S4));
  ps = vfma(ps, z, vset(vmc::S3));
  ps = vfma(ps, z, vset(vmc::S2));
  ps = vfma(ps, z, vset(vmc::S1));
  vd s = vfma(_mm256_mul_pd(r, z), ps, r);

  vd pc = vset(vmc::C6);
  pc = vfma(pc, z, vset(vmc::C5));
  pc = vfma(pc, z, vset(vmc::C4));
  pc = vfma(pc, z, vset(vmc::C3));
  pc = vfma(pc, z, vset(vmc::C2));
  pc = vfma(pc, z, vset(vmc::C1));
  vd zz = _mm256_mul_pd(z, z);
  vd c = vfma(zz, pc, vfma(z, vset(-0.5), vset(1.0)));

  __m128i k32 = _mm256_cvtpd_epi32(k);
  vi j = _mm256_cvtepi32_epi64(k32);
  return {s, c, j};
}

inline vd select_by_mask(vi mask64, vd a, vd b) {
  // mask lane nonzero -> a, else b
  vd m = _mm256_castsi256_pd(_mm256_cmpeq_epi64(mask64, _mm256_setzero_si256()));
  return _mm256_blendv_pd(a, b, m);  // m all-ones where mask==0 -> b
}

inline vd vm_sin_v(vd x) {
  SinCos sc = sincos_kernel(x);
  vi bit0 = _mm256_and_si256(sc.j, _mm256_set1_epi64x(1));
  vi bit1 = _mm256_and_si256(sc.j, _mm256_set1_epi64x(2));
  vd v = select_by_mask(bit0, sc.c, sc.s);
  vd flipped = _mm256_xor_pd(v, vset(-0.0));
  return select_by_mask(bit1, flipped, v);
}

inline vd vm_cos_v(vd x) {
  SinCos sc = sincos_kernel(x);
  vi bit0 = _mm256_and_si256(sc.j, _mm256_set1_epi64x(1));
  vi jp1 = _mm256_add_epi64(sc.j, _mm256_set1_epi64x(1));
  vi bit1 = _mm256_and_si256(jp1, _mm256_set1_epi64x(2));
  vd v = select_by_mask(bit0, sc.s, sc.c);
  vd flipped = _mm256_xor_pd(v, vset(-0.0));
  return select_by_mask(bit1, flipped, v);
}

inline vd vm_exp_v(vd x) {
  x = _mm256_min_pd(x, vset(709.0));
  x = _mm256_max_pd(x, vset(-709.0));
  vd k = vnearbyint(_mm256_mul_pd(x, vset(vmc::LOG2E)));
  vd nk = _mm256_sub_pd(_mm256_setzero_pd(), k);
  vd r = vfma(nk, vset(vmc::LN2_HI), x);
  r = vfma(nk, vset(vmc::LN2_LO), r);
  vd p = vset(vmc::EXP_C[0]);
  for (int i = 1; i < 13; ++i) p = vfma(p, r, vset(vmc::EXP_C[i]));
  __m128i k32 = _mm256_cvtpd_epi32(k);
  __m128i k1 = _mm_srai_epi32(k32, 1);
  __m128i k2 = _mm_sub_epi32(k32, k1);
  auto pow2 = [](__m128i e32) {
    vi e = _mm256_cvtepi32_epi64(e32);
    e = _mm256_add_epi64(e, _mm256_set1_epi64x(1023));
    return _mm256_castsi256_pd(_mm256_slli_epi64(e, 52));
  };
  return _mm256_mul_pd(_mm256_mul_pd(p, pow2(k1)), pow2(k2));
}

inline vd vm_log_v(vd x) {
  vi bits = _mm256_castpd_si256(x);
  vi e = _mm256_sub_epi64(
      _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7ff)),
      _mm256_set1_epi64x(1023));
  vi mbits = _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffLL)),
                             _mm256_set1_epi64x(0x3ff0000000000000LL));
  vd m = _mm256_castsi256_pd(mbits);
  vd big = _mm256_cmp_pd(m, vset(vmc::SQRT2), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, vset(0.5)), big);
  e = _mm256_sub_epi64(e, _mm256_castpd_si256(big));  // mask is -1 where big
  vd s = _mm256_div_pd(_mm256_sub_pd(m, vset(1.0)), _mm256_add_pd(m, vset(1.0)));
  vd t = _mm256_mul_pd(s, s);
  vd p = vset(2.0 / 15.0);
  p = vfma(p, t, vset(2.0 / 13.0));
  p = vfma(p, t, vset(2.0 / 11.0));
  p = vfma(p, t, vset(2.0 / 9.0));
  p = vfma(p, t, vset(2.0 / 7.0));
  p = vfma(p, t, vset(2.0 / 5.0));
  p = vfma(p, t, vset(2.0 / 3.0));
  p = vfma(p, t, vset(2.0));
  vd lm = _mm256_mul_pd(s, p);
  vd ed = vcvt_i64_pd(e);
  return vfma(ed, vset(vmc::LN2_LO), vfma(ed, vset(vmc::LN2_HI), lm));
}

struct Philox4 {
  vi c0, c1, c2, c3;
};

inline vi mask32() { return _mm256_set1_epi64x(0xffffffffLL); }

// 4 philox4x32-10 blocks; counters/keys in the low 32 bits of each u64 lane.
inline Philox4 philox4_v(vi c0, vi c1, vi c2, vi c3, vi k0, vi k1) {
  const vi m0 = _mm256_set1_epi64x(philox::M0);
  const vi m1 = _mm256_set1_epi64x(philox::M1);
  for (int round = 0; round < 10; ++round) {
    vi p0 = _mm256_mul_epu32(m0, c0);
    vi p1 = _mm256_mul_epu32(m1, c2);
    vi hi0 = _mm256_srli_epi64(p0, 32);
    vi lo0 = _mm256_and_si256(p0, mask32());
    vi hi1 = _mm256_srli_epi64(p1, 32);
    vi lo1 = _mm256_and_si256(p1, mask32());
    c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
    c1 = lo1;
    c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
    c3 = lo0;
    if (round < 9) {
      k0 = _mm256_and_si256(_mm256_add_epi64(k0, _mm256_set1_epi64x(philox::W0)), mask32());
      k1 = _mm256_and_si256(_mm256_add_epi64(k1, _mm256_set1_epi64x(philox::W1)), mask32());
    }
  }
  return {c0, c1, c2, c3};
}

// (v >> 12) as double, exact for v < 2^64 after the shift (52 significant bits)
inline vd u52_to_double(vi v) {
  vi sh = _mm256_srli_epi64(v, 12);
  vd d = _mm256_castsi256_pd(_mm256_or_si256(sh, _mm256_set1_epi64x(0x4330000000000000LL)));
  return _mm256_sub_pd(d, vset(0x1p52));
}

}  // namespace

void avx2_normal_pairs(std::uint64_t seed, std::uint64_t chain0, std::uint64_t step,
                       std::uint32_t sub, double* z0, double* z1, std::size_t n) {
  const vi k0 = _mm256_set1_epi64x(static_cast<long long>(seed & 0xffffffffULL));
  const vi k1 = _mm256_set1_epi64x(static_cast<long long>(seed >> 32));
  const vi c2 = _mm256_set1_epi64x(static_cast<long long>(step & 0xffffffffULL));
  const vi c3 = _mm256_set1_epi64x(static_cast<long long>(sub));
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    std::uint64_t b = chain0 + i;
    vi chain = _mm256_set_epi64x(static_cast<long long>(b + 3), static_cast<long long>(b + 2),
                                 static_cast<long long>(b + 1), static_cast<long long>(b));
    vi c0 = _mm256_and_si256(chain, mask32());
    vi c1 = _mm256_srli_epi64(chain, 32);
    Philox4 out = philox4_v(c0, c1, c2, c3, k0, k1);
    vi a = _mm256_or_si256(_mm256_slli_epi64(out.c0, 32), out.c1);
    vi bb = _mm256_or_si256(_mm256_slli_epi64(out.c2, 32), out.c3);
    // match scalar: u = d * 2^-52 + 2^-53 computed as mul + add, not fma
    vd u1 = _mm256_add_pd(_mm256_mul_pd(u52_to_double(a), vset(0x1p-52)), vset(0x1p-53));
    vd u2 = _mm256_add_pd(_mm256_mul_pd(u52_to_double(bb), vset(0x1p-52)), vset(0x1p-53));
    vd r = _mm256_sqrt_pd(_mm256_mul_pd(vset(-2.0), vm_log_v(u1)));
    vd theta = _mm256_mul_pd(vset(TWO_PI), u2);
    _mm256_storeu_pd(z0 + i, _mm256_mul_pd(r, vm_cos_v(theta)));
    _mm256_storeu_pd(z1 + i, _mm256_mul_pd(r, vm_sin_v(theta)));
  }
  for (std::size_t c = n4; c < n; ++c)
    normal_pair_one(seed, chain0 + c, step, sub, z0[c], z1[c]);
}

void avx2_eval_batch(const BatchProgram& p, const double* const* vars, double* out,
                     std::size_t n) {
  constexpr int kMaxRegs = 256;
  if (p.nregs > kMaxRegs) throw std::invalid_argument("batch program too large");
  alignas(32) vd regs[kMaxRegs];
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    for (const BatchOp& op : p.ops) {
      switch (op.code) {
        case OpCode::load_const:
          regs[op.dst] = vset(op.cval);
          break;
        case OpCode::load_var:
          regs[op.dst] = _mm256_loadu_pd(vars[op.a] + i);
          break;
        case OpCode::neg:
          regs[op.dst] = _mm256_sub_pd(_mm256_setzero_pd(), regs[op.a]);
          break;
        case OpCode::add:
          regs[op.dst] = _mm256_add_pd(regs[op.a], regs[op.b]);
          break;
        case OpCode::mul:
          regs[op.dst] = _mm256_mul_pd(regs[op.a], regs[op.b]);
          break;
        case OpCode::div:
          regs[op.dst] = _mm256_div_pd(regs[op.a], regs[op.b]);
          break;
        case OpCode::powi: {
          vd base = regs[op.a];
          int e = op.b;
          unsigned k = e < 0 ? static_cast<unsigned>(-e) : static_cast<unsigned>(e);
          vd acc = vset(1.0);
          while (k) {
            if (k & 1) acc = _mm256_mul_pd(acc, base);
            base = _mm256_mul_pd(base, base);
            k >>= 1;
          }
          regs[op.dst] = e < 0 ? _mm256_div_pd(vset(1.0), acc) : acc;
          break;
        }
        case OpCode::sin:
          regs[op.dst] = vm_sin_v(regs[op.a]);
          break;
        case OpCode::cos:
          regs[op.dst] = vm_cos_v(regs[op.a]);
          break;
        case OpCode::exp:
          regs[op.dst] = vm_exp_v(regs[op.a]);
          break;
      }
    }
    _mm256_storeu_pd(out + i, regs[p.out]);
  }
  if (n4 < n) {
    std::vector<double> sregs(static_cast<std::size_t>(p.nregs));
    for (std::size_t i = n4; i < n; ++i)
      out[i] = eval_program_one(p, vars, i, sregs.data());
  }
}

void avx2_diag_mul(const double* diag, const double* m, double* out, std::size_t n) {
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(diag + i), _mm256_loadu_pd(m + i)));
  for (std::size_t i = n4; i < n; ++i) out[i] = diag[i] * m[i];
}

void avx2_gather_fma_acc(const double* m, const std::uint32_t* ip, const double* cp,
                         const std::uint32_t* im, const double* cm, double* out,
                         std::size_t n) {
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    __m128i vip = _mm_loadu_si128(reinterpret_cast<const __m128i*>(ip + i));
    __m128i vim = _mm_loadu_si128(reinterpret_cast<const __m128i*>(im + i));
    vd mp = _mm256_i32gather_pd(m, vip, 8);
    vd mm = _mm256_i32gather_pd(m, vim, 8);
    vd acc = _mm256_loadu_pd(out + i);
    acc = vfma(_mm256_loadu_pd(cm + i), mm, acc);
    acc = vfma(_mm256_loadu_pd(cp + i), mp, acc);
    _mm256_storeu_pd(out + i, acc);
  }
  for (std::size_t i = n4; i < n; ++i) gather_fma_acc_one(m, ip, cp, im, cm, out, i);
}

void avx2_axpy(double s, const double* y, double* x, std::size_t n) {
  std::size_t n4 = n & ~std::size_t{3};
  vd vs = vset(s);
  for (std::size_t i = 0; i < n4; i += 4)
    _mm256_storeu_pd(x + i, vfma(vs, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  for (std::size_t i = n4; i < n; ++i) x[i] = std::fma(s, y[i], x[i]);
}

namespace {

inline double combine_partials(vd acc, const double* x, std::size_t n4, std::size_t n,
                               bool absval) {
  double p[4];
  _mm256_storeu_pd(p, acc);
  for (std::size_t i = n4; i < n; ++i) {
    double v = x[i];
    if (absval) v = std::fabs(v);
    p[i - n4] += v;
  }
  return (p[0] + p[1]) + (p[2] + p[3]);
}

}  // namespace

double avx2_blocked_sum(const double* x, std::size_t n) {
  vd acc = _mm256_setzero_pd();
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  return combine_partials(acc, x, n4, n, false);
}

double avx2_blocked_l1(const double* x, std::size_t n) {
  vd acc = _mm256_setzero_pd();
  std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4)
    acc = _mm256_add_pd(acc, vabs(_mm256_loadu_pd(x + i)));
  return combine_partials(acc, x, n4, n, true);
}

void avx2_em_step(int d, int r, double* const* x, const double* const* sigma,
                  const double* const* bbar, const double* const* z, double dt,
                  double noise_amp, const double* periods, std::size_t n) {
  std::size_t n4 = n & ~std::size_t{3};
  vd vdt = vset(dt), vamp = vset(noise_amp);
  for (std::size_t i = 0; i < n4; i += 4) {
    vd u[8];
    for (int k = 0; k < r; ++k)
      u[k] = vfma(_mm256_loadu_pd(bbar[k] + i), vdt,
                  _mm256_mul_pd(vamp, _mm256_loadu_pd(z[k] + i)));
    for (int j = 0; j < d; ++j) {
      vd acc = _mm256_mul_pd(_mm256_loadu_pd(sigma[static_cast<std::size_t>(j) * r] + i), u[0]);
      for (int k = 1; k < r; ++k)
        acc = vfma(_mm256_loadu_pd(sigma[static_cast<std::size_t>(j) * r + k] + i), u[k], acc);
      vd v = _mm256_add_pd(_mm256_loadu_pd(x[j] + i), acc);
      vd L = vset(periods[j]);
      v = _mm256_sub_pd(v, _mm256_mul_pd(L, _mm256_floor_pd(_mm256_div_pd(v, L))));
      _mm256_storeu_pd(x[j] + i, v);
    }
  }
  for (std::size_t i = n4; i < n; ++i)
    em_step_one(d, r, x, sigma, bbar, z, dt, noise_amp, periods, i);
}

}  // namespace wkam::simd::detail
