#pragma once

#include <cmath>
#include <cstdint>

// Shared scalar math kernels. Polynomials and reduction constants are used by
// both the scalar and AVX2 lanes with the same fma sequence, which is what
// makes the lanes bit-identical. Valid ranges: sin/cos for |x| <= 1e6,
// exp for |x| <= 700, log for x in (1e-300, 1e300). vm_log is accurate to
// ~1e-13 relative (sampling paths only; use std::log elsewhere).

namespace wkam::simd {

namespace vmc {

// round(x * 2/pi) based Cody-Waite reduction (fdlibm splits)
inline constexpr double TWO_OVER_PI = 6.36619772367581382433e-01;
inline constexpr double PIO2_1 = 1.57079632673412561417e+00;
inline constexpr double PIO2_2 = 6.07710050630396597660e-11;
inline constexpr double PIO2_3 = 2.02226624879595063154e-21;

// sin kernel coefficients (odd series, |r| <= pi/4)
inline constexpr double S1 = -1.66666666666666324348e-01;
inline constexpr double S2 = 8.33333333332248946124e-03;
inline constexpr double S3 = -1.98412698298579493134e-04;
inline constexpr double S4 = 2.75573137070700676789e-06;
inline constexpr double S5 = -2.50507602534068634195e-08;
inline constexpr double S6 = 1.58969099521155010221e-10;

// cos kernel coefficients (even series, |r| <= pi/4)
inline constexpr double C1 = 4.16666666666666019037e-02;
inline constexpr double C2 = -1.38888888888741095749e-03;
inline constexpr double C3 = 2.48015872894767294178e-05;
inline constexpr double C4 = -2.75573143513906633035e-07;
inline constexpr double C5 = 2.08757232129817482790e-09;
inline constexpr double C6 = -1.13596475577881948265e-11;

inline constexpr double LOG2E = 1.44269504088896340736e+00;
inline constexpr double LN2_HI = 6.93147180369123816490e-01;
inline constexpr double LN2_LO = 1.90821492927058770002e-10;

// exp(r) Taylor on |r| <= ln2/2, highest degree first: r^12/12! ... r^0/0!
inline constexpr double EXP_C[13] = {
    2.08767569878680989792e-09, 2.50521083854417187751e-08,
    2.75573192239858906526e-07, 2.75573192239858906526e-06,
    2.48015873015873015873e-05, 1.98412698412698412698e-04,
    1.38888888888888888889e-03, 8.33333333333333333333e-03,
    4.16666666666666666667e-02, 1.66666666666666666667e-01,
    5.00000000000000000000e-01, 1.00000000000000000000e+00,
    1.00000000000000000000e+00};

inline constexpr double SQRT2 = 1.41421356237309514547e+00;

}  // namespace vmc

inline double vm_sin_kernel(double r) {
  double z = r * r;
  double p = vmc::S6;
  p = std::fma(p, z, vmc::S5);
  p = std::fma(p, z, vmc::S4);
  p = std::fma(p, z, vmc::S3);
  p = std::fma(p, z, vmc::S2);
  p = std::fma(p, z, vmc::S1);
  return std::fma(r * z, p, r);
}

inline double vm_cos_kernel(double r) {
  double z = r * r;
  double p = vmc::C6;
  p = std::fma(p, z, vmc::C5);
  p = std::fma(p, z, vmc::C4);
  p = std::fma(p, z, vmc::C3);
  p = std::fma(p, z, vmc::C2);
  p = std::fma(p, z, vmc::C1);
  double zz = z * z;
  return std::fma(zz, p, std::fma(z, -0.5, 1.0));
}

inline void vm_reduce_pio2(double x, double& r, int& quadrant) {
  double k = std::nearbyint(x * vmc::TWO_OVER_PI);
  double t = std::fma(-k, vmc::PIO2_1, x);
  t = std::fma(-k, vmc::PIO2_2, t);
  t = std::fma(-k, vmc::PIO2_3, t);
  r = t;
  quadrant = static_cast<int>(static_cast<long long>(k) & 3LL);
}

inline double vm_sin(double x) {
  double r;
  int j;
  vm_reduce_pio2(x, r, j);
  double s = vm_sin_kernel(r);
  double c = vm_cos_kernel(r);
  double v = (j & 1) ? c : s;
  return (j & 2) ? -v : v;
}

inline double vm_cos(double x) {
  double r;
  int j;
  vm_reduce_pio2(x, r, j);
  double s = vm_sin_kernel(r);
  double c = vm_cos_kernel(r);
  double v = (j & 1) ? s : c;
  return ((j + 1) & 2) ? -v : v;
}

inline double vm_exp(double x) {
  if (x > 709.0) x = 709.0;
  if (x < -709.0) x = -709.0;
  double k = std::nearbyint(x * vmc::LOG2E);
  double r = std::fma(-k, vmc::LN2_HI, x);
  r = std::fma(-k, vmc::LN2_LO, r);
  double p = vmc::EXP_C[0];
  for (int i = 1; i < 13; ++i) p = std::fma(p, r, vmc::EXP_C[i]);
  // scale by 2^k in two halves so the exponent stays in range; the arithmetic
  // shift matches the AVX2 lane exactly
  int ki = static_cast<int>(static_cast<long long>(k));
  int k1 = ki >> 1, k2 = ki - k1;
  auto pow2 = [](int e) {
    std::uint64_t bits = static_cast<std::uint64_t>(e + 1023) << 52;
    double d;
    __builtin_memcpy(&d, &bits, 8);
    return d;
  };
  return p * pow2(k1) * pow2(k2);
}

inline double vm_log(double x) {
  std::uint64_t bits;
  __builtin_memcpy(&bits, &x, 8);
  long long e = static_cast<long long>((bits >> 52) & 0x7ffULL) - 1023;
  std::uint64_t mbits = (bits & 0x000fffffffffffffULL) | 0x3ff0000000000000ULL;
  double m;
  __builtin_memcpy(&m, &mbits, 8);
  if (m > vmc::SQRT2) {
    m *= 0.5;
    e += 1;
  }
  double s = (m - 1.0) / (m + 1.0);
  double t = s * s;
  double p = 2.0 / 15.0;
  p = std::fma(p, t, 2.0 / 13.0);
  p = std::fma(p, t, 2.0 / 11.0);
  p = std::fma(p, t, 2.0 / 9.0);
  p = std::fma(p, t, 2.0 / 7.0);
  p = std::fma(p, t, 2.0 / 5.0);
  p = std::fma(p, t, 2.0 / 3.0);
  p = std::fma(p, t, 2.0);
  double lm = s * p;
  double ed = static_cast<double>(e);
  return std::fma(ed, vmc::LN2_LO, std::fma(ed, vmc::LN2_HI, lm));
}

}  // namespace wkam::simd
