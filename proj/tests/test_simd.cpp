#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "wkam/expr.hpp"
#include "wkam/simd/batch.hpp"
#include "wkam/simd/lane.hpp"
#include "wkam/simd/philox.hpp"
#include "wkam/simd/vm.hpp"

using namespace wkam;
using namespace wkam::simd;

namespace {

bool bits_equal(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::memcmp(&a, &b, 8) == 0;
}

bool all_bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!bits_equal(a[i], b[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
  uint32_t ctr[4] = {0, 0, 0, 0};
  uint32_t key[2] = {0, 0};
  uint32_t out[4];
  philox4x32(ctr, key, out);
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  uint32_t ctrf[4] = {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu};
  uint32_t keyf[2] = {0xffffffffu, 0xffffffffu};
  philox4x32(ctrf, keyf, out);
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);

  uint32_t ctrp[4] = {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u};
  uint32_t keyp[2] = {0xa4093822u, 0x299f31d0u};
  philox4x32(ctrp, keyp, out);
  CHECK(out[0] == 0xd16cfe09u);
  CHECK(out[1] == 0x94fdccebu);
  CHECK(out[2] == 0x5001e420u);
  CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("vm kernels track libm") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-30.0, 30.0);
  for (int i = 0; i < 20000; ++i) {
    double x = U(rng);
    CHECK(std::fabs(vm_sin(x) - std::sin(x)) <= 4e-16 * (1 + std::fabs(x)));
    CHECK(std::fabs(vm_cos(x) - std::cos(x)) <= 4e-16 * (1 + std::fabs(x)));
    double ex = std::exp(x);
    CHECK(std::fabs(vm_exp(x) - ex) <= 4e-16 * ex);
  }
  std::uniform_real_distribution<double> V(1e-16, 1.0);
  for (int i = 0; i < 20000; ++i) {
    double u = V(rng);
    CHECK(std::fabs(vm_log(u) - std::log(u)) <= 1e-12 * (1 + std::fabs(std::log(u))));
  }
  CHECK(vm_sin(0.0) == 0.0);
  CHECK(vm_cos(0.0) == 1.0);
  CHECK(vm_exp(0.0) == 1.0);
  CHECK(vm_log(1.0) == 0.0);
}

TEST_CASE("gaussian pairs: moments and determinism") {
  const size_t n = 200000;
  std::vector<double> z0(n), z1(n);
  normal_pairs_lane(Lane::scalar, 42, 0, 17, 0, z0.data(), z1.data(), n);
  double m1 = 0, m2 = 0, m4 = 0, cross = 0;
  for (size_t i = 0; i < n; ++i) {
    m1 += z0[i] + z1[i];
    m2 += z0[i] * z0[i] + z1[i] * z1[i];
    m4 += std::pow(z0[i], 4) + std::pow(z1[i], 4);
    cross += z0[i] * z1[i];
  }
  m1 /= (2.0 * n);
  m2 /= (2.0 * n);
  m4 /= (2.0 * n);
  cross /= n;
  CHECK(std::fabs(m1) < 0.01);
  CHECK(m2 == doctest::Approx(1.0).epsilon(0.01));
  CHECK(m4 == doctest::Approx(3.0).epsilon(0.05));
  CHECK(std::fabs(cross) < 0.02);

  std::vector<double> w0(n), w1(n);
  normal_pairs_lane(Lane::scalar, 42, 0, 17, 0, w0.data(), w1.data(), n);
  CHECK(all_bits_equal(z0, w0));
  CHECK(all_bits_equal(z1, w1));

  // different seed decorrelates
  normal_pairs_lane(Lane::scalar, 43, 0, 17, 0, w0.data(), w1.data(), n);
  CHECK(!all_bits_equal(z0, w0));
}

#ifdef WKAM_HAS_AVX2_TEST
TEST_CASE("lane equivalence is bit-exact") {
  if (!lane_available(Lane::avx2)) {
    MESSAGE("avx2 unavailable; skipping");
    return;
  }
  std::mt19937_64 rng(5);

  SUBCASE("normal pairs") {
    for (size_t n : {1ul, 3ul, 4ul, 7ul, 1024ul, 1001ul}) {
      std::vector<double> a0(n), a1(n), b0(n), b1(n);
      normal_pairs_lane(Lane::scalar, 99, 1000, 5, 1, a0.data(), a1.data(), n);
      normal_pairs_lane(Lane::avx2, 99, 1000, 5, 1, b0.data(), b1.data(), n);
      CHECK(all_bits_equal(a0, b0));
      CHECK(all_bits_equal(a1, b1));
    }
  }

  SUBCASE("batch programs") {
    std::uniform_real_distribution<double> U(-6.0, 6.0);
    const int dim = 3;
    const char* sources[] = {
        "sin(x3 - 1)",
        "cos(x3)*x1 + sin(x3)*x2",
        "exp(sin(x1*x2)) / (x3^2 + 1)",
        "1 - (x1 + x2 + x3)^3 / 7",
        "-x2 * cos(x1 - x3)^2",
    };
    for (const char* src : sources) {
      BatchProgram p = compile_batch(parse(src, dim), dim);
      for (size_t n : {1ul, 5ul, 64ul, 257ul}) {
        std::vector<double> v0(n), v1(n), v2(n), oa(n), ob(n);
        for (size_t i = 0; i < n; ++i) {
          v0[i] = U(rng);
          v1[i] = U(rng);
          v2[i] = U(rng);
        }
        const double* vars[3] = {v0.data(), v1.data(), v2.data()};
        eval_batch_lane(Lane::scalar, p, vars, oa.data(), n);
        eval_batch_lane(Lane::avx2, p, vars, ob.data(), n);
        CHECK(all_bits_equal(oa, ob));
        // and the batch path agrees with the reference evaluator closely
        for (size_t i = 0; i < n; ++i) {
          double x[3] = {v0[i], v1[i], v2[i]};
          double ref = evaluate(parse(src, dim), x);
          CHECK(oa[i] == doctest::Approx(ref).epsilon(1e-13));
        }
      }
    }
  }

  SUBCASE("array kernels") {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (size_t n : {1ul, 4ul, 127ul, 1024ul}) {
      std::vector<double> m(n), cp(n), cm(n), diag(n), outa(n), outb(n);
      std::vector<uint32_t> ip(n), im(n);
      for (size_t i = 0; i < n; ++i) {
        m[i] = U(rng);
        cp[i] = U(rng);
        cm[i] = U(rng);
        diag[i] = U(rng);
        ip[i] = static_cast<uint32_t>(rng() % n);
        im[i] = static_cast<uint32_t>(rng() % n);
      }
      diag_mul_lane(Lane::scalar, diag.data(), m.data(), outa.data(), n);
      diag_mul_lane(Lane::avx2, diag.data(), m.data(), outb.data(), n);
      CHECK(all_bits_equal(outa, outb));

      gather_fma_acc_lane(Lane::scalar, m.data(), ip.data(), cp.data(), im.data(),
                          cm.data(), outa.data(), n);
      gather_fma_acc_lane(Lane::avx2, m.data(), ip.data(), cp.data(), im.data(),
                          cm.data(), outb.data(), n);
      CHECK(all_bits_equal(outa, outb));

      CHECK(bits_equal(blocked_sum_lane(Lane::scalar, m.data(), n),
                       blocked_sum_lane(Lane::avx2, m.data(), n)));
      CHECK(bits_equal(blocked_l1_lane(Lane::scalar, m.data(), n),
                       blocked_l1_lane(Lane::avx2, m.data(), n)));

      std::vector<double> xa(m), xb(m);
      axpy_lane(Lane::scalar, 0.37, cp.data(), xa.data(), n);
      axpy_lane(Lane::avx2, 0.37, cp.data(), xb.data(), n);
      CHECK(all_bits_equal(xa, xb));
    }
  }

  SUBCASE("em steps") {
    const int d = 3, r = 2;
    std::uniform_real_distribution<double> U(0.0, 6.0);
    for (size_t n : {5ul, 64ul, 66ul}) {
      std::vector<std::vector<double>> xs(d, std::vector<double>(n));
      std::vector<std::vector<double>> sig(d * r, std::vector<double>(n));
      std::vector<std::vector<double>> bb(r, std::vector<double>(n));
      std::vector<std::vector<double>> zz(r, std::vector<double>(n));
      for (auto* grp : {&xs, &sig, &bb, &zz})
        for (auto& row : *grp)
          for (auto& v : row) v = U(rng);
      auto run = [&](Lane lane, std::vector<std::vector<double>> x) {
        std::vector<double*> xp;
        std::vector<const double*> sp, bp, zp;
        for (auto& row : x) xp.push_back(row.data());
        for (auto& row : sig) sp.push_back(row.data());
        for (auto& row : bb) bp.push_back(row.data());
        for (auto& row : zz) zp.push_back(row.data());
        double periods[3] = {6.28, 6.28, 6.28};
        em_step_lane(lane, d, r, xp.data(), sp.data(), bp.data(), zp.data(), 0.01, 0.05,
                     periods, n);
        return x;
      };
      auto ra = run(Lane::scalar, xs);
      auto rb = run(Lane::avx2, xs);
      for (int j = 0; j < d; ++j) CHECK(all_bits_equal(ra[j], rb[j]));
    }
  }
}
#endif
