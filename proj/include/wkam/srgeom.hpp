#pragma once

#include <string>
#include <vector>

#include "wkam/expr.hpp"
#include "wkam/geometry.hpp"
#include "wkam/simd/batch.hpp"

namespace wkam {

// A vector field on the torus, one Expr per coordinate.
using VectorField = std::vector<Expr>;

// [V,W] = DW.V - DV.W with symbolic Jacobians.
VectorField lie_bracket(const VectorField& V, const VectorField& W, int d);

// Horizontal frame sigma_1..sigma_r, drift coefficients bbar, derived drift
// b = sigma*bbar. Immutable after construction.
class SRStructure {
 public:
  // sigma is row-major d x r: sigma[i*r+k] = i-th component of sigma_k.
  SRStructure(TorusGeometry geometry, std::vector<Expr> sigma, std::vector<Expr> bbar);

  const TorusGeometry& geometry() const { return geom_; }
  int dim() const { return geom_.d; }
  int rank() const { return r_; }

  const Expr& sigma(int i, int k) const { return sigma_[static_cast<std::size_t>(i) * r_ + k]; }
  const Expr& bbar(int k) const { return bbar_[static_cast<std::size_t>(k)]; }
  const Expr& drift(int i) const { return b_[static_cast<std::size_t>(i)]; }  // b = sigma*bbar
  // a = sigma*sigma^t
  const Expr& diffusion(int i, int j) const { return a_[static_cast<std::size_t>(i) * geom_.d + j]; }

  VectorField frame_column(int k) const;

  void eval_sigma(std::span<const double> x, double* out_dr) const;  // row-major d x r
  void eval_bbar(std::span<const double> x, double* out_r) const;
  void eval_drift(std::span<const double> x, double* out_d) const;
  double drift_metric_norm(std::span<const double> x) const;  // |bbar(x)| = ||b(x)||_D

  // batch programs for the hot paths, one per entry (sigma row-major, then bbar)
  const std::vector<simd::BatchProgram>& sigma_programs() const;
  const std::vector<simd::BatchProgram>& bbar_programs() const;

  // max over the probe lattice of ||b||_D
  double max_drift_norm() const;

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  TorusGeometry geom_;
  int r_;
  std::vector<Expr> sigma_;
  std::vector<Expr> bbar_;
  std::vector<Expr> b_;
  std::vector<Expr> a_;
  std::vector<std::string> warnings_;
  mutable std::vector<simd::BatchProgram> sigma_prog_, bbar_prog_;
  mutable double max_drift_ = -1.0;
};

// ||sigma(x) xi||_D = |xi| for horizontal vectors given in control coordinates.
double metric_norm(const SRStructure& S, std::span<const double> x,
                   std::span<const double> xi);

// Uniform probe lattice, per_axis points per axis, capped at `cap` probes
// (pseudo-random subsample beyond the cap).
std::vector<Point> lattice_probes(const TorusGeometry& g, int per_axis = 5,
                                  std::size_t cap = 10000);

struct HormanderProbe {
  Point x;
  int rank = 0;
};

struct HormanderReport {
  bool satisfied = false;
  int depth = 0;
  int required_rank = 0;
  int min_rank = 0;
  std::vector<HormanderProbe> probes;
};

// Collects the frame and its iterated (left-normed) brackets up to `depth`
// and checks the numerical span at each probe. A certificate at the probes,
// not a proof.
HormanderReport hormander_check(const SRStructure& S, int depth,
                                std::vector<Point> probes = {});

}  // namespace wkam
