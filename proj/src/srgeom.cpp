#include "wkam/srgeom.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

namespace wkam {

VectorField lie_bracket(const VectorField& V, const VectorField& W, int d) {
  VectorField out(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    Expr acc = constant(0.0);
    for (int j = 0; j < d; ++j) {
      Expr dWi = differentiate(W[static_cast<std::size_t>(i)], j);
      Expr dVi = differentiate(V[static_cast<std::size_t>(i)], j);
      acc = add(acc, sub(mul(dWi, V[static_cast<std::size_t>(j)]),
                         mul(dVi, W[static_cast<std::size_t>(j)])));
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

SRStructure::SRStructure(TorusGeometry geometry, std::vector<Expr> sigma,
                         std::vector<Expr> bbar)
    : geom_(std::move(geometry)),
      r_(static_cast<int>(bbar.size())),
      sigma_(std::move(sigma)),
      bbar_(std::move(bbar)) {
  const int d = geom_.d;
  if (r_ < 1 || r_ > d) throw std::invalid_argument("rank must satisfy 1 <= r <= d");
  if (static_cast<int>(sigma_.size()) != d * r_)
    throw std::invalid_argument("sigma must have d*r entries");

  // b = sigma * bbar, a = sigma * sigma^t, built symbolically
  b_.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    Expr acc = constant(0.0);
    for (int k = 0; k < r_; ++k)
      acc = add(acc, mul(sigma_[static_cast<std::size_t>(i) * r_ + k],
                         bbar_[static_cast<std::size_t>(k)]));
    b_[static_cast<std::size_t>(i)] = acc;
  }
  a_.resize(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Expr acc = constant(0.0);
      for (int k = 0; k < r_; ++k)
        acc = add(acc, mul(sigma_[static_cast<std::size_t>(i) * r_ + k],
                           sigma_[static_cast<std::size_t>(j) * r_ + k]));
      a_[static_cast<std::size_t>(i) * d + j] = acc;
    }

  // frame must have full column rank at the probes
  auto probes = lattice_probes(geom_);
  Eigen::MatrixXd M(d, r_);
  for (const auto& p : probes) {
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < r_; ++k)
        M(i, k) = evaluate(sigma_[static_cast<std::size_t>(i) * r_ + k], p);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv(r_ - 1) <= 1e-10 * std::max(1.0, sv(0)))
      throw std::runtime_error("frame is rank deficient at a probe point");
  }

  // periodicity consistency is the user's responsibility; warn on mismatch
  for (int j = 0; j < d; ++j) {
    double L = geom_.periods[static_cast<std::size_t>(j)];
    bool warned = false;
    for (const auto& p : probes) {
      Point q = p;
      q[static_cast<std::size_t>(j)] += L;
      for (const Expr& e : sigma_) {
        if (std::fabs(evaluate(e, p) - evaluate(e, q)) > 1e-9) {
          warnings_.push_back("sigma entry not periodic along axis " + std::to_string(j + 1));
          warned = true;
          break;
        }
      }
      if (warned) break;
      for (const Expr& e : bbar_) {
        if (std::fabs(evaluate(e, p) - evaluate(e, q)) > 1e-9) {
          warnings_.push_back("bbar entry not periodic along axis " + std::to_string(j + 1));
          warned = true;
          break;
        }
      }
      if (warned) break;
    }
  }
}

VectorField SRStructure::frame_column(int k) const {
  VectorField col(static_cast<std::size_t>(geom_.d));
  for (int i = 0; i < geom_.d; ++i) col[static_cast<std::size_t>(i)] = sigma(i, k);
  return col;
}

void SRStructure::eval_sigma(std::span<const double> x, double* out_dr) const {
  for (std::size_t idx = 0; idx < sigma_.size(); ++idx)
    out_dr[idx] = evaluate(sigma_[idx], x);
}

void SRStructure::eval_bbar(std::span<const double> x, double* out_r) const {
  for (std::size_t k = 0; k < bbar_.size(); ++k) out_r[k] = evaluate(bbar_[k], x);
}

void SRStructure::eval_drift(std::span<const double> x, double* out_d) const {
  for (int i = 0; i < geom_.d; ++i)
    out_d[i] = evaluate(b_[static_cast<std::size_t>(i)], x);
}

double SRStructure::drift_metric_norm(std::span<const double> x) const {
  double s = 0.0;
  for (const Expr& e : bbar_) {
    double v = evaluate(e, x);
    s += v * v;
  }
  return std::sqrt(s);
}

const std::vector<simd::BatchProgram>& SRStructure::sigma_programs() const {
  if (sigma_prog_.empty())
    for (const Expr& e : sigma_) sigma_prog_.push_back(simd::compile_batch(e, geom_.d));
  return sigma_prog_;
}

const std::vector<simd::BatchProgram>& SRStructure::bbar_programs() const {
  if (bbar_prog_.empty())
    for (const Expr& e : bbar_) bbar_prog_.push_back(simd::compile_batch(e, geom_.d));
  return bbar_prog_;
}

double SRStructure::max_drift_norm() const {
  if (max_drift_ < 0.0) {
    double m = 0.0;
    for (const auto& p : lattice_probes(geom_, 17)) m = std::max(m, drift_metric_norm(p));
    max_drift_ = m;
  }
  return max_drift_;
}

double metric_norm(const SRStructure& S, std::span<const double> x,
                   std::span<const double> xi) {
  (void)S;
  (void)x;
  double s = 0.0;
  for (double v : xi) s += v * v;
  return std::sqrt(s);
}

std::vector<Point> lattice_probes(const TorusGeometry& g, int per_axis, std::size_t cap) {
  std::vector<Point> out;
  std::size_t total = 1;
  for (int j = 0; j < g.d; ++j) total *= static_cast<std::size_t>(per_axis);
  if (total <= cap) {
    out.reserve(total);
    std::vector<int> idx(static_cast<std::size_t>(g.d), 0);
    for (std::size_t n = 0; n < total; ++n) {
      Point p(static_cast<std::size_t>(g.d));
      for (int j = 0; j < g.d; ++j)
        p[static_cast<std::size_t>(j)] =
            g.periods[static_cast<std::size_t>(j)] * idx[static_cast<std::size_t>(j)] / per_axis;
      out.push_back(std::move(p));
      for (int j = g.d - 1; j >= 0; --j) {
        if (++idx[static_cast<std::size_t>(j)] < per_axis) break;
        idx[static_cast<std::size_t>(j)] = 0;
      }
    }
  } else {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    out.reserve(cap);
    for (std::size_t n = 0; n < cap; ++n) {
      Point p(static_cast<std::size_t>(g.d));
      for (int j = 0; j < g.d; ++j)
        p[static_cast<std::size_t>(j)] = g.periods[static_cast<std::size_t>(j)] * U(rng);
      out.push_back(std::move(p));
    }
  }
  return out;
}

HormanderReport hormander_check(const SRStructure& S, int depth, std::vector<Point> probes) {
  const int d = S.dim();
  HormanderReport rep;
  rep.depth = depth;
  rep.required_rank = d;
  if (probes.empty()) probes = lattice_probes(S.geometry());

  // left-normed brackets span the generated Lie algebra filtration
  std::vector<VectorField> fields;
  std::vector<VectorField> prev;
  for (int k = 0; k < S.rank(); ++k) {
    fields.push_back(S.frame_column(k));
    prev.push_back(fields.back());
  }
  for (int g = 2; g <= depth; ++g) {
    std::vector<VectorField> next;
    for (int k = 0; k < S.rank(); ++k)
      for (const auto& Y : prev) next.push_back(lie_bracket(S.frame_column(k), Y, d));
    for (auto& f : next) fields.push_back(f);
    prev = std::move(next);
  }

  rep.min_rank = d;
  rep.satisfied = true;
  Eigen::MatrixXd M(d, static_cast<int>(fields.size()));
  for (auto& p : probes) {
    for (int c = 0; c < static_cast<int>(fields.size()); ++c)
      for (int i = 0; i < d; ++i)
        M(i, c) = evaluate(fields[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)], p);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    double tol = 1e-8 * std::max(1e-300, sv(0));
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > tol) ++rank;
    rep.probes.push_back({p, rank});
    rep.min_rank = std::min(rep.min_rank, rank);
    if (rank < d) rep.satisfied = false;
  }
  return rep;
}

}  // namespace wkam
