#include "wkam/action.hpp"

#include <cmath>

namespace wkam {

std::vector<Point> propagate(const SRStructure& S, const HorizontalPath& path) {
  const int d = S.dim(), r = S.rank();
  std::vector<Point> states;
  states.reserve(path.controls.size() + 1);
  Point x = path.x0;
  states.push_back(x);
  std::vector<double> sig(static_cast<std::size_t>(d) * r);
  for (const auto& xi : path.controls) {
    S.eval_sigma(x, sig.data());
    for (int i = 0; i < d; ++i) {
      double v = 0.0;
      for (int k = 0; k < r; ++k) v += sig[static_cast<std::size_t>(i) * r + k] * xi[static_cast<std::size_t>(k)];
      x[static_cast<std::size_t>(i)] += path.h * v;
    }
    S.geometry().wrap_inplace(x);
    states.push_back(x);
  }
  return states;
}

double lagrangian(const SRStructure& S, std::span<const double> x,
                  std::span<const double> xi) {
  const int r = S.rank();
  std::vector<double> bb(static_cast<std::size_t>(r));
  S.eval_bbar(x, bb.data());
  double s = 0.0;
  for (int k = 0; k < r; ++k) {
    double dv = xi[static_cast<std::size_t>(k)] - bb[static_cast<std::size_t>(k)];
    s += dv * dv;
  }
  return 0.25 * s;
}

double action(const SRStructure& S, const HorizontalPath& path) {
  if (path.controls.empty()) return 0.0;
  auto states = propagate(S, path);
  double acc = 0.0;
  for (std::size_t k = 0; k < path.controls.size(); ++k)
    acc += lagrangian(S, states[k], path.controls[k]);
  return path.h * acc;
}

double rate_functional(const SRStructure& S, const HorizontalPath& path) {
  return 2.0 * action(S, path);
}

double hamiltonian(const SRStructure& S, std::span<const double> x,
                   std::span<const double> p) {
  const int d = S.dim(), r = S.rank();
  std::vector<double> sig(static_cast<std::size_t>(d) * r);
  std::vector<double> bb(static_cast<std::size_t>(r));
  S.eval_sigma(x, sig.data());
  S.eval_bbar(x, bb.data());
  double quad = 0.0, lin = 0.0;
  for (int k = 0; k < r; ++k) {
    double psig = 0.0;
    for (int i = 0; i < d; ++i) psig += p[static_cast<std::size_t>(i)] * sig[static_cast<std::size_t>(i) * r + k];
    quad += psig * psig;
    lin += psig * bb[static_cast<std::size_t>(k)];
  }
  return quad + lin;
}

double c_b(const SRStructure& S) {
  double m = S.max_drift_norm();
  return 0.5 * (1.0 + m) * (1.0 + m);
}

}  // namespace wkam
