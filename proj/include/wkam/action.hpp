#pragma once

#include <span>
#include <vector>

#include "wkam/srgeom.hpp"

namespace wkam {

// Discrete horizontal curve: x_{k+1} = wrap(x_k + h sigma(x_k) xi_k), controls
// piecewise constant in control coordinates R^r.
struct HorizontalPath {
  Point x0;
  double h = 0.0;
  std::vector<std::vector<double>> controls;  // N entries, each of size r

  double total_time() const { return h * static_cast<double>(controls.size()); }
};

// States x_0..x_N obtained by explicit Euler propagation.
std::vector<Point> propagate(const SRStructure& S, const HorizontalPath& path);

// L(x, v) with v = sigma(x) xi: quarter squared metric distance to the drift.
double lagrangian(const SRStructure& S, std::span<const double> x,
                  std::span<const double> xi);

// Left-endpoint quadrature of the Lagrangian along the path.
double action(const SRStructure& S, const HorizontalPath& path);

// Large-deviations rate functional: exactly twice the action.
double rate_functional(const SRStructure& S, const HorizontalPath& path);

// H(x,p) = |p sigma(x)|^2 + p.b(x)
double hamiltonian(const SRStructure& S, std::span<const double> x,
                   std::span<const double> p);

// C_b = (1 + max ||b||_D)^2 / 2, max over the probe lattice.
double c_b(const SRStructure& S);

}  // namespace wkam
