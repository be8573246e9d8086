#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace wkam {

using Point = std::vector<double>;

// Flat torus [0,L_1) x ... x [0,L_d).
struct TorusGeometry {
  int d = 0;
  std::vector<double> periods;

  TorusGeometry() = default;
  explicit TorusGeometry(int dim)
      : d(dim), periods(static_cast<std::size_t>(dim), 2.0 * std::numbers::pi) {}
  TorusGeometry(int dim, std::vector<double> L) : d(dim), periods(std::move(L)) {
    if (static_cast<int>(periods.size()) != d) throw std::invalid_argument("periods size");
    for (double p : periods)
      if (!(p > 0.0)) throw std::invalid_argument("periods must be positive");
  }

  double wrap1(double x, int j) const {
    double L = periods[static_cast<std::size_t>(j)];
    double w = x - L * std::floor(x / L);
    if (w >= L) w = 0.0;  // guard against rounding at the seam
    return w;
  }

  void wrap_inplace(std::span<double> x) const {
    for (int j = 0; j < d; ++j) x[static_cast<std::size_t>(j)] = wrap1(x[static_cast<std::size_t>(j)], j);
  }

  Point wrap(Point x) const {
    wrap_inplace(x);
    return x;
  }

  // wrapped difference, each component in [-L_j/2, L_j/2)
  double min_image1(double diff, int j) const {
    double L = periods[static_cast<std::size_t>(j)];
    diff -= L * std::floor(diff / L + 0.5);
    return diff;
  }

  double distance(std::span<const double> a, std::span<const double> b) const {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      double dx = min_image1(a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)], j);
      s += dx * dx;
    }
    return std::sqrt(s);
  }
};

}  // namespace wkam
