#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "wkam/geometry.hpp"

namespace wkam {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Uniform periodic grid, row-major node indexing with the last axis fastest.
struct PeriodicGrid {
  TorusGeometry geometry;
  std::vector<int> dims;
  std::vector<double> spacing;

  PeriodicGrid() = default;
  PeriodicGrid(TorusGeometry g, std::vector<int> n) : geometry(std::move(g)), dims(std::move(n)) {
    if (static_cast<int>(dims.size()) != geometry.d) throw std::invalid_argument("dims size");
    spacing.resize(dims.size());
    for (std::size_t j = 0; j < dims.size(); ++j) {
      if (dims[j] < 2) throw std::invalid_argument("grid needs at least 2 nodes per axis");
      spacing[j] = geometry.periods[j] / dims[j];
    }
  }

  std::size_t size() const {
    std::size_t n = 1;
    for (int m : dims) n *= static_cast<std::size_t>(m);
    return n;
  }

  double max_spacing() const {
    double m = 0.0;
    for (double s : spacing) m = std::max(m, s);
    return m;
  }

  double cell_volume() const {
    double v = 1.0;
    for (double s : spacing) v *= s;
    return v;
  }

  std::size_t index_of(const std::vector<int>& c) const {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < dims.size(); ++j)
      idx = idx * static_cast<std::size_t>(dims[j]) + static_cast<std::size_t>(c[j]);
    return idx;
  }

  std::vector<int> coords_of(std::size_t idx) const {
    std::vector<int> c(dims.size());
    for (std::size_t j = dims.size(); j-- > 0;) {
      c[j] = static_cast<int>(idx % static_cast<std::size_t>(dims[j]));
      idx /= static_cast<std::size_t>(dims[j]);
    }
    return c;
  }

  Point point_of(std::size_t idx) const {
    auto c = coords_of(idx);
    Point p(dims.size());
    for (std::size_t j = 0; j < dims.size(); ++j) p[j] = spacing[j] * c[j];
    return p;
  }

  int wrap_coord(int c, int axis) const {
    int n = dims[static_cast<std::size_t>(axis)];
    c %= n;
    if (c < 0) c += n;
    return c;
  }

  std::size_t nearest_node(std::span<const double> x) const {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < dims.size(); ++j) {
      int c = static_cast<int>(std::lround(x[j] / spacing[j]));
      c = wrap_coord(c, static_cast<int>(j));
      idx = idx * static_cast<std::size_t>(dims[j]) + static_cast<std::size_t>(c);
    }
    return idx;
  }

  // torus distance between node centers
  double node_distance(std::size_t a, std::size_t b) const {
    Point pa = point_of(a), pb = point_of(b);
    return geometry.distance(pa, pb);
  }
};

// Scalar field sampled on the grid. +inf marks unreachable nodes.
struct GridField {
  PeriodicGrid grid;
  std::string name;
  std::vector<double> values;

  GridField() = default;
  GridField(PeriodicGrid g, std::string n, double fill = 0.0)
      : grid(std::move(g)), name(std::move(n)), values(grid.size(), fill) {}

  double min_finite() const;
  double max_finite() const;

  // WKGF: magic "WKGF", version u32 LE, d u32, dims u32 x d, periods f64 x d,
  // name length u32 + UTF-8 name, values f64 row-major (last index fastest).
  void write_wkgf(const std::filesystem::path& file) const;
  static GridField read_wkgf(const std::filesystem::path& file);

  // CSV: one row per node, coordinates then value.
  void write_csv(const std::filesystem::path& file) const;
};

}  // namespace wkam
