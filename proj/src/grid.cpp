#include "wkam/grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace wkam {

double GridField::min_finite() const {
  double m = kUnreachable;
  for (double v : values)
    if (std::isfinite(v) && v < m) m = v;
  return m;
}

double GridField::max_finite() const {
  double m = -kUnreachable;
  for (double v : values)
    if (std::isfinite(v) && v > m) m = v;
  return m;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("truncated WKGF file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("truncated WKGF file");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void GridField::write_wkgf(const std::filesystem::path& file) const {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  os.write("WKGF", 4);
  put_u32(os, 1u);
  put_u32(os, static_cast<std::uint32_t>(grid.geometry.d));
  for (int n : grid.dims) put_u32(os, static_cast<std::uint32_t>(n));
  for (double L : grid.geometry.periods) put_f64(os, L);
  put_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  for (double v : values) put_f64(os, v);
  if (!os) throw std::runtime_error("failed writing " + file.string());
}

GridField GridField::read_wkgf(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "WKGF", 4) != 0)
    throw std::runtime_error(file.string() + " is not a WKGF file");
  std::uint32_t version = get_u32(is);
  if (version != 1u) throw std::runtime_error("unsupported WKGF version");
  int d = static_cast<int>(get_u32(is));
  std::vector<int> dims(static_cast<std::size_t>(d));
  for (int& n : dims) n = static_cast<int>(get_u32(is));
  std::vector<double> periods(static_cast<std::size_t>(d));
  for (double& L : periods) L = get_f64(is);
  std::uint32_t name_len = get_u32(is);
  std::string name(name_len, '\0');
  is.read(name.data(), name_len);
  GridField f(PeriodicGrid(TorusGeometry(d, periods), dims), name);
  for (double& v : f.values) v = get_f64(is);
  return f;
}

void GridField::write_csv(const std::filesystem::path& file) const {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  for (int j = 0; j < grid.geometry.d; ++j) os << "x" << (j + 1) << ",";
  os << (name.empty() ? "value" : name) << "\n";
  char buf[32];
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    Point p = grid.point_of(idx);
    for (double c : p) {
      std::snprintf(buf, sizeof buf, "%.17g", c);
      os << buf << ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g", values[idx]);
    os << buf << "\n";
  }
}

}  // namespace wkam
