#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace kinlab {

enum class Axis { t, x, v };

inline char axis_char(Axis a) { return a == Axis::t ? 't' : a == Axis::x ? 'x' : 'v'; }

inline Axis axis_from_char(char c) {
  switch (c) {
    case 't': return Axis::t;
    case 'x': return Axis::x;
    case 'v': return Axis::v;
  }
  throw DomainError(std::string("unknown axis role '") + c + "'");
}

// Cell-centred values on a uniform tensor lattice; the last axis varies fastest.
class GridFunction {
 public:
  std::vector<Axis> roles;
  std::vector<double> lower, upper;
  std::vector<int> counts;
  std::vector<double> values;

  GridFunction() = default;

  GridFunction(std::vector<Axis> r, std::vector<double> lo, std::vector<double> hi,
               std::vector<int> n, double fill = 0.0)
      : roles(std::move(r)), lower(std::move(lo)), upper(std::move(hi)), counts(std::move(n)) {
    const std::size_t k = roles.size();
    if (lower.size() != k || upper.size() != k || counts.size() != k || k == 0)
      throw DimensionError("grid axis descriptions have inconsistent lengths");
    for (std::size_t a = 0; a < k; ++a) {
      if (counts[a] < 1) throw DomainError("grid counts must be positive");
      if (!(upper[a] > lower[a])) throw DomainError("grid box must have positive extent");
    }
    values.assign(size(), fill);
  }

  // Same lattice, new values.
  GridFunction like(double fill = 0.0) const {
    return GridFunction(roles, lower, upper, counts, fill);
  }

  int rank() const { return static_cast<int>(roles.size()); }

  std::size_t size() const {
    std::size_t s = 1;
    for (int c : counts) s *= static_cast<std::size_t>(c);
    return s;
  }

  double spacing(int a) const { return (upper[a] - lower[a]) / counts[a]; }
  double center(int a, int i) const { return lower[a] + (i + 0.5) * spacing(a); }

  double cell_volume() const {
    double v = 1;
    for (int a = 0; a < rank(); ++a) v *= spacing(a);
    return v;
  }

  std::size_t stride(int a) const {
    std::size_t s = 1;
    for (int b = rank() - 1; b > a; --b) s *= static_cast<std::size_t>(counts[b]);
    return s;
  }

  std::size_t index(const int* idx) const {
    std::size_t f = 0;
    for (int a = 0; a < rank(); ++a) f = f * counts[a] + idx[a];
    return f;
  }

  void unravel(std::size_t f, int* idx) const {
    for (int a = rank() - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(f % counts[a]);
      f /= counts[a];
    }
  }

  void coords(std::size_t f, double* c) const {
    int idx[8];
    unravel(f, idx);
    for (int a = 0; a < rank(); ++a) c[a] = center(a, idx[a]);
  }

  int axis_index(Axis role, int occurrence = 0) const {
    for (int a = 0; a < rank(); ++a)
      if (roles[a] == role && occurrence-- == 0) return a;
    return -1;
  }

  int count_role(Axis role) const {
    return static_cast<int>(std::count(roles.begin(), roles.end(), role));
  }

  template <class F>
  void fill_with(F&& f) {
    double c[8];
    for (std::size_t k = 0; k < values.size(); ++k) {
      coords(k, c);
      values[k] = f(static_cast<const double*>(c));
    }
  }

  double integral() const {
    double s = 0;
    for (double v : values) s += v;
    return s * cell_volume();
  }

  double lp_norm(double p) const {
    if (std::isinf(p)) {
      double m = 0;
      for (double v : values) m = std::max(m, std::abs(v));
      return m;
    }
    double s = 0;
    for (double v : values) s += std::pow(std::abs(v), p);
    return std::pow(s * cell_volume(), 1.0 / p);
  }

  double max_value() const { return *std::max_element(values.begin(), values.end()); }
  double min_value() const { return *std::min_element(values.begin(), values.end()); }

  bool inside_box(const double* c) const {
    for (int a = 0; a < rank(); ++a)
      if (c[a] < lower[a] || c[a] > upper[a]) return false;
    return true;
  }

  // Multilinear interpolation between cell centres, constant in the outer
  // half cell, zero outside the box.
  double interpolate(const double* c) const {
    if (!inside_box(c)) return 0.0;
    const int k = rank();
    int base[8];
    double frac[8];
    for (int a = 0; a < k; ++a) {
      double u = (c[a] - lower[a]) / spacing(a) - 0.5;
      u = std::clamp(u, 0.0, static_cast<double>(counts[a] - 1));
      int i = std::min(static_cast<int>(std::floor(u)), counts[a] - 2);
      if (counts[a] == 1) i = 0;
      base[a] = std::max(i, 0);
      frac[a] = counts[a] == 1 ? 0.0 : u - base[a];
    }
    // Corner values, then nested lerps a + θ(b - a) so constants are exact.
    const int corners = 1 << k;
    double w[256];
    int idx[8];
    for (int m = 0; m < corners; ++m) {
      for (int a = 0; a < k; ++a) idx[a] = base[a] + (counts[a] == 1 ? 0 : (m >> a) & 1);
      w[m] = values[index(idx)];
    }
    for (int a = k - 1; a >= 0; --a) {
      const int half = 1 << a;
      for (int m = 0; m < half; ++m) w[m] = w[m] + frac[a] * (w[m + half] - w[m]);
    }
    return w[0];
  }
};

template <class F>
GridFunction sample_grid(std::vector<Axis> roles, std::vector<double> lo, std::vector<double> hi,
                         std::vector<int> n, F&& f) {
  GridFunction g(std::move(roles), std::move(lo), std::move(hi), std::move(n));
  g.fill_with(std::forward<F>(f));
  return g;
}

// On-disk layout: a text header, the line "data", then size() raw doubles.
//   kinlab-grid 1
//   endianness little|big
//   rank K
//   axis <role> <lower> <upper> <count>   (K lines, in storage order)
//   data
inline void save_grid(const GridFunction& g, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  os << "kinlab-grid 1\n";
  os << "endianness " << (std::endian::native == std::endian::little ? "little" : "big") << "\n";
  os << "rank " << g.rank() << "\n";
  os << std::setprecision(17);
  for (int a = 0; a < g.rank(); ++a)
    os << "axis " << axis_char(g.roles[a]) << ' ' << g.lower[a] << ' ' << g.upper[a] << ' '
       << g.counts[a] << "\n";
  os << "data\n";
  os.write(reinterpret_cast<const char*>(g.values.data()),
           static_cast<std::streamsize>(g.values.size() * sizeof(double)));
}

inline GridFunction load_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path);
  std::string line, word;
  std::getline(is, line);
  if (line != "kinlab-grid 1") throw Error(path + ": not a grid file");
  std::getline(is, line);
  std::istringstream(line) >> word >> word;
  const bool little = word == "little";
  int k = 0;
  std::getline(is, line);
  std::istringstream(line) >> word >> k;
  std::vector<Axis> roles;
  std::vector<double> lo, hi;
  std::vector<int> n;
  for (int a = 0; a < k; ++a) {
    std::getline(is, line);
    std::istringstream ls(line);
    char role;
    double l, h;
    int c;
    ls >> word >> role >> l >> h >> c;
    if (word != "axis" || !ls) throw Error(path + ": malformed axis record");
    roles.push_back(axis_from_char(role));
    lo.push_back(l);
    hi.push_back(h);
    n.push_back(c);
  }
  std::getline(is, line);
  if (line != "data") throw Error(path + ": missing data marker");
  GridFunction g(roles, lo, hi, n);
  is.read(reinterpret_cast<char*>(g.values.data()),
          static_cast<std::streamsize>(g.values.size() * sizeof(double)));
  if (!is) throw Error(path + ": truncated data");
  if (little != (std::endian::native == std::endian::little)) {
    for (double& v : g.values) {
      std::uint64_t u;
      std::memcpy(&u, &v, 8);
      u = __builtin_bswap64(u);
      std::memcpy(&v, &u, 8);
    }
  }
  return g;
}

// One row per cell: coordinates in axis order, then the value.
inline void export_csv(const GridFunction& g, std::ostream& os) {
  for (int a = 0; a < g.rank(); ++a) os << axis_char(g.roles[a]) << a << ',';
  os << "value\n";
  os << std::setprecision(17);
  double c[8];
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    g.coords(k, c);
    for (int a = 0; a < g.rank(); ++a) os << c[a] << ',';
    os << g.values[k] << '\n';
  }
}

}  // namespace kinlab
