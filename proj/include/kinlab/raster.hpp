#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

// Boolean rasters of cylinder unions in one space dimension: (t, x) for the
// parabolic family, (t, x, v) for the kinetic one. A cell belongs to a set when
// its centre does.

namespace kinlab {

enum class Geometry { parabolic, kinetic };

inline const char* geometry_name(Geometry g) { return g == Geometry::kinetic ? "kinetic" : "parabolic"; }

struct Lattice {
  Geometry geo = Geometry::kinetic;
  std::array<double, 3> lo{}, hi{};
  std::array<int, 3> n{1, 1, 1};

  Lattice() = default;
  Lattice(Geometry g, std::array<double, 3> l, std::array<double, 3> h, std::array<int, 3> c)
      : geo(g), lo(l), hi(h), n(c) {
    if (g == Geometry::parabolic) {
      lo[2] = 0;
      hi[2] = 1;
      n[2] = 1;
    }
    for (int a = 0; a < 3; ++a)
      if (n[a] < 1 || !(hi[a] > lo[a])) throw DomainError("raster lattice needs positive extent and counts");
  }

  int rank() const { return geo == Geometry::kinetic ? 3 : 2; }
  double h(int a) const { return (hi[a] - lo[a]) / n[a]; }
  double centre(int a, int i) const { return lo[a] + (i + 0.5) * h(a); }
  double cell_volume() const { return h(0) * h(1) * (geo == Geometry::kinetic ? h(2) : 1.0); }
  std::size_t size() const { return static_cast<std::size_t>(n[0]) * n[1] * n[2]; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n[1] + j) * n[2] + k;
  }
};

// Half-open index range [first, last) of cells with lo < centre < hi (or
// centre <= hi when closed_hi). Indices are not clamped to the lattice.
inline std::pair<long, long> cell_range(const Lattice& L, int a, double lo, double hi,
                                        bool closed_hi = false) {
  const double h = L.h(a);
  long i = static_cast<long>(std::floor((lo - L.lo[a]) / h - 0.5));
  auto c = [&](long k) { return L.lo[a] + (k + 0.5) * h; };
  while (c(i) <= lo) ++i;
  while (c(i - 1) > lo) --i;
  long j = static_cast<long>(std::floor((hi - L.lo[a]) / h - 0.5));
  auto inside_hi = [&](long k) { return closed_hi ? c(k) <= hi : c(k) < hi; };
  while (inside_hi(j + 1)) ++j;
  while (j >= i && !inside_hi(j)) --j;
  return {i, std::max(i, j + 1)};
}

inline std::pair<int, int> clamp_range(std::pair<long, long> r, int n) {
  const long a = std::clamp<long>(r.first, 0, n), b = std::clamp<long>(r.second, 0, n);
  return {static_cast<int>(a), static_cast<int>(std::max(a, b))};
}

// {t_lo < t <= t_hi (or < t_hi), |x - x0 - (t - t_ref) slope| < rx, |v - v0| < rv}.
struct SlantedSet {
  double t_lo = 0, t_hi = 0;
  bool closed_top = true;
  double t_ref = 0, x0 = 0, slope = 0, rx = 0;
  double v0 = 0, rv = 0;
  bool has_v = true;
};

inline void require_d1(int d) {
  if (d != 1) throw DimensionError("rasters support d = 1 only");
}

inline SlantedSet slanted(const KineticCylinder& q) {
  require_d1(q.center.d);
  const double r = q.radius;
  return {q.center.t - r * r, q.center.t, true, q.center.t, q.center.x[0], q.center.v[0], r * r * r,
          q.center.v[0], r, true};
}

inline SlantedSet slanted(const ParabolicCylinder& q) {
  require_d1(q.d);
  const double r = q.radius;
  return {q.t0 - r * r, q.t0, true, q.t0, q.x0[0], 0.0, r, 0.0, 0.0, false};
}

inline SlantedSet slanted(const StackedCylinder<KineticCylinder>& s) {
  const KineticCylinder& q = s.base;
  require_d1(q.center.d);
  const double r = q.radius;
  return {q.center.t, q.center.t + s.m * r * r, false, q.center.t, q.center.x[0], q.center.v[0],
          (s.m + 2) * r * r * r, q.center.v[0], r, true};
}

inline SlantedSet slanted(const StackedCylinder<ParabolicCylinder>& s) {
  const ParabolicCylinder& q = s.base;
  require_d1(q.d);
  const double r = q.radius;
  return {q.t0, q.t0 + s.m * r * r, false, q.t0, q.x0[0], 0.0, r, 0.0, 0.0, false};
}

// Calls fn(i, j, k_first, k_last) for every (t, x) cell row of the set; rows are
// clamped to the lattice. With clamp = false, rows outside are reported too
// (used to count the full cell volume of a set that leaves the box).
template <class Fn>
void for_each_row(const Lattice& L, const SlantedSet& s, bool clamp, Fn&& fn) {
  auto tr = cell_range(L, 0, s.t_lo, s.t_hi, s.closed_top);
  std::pair<long, long> vr{0, 1};
  if (L.geo == Geometry::kinetic) vr = cell_range(L, 2, s.v0 - s.rv, s.v0 + s.rv);
  if (clamp) {
    auto c = clamp_range(tr, L.n[0]);
    tr = {c.first, c.second};
    auto cv = clamp_range(vr, L.n[2]);
    vr = {cv.first, cv.second};
  }
  if (vr.first >= vr.second) return;
  for (long i = tr.first; i < tr.second; ++i) {
    const double t = L.lo[0] + (i + 0.5) * L.h(0);
    const double xc = s.x0 + (t - s.t_ref) * s.slope;
    auto xr = cell_range(L, 1, xc - s.rx, xc + s.rx);
    if (clamp) {
      auto c = clamp_range(xr, L.n[1]);
      xr = {c.first, c.second};
    }
    for (long j = xr.first; j < xr.second; ++j) fn(i, j, vr.first, vr.second);
  }
}

// Number of lattice cells (extended beyond the box) whose centres lie in s.
inline double cell_count(const Lattice& L, const SlantedSet& s) {
  double c = 0;
  for_each_row(L, s, false, [&](long, long, long k0, long k1) { c += static_cast<double>(k1 - k0); });
  return c;
}

class RasterMask {
 public:
  Lattice lattice;
  std::vector<std::uint8_t> bits;

  RasterMask() = default;
  explicit RasterMask(const Lattice& L) : lattice(L), bits(L.size(), 0) {}

  void add(const SlantedSet& s) {
    for_each_row(lattice, s, true, [&](long i, long j, long k0, long k1) {
      const std::size_t base = lattice.index(static_cast<int>(i), static_cast<int>(j), 0);
      std::fill(bits.begin() + base + k0, bits.begin() + base + k1, std::uint8_t{1});
    });
  }
  template <class Set>
  void add_set(const Set& q) {
    add(slanted(q));
  }

  std::size_t count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }
  double measure() const { return static_cast<double>(count()) * lattice.cell_volume(); }

  // Cells of s that are set / cells of s inside the box.
  std::pair<double, double> hits(const SlantedSet& s) const {
    double in = 0, all = 0;
    for_each_row(lattice, s, true, [&](long i, long j, long k0, long k1) {
      const std::size_t base = lattice.index(static_cast<int>(i), static_cast<int>(j), 0);
      for (long k = k0; k < k1; ++k) in += bits[base + k];
      all += static_cast<double>(k1 - k0);
    });
    return {in, all};
  }

  // Volume of cells whose membership differs from an axis neighbour; the raster
  // error of the measure of a union with regular boundary is bounded by it.
  double boundary_volume() const {
    const Lattice& L = lattice;
    std::size_t c = 0;
    for (int i = 0; i < L.n[0]; ++i)
      for (int j = 0; j < L.n[1]; ++j)
        for (int k = 0; k < L.n[2]; ++k) {
          const std::uint8_t b = bits[L.index(i, j, k)];
          bool edge = false;
          if (i > 0 && bits[L.index(i - 1, j, k)] != b) edge = true;
          if (!edge && i + 1 < L.n[0] && bits[L.index(i + 1, j, k)] != b) edge = true;
          if (!edge && j > 0 && bits[L.index(i, j - 1, k)] != b) edge = true;
          if (!edge && j + 1 < L.n[1] && bits[L.index(i, j + 1, k)] != b) edge = true;
          if (!edge && k > 0 && bits[L.index(i, j, k - 1)] != b) edge = true;
          if (!edge && k + 1 < L.n[2] && bits[L.index(i, j, k + 1)] != b) edge = true;
          if (edge) ++c;
        }
    return static_cast<double>(c) * L.cell_volume();
  }

  double centre(int a, int i) const { return lattice.centre(a, i); }
};

inline double intersection_measure(const RasterMask& a, const RasterMask& b) {
  std::size_t c = 0;
  for (std::size_t f = 0; f < a.bits.size(); ++f) c += a.bits[f] & b.bits[f];
  return static_cast<double>(c) * a.lattice.cell_volume();
}

// Per time slice 2D inclusive prefix sums over (x, v), for O(n_t) cylinder sums.
class SliceSums {
 public:
  SliceSums(const Lattice& L, const std::vector<double>& w) : L_(L) {
    const std::size_t nx = L.n[1] + 1, nv = L.n[2] + 1;
    p_.assign(static_cast<std::size_t>(L.n[0]) * nx * nv, 0.0);
    for (int i = 0; i < L.n[0]; ++i) {
      double* P = &p_[static_cast<std::size_t>(i) * nx * nv];
      for (int j = 0; j < L.n[1]; ++j) {
        double row = 0;
        for (int k = 0; k < L.n[2]; ++k) {
          row += w[L.index(i, j, k)];
          P[(j + 1) * nv + k + 1] = P[j * nv + k + 1] + row;
        }
      }
    }
  }

  // Sum of weights over the clamped cells of s.
  double sum(const SlantedSet& s) const {
    double total = 0;
    auto tr = clamp_range(cell_range(L_, 0, s.t_lo, s.t_hi, s.closed_top), L_.n[0]);
    std::pair<int, int> vr{0, 1};
    if (L_.geo == Geometry::kinetic) vr = clamp_range(cell_range(L_, 2, s.v0 - s.rv, s.v0 + s.rv), L_.n[2]);
    if (vr.first >= vr.second) return 0;
    const std::size_t nx = L_.n[1] + 1, nv = L_.n[2] + 1;
    for (int i = tr.first; i < tr.second; ++i) {
      const double t = L_.centre(0, i);
      const double xc = s.x0 + (t - s.t_ref) * s.slope;
      auto xr = clamp_range(cell_range(L_, 1, xc - s.rx, xc + s.rx), L_.n[1]);
      if (xr.first >= xr.second) continue;
      const double* P = &p_[static_cast<std::size_t>(i) * nx * nv];
      total += P[xr.second * nv + vr.second] - P[xr.first * nv + vr.second] -
               P[xr.second * nv + vr.first] + P[xr.first * nv + vr.first];
    }
    return total;
  }

 private:
  Lattice L_;
  std::vector<double> p_;
};

}  // namespace kinlab
