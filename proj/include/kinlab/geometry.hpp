#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace kinlab {

inline constexpr int max_dim = 3;
using Vec = std::array<double, max_dim>;

inline void check_dim(int d) {
  if (d < 1 || d > max_dim)
    throw DimensionError("dimension must be 1, 2 or 3, got " + std::to_string(d));
}

inline double dot(const Vec& a, const Vec& b, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a, int d) { return std::sqrt(dot(a, a, d)); }

inline Vec axpy(double s, const Vec& a, const Vec& b) {  // s*a + b
  return {s * a[0] + b[0], s * a[1] + b[1], s * a[2] + b[2]};
}

inline Vec sub(const Vec& a, const Vec& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Vec make_vec(std::span<const double> c) {
  if (c.size() > max_dim) throw DimensionError("vector longer than 3");
  Vec out{};
  std::copy(c.begin(), c.end(), out.begin());
  return out;
}

// z = (t, x, v) in R^{1+2d}; unused trailing components stay zero.
struct PhasePoint {
  double t = 0;
  Vec x{};
  Vec v{};
  int d = 1;

  PhasePoint() = default;
  PhasePoint(double t_, const Vec& x_, const Vec& v_, int d_) : t(t_), x(x_), v(v_), d(d_) {
    check_dim(d);
    for (int i = d; i < max_dim; ++i) x[i] = v[i] = 0;
  }
  PhasePoint(double t_, std::initializer_list<double> x_, std::initializer_list<double> v_)
      : t(t_) {
    if (x_.size() != v_.size()) throw DimensionError("x and v have different lengths");
    d = static_cast<int>(x_.size());
    check_dim(d);
    x = make_vec({x_.begin(), x_.size()});
    v = make_vec({v_.begin(), v_.size()});
  }

  static PhasePoint origin(int d) { return PhasePoint(0, Vec{}, Vec{}, d); }

  bool finite() const {
    if (!std::isfinite(t)) return false;
    for (int i = 0; i < d; ++i)
      if (!std::isfinite(x[i]) || !std::isfinite(v[i])) return false;
    return true;
  }

  bool operator==(const PhasePoint& o) const {
    return d == o.d && t == o.t && x == o.x && v == o.v;
  }
};

inline void same_dim(const PhasePoint& a, const PhasePoint& b) {
  if (a.d != b.d)
    throw DimensionError("phase points of dimension " + std::to_string(a.d) + " and " +
                         std::to_string(b.d));
}

// Group law z1 ∘ z2 = (t1+t2, x1+x2+t2 v1, v1+v2).
inline PhasePoint compose(const PhasePoint& z1, const PhasePoint& z2) {
  same_dim(z1, z2);
  PhasePoint r = z1;
  r.t = z1.t + z2.t;
  for (int i = 0; i < z1.d; ++i) {
    r.x[i] = z1.x[i] + z2.x[i] + z2.t * z1.v[i];
    r.v[i] = z1.v[i] + z2.v[i];
  }
  return r;
}

inline PhasePoint inverse(const PhasePoint& z) {
  PhasePoint r = z;
  r.t = -z.t;
  for (int i = 0; i < z.d; ++i) {
    r.x[i] = -z.x[i] + z.t * z.v[i];
    r.v[i] = -z.v[i];
  }
  return r;
}

// z1^{-1} ∘ z2 without forming the inverse.
inline PhasePoint relative(const PhasePoint& z1, const PhasePoint& z2) {
  same_dim(z1, z2);
  PhasePoint r = z1;
  const double dt = z2.t - z1.t;
  r.t = dt;
  for (int i = 0; i < z1.d; ++i) {
    r.x[i] = z2.x[i] - z1.x[i] - dt * z1.v[i];
    r.v[i] = z2.v[i] - z1.v[i];
  }
  return r;
}

inline PhasePoint scale(const PhasePoint& z, double R) {
  if (!(R > 0)) throw DomainError("scale factor must be positive");
  PhasePoint r = z;
  r.t = R * R * z.t;
  for (int i = 0; i < z.d; ++i) {
    r.x[i] = R * R * R * z.x[i];
    r.v[i] = R * z.v[i];
  }
  return r;
}

inline double sup_norm(const PhasePoint& z) {
  return std::max({std::sqrt(std::abs(z.t)), std::cbrt(norm(z.x, z.d)), norm(z.v, z.d)});
}

struct KineticCylinder {
  PhasePoint center;  // top of the cylinder
  double radius = 1;
};

struct ParabolicCylinder {
  double t0 = 0;
  Vec x0{};
  int d = 1;
  double radius = 1;
};

struct EuclideanBall {
  Vec center{};
  int d = 1;
  double radius = 1;
};

template <class Base>
struct StackedCylinder {
  Base base;
  int m = 1;
};

inline KineticCylinder unit_kinetic(int d) { return {PhasePoint::origin(d), 1.0}; }
inline ParabolicCylinder unit_parabolic(int d) { return {0.0, Vec{}, d, 1.0}; }

inline int dim(const KineticCylinder& q) { return q.center.d; }
inline int dim(const ParabolicCylinder& q) { return q.d; }
inline double top_time(const KineticCylinder& q) { return q.center.t; }
inline double top_time(const ParabolicCylinder& q) { return q.t0; }

inline bool contains(const EuclideanBall& b, const Vec& x) {
  return norm(sub(x, b.center), b.d) < b.radius;
}

inline bool contains(const KineticCylinder& q, const PhasePoint& z) {
  same_dim(q.center, z);
  const double R = q.radius;
  const double dt = z.t - q.center.t;
  if (!(-R * R < dt && dt <= 0)) return false;
  const Vec dx = sub(sub(z.x, q.center.x), Vec{dt * q.center.v[0], dt * q.center.v[1],
                                                 dt * q.center.v[2]});
  if (!(norm(dx, z.d) < R * R * R)) return false;
  return norm(sub(z.v, q.center.v), z.d) < R;
}

inline bool contains(const ParabolicCylinder& q, double t, const Vec& x) {
  const double dt = t - q.t0;
  const double R = q.radius;
  return -R * R < dt && dt <= 0 && norm(sub(x, q.x0), q.d) < R;
}

inline bool contains(const ParabolicCylinder& q, const PhasePoint& z) {
  if (z.d != q.d) throw DimensionError("parabolic cylinder dimension mismatch");
  return contains(q, z.t, z.x);
}

inline bool contains(const StackedCylinder<KineticCylinder>& s, const PhasePoint& z) {
  const auto& c = s.base.center;
  same_dim(c, z);
  const double r = s.base.radius;
  const double dt = z.t - c.t;
  if (!(0 < dt && dt < s.m * r * r)) return false;
  Vec dx{};
  for (int i = 0; i < z.d; ++i) dx[i] = z.x[i] - c.x[i] - dt * c.v[i];
  if (!(norm(dx, z.d) < (s.m + 2) * r * r * r)) return false;
  return norm(sub(z.v, c.v), z.d) < r;
}

inline bool contains(const StackedCylinder<ParabolicCylinder>& s, double t, const Vec& x) {
  const double r = s.base.radius;
  const double dt = t - s.base.t0;
  return 0 < dt && dt < s.m * r * r && norm(sub(x, s.base.x0), s.base.d) < r;
}

inline bool contains(const StackedCylinder<ParabolicCylinder>& s, const PhasePoint& z) {
  return contains(s, z.t, z.x);
}

// 5Q = Q_{5r}(t0 + 12 r^2, x0[, v0]).
inline KineticCylinder dilate_5Q(const KineticCylinder& q) {
  KineticCylinder r = q;
  r.center.t += 12 * q.radius * q.radius;
  r.radius = 5 * q.radius;
  return r;
}

inline ParabolicCylinder dilate_5Q(const ParabolicCylinder& q) {
  ParabolicCylinder r = q;
  r.t0 += 12 * q.radius * q.radius;
  r.radius = 5 * q.radius;
  return r;
}

template <class Base>
StackedCylinder<Base> stack(const Base& q, int m) {
  if (m < 1) throw DomainError("stack height m must be at least 1");
  return {q, m};
}

// Image of Q_R(z0) under z ↦ shift ∘ σ_s(z), which is again a kinetic cylinder.
inline KineticCylinder transform(const KineticCylinder& q, const PhasePoint& shift, double s) {
  return {compose(shift, scale(q.center, s)), s * q.radius};
}

namespace detail {

inline bool open_ball_overlap(const Vec& a, const Vec& b, int d, double ra, double rb) {
  return norm(sub(a, b), d) < ra + rb;
}

// Half-open intervals (a1, b1] and (a2, b2].
inline std::optional<std::pair<double, double>> time_overlap(double a1, double b1, double a2,
                                                             double b2) {
  const double lo = std::max(a1, a2), hi = std::min(b1, b2);
  if (lo < hi) return std::make_pair(lo, hi);
  return std::nullopt;
}

}  // namespace detail

// Exact intersection test for top-anchored cylinders.
inline bool intersects(const ParabolicCylinder& a, const ParabolicCylinder& b) {
  if (a.d != b.d) throw DimensionError("parabolic cylinder dimension mismatch");
  const auto I = detail::time_overlap(a.t0 - a.radius * a.radius, a.t0,
                                      b.t0 - b.radius * b.radius, b.t0);
  return I && detail::open_ball_overlap(a.x0, b.x0, a.d, a.radius, b.radius);
}

// The x-conditions decouple from v: both hold at (t, x) for some x iff
// |p + t q| < ra^3 + rb^3 with p = (xa - ta va) - (xb - tb vb), q = va - vb,
// and the infimum over the open time overlap is attained on its closure.
inline bool intersects(const KineticCylinder& a, const KineticCylinder& b) {
  same_dim(a.center, b.center);
  const int d = a.center.d;
  const double ra = a.radius, rb = b.radius;
  const auto I = detail::time_overlap(a.center.t - ra * ra, a.center.t,
                                      b.center.t - rb * rb, b.center.t);
  if (!I) return false;
  if (!detail::open_ball_overlap(a.center.v, b.center.v, d, ra, rb)) return false;
  Vec p{}, q{};
  for (int i = 0; i < d; ++i) {
    p[i] = (a.center.x[i] - a.center.t * a.center.v[i]) -
           (b.center.x[i] - b.center.t * b.center.v[i]);
    q[i] = a.center.v[i] - b.center.v[i];
  }
  const double qq = dot(q, q, d);
  double t = I->second;
  if (qq > 0) t = std::clamp(-dot(p, q, d) / qq, I->first, I->second);
  return norm(axpy(t, q, p), d) < ra * ra * ra + rb * rb * rb;
}

// Flat serialization: t, x[0..d), v[0..d), R.
inline std::vector<double> to_flat(const PhasePoint& z) {
  std::vector<double> out{z.t};
  for (int i = 0; i < z.d; ++i) out.push_back(z.x[i]);
  for (int i = 0; i < z.d; ++i) out.push_back(z.v[i]);
  return out;
}

inline std::vector<double> to_flat(const KineticCylinder& q) {
  auto out = to_flat(q.center);
  out.push_back(q.radius);
  return out;
}

inline std::vector<double> to_flat(const ParabolicCylinder& q) {
  std::vector<double> out{q.t0};
  for (int i = 0; i < q.d; ++i) out.push_back(q.x0[i]);
  out.push_back(q.radius);
  return out;
}

}  // namespace kinlab
