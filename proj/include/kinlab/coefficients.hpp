#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace kinlab {

enum class CoefficientKind { identity, checkerboard, random_piecewise_constant, rotating_anisotropy };

inline const char* coefficient_kind_name(CoefficientKind k) {
  switch (k) {
    case CoefficientKind::identity: return "identity";
    case CoefficientKind::checkerboard: return "checkerboard";
    case CoefficientKind::random_piecewise_constant: return "random";
    case CoefficientKind::rotating_anisotropy: return "rotating";
  }
  return "?";
}

inline CoefficientKind coefficient_kind_from(const std::string& s) {
  if (s == "identity") return CoefficientKind::identity;
  if (s == "checkerboard") return CoefficientKind::checkerboard;
  if (s == "random") return CoefficientKind::random_piecewise_constant;
  if (s == "rotating") return CoefficientKind::rotating_anisotropy;
  throw DomainError("unknown coefficient kind '" + s + "'");
}

struct CoefficientSpec {
  CoefficientKind kind = CoefficientKind::identity;
  double lambda = 1, Lambda = 1;
  int tiles = 8;           // tiles per input axis (checkerboard, random)
  double frequency = 1;    // rotating: half turns per unit of x1 + ... + xn
  std::uint64_t seed = 0;
};

using Mat3 = Eigen::Matrix3d;

// A(y) on a box of input coordinates y (length n_in), with values m x m
// symmetric matrices stored in the top-left block of a 3x3.
class CoefficientField {
 public:
  CoefficientField() : CoefficientField(CoefficientSpec{}, 1, {0.0}, {1.0}) {}

  CoefficientField(CoefficientSpec spec, int matrix_dim, std::vector<double> lo, std::vector<double> hi)
      : spec_(spec), m_(matrix_dim), lo_(std::move(lo)), hi_(std::move(hi)) {
    if (m_ < 1 || m_ > 3) throw DimensionError("coefficient matrices are 1x1 to 3x3");
    if (lo_.size() != hi_.size() || lo_.empty()) throw DimensionError("coefficient box is malformed");
    for (std::size_t a = 0; a < lo_.size(); ++a)
      if (!(hi_[a] > lo_[a])) throw DomainError("coefficient box needs positive extent");
    if (spec_.kind == CoefficientKind::identity) spec_.lambda = spec_.Lambda = 1;
    if (!(spec_.lambda > 0) || !(spec_.Lambda >= spec_.lambda) || !std::isfinite(spec_.Lambda))
      throw DomainError("need 0 < lambda <= Lambda");
    if (spec_.tiles < 1) throw DomainError("need at least one tile per axis");
  }

  const CoefficientSpec& spec() const { return spec_; }
  int matrix_dim() const { return m_; }
  int input_dim() const { return static_cast<int>(lo_.size()); }
  double lambda() const { return spec_.lambda; }
  double Lambda() const { return spec_.Lambda; }

  // Index of the tile containing y; points outside the box use the nearest tile.
  std::uint64_t tile_id(const double* y) const {
    std::uint64_t id = 0;
    for (std::size_t a = 0; a < lo_.size(); ++a) {
      long k = static_cast<long>(std::floor((y[a] - lo_[a]) / (hi_[a] - lo_[a]) * spec_.tiles));
      k = std::clamp<long>(k, 0, spec_.tiles - 1);
      id = id * static_cast<std::uint64_t>(spec_.tiles) + static_cast<std::uint64_t>(k);
    }
    return id;
  }

  Mat3 operator()(const double* y) const {
    Mat3 A = Mat3::Zero();
    const double l = spec_.lambda, L = spec_.Lambda;
    switch (spec_.kind) {
      case CoefficientKind::identity:
        A.topLeftCorner(m_, m_).setIdentity();
        break;
      case CoefficientKind::checkerboard: {
        std::uint64_t id = tile_id(y), parity = 0;
        for (std::size_t a = 0; a < lo_.size(); ++a) {
          parity += id % static_cast<std::uint64_t>(spec_.tiles);
          id /= static_cast<std::uint64_t>(spec_.tiles);
        }
        A.topLeftCorner(m_, m_).setIdentity();
        A *= parity % 2 ? L : l;
        break;
      }
      case CoefficientKind::random_piecewise_constant:
        A = tile_matrix(tile_id(y));
        break;
      case CoefficientKind::rotating_anisotropy: {
        double s = 0;
        for (std::size_t a = 0; a < lo_.size(); ++a) s += y[a];
        const double th = std::numbers::pi * spec_.frequency * s;
        if (m_ == 1) {
          A(0, 0) = l + (L - l) * 0.5 * (1 + std::sin(th));
        } else {
          Mat3 R = Mat3::Identity();
          R(0, 0) = std::cos(th);
          R(0, 1) = -std::sin(th);
          R(1, 0) = std::sin(th);
          R(1, 1) = std::cos(th);
          const Eigen::Vector3d ev(L, l, 0.5 * (l + L));
          A = R * ev.asDiagonal() * R.transpose();
          if (m_ == 2) A.row(2).setZero(), A.col(2).setZero();
        }
        break;
      }
    }
    // Rotations leave rounding-level asymmetry; the stored field is exactly symmetric.
    return 0.5 * (A + A.transpose());
  }

  double diagonal(const double* y, int a) const { return (*this)(y)(a, a); }

 private:
  // Eigenvalues uniform in [λ, Λ], rotation uniform (Shoemake quaternion) per tile.
  Mat3 tile_matrix(std::uint64_t id) const {
    const std::uint64_t h = stream_seed(spec_.seed, id);
    auto u = [&](int k) { return hash_uniform(splitmix64(h + 0x9e37u * static_cast<std::uint64_t>(k + 1)), 0, 1); };
    const Eigen::Vector3d ev(spec_.lambda + (spec_.Lambda - spec_.lambda) * u(0),
                             spec_.lambda + (spec_.Lambda - spec_.lambda) * u(1),
                             spec_.lambda + (spec_.Lambda - spec_.lambda) * u(2));
    Mat3 A = Mat3::Zero();
    if (m_ == 1) {
      A(0, 0) = ev(0);
      return A;
    }
    Mat3 R = Mat3::Identity();
    if (m_ == 2) {
      const double th = 2 * std::numbers::pi * u(3);
      R(0, 0) = std::cos(th);
      R(0, 1) = -std::sin(th);
      R(1, 0) = std::sin(th);
      R(1, 1) = std::cos(th);
      Eigen::Vector3d e2 = ev;
      e2(2) = 0;
      return R * e2.asDiagonal() * R.transpose();
    }
    const double u1 = u(3), u2 = 2 * std::numbers::pi * u(4), u3 = 2 * std::numbers::pi * u(5);
    const Eigen::Quaterniond q(std::sqrt(u1) * std::cos(u3), std::sqrt(1 - u1) * std::sin(u2),
                               std::sqrt(1 - u1) * std::cos(u2), std::sqrt(u1) * std::sin(u3));
    R = q.normalized().toRotationMatrix();
    return R * ev.asDiagonal() * R.transpose();
  }

  CoefficientSpec spec_;
  int m_;
  std::vector<double> lo_, hi_;
};

struct EllipticityCertificate {
  long samples = 0;
  double min_eigenvalue = 0, max_eigenvalue = 0;
  double max_asymmetry = 0;
  bool pass = false;
};

// Samples points uniformly in the field's box and checks symmetry and the
// eigenvalue bracket [λ, Λ] with a relative tolerance.
inline EllipticityCertificate certify(const CoefficientField& A, const std::vector<double>& lo,
                                      const std::vector<double>& hi, long samples, std::uint64_t seed,
                                      double rtol = 1e-12) {
  if (static_cast<int>(lo.size()) != A.input_dim() || hi.size() != lo.size())
    throw DimensionError("sampling box does not match the field");
  Rng rng = make_rng(seed);
  EllipticityCertificate c;
  c.samples = samples;
  c.min_eigenvalue = std::numeric_limits<double>::infinity();
  c.max_eigenvalue = -std::numeric_limits<double>::infinity();
  std::vector<double> y(lo.size());
  const int m = A.matrix_dim();
  for (long s = 0; s < samples; ++s) {
    for (std::size_t a = 0; a < y.size(); ++a) y[a] = uniform(rng, lo[a], hi[a]);
    const Mat3 M = A(y.data());
    const Eigen::MatrixXd B = M.topLeftCorner(m, m);
    c.max_asymmetry = std::max(c.max_asymmetry, (B - B.transpose()).cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
    c.min_eigenvalue = std::min(c.min_eigenvalue, es.eigenvalues().minCoeff());
    c.max_eigenvalue = std::max(c.max_eigenvalue, es.eigenvalues().maxCoeff());
  }
  c.pass = c.max_asymmetry == 0 && c.min_eigenvalue >= A.lambda() * (1 - rtol) &&
           c.max_eigenvalue <= A.Lambda() * (1 + rtol);
  return c;
}

}  // namespace kinlab
