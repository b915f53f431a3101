#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "grid.hpp"

namespace kinlab {

namespace detail {

// FFTW planning is not thread safe; execution on distinct buffers is.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan {
 public:
  FftPlan(const std::vector<int>& n, int sign) {
    std::size_t total = 1;
    for (int c : n) total *= static_cast<std::size_t>(c);
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    std::lock_guard lock(fftw_plan_mutex());
    plan_ = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf_, buf_, sign, FFTW_ESTIMATE);
  }
  ~FftPlan() {
    std::lock_guard lock(fftw_plan_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buf_); }
  void run() { fftw_execute(plan_); }

 private:
  fftw_complex* buf_ = nullptr;
  fftw_plan plan_ = nullptr;
};

// Signed integer wavenumber of FFT slot i among n.
inline int wavenumber(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace detail

// (-Δ_x)^{α/2} with the symbol |2π k / L|^α, applied to every x-slice of f.
// The x-axes are treated as periodic over their box extent.
inline GridFunction frac_laplacian_x(const GridFunction& f, double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw DomainError("fractional order must lie in (0, 1)");
  std::vector<int> xa;
  for (int a = 0; a < f.rank(); ++a)
    if (f.roles[a] == Axis::x) xa.push_back(a);
  if (xa.empty()) throw DimensionError("frac_laplacian_x needs at least one x axis");
  std::vector<int> nx;
  std::size_t nslice = 1;
  for (int a : xa) {
    nx.push_back(f.counts[a]);
    nslice *= static_cast<std::size_t>(f.counts[a]);
  }
  std::vector<double> symbol(nslice);
  {
    std::vector<int> idx(xa.size(), 0);
    for (std::size_t s = 0; s < nslice; ++s) {
      std::size_t r = s;
      for (int j = static_cast<int>(xa.size()) - 1; j >= 0; --j) {
        idx[j] = static_cast<int>(r % nx[j]);
        r /= nx[j];
      }
      double k2 = 0;
      for (std::size_t j = 0; j < xa.size(); ++j) {
        const double L = f.upper[xa[j]] - f.lower[xa[j]];
        const double k = 2 * std::numbers::pi * detail::wavenumber(idx[j], nx[j]) / L;
        k2 += k * k;
      }
      symbol[s] = std::pow(k2, alpha / 2) / static_cast<double>(nslice);
    }
  }
  detail::FftPlan fwd(nx, FFTW_FORWARD), bwd(nx, FFTW_BACKWARD);
  GridFunction out = f.like();
  // Enumerate the non-x index combinations; each selects one x-slice.
  std::vector<int> oa;
  for (int a = 0; a < f.rank(); ++a)
    if (f.roles[a] != Axis::x) oa.push_back(a);
  std::size_t nother = 1;
  for (int a : oa) nother *= static_cast<std::size_t>(f.counts[a]);
  std::vector<std::size_t> offsets(nslice);
  {
    int idx[8] = {0};
    for (std::size_t s = 0; s < nslice; ++s) {
      std::size_t r = s;
      for (int j = static_cast<int>(xa.size()) - 1; j >= 0; --j) {
        idx[xa[j]] = static_cast<int>(r % nx[j]);
        r /= nx[j];
      }
      std::size_t off = 0;
      for (int j : xa) off += idx[j] * f.stride(j);
      offsets[s] = off;
    }
  }
  for (std::size_t o = 0; o < nother; ++o) {
    std::size_t r = o, base = 0;
    for (int j = static_cast<int>(oa.size()) - 1; j >= 0; --j) {
      base += (r % f.counts[oa[j]]) * f.stride(oa[j]);
      r /= f.counts[oa[j]];
    }
    auto* b = fwd.data();
    for (std::size_t s = 0; s < nslice; ++s) b[s] = f.values[base + offsets[s]];
    fwd.run();
    auto* c = bwd.data();
    for (std::size_t s = 0; s < nslice; ++s) c[s] = b[s] * symbol[s];
    bwd.run();
    for (std::size_t s = 0; s < nslice; ++s) out.values[base + offsets[s]] = c[s].real();
  }
  return out;
}

}  // namespace kinlab
