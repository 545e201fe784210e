#pragma once

// Periodic cube [0, L)^3 with n points per axis and its FFTW r2c/c2r
// transforms. Spectral coefficients are stored in the half-complex layout
// (n, n, n/2 + 1) and normalized so that u(x) = sum_k u_hat(k) e^{i k.x}.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <fftw3.h>

#include "fracreg/core/error.hpp"

namespace fracreg::spectral {

using Complex = std::complex<double>;
using RealField = std::vector<double>;
using SpectralField = std::vector<Complex>;

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

template <class T>
struct FftwDeleter {
  void operator()(T* p) const noexcept { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter<T>>;

}  // namespace detail

class SpectralGrid {
 public:
  SpectralGrid(int n, double box_length) : n_(n), nzh_(n / 2 + 1), box_(box_length) {
    require(n >= 4 && n % 2 == 0, ErrorCode::DomainViolation, "n_grid must be even and >= 4");
    require(box_length > 0.0, ErrorCode::DomainViolation, "box_length must be > 0");
    k0_ = 2.0 * std::numbers::pi / box_;
    const double cutoff = static_cast<double>(n_) / 3.0;
    mask_.assign(spectral_size(), 0);
    k2_.assign(spectral_size(), 0.0);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < nzh_; ++k) {
          const std::size_t idx = sindex(i, j, k);
          const int mi = mode(i), mj = mode(j), mk = k;
          k2_[idx] = k0_ * k0_ * static_cast<double>(mi * mi + mj * mj + mk * mk);
          mask_[idx] = (std::abs(mi) < cutoff && std::abs(mj) < cutoff && mk < cutoff &&
                        mi != -n_ / 2 && mj != -n_ / 2 && mk != n_ / 2)
                           ? 1
                           : 0;
        }

    std::lock_guard lock(detail::fftw_planner_mutex());
    detail::FftwBuffer<double> r(fftw_alloc_real(real_size()));
    detail::FftwBuffer<fftw_complex> c(fftw_alloc_complex(spectral_size()));
    forward_ = fftw_plan_dft_r2c_3d(n_, n_, n_, r.get(), c.get(), FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_3d(n_, n_, n_, c.get(), r.get(), FFTW_ESTIMATE);
  }

  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  ~SpectralGrid() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  int n() const noexcept { return n_; }
  int nzh() const noexcept { return nzh_; }
  double box_length() const noexcept { return box_; }
  double dx() const noexcept { return box_ / n_; }
  double cell_volume() const noexcept { return dx() * dx() * dx(); }
  double volume() const noexcept { return box_ * box_ * box_; }
  double k0() const noexcept { return k0_; }

  std::size_t real_size() const noexcept {
    return static_cast<std::size_t>(n_) * n_ * n_;
  }
  std::size_t spectral_size() const noexcept {
    return static_cast<std::size_t>(n_) * n_ * nzh_;
  }

  std::size_t rindex(int i, int j, int k) const noexcept {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }
  std::size_t sindex(int i, int j, int k) const noexcept {
    return (static_cast<std::size_t>(i) * n_ + j) * nzh_ + k;
  }

  /// Signed integer mode of array index i along a full axis.
  int mode(int i) const noexcept { return i < n_ / 2 ? i : i - n_; }

  /// Wave vector of spectral index (i, j, k).
  std::array<double, 3> wavevector(int i, int j, int k) const noexcept {
    return {k0_ * mode(i), k0_ * mode(j), k0_ * k};
  }

  /// Component d of the wave vector at flat spectral index idx.
  double wavevector_component(std::size_t idx, int d) const noexcept {
    const std::size_t k = idx % nzh_, ij = idx / nzh_;
    const int v = d == 0 ? mode(static_cast<int>(ij / n_)) : d == 1 ? mode(static_cast<int>(ij % n_)) : static_cast<int>(k);
    return k0_ * v;
  }

  double k2(std::size_t idx) const noexcept { return k2_[idx]; }
  bool retained(std::size_t idx) const noexcept { return mask_[idx] != 0; }

  /// Multiplicity of a half-spectrum entry in full-spectrum sums.
  double hermitian_weight(int k) const noexcept {
    return (k == 0 || k == n_ / 2) ? 1.0 : 2.0;
  }

  /// Largest retained |m| per axis.
  int max_retained_mode() const noexcept {
    int m = 0;
    while (static_cast<double>(m + 1) < static_cast<double>(n_) / 3.0) ++m;
    return m;
  }

  std::array<double, 3> position(int i, int j, int k) const noexcept {
    return {dx() * i, dx() * j, dx() * k};
  }

  /// Forward transform, normalized by 1/n^3.
  SpectralField forward(std::span<const double> real) const {
    detail::FftwBuffer<double> in(fftw_alloc_real(real_size()));
    detail::FftwBuffer<fftw_complex> out(fftw_alloc_complex(spectral_size()));
    std::copy(real.begin(), real.end(), in.get());
    fftw_execute_dft_r2c(forward_, in.get(), out.get());
    SpectralField res(spectral_size());
    const double scale = 1.0 / static_cast<double>(real_size());
    for (std::size_t i = 0; i < res.size(); ++i)
      res[i] = Complex(out[i][0] * scale, out[i][1] * scale);
    return res;
  }

  RealField inverse(std::span<const Complex> spec) const {
    detail::FftwBuffer<fftw_complex> in(fftw_alloc_complex(spectral_size()));
    detail::FftwBuffer<double> out(fftw_alloc_real(real_size()));
    for (std::size_t i = 0; i < spectral_size(); ++i) {
      in[i][0] = spec[i].real();
      in[i][1] = spec[i].imag();
    }
    fftw_execute_dft_c2r(backward_, in.get(), out.get());
    return RealField(out.get(), out.get() + real_size());
  }

  void dealias(SpectralField& f) const {
    for (std::size_t i = 0; i < f.size(); ++i)
      if (!mask_[i]) f[i] = 0.0;
  }

  /// sum over the full spectrum of w(k) |f_hat(k)|^2 (Hermitian weights applied).
  template <class Weight>
  double weighted_norm2(std::span<const Complex> f, Weight&& w) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < nzh_; ++k) {
          const std::size_t idx = sindex(i, j, k);
          s += hermitian_weight(k) * w(idx) * std::norm(f[idx]);
        }
    return s;
  }

 private:
  int n_;
  int nzh_;
  double box_;
  double k0_ = 1.0;
  std::vector<unsigned char> mask_;
  std::vector<double> k2_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

inline GridPtr make_grid(int n, double box_length = 2.0 * std::numbers::pi) {
  return std::make_shared<const SpectralGrid>(n, box_length);
}

}  // namespace fracreg::spectral
