#pragma once

// Fourier differentiation on the unit torus [0,1)^d.

#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "dhym/error.hpp"

namespace dhym {

class SpectralTorus {
 public:
  using cplx = std::complex<double>;
  using Spectrum = std::vector<cplx>;

  explicit SpectralTorus(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw Error(ErrorCode::DimensionMismatch, "empty torus grid");
    size_ = 1;
    for (int n : dims_) {
      if (n < 2 || n % 2) throw Error(ErrorCode::DimensionMismatch, "grid sizes must be even");
      strides_.push_back(size_);
      size_ *= static_cast<size_t>(n);
    }
  }

  int rank() const { return static_cast<int>(dims_.size()); }
  size_t size() const { return size_; }
  const std::vector<int>& dims() const { return dims_; }

  int index_along(size_t node, int axis) const {
    return static_cast<int>((node / strides_[axis]) % dims_[axis]);
  }
  double coord(size_t node, int axis) const {
    return static_cast<double>(index_along(node, axis)) / dims_[axis];
  }
  // signed mode number; the Nyquist mode is reported as +N/2
  int mode(size_t node, int axis) const {
    int m = index_along(node, axis);
    return m <= dims_[axis] / 2 ? m : m - dims_[axis];
  }
  bool nyquist(size_t node, int axis) const { return index_along(node, axis) == dims_[axis] / 2; }
  double wavenumber(size_t node, int axis) const { return 2.0 * std::numbers::pi * mode(node, axis); }

  Spectrum forward(const Eigen::VectorXd& f) const {
    Spectrum d(f.data(), f.data() + f.size());
    transform(d, false);
    return d;
  }
  Eigen::VectorXd inverse_real(Spectrum d) const {
    transform(d, true);
    Eigen::VectorXd out(static_cast<Eigen::Index>(size_));
    for (size_t i = 0; i < size_; ++i) out(static_cast<Eigen::Index>(i)) = d[i].real();
    return out;
  }

  // Fourier multiplier of the derivative along axes a,b (b < 0 means first derivative).
  // Odd derivatives and mixed pairs drop the Nyquist mode; pure second derivatives keep -k^2.
  cplx multiplier(size_t node, int a, int b = -1) const {
    if (b < 0) return nyquist(node, a) ? cplx(0) : cplx(0, wavenumber(node, a));
    if (a == b) {
      double k = wavenumber(node, a);
      return -k * k;
    }
    if (nyquist(node, a) || nyquist(node, b)) return 0.0;
    return -wavenumber(node, a) * wavenumber(node, b);
  }

  Eigen::VectorXd derivative(const Eigen::VectorXd& f, int a, int b = -1) const {
    return derivative_from(forward(f), a, b);
  }
  Eigen::VectorXd derivative_from(const Spectrum& fh, int a, int b = -1) const {
    Spectrum d(fh);
    for (size_t i = 0; i < size_; ++i) d[i] *= multiplier(i, a, b);
    return inverse_real(std::move(d));
  }

  Eigen::VectorXd apply_symbol(const Eigen::VectorXd& f, const std::function<cplx(size_t)>& sym) const {
    Spectrum d = forward(f);
    for (size_t i = 0; i < size_; ++i) d[i] *= sym(i);
    return inverse_real(std::move(d));
  }

  double mean(const Eigen::VectorXd& f) const { return f.mean(); }

 private:
  void transform(Spectrum& d, bool inverse) const {
    Eigen::FFT<double> fft;
    for (int a = 0; a < rank(); ++a) {
      const size_t n = dims_[a], st = strides_[a];
      std::vector<cplx> line(n), out(n);
      for (size_t base = 0; base < size_; ++base) {
        if ((base / st) % n != 0) continue;
        for (size_t k = 0; k < n; ++k) line[k] = d[base + k * st];
        if (inverse)
          fft.inv(out, line);
        else
          fft.fwd(out, line);
        for (size_t k = 0; k < n; ++k) d[base + k * st] = out[k];
      }
    }
  }

  std::vector<int> dims_;
  std::vector<size_t> strides_;
  size_t size_ = 0;
};

}  // namespace dhym
