#pragma once

#include <span>

#include "ifspec/common.hpp"

namespace ifspec::fft {

// In-place complex DFT backed by FFTW. forward() is unnormalized
// (X_k = sum_n x_n e^{-j 2 pi k n / N}); inverse() divides by N.
void forward(std::span<cplx> data);
void inverse(std::span<cplx> data);

/// Frequency of FFT bin k for an N-point transform with sample interval dt.
inline double bin_frequency(std::size_t k, std::size_t n, double dt) {
  const auto ik = static_cast<long long>(k);
  const auto in = static_cast<long long>(n);
  const long long signed_k = ik < (in + 1) / 2 ? ik : ik - in;
  return static_cast<double>(signed_k) / (static_cast<double>(n) * dt);
}

/// Reorders FFT-natural order into ascending frequency (DC at index n/2).
template <class T>
std::vector<T> shift(std::span<const T> natural) {
  const std::size_t n = natural.size();
  std::vector<T> out(n);
  const std::size_t half = n / 2;
  for (std::size_t k = 0; k < n; ++k) out[(k + half) % n] = natural[k];
  return out;
}

}  // namespace ifspec::fft
