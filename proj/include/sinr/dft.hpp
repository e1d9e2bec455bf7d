#pragma once

// Discrete Fourier transforms over one period of a network and the sampling
// grid they use.
//
// Samples sit at x_i = -p/2 + i p / N (i = 0..N-1 per axis). For a p-periodic
// f = sum_F c_F exp(2 pi i F.x / p) band-limited below N/2,
//   c_F = (-1)^{sum F} / N^d * DFT[f](F mod N).

#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "sinr/errors.hpp"
#include "sinr/net.hpp"

namespace sinr {

using cplx = std::complex<double>;

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// In-place forward DFT X_k = sum_j x_j exp(-2 pi i jk / n). Radix-2 when n is
/// a power of two, direct summation otherwise.
inline void dft_inplace(std::vector<cplx>& a) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if (!is_power_of_two(static_cast<int>(n))) {
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
      cplx acc = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        acc += a[j] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / n);
      out[k] = acc;
    }
    a.swap(out);
    return;
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    std::vector<cplx> tw(half);
    for (std::size_t k = 0; k < half; ++k)
      tw[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len));
    for (std::size_t i = 0; i < n; i += len)
      for (std::size_t k = 0; k < half; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + half] * tw[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
  }
}

/// Separable DFT of a row-major n^d array (d = 1, 2 or 3).
inline void dft_nd(std::vector<cplx>& data, int n, int d) {
  const std::size_t N = static_cast<std::size_t>(n);
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= N;
  if (data.size() != total) throw DimensionError("dft_nd: data size does not match n^d");
  std::vector<cplx> line(N);
  std::size_t stride = 1;
  for (int axis = d - 1; axis >= 0; --axis) {
    for (std::size_t start = 0; start < total; ++start) {
      if ((start / stride) % N != 0) continue;
      for (std::size_t i = 0; i < N; ++i) line[i] = data[start + i * stride];
      dft_inplace(line);
      for (std::size_t i = 0; i < N; ++i) data[start + i * stride] = line[i];
    }
    stride *= N;
  }
}

/// Sampling coordinates of the period grid, (N^d) x d, row-major in the grid
/// index with axis 0 slowest.
inline MatrixXd period_grid(int n, int d, double period) {
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
  MatrixXd coords(static_cast<Eigen::Index>(total), d);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (int a = d - 1; a >= 0; --a) {
      const auto i = static_cast<double>(rest % static_cast<std::size_t>(n));
      rest /= static_cast<std::size_t>(n);
      coords(static_cast<Eigen::Index>(idx), a) = -0.5 * period + i * period / n;
    }
  }
  return coords;
}

/// Fourier-series coefficients c_F of each column of `values`, sampled on the
/// n^d period grid. Result[c] is row-major n^d indexed by F mod n.
inline std::vector<std::vector<cplx>> grid_coefficients(const MatrixXd& values, int n, int d) {
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
  if (static_cast<std::size_t>(values.rows()) != total) throw DimensionError("sample count does not match n^d");
  const double scale = 1.0 / static_cast<double>(total);
  std::vector<std::vector<cplx>> out(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    auto& buf = out[static_cast<std::size_t>(c)];
    buf.resize(total);
    for (std::size_t i = 0; i < total; ++i) buf[i] = values(static_cast<Eigen::Index>(i), c);
    dft_nd(buf, n, d);
    for (std::size_t idx = 0; idx < total; ++idx) {
      // Shift of the grid origin to -p/2 contributes (-1)^{sum F}.
      std::size_t rest = idx;
      long long parity = 0;
      for (int a = 0; a < d; ++a) {
        parity += static_cast<long long>(rest % static_cast<std::size_t>(n));
        rest /= static_cast<std::size_t>(n);
      }
      // F = index for index < n/2 and index - n beyond; an odd n shifts parity per wrapped axis.
      rest = idx;
      if (n % 2 != 0)
        for (int a = 0; a < d; ++a) {
          const auto i = rest % static_cast<std::size_t>(n);
          rest /= static_cast<std::size_t>(n);
          if (2 * i >= static_cast<std::size_t>(n)) parity += n;
        }
      buf[idx] *= (parity % 2 == 0 ? scale : -scale);
    }
  }
  return out;
}

/// Fourier-series coefficients c_F of each output channel, computed from
/// forward samples on the n^d period grid.
inline std::vector<std::vector<cplx>> period_coefficients(const SinusoidalNet& net, int n) {
  const int d = net.input_dim();
  if (d < 1 || d > 3) throw DimensionError("period_coefficients supports d = 1, 2, 3");
  if (n < 1) throw PreconditionError("grid size must be positive");
  return grid_coefficients(forward(net, period_grid(n, d, net.bank.period)), n, d);
}

/// Signed frequency of DFT index i on an n-point axis.
inline long long signed_frequency(std::size_t i, int n) {
  const auto s = static_cast<long long>(i);
  return 2 * s < n ? s : s - n;
}

}  // namespace sinr
