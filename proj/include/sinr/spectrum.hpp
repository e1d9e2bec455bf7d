#pragma once

// Empirical spectra of a network: DFT of one sampled period, bandlimit error,
// and CSV/PGM exports.
//
// Coefficients are two-sided Fourier-series amplitudes c_F (DFT divided by the
// sample count), so a unit sine at F shows up as |c_F| = |c_-F| = 0.5 and
// Parseval reads sum_F |c_F|^2 = mean(f^2) over the grid.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <span>
#include <vector>

#include "sinr/dft.hpp"
#include "sinr/fourier.hpp"
#include "sinr/imageio.hpp"

namespace sinr {

struct SpectrumGrid {
  int n = 0;
  int dim = 0;
  int band = 0;
  double period = 2.0;
  std::vector<std::vector<cplx>> coef;  // per channel, row-major n^dim, index = F mod n
  std::vector<double> mean_square;      // per channel, over the samples

  int channels() const { return static_cast<int>(coef.size()); }
  std::size_t size() const { return coef.empty() ? 0 : coef[0].size(); }

  /// Signed frequency of flat index idx.
  Freq frequency(std::size_t idx) const {
    Freq f(static_cast<std::size_t>(dim));
    for (int a = dim - 1; a >= 0; --a) {
      f[static_cast<std::size_t>(a)] = signed_frequency(idx % static_cast<std::size_t>(n), n);
      idx /= static_cast<std::size_t>(n);
    }
    return f;
  }

  std::size_t index(std::span<const std::int64_t> f) const {
    if (static_cast<int>(f.size()) != dim) throw DimensionError("frequency dimension mismatch");
    std::size_t idx = 0;
    for (auto v : f) idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(((v % n) + n) % n);
    return idx;
  }

  cplx at(std::span<const std::int64_t> f, int channel = 0) const {
    return coef[static_cast<std::size_t>(channel)][index(f)];
  }
};

/// Samples one period of `net` on a grid_n^d grid and transforms it. `band`
/// is only a marker carried for diagnostics and the size precondition.
inline SpectrumGrid sample_and_dft(const SinusoidalNet& net, int grid_n, int band = 0) {
  if (band < 0) throw PreconditionError("band must be non-negative");
  if (!is_power_of_two(grid_n)) throw PreconditionError("grid size must be a power of two");
  if (grid_n < 2 * band + 2) throw PreconditionError("grid size must be at least 2 * band + 2");
  const int d = net.input_dim();
  if (d < 1 || d > 3) throw DimensionError("spectra support d = 1, 2, 3");
  const MatrixXd values = forward(net, period_grid(grid_n, d, net.bank.period));
  SpectrumGrid g;
  g.n = grid_n;
  g.dim = d;
  g.band = band;
  g.period = net.bank.period;
  g.coef = grid_coefficients(values, grid_n, d);
  for (Eigen::Index c = 0; c < values.cols(); ++c) g.mean_square.push_back(values.col(c).squaredNorm() / values.rows());
  return g;
}

/// max over channels of |sum |c_F|^2 - mean(f^2)|.
inline double parseval_residual(const SpectrumGrid& g) {
  double worst = 0.0;
  for (int c = 0; c < g.channels(); ++c) {
    double s = 0.0;
    for (const auto& v : g.coef[static_cast<std::size_t>(c)]) s += std::norm(v);
    worst = std::max(worst, std::abs(s - g.mean_square[static_cast<std::size_t>(c)]));
  }
  return worst;
}

struct BandlimitError {
  std::vector<double> by_channel;
  double total = 0.0;  // sum over channels
};

/// Empirical bandlimit error: sum of |c_F| over bins with ||F||_inf > band,
/// i.e. one-sided magnitudes of every out-of-band pair.
inline BandlimitError bandlimit_error(const SpectrumGrid& g, int band) {
  if (band < 0) throw PreconditionError("band must be non-negative");
  BandlimitError e;
  for (int c = 0; c < g.channels(); ++c) {
    double s = 0.0;
    const auto& coef = g.coef[static_cast<std::size_t>(c)];
    for (std::size_t idx = 0; idx < coef.size(); ++idx) {
      const Freq f = g.frequency(idx);
      if (inf_norm(f) > band) s += std::abs(coef[idx]);
    }
    e.by_channel.push_back(s);
    e.total += s;
  }
  return e;
}

/// Expansion-based bandlimit error: one-sided magnitudes of table entries
/// outside `band` plus the certified residual of the truncated expansion.
/// The table must have been built with the same band.
inline BandlimitError bandlimit_error(const FourierTable& t, int band) {
  if (band < 0) throw PreconditionError("band must be non-negative");
  if (t.band != band) throw PreconditionError("table band differs from the requested band");
  BandlimitError e;
  for (int c = 0; c < t.channels; ++c) {
    const auto ch = static_cast<std::size_t>(c);
    const double s = t.outside[ch] + (t.residual_by_channel.empty() ? t.residual_bound : t.residual_by_channel[ch]);
    e.by_channel.push_back(s);
    e.total += s;
  }
  return e;
}

/// Log-magnitude image of a 1-D or 2-D spectrum, DC at the center. Pixel
/// (row r, col c) shows F = (c - n/2, r - n/2); 1-D spectra give a single row.
/// Magnitudes are RMS over channels, mapped from [max/10^decades, max] to
/// [0, 255] on a log scale.
inline ImageGrid spectrum_image(const SpectrumGrid& g, double decades = 6.0) {
  if (g.dim != 1 && g.dim != 2) throw DimensionError("spectrum images need d = 1 or 2");
  if (!(decades > 0.0)) throw PreconditionError("decades must be positive");
  const int rows = g.dim == 2 ? g.n : 1;
  std::vector<double> mag(static_cast<std::size_t>(rows) * g.n, 0.0);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < g.n; ++c) {
      Freq f = g.dim == 2 ? Freq{c - g.n / 2, r - g.n / 2} : Freq{c - g.n / 2};
      double s = 0.0;
      for (int ch = 0; ch < g.channels(); ++ch) s += std::norm(g.at(f, ch));
      mag[static_cast<std::size_t>(r) * g.n + c] = std::sqrt(s / g.channels());
    }
  const double top = *std::max_element(mag.begin(), mag.end());
  std::vector<double> unit(mag.size(), 0.0);
  if (top > 0.0)
    for (std::size_t i = 0; i < mag.size(); ++i)
      unit[i] = mag[i] > 0.0 ? std::clamp(1.0 + std::log10(mag[i] / top) / decades, 0.0, 1.0) : 0.0;
  return unit_image(unit, g.n, rows);
}

/// CSV of every bin: F_1..F_d,channel,re,im,magnitude.
inline void write_spectrum_csv(std::ostream& out, const SpectrumGrid& g) {
  for (int a = 0; a < g.dim; ++a) out << "F_" << a + 1 << ',';
  out << "channel,re,im,magnitude\n";
  out << std::setprecision(17);
  for (int c = 0; c < g.channels(); ++c)
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      for (auto v : g.frequency(idx)) out << v << ',';
      const cplx z = g.coef[static_cast<std::size_t>(c)][idx];
      out << c << ',' << z.real() << ',' << z.imag() << ',' << std::abs(z) << '\n';
    }
}

}  // namespace sinr
