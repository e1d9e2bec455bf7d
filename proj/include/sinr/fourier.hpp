#pragma once

// Fourier series of single-hidden-layer networks.
//
// Every expansion term lives at an integer frequency F = k^T freq_int. Binning
// the terms by F (with F and -F merged) gives the one-sided series
//   f(x) = sum_F a_hat_F sin(w F.x) + b_hat_F cos(w F.x),   w = 2 pi / p,
// where F runs over canonical representatives: zero, or first nonzero
// coordinate positive. The constant is b_hat at F = 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "sinr/dft.hpp"
#include "sinr/errors.hpp"
#include "sinr/expansion.hpp"
#include "sinr/net.hpp"

namespace sinr {

using Freq = std::vector<std::int64_t>;

/// True when F is zero or its first nonzero coordinate is positive.
inline bool is_canonical(std::span<const std::int64_t> f) {
  for (auto v : f)
    if (v != 0) return v > 0;
  return true;
}

inline std::int64_t inf_norm(std::span<const std::int64_t> f) {
  std::int64_t m = 0;
  for (auto v : f) m = std::max<std::int64_t>(m, v < 0 ? -v : v);
  return m;
}

// ---------------------------------------------------------------------------
// Integer solution sets  k^T freq_int = F

/// Solutions of k^T freq_int = F when the first d rows of the bank are the unit
/// vectors: k = particular + sum_t l_t generators[t] for integers l_t.
struct SmithSolutionSet {
  Freq target;
  std::vector<std::int64_t> particular;
  std::vector<std::vector<std::int64_t>> generators;  // m - d vectors

  /// Solution for parameters l (length m - d).
  std::vector<std::int64_t> at(std::span<const std::int64_t> l) const {
    if (l.size() != generators.size()) throw DimensionError("parameter count mismatch");
    auto k = particular;
    for (std::size_t t = 0; t < l.size(); ++t)
      for (std::size_t j = 0; j < k.size(); ++j) k[j] += l[t] * generators[t][j];
    return k;
  }

  /// Parameters of a solution k, i.e. its entries beyond the canonical block.
  /// Throws PreconditionError when k is not in the set.
  std::vector<std::int64_t> parameters(std::span<const std::int64_t> k) const {
    const std::size_t d = particular.size() - generators.size();
    std::vector<std::int64_t> l(k.begin() + static_cast<std::ptrdiff_t>(d), k.end());
    const auto back = at(l);
    if (!std::equal(back.begin(), back.end(), k.begin())) throw PreconditionError("vector is not a solution");
    return l;
  }
};

/// True when the first d rows of freq_int are the unit vectors e_1..e_d.
inline bool has_canonical_rows(const MatrixXi& freq) {
  const auto d = freq.cols();
  if (freq.rows() < d) return false;
  return freq.topRows(d) == MatrixXi::Identity(d, d);
}

/// Closed-form solution set of k^T freq_int = F. With unit vectors in the
/// first d rows the Smith form is trivial: the unimodular column transform is
/// [[I, -R^T], [0, I]] where R holds the remaining rows.
inline SmithSolutionSet solve_frequency(const FrequencyBank& bank, std::span<const std::int64_t> target) {
  const int m = bank.rows(), d = bank.dim();
  if (static_cast<int>(target.size()) != d) throw DimensionError("target dimension mismatch");
  if (!has_canonical_rows(bank.freq))
    throw PreconditionError("bank lacks canonical unit rows; spectral coverage cannot be certified");
  SmithSolutionSet s;
  s.target.assign(target.begin(), target.end());
  s.particular.assign(static_cast<std::size_t>(m), 0);
  for (int a = 0; a < d; ++a) s.particular[static_cast<std::size_t>(a)] = target[static_cast<std::size_t>(a)];
  for (int t = d; t < m; ++t) {
    std::vector<std::int64_t> g(static_cast<std::size_t>(m), 0);
    for (int a = 0; a < d; ++a) g[static_cast<std::size_t>(a)] = -bank.freq(t, a);
    g[static_cast<std::size_t>(t)] = 1;
    s.generators.push_back(std::move(g));
  }
  return s;
}

/// All solutions with every parameter |l_t| <= l_max, in lexicographic order of l.
inline std::vector<std::vector<std::int64_t>> enumerate_solutions(const SmithSolutionSet& s, int l_max) {
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> l(s.generators.size(), -l_max);
  while (true) {
    out.push_back(s.at(l));
    std::size_t t = l.size();
    while (t > 0 && l[t - 1] == l_max) l[--t] = -l_max;
    if (t == 0) break;
    ++l[t - 1];
  }
  return out;
}

/// k^T freq_int in exact integer arithmetic.
inline Freq lattice_image(const MatrixXi& freq, std::span<const std::int64_t> k) {
  Freq f(static_cast<std::size_t>(freq.cols()), 0);
  for (Eigen::Index j = 0; j < freq.rows(); ++j)
    for (Eigen::Index a = 0; a < freq.cols(); ++a) f[static_cast<std::size_t>(a)] += k[j] * freq(j, a);
  return f;
}

// ---------------------------------------------------------------------------
// Sub-periods

/// Whether the bank admits the sub-period p / q_a along each axis a:
/// sum_a freq_int(j, a) / q_a must be an integer for every row j.
inline bool subperiod_check(const FrequencyBank& bank, std::span<const int> divisors) {
  if (static_cast<int>(divisors.size()) != bank.dim()) throw DimensionError("one divisor per axis expected");
  std::int64_t L = 1;
  for (int q : divisors) {
    if (q < 1) throw PreconditionError("divisors must be positive");
    L = std::lcm(L, static_cast<std::int64_t>(q));
  }
  for (int j = 0; j < bank.rows(); ++j) {
    std::int64_t num = 0;
    for (int a = 0; a < bank.dim(); ++a) num += bank.freq(j, a) * (L / divisors[static_cast<std::size_t>(a)]);
    if (num % L != 0) return false;
  }
  return true;
}

inline bool subperiod_check(const FrequencyBank& bank, int q, int s) {
  const int qs[2] = {q, s};
  return subperiod_check(bank, std::span<const int>(qs, 2));
}

// ---------------------------------------------------------------------------
// Fourier tables

struct FourierCoef {
  std::vector<double> a_hat;  // per channel, sine coefficient
  std::vector<double> b_hat;  // per channel, cosine coefficient
};

struct FourierTable {
  int dim = 0;
  int channels = 0;
  int band = 0;
  int k_max = -1;  // -1 for tables measured by DFT
  double period = 2.0;
  double residual_bound = 0.0;  // max over channels
  std::vector<double> residual_by_channel;
  std::vector<double> outside;  // per channel, sum over out-of-band F of |(a_hat, b_hat)|
  std::map<Freq, FourierCoef> entries;

  double base() const { return 2.0 * std::numbers::pi / period; }

  /// Series value at x from in-band entries only.
  double evaluate(std::span<const double> x, int channel) const {
    double s = 0.0;
    const auto c = static_cast<std::size_t>(channel);
    for (const auto& [f, v] : entries) {
      double u = 0.0;
      for (std::size_t a = 0; a < f.size(); ++a) u += static_cast<double>(f[a]) * x[a];
      u *= base();
      s += v.a_hat[c] * std::sin(u) + v.b_hat[c] * std::cos(u);
    }
    return s;
  }

  /// Coefficient at F (zero when absent). F need not be canonical.
  std::pair<double, double> coef(const Freq& f, int channel) const {
    Freq key = f;
    double sign = 1.0;
    if (!is_canonical(key)) {
      for (auto& v : key) v = -v;
      sign = -1.0;
    }
    const auto it = entries.find(key);
    if (it == entries.end()) return {0.0, 0.0};
    const auto c = static_cast<std::size_t>(channel);
    return {sign * it->second.a_hat[c], it->second.b_hat[c]};
  }
};

namespace detail {

// Accumulates one-sided coefficients over all frequencies, then splits by band.
struct TableBuilder {
  int channels;
  std::map<Freq, FourierCoef> all;

  void add(std::span<const std::int64_t> f, int channel, double a, double b) {
    Freq key(f.begin(), f.end());
    if (!is_canonical(key)) {
      for (auto& v : key) v = -v;
      a = -a;  // sin(-u + lambda) = -cos(lambda) sin u + sin(lambda) cos u
    }
    if (inf_norm(key) == 0) a = 0.0;
    auto& e = all[key];
    if (e.a_hat.empty()) {
      e.a_hat.assign(static_cast<std::size_t>(channels), 0.0);
      e.b_hat.assign(static_cast<std::size_t>(channels), 0.0);
    }
    e.a_hat[static_cast<std::size_t>(channel)] += a;
    e.b_hat[static_cast<std::size_t>(channel)] += b;
  }

  void finish(FourierTable& t) {
    t.outside.assign(static_cast<std::size_t>(channels), 0.0);
    for (auto& [f, v] : all) {
      if (inf_norm(f) <= t.band) {
        t.entries.emplace(f, std::move(v));
      } else {
        for (int c = 0; c < channels; ++c)
          t.outside[static_cast<std::size_t>(c)] += std::hypot(v.a_hat[static_cast<std::size_t>(c)],
                                                               v.b_hat[static_cast<std::size_t>(c)]);
      }
    }
    all.clear();
  }
};

}  // namespace detail

/// Aggregated Fourier series of a net with at most one hidden layer, from
/// expansions truncated at ||k||_inf <= k_max. residual_bound bounds, per
/// channel, sum_i |C_ci| * tail_i.
inline FourierTable fourier_table(const SinusoidalNet& net, int band, int k_max, const ExpansionOptions& opt = {}) {
  net.validate();
  if (net.depth() > 1) throw PreconditionError("fourier_table supports nets with at most one hidden layer");
  if (band < 0) throw PreconditionError("band must be non-negative");
  FourierTable t;
  t.dim = net.input_dim();
  t.channels = net.channels();
  t.band = band;
  t.k_max = k_max;
  t.period = net.bank.period;
  t.residual_by_channel.assign(static_cast<std::size_t>(t.channels), 0.0);
  detail::TableBuilder tb{t.channels, {}};

  const Freq zero(static_cast<std::size_t>(t.dim), 0);
  for (int c = 0; c < t.channels; ++c) tb.add(zero, c, 0.0, net.e[c]);

  if (net.depth() == 0) {
    for (int j = 0; j < net.input_width(); ++j) {
      Freq f(static_cast<std::size_t>(t.dim));
      for (int a = 0; a < t.dim; ++a) f[static_cast<std::size_t>(a)] = net.bank.freq(j, a);
      const double phi = net.bank.shifts[j];
      for (int c = 0; c < t.channels; ++c) tb.add(f, c, net.C(c, j) * std::cos(phi), net.C(c, j) * std::sin(phi));
    }
  } else {
    for (int i = 0; i < net.width(1); ++i) {
      const auto stats = visit_neuron_terms(
          net, i, k_max, opt,
          [&](std::span<const int>, std::span<const std::int64_t> f, double alpha, double lambda) {
            const double a = alpha * std::cos(lambda), b = alpha * std::sin(lambda);
            for (int c = 0; c < t.channels; ++c)
              if (net.C(c, i) != 0.0) tb.add(f, c, net.C(c, i) * a, net.C(c, i) * b);
          });
      const double tail = stats.truncation_bound + stats.pruned_mass;
      for (int c = 0; c < t.channels; ++c) t.residual_by_channel[static_cast<std::size_t>(c)] += std::abs(net.C(c, i)) * tail;
    }
  }
  tb.finish(t);
  t.residual_bound = *std::max_element(t.residual_by_channel.begin(), t.residual_by_channel.end());
  return t;
}

/// Largest |F|_inf reachable by terms with ||k||_inf <= k_max.
inline std::int64_t max_generated_frequency(const FrequencyBank& bank, int k_max) {
  std::int64_t s = 0;
  for (int j = 0; j < bank.rows(); ++j) s += bank.row_inf_norm(j);
  return s * k_max;
}

/// Fourier table measured by sampling the net on a grid_n^d period grid and
/// projecting onto sines and cosines. When k_max >= 0, requires grid_n large
/// enough that no term with ||k||_inf <= k_max aliases; otherwise only
/// grid_n > 2 band is required.
inline FourierTable dft_oracle(const SinusoidalNet& net, int grid_n, int band, int k_max = -1) {
  net.validate();
  if (band < 0) throw PreconditionError("band must be non-negative");
  if (grid_n <= 2 * band) throw PreconditionError("grid too small: grid_n must exceed 2 * band");
  if (k_max >= 0 && grid_n <= 2 * max_generated_frequency(net.bank, k_max))
    throw PreconditionError("grid too small: enumerated frequencies would alias");
  const int d = net.input_dim();
  const auto coefs = period_coefficients(net, grid_n);
  FourierTable t;
  t.dim = d;
  t.channels = net.channels();
  t.band = band;
  t.period = net.bank.period;
  t.residual_by_channel.assign(static_cast<std::size_t>(t.channels), 0.0);
  detail::TableBuilder tb{t.channels, {}};
  const std::size_t total = coefs.empty() ? 0 : coefs[0].size();
  for (std::size_t idx = 0; idx < total; ++idx) {
    Freq f(static_cast<std::size_t>(d));
    std::size_t rest = idx;
    bool nyquist = false;
    for (int a = d - 1; a >= 0; --a) {
      const std::size_t i = rest % static_cast<std::size_t>(grid_n);
      rest /= static_cast<std::size_t>(grid_n);
      f[static_cast<std::size_t>(a)] = signed_frequency(i, grid_n);
      if (grid_n % 2 == 0 && 2 * i == static_cast<std::size_t>(grid_n)) nyquist = true;
    }
    // Visit each +-F pair once, from its canonical member; the Nyquist bins have no partner.
    if (!is_canonical(f) && !nyquist) continue;
    for (int c = 0; c < t.channels; ++c) {
      const cplx v = coefs[static_cast<std::size_t>(c)][idx];
      if (inf_norm(f) == 0)
        tb.add(f, c, 0.0, v.real());
      else if (nyquist)
        tb.add(f, c, -v.imag(), v.real());
      else
        tb.add(f, c, -2.0 * v.imag(), 2.0 * v.real());
    }
  }
  tb.finish(t);
  return t;
}

/// CSV with header F_1..F_d, channel, a_hat, b_hat; rows in ascending F order.
inline void write_fourier_csv(std::ostream& out, const FourierTable& t) {
  for (int a = 1; a <= t.dim; ++a) out << "F_" << a << ',';
  out << "channel,a_hat,b_hat\n" << std::setprecision(17);
  for (const auto& [f, v] : t.entries)
    for (int c = 0; c < t.channels; ++c) {
      for (auto x : f) out << x << ',';
      out << c << ',' << v.a_hat[static_cast<std::size_t>(c)] << ',' << v.b_hat[static_cast<std::size_t>(c)] << '\n';
    }
}

inline nlohmann::json fourier_sidecar(const FourierTable& t) {
  return {{"residual_bound", t.residual_bound},
          {"residual_by_channel", t.residual_by_channel},
          {"k_max", t.k_max},
          {"band", t.band},
          {"period", t.period},
          {"outside_band_magnitude", t.outside},
          {"entries", t.entries.size()}};
}

}  // namespace sinr
