#pragma once

// Network initialization: integer frequency banks with a low/high split and
// bound-aware hidden weights, plus a uniform baseline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "sinr/errors.hpp"
#include "sinr/net.hpp"

namespace sinr {

struct InitSpec {
  int m = 64;                    // input frequencies
  std::vector<int> widths{128};  // hidden widths
  int d = 2;
  int channels = 1;
  int nyquist = 21;       // B
  int threshold = 7;      // b~, defaults to B / 3
  int low_limit = 2;      // l~
  double low_fraction = 0.7;
  double period = 2.0;
  double bound_low = 1.0;   // c_L
  double bound_high = 0.2;  // c_H
  double bound_deep = 1.0;  // init scale and clamp for hidden layers >= 2
  double c_init = 0.5;      // initial learnable bound
  BoundMode bound_mode = BoundMode::clamped;
  std::uint64_t seed = 0;

  void validate() const {
    if (d < 1 || d > 3) throw ConfigError("d must be 1, 2 or 3");
    if (m < 1) throw ConfigError("m must be positive");
    if (channels < 1) throw ConfigError("channels must be positive");
    for (int w : widths)
      if (w < 1) throw ConfigError("hidden widths must be positive");
    if (threshold < 1) throw ConfigError("threshold must be at least 1");
    if (!(low_limit >= 1 && low_limit < threshold && threshold <= nyquist))
      throw ConfigError("need 1 <= low_limit < threshold <= nyquist");
    if (!(low_fraction > 0.0 && low_fraction < 1.0)) throw ConfigError("low_fraction must lie in (0, 1)");
    if (!(period > 0.0)) throw ConfigError("period must be positive");
    if (!(bound_high > 0.0 && bound_high <= bound_low && bound_low <= 2.0))
      throw ConfigError("need 0 < bound_high <= bound_low <= 2");
    if (!(bound_deep > 0.0)) throw ConfigError("bound_deep must be positive");
    if (!(c_init > 0.0)) throw ConfigError("c_init must be positive");
  }
};

namespace detail {

inline bool in_half_space(const std::vector<int>& v) {
  for (int x : v)
    if (x != 0) return x > 0;
  return false;
}

inline int cube_norm(const std::vector<int>& v) {
  int m = 0;
  for (int x : v) m = std::max(m, std::abs(x));
  return m;
}

// Integer points of [-r, r]^d that are multiples of `pitch`, in lexicographic order.
inline std::vector<std::vector<int>> cube_points(int d, int r, int pitch = 1) {
  std::vector<std::vector<int>> out;
  const int lim = r / pitch;
  std::vector<int> idx(static_cast<std::size_t>(d), -lim);
  while (true) {
    std::vector<int> p(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) p[static_cast<std::size_t>(a)] = idx[static_cast<std::size_t>(a)] * pitch;
    out.push_back(std::move(p));
    int a = d;
    while (a > 0 && idx[static_cast<std::size_t>(a - 1)] == lim) idx[static_cast<std::size_t>(--a)] = -lim;
    if (a == 0) break;
    ++idx[static_cast<std::size_t>(a - 1)];
  }
  return out;
}

// Distance between frequency rows up to sign, since F and -F generate the same harmonic.
inline double sign_free_distance(const std::vector<int>& a, const std::vector<int>& b) {
  double s = 0.0, t = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += std::pow(a[i] - b[i], 2);
    t += std::pow(a[i] + b[i], 2);
  }
  return std::sqrt(std::min(s, t));
}

// Greedy farthest-point selection of `count` points; the first pick is the
// first candidate and ties go to the earlier candidate.
inline std::vector<std::vector<int>> farthest_points(const std::vector<std::vector<int>>& cand, int count) {
  std::vector<std::vector<int>> chosen;
  std::vector<double> dist(cand.size(), std::numeric_limits<double>::infinity());
  std::vector<bool> used(cand.size(), false);
  for (int c = 0; c < count; ++c) {
    std::size_t best = cand.size();
    for (std::size_t i = 0; i < cand.size(); ++i)
      if (!used[i] && (best == cand.size() || dist[i] > dist[best])) best = i;
    used[best] = true;
    chosen.push_back(cand[best]);
    for (std::size_t i = 0; i < cand.size(); ++i)
      dist[i] = std::min(dist[i], sign_free_distance(cand[i], cand[best]));
  }
  return chosen;
}

}  // namespace detail

/// Number of rows counted as low band (canonical rows included).
inline int low_row_count(const InitSpec& spec) {
  return std::max(spec.d, static_cast<int>(std::floor(spec.low_fraction * spec.m)));
}

/// Frequency bank: the d unit vectors, then floor(low_fraction m) - d rows drawn
/// without replacement from the half-space of L \ {0}, L = [-l~, l~]^d, then
/// high rows spread over the half-space of H = [-b~, b~]^d \ L. High rows sit
/// on the coarsest pitch-g sublattice with enough points, chosen by greedy
/// farthest-point selection. Shifts are uniform in [-pi/2, pi/2].
inline FrequencyBank init_bank(const InitSpec& spec) {
  spec.validate();
  const int d = spec.d, m = spec.m;
  if (m < d + 2) throw ConfigError("m must be at least d + 2");
  const int m_low = low_row_count(spec);
  const int m_high = m - m_low;
  if (m_high < 1) throw ConfigError("m too small to hold canonical rows plus a high-band row");

  std::mt19937_64 rng(spec.seed);
  std::vector<std::vector<int>> rows;
  for (int a = 0; a < d; ++a) {
    std::vector<int> e(static_cast<std::size_t>(d), 0);
    e[static_cast<std::size_t>(a)] = 1;
    rows.push_back(e);
  }

  std::vector<std::vector<int>> low_pool;
  for (auto& p : detail::cube_points(d, spec.low_limit))
    if (detail::in_half_space(p) && std::find(rows.begin(), rows.end(), p) == rows.end())
      low_pool.push_back(std::move(p));
  const int extra_low = m_low - d;
  if (extra_low > static_cast<int>(low_pool.size()))
    throw ConfigError("low region holds only " + std::to_string(low_pool.size() + d) + " rows; " +
                      std::to_string(m_low) + " requested (raise low_limit)");
  for (int i = 0; i < extra_low; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), low_pool.size() - 1);
    std::swap(low_pool[static_cast<std::size_t>(i)], low_pool[pick(rng)]);
    rows.push_back(low_pool[static_cast<std::size_t>(i)]);
  }

  std::vector<std::vector<int>> high;
  for (int g = spec.threshold; g >= 1 && high.empty(); --g) {
    std::vector<std::vector<int>> cand;
    for (auto& p : detail::cube_points(d, spec.threshold, g))
      if (detail::in_half_space(p) && detail::cube_norm(p) > spec.low_limit) cand.push_back(std::move(p));
    if (static_cast<int>(cand.size()) >= m_high) high = detail::farthest_points(cand, m_high);
  }
  if (high.empty()) throw ConfigError("high region too small for the requested number of high rows");
  rows.insert(rows.end(), high.begin(), high.end());

  FrequencyBank bank;
  bank.period = spec.period;
  bank.freq.resize(m, d);
  for (int j = 0; j < m; ++j)
    for (int a = 0; a < d; ++a) bank.freq(j, a) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)];
  std::uniform_real_distribution<double> phase(-0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
  bank.shifts.resize(m);
  for (int j = 0; j < m; ++j) bank.shifts[j] = phase(rng);
  return bank;
}

/// Per-column bound: c_L for rows with ||row||_inf <= l~, c_H otherwise.
inline VectorXd column_bounds(const InitSpec& spec, const FrequencyBank& bank) {
  VectorXd c(bank.rows());
  for (int j = 0; j < bank.rows(); ++j)
    c[j] = bank.row_inf_norm(j) <= spec.low_limit ? spec.bound_low : spec.bound_high;
  return c;
}

/// Hidden layers for `bank`. First-layer column j ~ N(0, (c_j/3)^2) clamped to
/// [-c_j, c_j]; deeper layers use bound_deep the same way. Biases, C and e are zero.
inline SinusoidalNet init_hidden(const InitSpec& spec, const FrequencyBank& bank) {
  spec.validate();
  if (bank.dim() != spec.d || bank.rows() != spec.m) throw DimensionError("bank does not match spec");
  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  SinusoidalNet net;
  net.bank = bank;
  const VectorXd c = column_bounds(spec, bank);
  int in = spec.m;
  for (std::size_t l = 0; l < spec.widths.size(); ++l) {
    const int out = spec.widths[l];
    Layer layer{MatrixXd(out, in), VectorXd::Zero(out)};
    for (int j = 0; j < in; ++j) {
      const double cj = l == 0 ? c[j] : spec.bound_deep;
      for (int i = 0; i < out; ++i) layer.W(i, j) = std::clamp(cj / 3.0 * normal(rng), -cj, cj);
    }
    net.hidden.push_back(std::move(layer));
    in = out;
  }
  net.C = MatrixXd::Zero(spec.channels, in);
  net.e = VectorXd::Zero(spec.channels);
  net.bound_mode = spec.bound_mode;
  if (spec.bound_mode != BoundMode::none) net.deep_bound = spec.widths.size() > 1 ? spec.bound_deep : 0.0;
  if (spec.bound_mode == BoundMode::clamped) net.bounds = c;
  if (spec.bound_mode == BoundMode::learnable) {
    if (net.hidden.empty()) throw ConfigError("learnable bounds need a hidden layer");
    // Raw weights chosen so that tanh(W) c_init reproduces the sampled matrix where it can.
    net.bounds = VectorXd::Constant(spec.m, spec.c_init);
    auto& W = net.hidden[0].W;
    for (Eigen::Index i = 0; i < W.size(); ++i)
      W.data()[i] = std::atanh(std::clamp(W.data()[i] / spec.c_init, -0.995, 0.995));
  }
  net.validate();
  return net;
}

inline SinusoidalNet init_net(const InitSpec& spec) { return init_hidden(spec, init_bank(spec)); }

/// Uniform baseline: frequency rows uniform over the integer points of
/// [-b~, b~]^d (zero, duplicates and negations rejected), shifts uniform in
/// [-pi/2, pi/2], hidden weights uniform in (-sqrt(6/fan_in), sqrt(6/fan_in)).
inline SinusoidalNet init_uniform_baseline(const InitSpec& spec) {
  spec.validate();
  const int d = spec.d, m = spec.m;
  const int r = spec.threshold;
  const double available = (std::pow(2.0 * r + 1.0, d) - 1.0) / 2.0;
  if (m > available) throw ConfigError("threshold cube too small for m distinct frequencies");
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> coord(-r, r);
  std::vector<std::vector<int>> rows;
  while (static_cast<int>(rows.size()) < m) {
    std::vector<int> p(static_cast<std::size_t>(d));
    for (auto& v : p) v = coord(rng);
    if (detail::cube_norm(p) == 0) continue;
    std::vector<int> neg(p);
    for (auto& v : neg) v = -v;
    if (std::find(rows.begin(), rows.end(), p) != rows.end()) continue;
    if (std::find(rows.begin(), rows.end(), neg) != rows.end()) continue;
    rows.push_back(std::move(p));
  }
  SinusoidalNet net;
  net.bank.period = spec.period;
  net.bank.freq.resize(m, d);
  for (int j = 0; j < m; ++j)
    for (int a = 0; a < d; ++a) net.bank.freq(j, a) = rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)];
  std::uniform_real_distribution<double> phase(-0.5 * std::numbers::pi, 0.5 * std::numbers::pi);
  net.bank.shifts.resize(m);
  for (int j = 0; j < m; ++j) net.bank.shifts[j] = phase(rng);
  int in = m;
  for (int out : spec.widths) {
    const double lim = std::sqrt(6.0 / in);
    std::uniform_real_distribution<double> u(-lim, lim);
    Layer layer{MatrixXd(out, in), VectorXd::Zero(out)};
    for (Eigen::Index i = 0; i < layer.W.size(); ++i) layer.W.data()[i] = u(rng);
    net.hidden.push_back(std::move(layer));
    in = out;
  }
  net.C = MatrixXd::Zero(spec.channels, in);
  net.e = VectorXd::Zero(spec.channels);
  net.bound_mode = BoundMode::none;
  net.validate();
  return net;
}

}  // namespace sinr
