#pragma once

// Amplitude-phase expansion of hidden neurons.
//
// A first-layer neuron  sin(sum_j W_ij sin(omega_j x + phi_j) + b_i)  equals
//   sum_{k in Z^m} alpha_k sin(beta_k x + lambda_k)
// with alpha_k = prod_j J_{k_j}(W_ij), beta_k = k^T omega, lambda_k = k.phi + b_i.
// Deeper neurons expand over tuples (k^1, ..., k^i), the Bessel arguments of
// level l being (k^{l+1})^T W^l. Truncation to ||k^l||_inf <= k_max comes with
// a certified bound on the discarded amplitude mass.

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <span>
#include <vector>

#include "sinr/bessel.hpp"
#include "sinr/errors.hpp"
#include "sinr/net.hpp"

namespace sinr {

struct ExpansionOptions {
  // Terms whose amplitude bound falls below prune_budget / (number of
  // enumerable terms) are dropped; their mass is added to tail_bound.
  double prune_budget = 1e-12;
  // Maximum number of index tuples the enumeration may visit.
  double enumeration_budget = 1e7;
};

/// One term alpha sin(beta x + lambda) = a_coef sin(beta x) + b_coef cos(beta x).
struct ExpansionTerm {
  std::vector<int> k;
  std::vector<std::int64_t> freq;  // k^T freq_int
  double alpha = 0.0;
  std::vector<double> beta;  // (2 pi / p) * freq
  double lambda = 0.0;
  double a_coef = 0.0;
  double b_coef = 0.0;
};

struct NeuronExpansion {
  std::vector<ExpansionTerm> terms;
  double tail_bound = 0.0;  // truncation_bound + pruned_mass
  double truncation_bound = 0.0;
  double pruned_mass = 0.0;
  int k_max = 0;
};

struct DeepTerm {
  std::vector<std::vector<int>> k_tuple;  // k^1 (length m), ..., k^i
  std::vector<std::int64_t> freq;         // (k^1)^T freq_int
  double alpha = 0.0;
  std::vector<double> base_freq;  // (2 pi / p) * freq
  double lambda = 0.0;
};

struct DeepExpansion {
  std::vector<DeepTerm> terms;
  double tail_bound = 0.0;
  double truncation_bound = 0.0;
  double pruned_mass = 0.0;
  int k_max = 0;
};

/// prod_j (|w_j|/2)^{|k_j|} / |k_j|!, which dominates |prod_j J_{k_j}(w_j)|.
inline double amplitude_bound(std::span<const int> k, std::span<const double> w) {
  if (k.size() != w.size()) throw DimensionError("amplitude_bound: length mismatch");
  double b = 1.0;
  for (std::size_t j = 0; j < k.size(); ++j) b *= bessel_bound(k[j], w[j]);
  return b;
}

/// Per-level stats accumulated during enumeration.
struct ExpansionStats {
  double truncation_bound = 0.0;
  double pruned_mass = 0.0;
  std::size_t emitted = 0;
};

namespace detail {

// Bessel values, bound factors and their sums for one coordinate, t in [-K, K].
struct CoordinateTable {
  std::vector<double> j;
  std::vector<double> bound;
  double abs_sum = 0.0;    // sum_t |J_t|
  double bound_max = 0.0;  // max_t bound_t
  double abs_tail = 0.0;   // certified sum_{|t|>K} |J_t|

  CoordinateTable(double w, int k_max) : j(2 * k_max + 1), bound(2 * k_max + 1) {
    for (int t = -k_max; t <= k_max; ++t) {
      const std::size_t idx = static_cast<std::size_t>(t + k_max);
      j[idx] = bessel_j(t, w);
      bound[idx] = bessel_bound(t, w);
      abs_sum += std::abs(j[idx]);
      bound_max = std::max(bound_max, bound[idx]);
    }
    abs_tail = bessel_abs_tail_bound(w, k_max);
  }
};

// Certified mass of index vectors with ||k||_inf > K: with S_j the in-range
// sums and O_j the out-of-range bounds,
//   prod (S_j + O_j) - prod S_j = sum_j O_j prod_{i<j} S_i prod_{i>j} (S_i + O_i).
inline double truncation_mass(const std::vector<CoordinateTable>& tables) {
  const std::size_t m = tables.size();
  std::vector<double> suffix(m + 1, 1.0);
  for (std::size_t j = m; j-- > 0;) suffix[j] = suffix[j + 1] * (tables[j].abs_sum + tables[j].abs_tail);
  double prefix = 1.0, total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    total += tables[j].abs_tail * prefix * suffix[j + 1];
    prefix *= tables[j].abs_sum;
  }
  return total;
}

inline double lattice_count(int k_max, long long dims) {
  return std::pow(2.0 * k_max + 1.0, static_cast<double>(dims));
}

// Leaf callback of the innermost level: (k^1, freq, alpha, lambda).
using LeafFn = std::function<void(std::span<const int>, std::span<const std::int64_t>, double, double)>;

// Enumerates the innermost level (input-frequency indices k^1) for given
// Bessel arguments. Leaves with bound below threshold are dropped and their
// |alpha| added to stats.pruned_mass; subtrees that cannot reach the
// threshold are dropped with their exact in-range mass.
class InnerLevel {
 public:
  InnerLevel(const FrequencyBank& bank, int k_max, double threshold)
      : bank_(bank), k_max_(k_max), threshold_(threshold), m_(bank.rows()), d_(bank.dim()) {}

  void run(const VectorXd& args, double outer_bound, double outer_alpha, double lambda0,
           ExpansionStats& stats, const LeafFn& leaf) {
    tables_.clear();
    for (int j = 0; j < m_; ++j) tables_.emplace_back(args[j], k_max_);
    suffix_max_.assign(m_ + 1, 1.0);
    suffix_abs_.assign(m_ + 1, 1.0);
    for (int j = m_ - 1; j >= 0; --j) {
      suffix_max_[j] = suffix_max_[j + 1] * tables_[j].bound_max;
      suffix_abs_[j] = suffix_abs_[j + 1] * tables_[j].abs_sum;
    }
    stats.truncation_bound += std::abs(outer_alpha) * truncation_mass(tables_);
    k_.assign(m_, 0);
    freq_.assign(static_cast<std::size_t>(m_ + 1) * d_, 0);
    recurse(0, outer_bound, outer_alpha, lambda0, stats, leaf);
  }

 private:
  void recurse(int j, double bound, double alpha, double lambda, ExpansionStats& stats, const LeafFn& leaf) {
    if (j == m_) {
      if (bound >= threshold_ && bound > 0.0) {
        leaf(k_, std::span<const std::int64_t>(freq_.data() + static_cast<std::size_t>(m_) * d_, d_), alpha,
             lambda);
        ++stats.emitted;
      } else {
        stats.pruned_mass += std::abs(alpha);
      }
      return;
    }
    if (bound * suffix_max_[j] < threshold_ || bound == 0.0) {
      stats.pruned_mass += std::abs(alpha) * suffix_abs_[j];
      return;
    }
    const auto& tab = tables_[j];
    const double phi = bank_.shifts[j];
    for (int t = -k_max_; t <= k_max_; ++t) {
      const std::size_t idx = static_cast<std::size_t>(t + k_max_);
      k_[j] = t;
      for (int a = 0; a < d_; ++a)
        freq_[static_cast<std::size_t>(j + 1) * d_ + a] =
            freq_[static_cast<std::size_t>(j) * d_ + a] + static_cast<std::int64_t>(t) * bank_.freq(j, a);
      recurse(j + 1, bound * tab.bound[idx], alpha * tab.j[idx], lambda + t * phi, stats, leaf);
    }
    k_[j] = 0;
  }

  const FrequencyBank& bank_;
  int k_max_;
  double threshold_;
  int m_, d_;
  std::vector<CoordinateTable> tables_;
  std::vector<double> suffix_max_, suffix_abs_;
  std::vector<int> k_;
  std::vector<std::int64_t> freq_;  // prefix sums, (m+1) x d
};

inline ExpansionTerm make_term(const FrequencyBank& bank, std::span<const int> k,
                               std::span<const std::int64_t> freq, double alpha, double lambda) {
  ExpansionTerm t;
  t.k.assign(k.begin(), k.end());
  t.freq.assign(freq.begin(), freq.end());
  t.alpha = alpha;
  t.beta.resize(freq.size());
  for (std::size_t a = 0; a < freq.size(); ++a) t.beta[a] = bank.base() * static_cast<double>(freq[a]);
  t.lambda = lambda;
  t.a_coef = alpha * std::cos(lambda);
  t.b_coef = alpha * std::sin(lambda);
  return t;
}

}  // namespace detail

/// Streams the truncated expansion of first-layer neuron `neuron`.
/// leaf(k, freq, alpha, lambda) is called once per retained term, in
/// lexicographic order of k.
inline ExpansionStats visit_neuron_terms(const SinusoidalNet& net, int neuron, int k_max,
                                         const ExpansionOptions& opt, const detail::LeafFn& leaf) {
  net.validate();
  if (net.depth() < 1) throw PreconditionError("expansion needs at least one hidden layer");
  if (neuron < 0 || neuron >= net.width(1)) throw PreconditionError("neuron index out of range");
  if (k_max < 0) throw PreconditionError("k_max must be non-negative");
  const double count = detail::lattice_count(k_max, net.input_width());
  if (count > opt.enumeration_budget) throw BudgetError("expansion exceeds enumeration budget");
  const double threshold = opt.prune_budget / count;

  const VectorXd w = net.effective_matrix(0).row(neuron).transpose();
  ExpansionStats stats;
  detail::InnerLevel inner(net.bank, k_max, threshold);
  inner.run(w, 1.0, 1.0, net.hidden[0].b[neuron], stats, leaf);
  return stats;
}

/// Truncated amplitude-phase expansion of a neuron of a single-hidden-layer net.
inline NeuronExpansion expand_neuron(const SinusoidalNet& net, int neuron, int k_max,
                                     const ExpansionOptions& opt = {}) {
  if (net.depth() != 1) throw PreconditionError("expand_neuron needs exactly one hidden layer; use expand_deep");
  NeuronExpansion out;
  out.k_max = k_max;
  const auto stats = visit_neuron_terms(
      net, neuron, k_max, opt,
      [&](std::span<const int> k, std::span<const std::int64_t> f, double alpha, double lambda) {
        out.terms.push_back(detail::make_term(net.bank, k, f, alpha, lambda));
      });
  out.truncation_bound = stats.truncation_bound;
  out.pruned_mass = stats.pruned_mass;
  out.tail_bound = stats.truncation_bound + stats.pruned_mass;
  return out;
}

/// Smallest k_max whose certified tail bound for `neuron` is below target,
/// searching up to k_cap.
inline int choose_k_max(const SinusoidalNet& net, int neuron, double target, int k_cap = 30,
                        const ExpansionOptions& opt = {}) {
  const VectorXd w = net.effective_matrix(0).row(neuron).transpose();
  for (int k = 0; k <= k_cap; ++k) {
    std::vector<detail::CoordinateTable> tables;
    for (Eigen::Index j = 0; j < w.size(); ++j) tables.emplace_back(w[j], k);
    if (detail::truncation_mass(tables) + opt.prune_budget < target) return k;
  }
  throw BudgetError("no k_max up to cap reaches the requested tail bound");
}

/// Sum of the retained terms at point x (length d).
inline double evaluate_terms(const std::vector<ExpansionTerm>& terms, std::span<const double> x) {
  double s = 0.0;
  for (const auto& t : terms) {
    double phase = t.lambda;
    for (std::size_t a = 0; a < x.size(); ++a) phase += t.beta[a] * x[a];
    s += t.alpha * std::sin(phase);
  }
  return s;
}

namespace detail {

// Certified mass bounds for the levels above the innermost one.
//
// For level l >= 2 with Bessel arguments bounded in magnitude by x, the mass of
// all index tuples at levels <= l is at most
//   MB_l(x) = sum_q shell_x(q) * Psi_l(q),
// where shell_x(q) collects the bound products of level-l vectors with
// ||k||_inf = q and Psi_l(q) = MB_{l-1}(q * colsum|M_l|) dominates the mass
// beneath any such vector. MB_1(x) = prod_s bessel_abs_sum_bound(x_s).
class DeepMassBounds {
 public:
  // colsums[l] is the column-abs-sum vector of the matrix mapping level l
  // indices to level l-1 arguments (entries 0 and 1 unused).
  explicit DeepMassBounds(std::vector<VectorXd> colsums)
      : colsums_(std::move(colsums)), psi_(colsums_.size()) {}

  double level_mass(int level, const VectorXd& x_abs) {
    if (level == 1) {
      double p = 1.0;
      for (Eigen::Index s = 0; s < x_abs.size(); ++s) p *= bessel_abs_sum_bound(x_abs[s]);
      return p;
    }
    return shell_sum(level, x_abs, 0);
  }

  // sum_{q >= q_start} shell_x(q) * Psi_level(q).
  double shell_sum(int level, const VectorXd& x_abs, int q_start) {
    const Eigen::Index n = x_abs.size();
    std::vector<double> in_range(static_cast<std::size_t>(n), 1.0);  // sum_{|t| <= q} bound
    std::vector<double> term(static_cast<std::size_t>(n), 1.0);      // (x/2)^q / q!
    double u_max = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) u_max = std::max(u_max, 0.5 * x_abs[t]);
    double prev_prod = 0.0;
    double total = 0.0;
    const int q_min = static_cast<int>(std::ceil(8.0 * u_max)) + 30;
    for (int q = 0; q < 4000; ++q) {
      double prod = 1.0;
      for (Eigen::Index t = 0; t < n; ++t) {
        const std::size_t ts = static_cast<std::size_t>(t);
        if (q > 0) {
          term[ts] *= 0.5 * x_abs[t] / q;
          in_range[ts] += 2.0 * term[ts];
        }
        prod *= in_range[ts];
      }
      const double shell = prod - prev_prod;
      prev_prod = prod;
      if (q < q_start) continue;
      const double contrib = shell * psi(level, q);
      total += contrib;
      if (q > q_min && contrib <= 1e-300 + 1e-18 * total) break;
    }
    return total;
  }

  double psi(int level, int q) {
    auto& memo = psi_[static_cast<std::size_t>(level)];
    if (auto it = memo.find(q); it != memo.end()) return it->second;
    const VectorXd x = static_cast<double>(q) * colsums_[static_cast<std::size_t>(level)];
    const double v = level_mass(level - 1, x);
    memo.emplace(q, v);
    return v;
  }

 private:
  std::vector<VectorXd> colsums_;
  std::vector<std::map<int, double>> psi_;
};

}  // namespace detail

/// Leaf callback of the deep enumeration: (k_tuple, freq, alpha, lambda).
/// k_tuple[0] is k^1; entries are only valid during the call.
using DeepLeafFn = std::function<void(const std::vector<std::vector<int>>&, std::span<const std::int64_t>,
                                      double, double)>;

/// Streams the expansion of neuron `neuron` in hidden layer `layer`
/// (1-based) over index tuples with every ||k^l||_inf <= k_max.
inline ExpansionStats visit_deep_terms(const SinusoidalNet& net, int layer, int neuron, int k_max,
                                       const ExpansionOptions& opt, const DeepLeafFn& emit) {
  net.validate();
  if (layer < 1 || layer > net.depth()) throw PreconditionError("layer out of range");
  if (neuron < 0 || neuron >= net.width(layer)) throw PreconditionError("neuron index out of range");
  if (k_max < 0) throw PreconditionError("k_max must be non-negative");

  // Level l (1..layer) indexes the inputs of hidden layer l: width(l-1) entries.
  long long dims = 0;
  for (int l = 1; l <= layer; ++l) dims += net.width(l - 1);
  const double count = detail::lattice_count(k_max, dims);
  if (count > opt.enumeration_budget) throw BudgetError("deep expansion exceeds enumeration budget");
  const double threshold = opt.prune_budget / count;

  // mats[l]: level-l indices -> level-(l-1) arguments, i.e. effective matrix of hidden layer l-1.
  std::vector<MatrixXd> mats(static_cast<std::size_t>(layer + 1));
  std::vector<VectorXd> colsums(static_cast<std::size_t>(layer + 1));
  for (int l = 2; l <= layer; ++l) {
    mats[l] = net.effective_matrix(l - 2);
    colsums[l] = mats[l].cwiseAbs().colwise().sum().transpose();
  }
  detail::DeepMassBounds mass(colsums);

  ExpansionStats stats;
  std::vector<std::vector<int>> ktuple(static_cast<std::size_t>(layer));
  for (int l = 1; l <= layer; ++l) ktuple[l - 1].assign(net.width(l - 1), 0);

  detail::InnerLevel inner(net.bank, k_max, threshold);
  const detail::LeafFn leaf = [&](std::span<const int> k1, std::span<const std::int64_t> f, double alpha,
                                  double lambda) {
    std::copy(k1.begin(), k1.end(), ktuple[0].begin());
    emit(ktuple, f, alpha, lambda);
  };

  // Level l >= 2 enumeration with coordinate recursion inside the level.
  std::function<void(int, const VectorXd&, double, double, double)> visit_level;
  visit_level = [&](int l, const VectorXd& args, double bound, double alpha, double lambda) {
    if (l == 1) {
      inner.run(args, bound, alpha, lambda, stats, leaf);
      return;
    }
    const int n = static_cast<int>(args.size());
    stats.truncation_bound += std::abs(alpha) * mass.shell_sum(l, args.cwiseAbs(), k_max + 1);

    std::vector<detail::CoordinateTable> tables;
    for (int t = 0; t < n; ++t) tables.emplace_back(args[t], k_max);
    const VectorXd& bias_below = net.hidden[l - 2].b;
    auto& kl = ktuple[static_cast<std::size_t>(l - 1)];
    const MatrixXd& M = mats[static_cast<std::size_t>(l)];

    std::function<void(int, double, double, double, const VectorXd&)> coord;
    coord = [&](int t, double b, double a, double lam, const VectorXd& child) {
      if (t == n) {
        const double sub = std::abs(a) * mass.level_mass(l - 1, child.cwiseAbs());
        if (sub < threshold || a == 0.0) {
          stats.pruned_mass += sub;
          return;
        }
        visit_level(l - 1, child, b, a, lam);
        return;
      }
      const auto& tab = tables[static_cast<std::size_t>(t)];
      for (int v = -k_max; v <= k_max; ++v) {
        const std::size_t idx = static_cast<std::size_t>(v + k_max);
        kl[static_cast<std::size_t>(t)] = v;
        const VectorXd next = child + static_cast<double>(v) * M.row(t).transpose();
        coord(t + 1, b * tab.bound[idx], a * tab.j[idx], lam + v * bias_below[t], next);
      }
      kl[static_cast<std::size_t>(t)] = 0;
    };
    coord(0, bound, alpha, lambda, VectorXd::Zero(M.cols()));
  };

  const VectorXd top = net.effective_matrix(layer - 1).row(neuron).transpose();
  visit_level(layer, top, 1.0, 1.0, net.hidden[layer - 1].b[neuron]);
  return stats;
}

/// Materialized form of visit_deep_terms.
inline DeepExpansion expand_deep(const SinusoidalNet& net, int layer, int neuron, int k_max,
                                 const ExpansionOptions& opt = {}) {
  DeepExpansion out;
  out.k_max = k_max;
  const auto stats = visit_deep_terms(
      net, layer, neuron, k_max, opt,
      [&](const std::vector<std::vector<int>>& k, std::span<const std::int64_t> f, double alpha, double lambda) {
        DeepTerm t;
        t.k_tuple = k;
        t.freq.assign(f.begin(), f.end());
        t.alpha = alpha;
        t.base_freq.resize(f.size());
        for (std::size_t a = 0; a < f.size(); ++a) t.base_freq[a] = net.bank.base() * static_cast<double>(f[a]);
        t.lambda = lambda;
        out.terms.push_back(std::move(t));
      });
  out.truncation_bound = stats.truncation_bound;
  out.pruned_mass = stats.pruned_mass;
  out.tail_bound = stats.truncation_bound + stats.pruned_mass;
  return out;
}

/// Sum of deep-expansion terms at x.
inline double evaluate_terms(const std::vector<DeepTerm>& terms, std::span<const double> x) {
  double s = 0.0;
  for (const auto& t : terms) {
    double phase = t.lambda;
    for (std::size_t a = 0; a < x.size(); ++a) phase += t.base_freq[a] * x[a];
    s += t.alpha * std::sin(phase);
  }
  return s;
}

/// Terms regrouped by integer frequency:
///   sum_k alpha_k sin(beta_k x + lambda_k) = sum_F A_F sin(w F.x) + B_F cos(w F.x),
/// with A_F = sum alpha cos(lambda), B_F = sum alpha sin(lambda), w = 2 pi / p.
/// Evaluation cost no longer depends on how many k share a frequency.
struct FrequencySum {
  double base = 0.0;
  std::map<std::vector<std::int64_t>, std::pair<double, double>> coef;

  void add(std::span<const std::int64_t> f, double alpha, double lambda) {
    auto& c = coef[std::vector<std::int64_t>(f.begin(), f.end())];
    c.first += alpha * std::cos(lambda);
    c.second += alpha * std::sin(lambda);
  }

  double operator()(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& [f, c] : coef) {
      double u = 0.0;
      for (std::size_t a = 0; a < x.size(); ++a) u += static_cast<double>(f[a]) * x[a];
      u *= base;
      s += c.first * std::sin(u) + c.second * std::cos(u);
    }
    return s;
  }
};

inline FrequencySum aggregate_terms(const std::vector<ExpansionTerm>& terms, double base) {
  FrequencySum fs{base, {}};
  for (const auto& t : terms) fs.add(t.freq, t.alpha, t.lambda);
  return fs;
}

inline FrequencySum aggregate_terms(const std::vector<DeepTerm>& terms, double base) {
  FrequencySum fs{base, {}};
  for (const auto& t : terms) fs.add(t.freq, t.alpha, t.lambda);
  return fs;
}

/// CSV with header k_1..k_m, alpha, beta_1..beta_d, lambda, a_coef, b_coef.
inline void write_terms_csv(std::ostream& out, const std::vector<ExpansionTerm>& terms, int m, int d) {
  for (int j = 1; j <= m; ++j) out << "k_" << j << ',';
  out << "alpha";
  for (int a = 1; a <= d; ++a) out << ",beta_" << a;
  out << ",lambda,a_coef,b_coef\n";
  out << std::setprecision(17);
  for (const auto& t : terms) {
    for (int v : t.k) out << v << ',';
    out << t.alpha;
    for (double b : t.beta) out << ',' << b;
    out << ',' << t.lambda << ',' << t.a_coef << ',' << t.b_coef << '\n';
  }
}

}  // namespace sinr
