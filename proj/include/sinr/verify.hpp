#pragma once

// Property and oracle battery (criteria A1-A11), shared by the acceptance
// binary and `sinr verify`. Every check is seeded and reports one line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sinr/bessel.hpp"
#include "sinr/expansion.hpp"
#include "sinr/fourier.hpp"
#include "sinr/gradcheck.hpp"
#include "sinr/imageio.hpp"
#include "sinr/init.hpp"
#include "sinr/spectrum.hpp"
#include "sinr/train.hpp"

namespace sinr::verify {

struct CheckResult {
  std::string id;
  std::string title;
  bool passed = false;
  std::string detail;  // measured values against their pinned thresholds
  double seconds = 0.0;
};

inline std::string format(const CheckResult& r) {
  char time[32];
  std::snprintf(time, sizeof time, "%.1f s", r.seconds);
  return std::string(r.passed ? "PASS" : "FAIL") + "  " + r.id + "  " + r.title + ": " + r.detail + " [" + time + "]";
}

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Reduced random bank: rows in [-fmax, fmax]^d, nonzero, no duplicates up to sign.
inline MatrixXi random_bank(std::mt19937_64& rng, int m, int d, int fmax) {
  std::uniform_int_distribution<int> u(-fmax, fmax);
  MatrixXi f(m, d);
  do {
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = u(rng);
  } while (!bank_rows_are_reduced(f));
  return f;
}

// Bank whose first d rows are the unit vectors, the rest random.
inline MatrixXi canonical_bank(std::mt19937_64& rng, int m, int d, int fmax) {
  std::uniform_int_distribution<int> u(-fmax, fmax);
  MatrixXi f(m, d);
  do {
    f.topRows(d) = MatrixXi::Identity(d, d);
    for (int j = d; j < m; ++j)
      for (int a = 0; a < d; ++a) f(j, a) = u(rng);
  } while (!bank_rows_are_reduced(f));
  return f;
}

// Net with uniform weights |W| <= wmax and uniform biases, shifts and output layer.
inline SinusoidalNet random_net(std::mt19937_64& rng, const MatrixXi& freq, const std::vector<int>& widths,
                                double wmax, int channels = 1) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SinusoidalNet net;
  net.bank.freq = freq;
  net.bank.shifts.resize(freq.rows());
  for (Eigen::Index j = 0; j < freq.rows(); ++j) net.bank.shifts[j] = std::numbers::pi * u(rng);
  int in = static_cast<int>(freq.rows());
  for (int w : widths) {
    Layer l{MatrixXd(w, in), VectorXd(w)};
    for (Eigen::Index i = 0; i < l.W.size(); ++i) l.W.data()[i] = wmax * u(rng);
    for (Eigen::Index i = 0; i < w; ++i) l.b[i] = std::numbers::pi * u(rng);
    net.hidden.push_back(std::move(l));
    in = w;
  }
  net.C.resize(channels, in);
  for (Eigen::Index i = 0; i < net.C.size(); ++i) net.C.data()[i] = u(rng);
  net.e.resize(channels);
  for (int c = 0; c < channels; ++c) net.e[c] = 0.5 * u(rng);
  return net;
}

inline MatrixXd random_points(std::mt19937_64& rng, int n, int d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

// Values of the first-layer neurons, one column per neuron.
inline MatrixXd first_layer(const SinusoidalNet& net, const MatrixXd& x) {
  const MatrixXd s = ((x * net.bank.omega().transpose()).rowwise() + net.bank.shifts.transpose()).array().sin();
  return ((s * net.effective_matrix(0).transpose()).rowwise() + net.hidden[0].b.transpose()).array().sin();
}

// Adaptive Simpson quadrature, used as the Bessel oracle.
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
  const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double bessel_quadrature(int k, double x, double tol = 1e-14) {
  // Fixed panels first so the adaptive rule cannot stop early on an oscillating integrand.
  const auto f = [=](double t) { return std::cos(k * t - x * std::sin(t)); };
  constexpr int panels = 64;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = std::numbers::pi * i / panels, b = std::numbers::pi * (i + 1) / panels;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    sum += simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol / panels, 40);
  }
  return sum / std::numbers::pi;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Image experiments (A6, A7, A10)

/// Shared protocol: seeded 64^2 synthetic image with content up to B = 21,
/// 10% held-out pixels, m = 64, n = 128, b~ = B, l~ = 5, 2000 epochs, lr 1e-4.
struct ImageProtocol {
  int size = 64;
  int band = 21;
  int m = 64;
  int width = 128;
  int low_limit = 5;
  int epochs = 2000;
  double lr = 1e-4;
  double c_low = 1.0;
  double c_high = 0.2;
  double c_init = 0.5;
  double reg_weight = 1e-6;
  std::uint64_t image_seed = 1000;

  InitSpec spec(std::uint64_t seed, BoundMode mode) const {
    InitSpec s;
    s.m = m;
    s.widths = {width};
    s.nyquist = band;
    s.threshold = band;
    s.low_limit = low_limit;
    s.bound_low = c_low;
    s.bound_high = c_high;
    s.c_init = c_init;
    s.bound_mode = mode;
    s.seed = seed;
    return s;
  }
};

struct ImageRun {
  FinalMetrics final;
  double bandlimit = 0.0;  // empirical, at the protocol band
  double mean_c_low = 0.0;
  double mean_c_high = 0.0;
  double seconds = 0.0;
};

/// Memoized runs keyed by (variant, seed); variants: none, clamped, learnable, baseline.
class ImageLab {
 public:
  explicit ImageLab(ImageProtocol p = {}) : p_(p) {}
  const ImageProtocol& protocol() const { return p_; }

  const ImageRun& run(const std::string& variant, std::uint64_t seed) {
    const auto key = std::make_pair(variant, seed);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset ds = to_dataset(synthetic_image(p_.size, p_.size, p_.band, p_.image_seed + seed));
    TrainOptions opt;
    opt.epochs = p_.epochs;
    opt.adam.lr = p_.lr;
    opt.seed = seed;
    opt.eval_interval = p_.epochs;
    opt.bound.low_limit = p_.low_limit;
    opt.bound.c_low = p_.c_low;
    opt.bound.c_high = p_.c_high;
    opt.bound.c_init = p_.c_init;
    opt.bound.reg_weight = p_.reg_weight;
    SinusoidalNet net;
    if (variant == "baseline") {
      net = init_uniform_baseline(p_.spec(seed, BoundMode::none));
    } else if (variant == "learnable") {
      opt.bound.mode = BoundMode::learnable;
      net = init_net(p_.spec(seed, BoundMode::learnable));
    } else {
      // The none and clamped runs start from the same net.
      opt.bound.mode = parse_bound_mode(variant);
      net = init_net(p_.spec(seed, BoundMode::clamped));
    }
    const TrainRun tr = train(net, ds, opt);
    ImageRun r;
    r.final = tr.final;
    r.bandlimit = bandlimit_error(sample_and_dft(tr.net, p_.size, p_.band), p_.band).total;
    if (tr.net.bound_mode == BoundMode::learnable) {
      int nl = 0, nh = 0;
      for (int j = 0; j < tr.net.input_width(); ++j) {
        if (tr.net.bank.row_inf_norm(j) <= p_.low_limit) {
          r.mean_c_low += std::abs(tr.net.bounds[j]);
          ++nl;
        } else {
          r.mean_c_high += std::abs(tr.net.bounds[j]);
          ++nh;
        }
      }
      r.mean_c_low /= std::max(nl, 1);
      r.mean_c_high /= std::max(nh, 1);
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return cache_.emplace(key, r).first->second;
  }

 private:
  ImageProtocol p_;
  std::map<std::pair<std::string, std::uint64_t>, ImageRun> cache_;
};

// ---------------------------------------------------------------------------
// Checks

/// A1: truncated single-layer expansions reproduce the net.
inline CheckResult check_expansion_oracle() {
  CheckResult r{"A1", "expansion oracle", false, "", 0.0};
  double worst = 0.0, worst_tail = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    std::mt19937_64 rng(0xA1000 + s);
    std::uniform_int_distribution<int> size(1, 4);
    const int m = size(rng), n = size(rng);
    const auto net = detail::random_net(rng, detail::random_bank(rng, m, 2, 4), {n}, 1.5);
    const MatrixXd x = detail::random_points(rng, 500, 2);
    const MatrixXd h = detail::first_layer(net, x);
    for (int i = 0; i < n; ++i) {
      const int K = choose_k_max(net, i, 1e-9);
      const auto ex = expand_neuron(net, i, K);
      worst_tail = std::max(worst_tail, ex.tail_bound);
      const auto agg = aggregate_terms(ex.terms, net.bank.base());
      for (Eigen::Index p = 0; p < x.rows(); ++p) {
        const double pt[2] = {x(p, 0), x(p, 1)};
        worst = std::max(worst, std::abs(agg(pt) - h(p, i)));
      }
    }
  }
  r.passed = worst < 1e-6 && worst_tail < 1e-9;
  r.detail = "max |expansion - forward| = " + detail::num(worst) + " (< 1e-6), max tail_bound = " +
             detail::num(worst_tail) + " (< 1e-9), 50 nets x 500 points";
  return r;
}

/// A2: |prod J_{k_j}(w_j)| never exceeds the amplitude bound.
inline CheckResult check_amplitude_bound() {
  CheckResult r{"A2", "amplitude bound", false, "", 0.0};
  std::mt19937_64 rng(0xA2);
  std::uniform_int_distribution<int> size(1, 6), order(-5, 5);
  std::uniform_real_distribution<double> w(-2.0, 2.0);
  int violations = 0;
  double tightest = -1e300;
  for (int t = 0; t < 200; ++t) {
    const int m = size(rng);
    std::vector<int> k(static_cast<std::size_t>(m));
    std::vector<double> row(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      k[static_cast<std::size_t>(j)] = order(rng);
      row[static_cast<std::size_t>(j)] = w(rng);
    }
    double value = 1.0;
    for (int j = 0; j < m; ++j) value *= bessel_j(k[static_cast<std::size_t>(j)], row[static_cast<std::size_t>(j)]);
    const double gap = std::abs(value) - amplitude_bound(k, row);
    tightest = std::max(tightest, gap);
    violations += gap > 1e-14;
  }
  r.passed = violations == 0;
  r.detail = std::to_string(violations) + " violations of |alpha| <= bound + 1e-14 in 200 pairs (max |alpha| - bound = " +
             detail::num(tightest) + ")";
  return r;
}

/// A3: depth-2 expansions reconstruct within their certified tail; depth-1
/// reduction matches the single-layer expansion.
inline CheckResult check_deep_expansion() {
  CheckResult r{"A3", "deep expansion", false, "", 0.0};
  constexpr int K = 6;
  int over = 0;
  double worst_ratio = 0.0, worst_tail = 0.0, worst_term = 0.0;
  bool structure = true;
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::mt19937_64 rng(0xA3000 + s);
    std::uniform_int_distribution<int> mm(2, 3), n1(1, 3), n2(1, 2);
    const int m = mm(rng);
    const auto net = detail::random_net(rng, detail::random_bank(rng, m, 2, 3), {n1(rng), n2(rng)}, 1.0);
    const MatrixXd x = detail::random_points(rng, 200, 2);
    const ForwardCache cache = forward_cached(net, x);
    for (int i = 0; i < net.width(2); ++i) {
      FrequencySum fs{net.bank.base(), {}};
      const auto st = visit_deep_terms(net, 2, i, K, {},
                                       [&](const std::vector<std::vector<int>>&, std::span<const std::int64_t> f,
                                           double alpha, double lambda) { fs.add(f, alpha, lambda); });
      const double tail = st.truncation_bound + st.pruned_mass;
      worst_tail = std::max(worst_tail, tail);
      for (Eigen::Index p = 0; p < x.rows(); ++p) {
        const double pt[2] = {x(p, 0), x(p, 1)};
        const double err = std::abs(fs(pt) - cache.act[2](p, i));
        over += err > tail;
        worst_ratio = std::max(worst_ratio, err / tail);
      }
    }
    SinusoidalNet shallow = net;
    shallow.hidden.resize(1);
    shallow.C = MatrixXd::Ones(1, net.width(1));
    for (int i = 0; i < net.width(1); ++i) {
      const auto a = expand_neuron(shallow, i, K);
      const auto b = expand_deep(shallow, 1, i, K);
      if (a.terms.size() != b.terms.size()) {
        structure = false;
        continue;
      }
      for (std::size_t t = 0; t < a.terms.size(); ++t) {
        structure = structure && a.terms[t].k == b.terms[t].k_tuple[0] && a.terms[t].freq == b.terms[t].freq;
        worst_term = std::max({worst_term, std::abs(a.terms[t].alpha - b.terms[t].alpha),
                               std::abs(a.terms[t].lambda - b.terms[t].lambda)});
      }
      worst_term = std::max(worst_term, std::abs(a.tail_bound - b.tail_bound));
    }
  }
  r.passed = over == 0 && structure && worst_term <= 1e-12;
  r.detail = std::to_string(over) + " points over tail_bound (max error/tail = " + detail::num(worst_ratio) +
             ", max tail = " + detail::num(worst_tail) + ", K = 6); depth-1 reduction " +
             (structure ? "term-for-term" : "MISMATCHED") + ", max diff = " + detail::num(worst_term) + " (<= 1e-12)";
  return r;
}

/// A4: aggregated Fourier tables agree with the DFT of the net; the closed-form
/// solution sets are complete on ||k||_inf <= 4.
inline CheckResult check_fourier_aggregation() {
  CheckResult r{"A4", "Fourier aggregation", false, "", 0.0};
  constexpr int K = 6, band = 6, grid = 256;
  double worst_excess = -1e300;
  long missing = 0, unsound = 0, searched = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::mt19937_64 rng(0xA4000 + s);
    std::uniform_int_distribution<int> mm(2, 5), nn(1, 3);
    const int m = mm(rng);
    const auto net = detail::random_net(rng, detail::canonical_bank(rng, m, 2, 3), {nn(rng)}, 1.0);
    const auto table = fourier_table(net, band, K);
    const auto oracle = dft_oracle(net, grid, band);
    for (int fx = -band; fx <= band; ++fx)
      for (int fy = -band; fy <= band; ++fy) {
        const Freq f{fx, fy};
        if (!is_canonical(f) && inf_norm(f) != 0) continue;
        const auto [a1, b1] = table.coef(f, 0);
        const auto [a2, b2] = oracle.coef(f, 0);
        const double excess = std::max(std::abs(a1 - a2), std::abs(b1 - b2)) - table.residual_bound;
        worst_excess = std::max(worst_excess, excess);
      }
    // Exhaustive search: every k with ||k||_inf <= 4 lies in the set solving its own image.
    std::vector<std::int64_t> k(static_cast<std::size_t>(m), -4);
    while (true) {
      ++searched;
      const Freq F = lattice_image(net.bank.freq, k);
      const auto set = solve_frequency(net.bank, F);
      try {
        const auto l = set.parameters(k);
        if (lattice_image(net.bank.freq, set.at(l)) != F) ++unsound;
      } catch (const PreconditionError&) {
        ++missing;
      }
      std::size_t t = k.size();
      while (t > 0 && k[t - 1] == 4) k[--t] = -4;
      if (t == 0) break;
      ++k[t - 1];
    }
  }
  r.passed = worst_excess <= 1e-9 && missing == 0 && unsound == 0;
  r.detail = "max(|table - dft| - residual_bound) = " + detail::num(worst_excess) + " (<= 1e-9); lattice search: " +
             std::to_string(missing) + " missing, " + std::to_string(unsound) + " unsound of " +
             std::to_string(searched) + " k";
  return r;
}

/// A5: even banks have the half-period sub-period; canonical-row banks have none.
inline CheckResult check_subperiods() {
  CheckResult r{"A5", "sub-periodicity", false, "", 0.0};
  const int n = 64;
  MatrixXd grid(n * n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grid.row(i * n + j) << pixel_center(j, n), pixel_center(i, n);
  auto shifted_gap = [&](const SinusoidalNet& net, double dx, double dy) {
    MatrixXd moved = grid;
    moved.col(0).array() += dx;
    moved.col(1).array() += dy;
    return (forward(net, moved) - forward(net, grid)).cwiseAbs().maxCoeff();
  };

  std::mt19937_64 rng(0xA5);
  MatrixXi even(4, 2);
  even << 2, 0, 2, 1, 4, -3, 2, 3;
  const auto even_net = detail::random_net(rng, even, {8}, 1.0);
  const double even_gap = shifted_gap(even_net, 1.0, 0.0);
  const bool even_flag = subperiod_check(even_net.bank, 2, 1);

  InitSpec spec = ImageProtocol{}.spec(7, BoundMode::none);
  auto canon = init_net(spec);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Eigen::Index i = 0; i < canon.C.size(); ++i) canon.C.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < canon.hidden[0].b.size(); ++i) canon.hidden[0].b[i] = std::numbers::pi * u(rng);
  double smallest = 1e300;
  bool flags = false;
  for (int q = 1; q <= 4; ++q)
    for (int s = 1; s <= 4; ++s) {
      if (q == 1 && s == 1) continue;
      smallest = std::min(smallest, shifted_gap(canon, 2.0 / q, 2.0 / s));
      flags = flags || subperiod_check(canon.bank, q, s);
    }
  r.passed = even_gap < 1e-10 && even_flag && smallest > 1e-3 && !flags;
  r.detail = "even bank: max |f(x) - f(x + (p/2, 0))| = " + detail::num(even_gap) + " (< 1e-10), check(2,1) = " +
             (even_flag ? "true" : "false") + "; canonical bank: min violation over 15 candidates = " +
             detail::num(smallest) + " (> 1e-3), any check true = " + (flags ? "true" : "false");
  return r;
}

/// A6: clamped training beats unbounded training on gradient PSNR and bandlimit error.
inline CheckResult check_bounding_benefit(ImageLab& lab) {
  CheckResult r{"A6", "bounding benefit", false, "", 0.0};
  const auto& none = lab.run("none", 0);
  const auto& clamped = lab.run("clamped", 0);
  const double cpu = none.seconds + clamped.seconds;
  r.passed = clamped.final.grad_psnr > none.final.grad_psnr && clamped.bandlimit < none.bandlimit && cpu < 300.0;
  r.detail = "test grad_psnr clamped " + detail::num(clamped.final.grad_psnr) + " dB vs none " +
             detail::num(none.final.grad_psnr) + " dB (must be greater); bandlimit error clamped " +
             detail::num(clamped.bandlimit) + " vs none " + detail::num(none.bandlimit) +
             " (must be smaller); training time " + detail::num(cpu) + " s (< 300)";
  return r;
}

/// A7: the structured initialization beats the uniform baseline on test PSNR
/// for a majority of 3 seeds.
inline CheckResult check_init_benefit(ImageLab& lab) {
  CheckResult r{"A7", "initialization benefit", false, "", 0.0};
  int wins = 0;
  std::string runs;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto& structured = lab.run("none", s);
    const auto& base = lab.run("baseline", s);
    wins += structured.final.test_psnr >= base.final.test_psnr;
    runs += (s ? ", " : "") + detail::num(structured.final.test_psnr) + " vs " + detail::num(base.final.test_psnr);
  }
  r.passed = wins >= 2;
  r.detail = std::to_string(wins) + "/3 seeds with init test PSNR >= baseline (need >= 2); dB: " + runs;
  return r;
}

/// A8: analytic gradients against central differences on 100 nets.
inline CheckResult check_gradients() {
  CheckResult r{"A8", "gradient checks", false, "", 0.0};
  double worst = 0.0;
  std::string where;
  for (std::uint64_t s = 0; s < 100; ++s) {
    std::mt19937_64 rng(0xA8000 + s);
    std::uniform_int_distribution<int> mm(2, 5), ww(2, 5), cc(1, 2);
    const int d = s % 4 == 3 ? 1 : 2;
    const int m = d == 1 ? std::min(mm(rng), 4) : mm(rng);
    std::vector<int> widths{ww(rng)};
    if (s % 2 == 1) widths.push_back(ww(rng));
    auto net = detail::random_net(rng, detail::random_bank(rng, m, d, 4), widths, 1.0, cc(rng));
    BoundSpec b;
    b.low_limit = 2;
    b.c_deep = s % 2 == 1 ? 0.8 : 0.0;
    if (s % 3 == 1) {
      b.mode = BoundMode::clamped;
      apply_bound_spec(net, b);
      project(net);
    } else if (s % 3 == 2) {
      b.mode = BoundMode::learnable;
      b.c_init = 0.7;
      apply_bound_spec(net, b);
      std::uniform_real_distribution<double> u(0.2, 1.2);
      for (Eigen::Index j = 0; j < net.bounds.size(); ++j) net.bounds[j] = u(rng);
    }
    const auto rep = gradcheck(net, s, 4, 1e-5, s % 5 == 0);
    if (rep.max_rel() > worst) {
      worst = rep.max_rel();
      where = rep.max_rel_input >= rep.max_rel_param ? "input" : rep.worst_param;
    }
  }
  r.passed = worst < 1e-5;
  r.detail = "max relative error = " + detail::num(worst) + " (< 1e-5, worst at " + where +
             "), 100 nets across none/clamped/learnable";
  return r;
}

/// A9: the clamp holds after every one of 500 optimizer steps.
inline CheckResult check_clamp_invariant() {
  CheckResult r{"A9", "clamp invariant", false, "", 0.0};
  InitSpec spec;
  spec.m = 32;
  spec.widths = {64};
  spec.nyquist = 12;
  spec.threshold = 12;
  spec.low_limit = 3;
  spec.seed = 9;
  const Dataset ds = to_dataset(synthetic_image(32, 32, 12, 9));
  TrainOptions opt;
  opt.epochs = 500;
  opt.adam.lr = 1e-2;
  opt.eval_interval = 500;
  opt.grad_metric = false;
  opt.bound.mode = BoundMode::clamped;
  opt.bound.low_limit = spec.low_limit;
  long steps = 0, violations = 0;
  double worst = -1e300;
  opt.on_step = [&](const SinusoidalNet& net, long) {
    ++steps;
    const double v = bound_violation(net);
    worst = std::max(worst, v);
    violations += v > 0.0;
  };
  const auto run = train(init_net(spec), ds, opt);
  int active = 0;
  const MatrixXd& W = run.net.hidden[0].W;
  for (Eigen::Index j = 0; j < W.cols(); ++j) active += W.col(j).cwiseAbs().maxCoeff() == run.net.bounds[j];
  r.passed = steps == 500 && violations == 0 && active > 0;
  r.detail = std::to_string(violations) + " violating steps of " + std::to_string(steps) +
             " (max |W_ij| - c_j = " + detail::num(worst) + "); " + std::to_string(active) +
             " of 32 columns end on their bound";
  return r;
}

/// A10: learned bounds end lower on high-band columns than on low-band ones.
inline CheckResult check_learned_bounds(ImageLab& lab) {
  CheckResult r{"A10", "learnable bounds", false, "", 0.0};
  const auto& run = lab.run("learnable", 0);
  r.passed = run.mean_c_high < run.mean_c_low;
  r.detail = "mean |c_j| high band " + detail::num(run.mean_c_high) + " vs low band " + detail::num(run.mean_c_low) +
             " (must be smaller); c_init 0.5, reg_weight 1e-6";
  return r;
}

/// A11: Bessel values, symmetries, recurrence, reconstruction and bound.
inline CheckResult check_bessel() {
  CheckResult r{"A11", "Bessel suite", false, "", 0.0};
  double quad = 0.0;
  for (int k = -12; k <= 12; ++k)
    for (double x : {-64.0, -20.5, -8.0, -2.0, -0.3, 0.0, 0.7, 1.0, 1.9, 5.5, 8.0, 8.5, 13.0, 33.3, 64.0})
      quad = std::max(quad, std::abs(bessel_j(k, x) - detail::bessel_quadrature(k, x)));
  const bool examples = bessel_j(0, 0.0) == 1.0 && bessel_j(3, 0.0) == 0.0 &&
                        bessel_j(-2, 0.7) == bessel_j(2, 0.7) && bessel_bound(0, 1.3) == 1.0 &&
                        bessel_bound(2, 2.0) == 0.5 && std::abs(bessel_bound(4, 1.0) - 0.0625 / 24.0) <= 1e-18;
  bool parity = true;
  double bound_gap = -1e300, recurrence = 0.0, recon = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double x = -2.0 + 4.0 * i / 200.0;
    for (int k = 1; k <= 12; ++k) {
      const double sign = k % 2 ? -1.0 : 1.0;
      parity = parity && bessel_j(-k, x) == sign * bessel_j(k, x) && bessel_j(k, -x) == sign * bessel_j(k, x);
      bound_gap = std::max({bound_gap, std::abs(bessel_j(k, x)) - bessel_bound(k, x),
                            std::abs(bessel_j(-k, x)) - bessel_bound(-k, x)});
      if (x > 0.0)
        recurrence = std::max(recurrence, std::abs(bessel_j(k - 1, x) + bessel_j(k + 1, x) - 2.0 * k / x * bessel_j(k, x)));
    }
    if (x >= 0.0)
      for (int j = 0; j <= 64; ++j) {
        const double t = 2.0 * std::numbers::pi * j / 64.0;
        double s = 0.0;
        for (int k = -25; k <= 25; k += 2) s += bessel_j(k, x) * std::sin(k * t);
        recon = std::max(recon, std::abs(s - std::sin(x * std::sin(t))));
      }
  }
  r.passed = examples && parity && quad <= 1e-12 && bound_gap <= 1e-14 && recurrence <= 1e-10 && recon <= 1e-10;
  r.detail = std::string("examples ") + (examples ? "ok" : "FAILED") + ", parity " + (parity ? "exact" : "BROKEN") +
             ", |J - quadrature| = " + detail::num(quad) + " (<= 1e-12), |J| - bound = " + detail::num(bound_gap) +
             " (<= 1e-14), recurrence = " + detail::num(recurrence) + " (<= 1e-10), reconstruction = " +
             detail::num(recon) + " (<= 1e-10)";
  return r;
}

// ---------------------------------------------------------------------------
// Suites

inline const std::vector<std::string>& check_ids() {
  static const std::vector<std::string> ids{"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11"};
  return ids;
}

/// Members of a suite: "all", "fast" (everything except the image-training
/// checks A6, A7, A10) or a single check id.
inline std::vector<std::string> suite_members(const std::string& suite) {
  if (suite == "all") return check_ids();
  if (suite == "fast") return {"A1", "A2", "A3", "A4", "A5", "A8", "A9", "A11"};
  for (const auto& id : check_ids())
    if (id == suite) return {id};
  throw ConfigError("unknown verify suite '" + suite + "' (all, fast, A1..A11)");
}

inline CheckResult run_check(const std::string& id, ImageLab& lab) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    if (id == "A1") r = check_expansion_oracle();
    else if (id == "A2") r = check_amplitude_bound();
    else if (id == "A3") r = check_deep_expansion();
    else if (id == "A4") r = check_fourier_aggregation();
    else if (id == "A5") r = check_subperiods();
    else if (id == "A6") r = check_bounding_benefit(lab);
    else if (id == "A7") r = check_init_benefit(lab);
    else if (id == "A8") r = check_gradients();
    else if (id == "A9") r = check_clamp_invariant();
    else if (id == "A10") r = check_learned_bounds(lab);
    else if (id == "A11") r = check_bessel();
    else throw ConfigError("unknown check id '" + id + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    r = CheckResult{id, "check", false, std::string("raised: ") + e.what(), 0.0};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Runs a suite, reporting each result as it completes. Returns all results.
inline std::vector<CheckResult> run_suite(const std::string& suite,
                                          const std::function<void(const CheckResult&)>& report = {}) {
  ImageLab lab;
  std::vector<CheckResult> out;
  for (const auto& id : suite_members(suite)) {
    out.push_back(run_check(id, lab));
    if (report) report(out.back());
  }
  return out;
}

}  // namespace sinr::verify
