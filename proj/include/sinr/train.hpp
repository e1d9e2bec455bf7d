#pragma once

// Training: full-batch (or seeded mini-batch) MSE with Adam, per-column clamp
// projection after every step, and the learnable-bound regularizer
// reg_weight * sum_j |c_j|.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "sinr/errors.hpp"
#include "sinr/imageio.hpp"
#include "sinr/net.hpp"
#include "sinr/net_json.hpp"

namespace sinr {

struct BoundSpec {
  BoundMode mode = BoundMode::none;
  double c_low = 1.0;
  double c_high = 0.2;
  double c_deep = 0.0;  // clamp for hidden layers >= 2; 0 disables
  double reg_weight = 1e-6;
  double c_init = 0.5;
  int low_limit = 2;  // rows with ||row||_inf <= low_limit use c_low

  void validate() const {
    if (mode != BoundMode::none && !(c_high > 0.0 && c_high <= c_low && c_low <= 2.0))
      throw ConfigError("need 0 < c_high <= c_low <= 2");
    if (c_deep < 0.0) throw ConfigError("c_deep must be non-negative");
    if (reg_weight < 0.0) throw ConfigError("reg_weight must be non-negative");
    if (mode == BoundMode::learnable && !(c_init > 0.0)) throw ConfigError("c_init must be positive");
  }
};

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainOptions {
  int epochs = 2000;
  AdamOptions adam;
  BoundSpec bound;
  std::uint64_t seed = 0;
  double test_fraction = 0.1;
  int eval_interval = 1;  // test and gradient metrics every this many epochs (and at the end)
  bool grad_metric = true;
  int batch_size = 0;  // 0 = full batch
  bool train_shifts = false;
  int checkpoint_interval = 0;  // 0 disables
  std::string checkpoint_dir;
  // Called after every optimizer step (after projection) with the 1-based step count.
  std::function<void(const SinusoidalNet&, long)> on_step;
};

/// History row. Metrics are measured on the net at the start of the epoch;
/// NaN marks metrics not evaluated that epoch.
struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;  // train MSE (+ regularizer in learnable mode)
  double train_psnr = 0.0;
  double test_psnr = std::numeric_limits<double>::quiet_NaN();
  double grad_psnr = std::numeric_limits<double>::quiet_NaN();
  double reg = 0.0;  // sum_j |c_j| in learnable mode
};

struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

/// Seeded partition with round(test_fraction * n) test samples; both index
/// lists ascending.
inline Split split_indices(Eigen::Index n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in [0, 1)");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(idx[i - 1], idx[pick(rng)]);
  }
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  Split s;
  s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

inline MatrixXd take_rows(const MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Metrics

/// 10 log10(peak^2 / MSE); +inf when the grids agree exactly.
inline double psnr(const MatrixXd& pred, const MatrixXd& target, double peak = 2.0) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) throw DimensionError("psnr: shape mismatch");
  if (pred.size() == 0) throw DimensionError("psnr: empty input");
  const double mse = (pred - target).squaredNorm() / static_cast<double>(pred.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

inline double psnr_from_mse(double mse, double peak = 2.0) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

/// 3x3 Sobel derivatives of a height x width grid (row-major). gx runs along
/// columns, gy along rows. Out-of-range samples are extrapolated linearly
/// (2 edge - inner), so a linear ramp has a uniform response up to the border.
inline void sobel(const std::vector<double>& img, int width, int height, std::vector<double>& gx,
                  std::vector<double>& gy) {
  if (img.size() != static_cast<std::size_t>(width) * height) throw DimensionError("sobel: size mismatch");
  if (width < 2 || height < 2) throw DimensionError("sobel: image must be at least 2 x 2");
  auto at = [&](int r, int c) { return img[static_cast<std::size_t>(r) * width + c]; };
  auto in_row = [&](int r, int c) {
    if (c < 0) return 2.0 * at(r, 0) - at(r, 1);
    if (c >= width) return 2.0 * at(r, width - 1) - at(r, width - 2);
    return at(r, c);
  };
  auto px = [&](int r, int c) {
    if (r < 0) return 2.0 * in_row(0, c) - in_row(1, c);
    if (r >= height) return 2.0 * in_row(height - 1, c) - in_row(height - 2, c);
    return in_row(r, c);
  };
  gx.assign(img.size(), 0.0);
  gy.assign(img.size(), 0.0);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const double a = px(r - 1, c - 1), b = px(r - 1, c), d = px(r - 1, c + 1);
      const double e = px(r, c - 1), f = px(r, c + 1);
      const double g = px(r + 1, c - 1), h = px(r + 1, c), i = px(r + 1, c + 1);
      const std::size_t k = static_cast<std::size_t>(r) * width + c;
      gx[k] = (d + 2.0 * f + i) - (a + 2.0 * e + g);
      gy[k] = (g + 2.0 * h + i) - (a + 2.0 * b + d);
    }
}

inline std::vector<double> sobel_magnitude(const std::vector<double>& img, int width, int height) {
  std::vector<double> gx, gy;
  sobel(img, width, height, gx, gy);
  for (std::size_t k = 0; k < gx.size(); ++k) gx[k] = std::hypot(gx[k], gy[k]);
  return gx;
}

/// Gradient-map comparison against a fixed target image.
class GradientMetric {
 public:
  GradientMetric(const Dataset& ds) : ds_(ds) {
    if (ds.width < 2 || ds.height < 2) throw DimensionError("grad_psnr needs a 2-D grid");
    if (ds.coords.cols() != 2) throw DimensionError("grad_psnr needs 2-D coordinates");
    const MatrixXd gray = ds.values.rowwise().mean();
    std::vector<double> g(gray.data(), gray.data() + gray.size());
    target_ = sobel_magnitude(g, ds.width, ds.height);
    scale_ = *std::max_element(target_.begin(), target_.end());
    if (!(scale_ > 0.0)) throw PreconditionError("grad_psnr: degenerate (constant) target");
    for (auto& v : target_) v /= scale_;
  }

  /// Normalized target Sobel magnitude (max 1), row-major.
  const std::vector<double>& target() const { return target_; }

  /// Net gradient magnitude in Sobel units, normalized by the target's max and clipped to [0, 1].
  std::vector<double> net_map(const SinusoidalNet& net, const std::vector<Eigen::Index>* rows = nullptr) const {
    const MatrixXd coords = rows ? take_rows(ds_.coords, *rows) : ds_.coords;
    const auto g = input_gradient(net, coords);
    const double sx = 8.0 * 2.0 / ds_.width, sy = 8.0 * 2.0 / ds_.height;
    std::vector<double> out(static_cast<std::size_t>(coords.rows()));
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
      const double gx = sx * g[0].row(i).mean(), gy = sy * g[1].row(i).mean();
      out[static_cast<std::size_t>(i)] = std::min(1.0, std::hypot(gx, gy) / scale_);
    }
    return out;
  }

  /// PSNR (peak 1) over all pixels or over `rows`.
  double operator()(const SinusoidalNet& net, const std::vector<Eigen::Index>* rows = nullptr) const {
    const auto pred = net_map(net, rows);
    double se = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double t = target_[static_cast<std::size_t>(rows ? (*rows)[i] : static_cast<Eigen::Index>(i))];
      se += (pred[i] - t) * (pred[i] - t);
    }
    const double mse = se / static_cast<double>(pred.size());
    return psnr_from_mse(mse, 1.0);
  }

 private:
  const Dataset& ds_;
  std::vector<double> target_;
  double scale_ = 1.0;
};

/// grad_psnr over the whole image.
inline double grad_psnr(const SinusoidalNet& net, const Dataset& ds) { return GradientMetric(ds)(net); }

// ---------------------------------------------------------------------------
// Optimizer

struct AdamState {
  std::vector<MatrixXd> mW, vW;
  std::vector<VectorXd> mb, vb;
  MatrixXd mC, vC;
  VectorXd me, ve, mc, vc, ms, vs;
  long step = 0;
};

namespace detail {

template <typename T>
void adam_update(T& param, const T& grad, T& m, T& v, const AdamOptions& o, double bc1, double bc2) {
  if (m.size() != grad.size()) {
    m = T::Zero(grad.rows(), grad.cols());
    v = T::Zero(grad.rows(), grad.cols());
  }
  m = o.beta1 * m + (1.0 - o.beta1) * grad;
  v = o.beta2 * v + (1.0 - o.beta2) * grad.cwiseProduct(grad);
  param.array() -= o.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + o.eps);
}

}  // namespace detail

/// Applies the training-time bound configuration to a net: sets bound mode,
/// bounds and deep bound, converting the first layer to tanh form for
/// learnable bounds. Does not project.
inline void apply_bound_spec(SinusoidalNet& net, const BoundSpec& b) {
  b.validate();
  if (b.mode == BoundMode::none) {
    if (net.bound_mode == BoundMode::learnable) net.hidden[0].W = net.effective_matrix(0);
    net.bound_mode = BoundMode::none;
    net.bounds.resize(0);
    net.deep_bound = 0.0;
    return;
  }
  if (net.hidden.empty()) throw ConfigError("bounds need a hidden layer");
  net.deep_bound = b.c_deep;
  if (b.mode == BoundMode::clamped) {
    if (net.bound_mode == BoundMode::learnable) net.hidden[0].W = net.effective_matrix(0);
    net.bounds.resize(net.input_width());
    for (int j = 0; j < net.input_width(); ++j)
      net.bounds[j] = net.bank.row_inf_norm(j) <= b.low_limit ? b.c_low : b.c_high;
    net.bound_mode = BoundMode::clamped;
    return;
  }
  if (net.bound_mode != BoundMode::learnable) {
    auto& W = net.hidden[0].W;
    for (Eigen::Index i = 0; i < W.size(); ++i)
      W.data()[i] = std::atanh(std::clamp(W.data()[i] / b.c_init, -0.995, 0.995));
    net.bounds = VectorXd::Constant(net.input_width(), b.c_init);
    net.bound_mode = BoundMode::learnable;
  }
}

/// Clamp projection: first-layer column j to [-c_j, c_j] (clamped mode) and
/// hidden layers >= 2 to [-deep_bound, deep_bound] when deep_bound > 0.
inline void project(SinusoidalNet& net) {
  if (net.bound_mode == BoundMode::clamped) {
    auto& W = net.hidden[0].W;
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      const double c = std::abs(net.bounds[j]);
      W.col(j) = W.col(j).cwiseMax(-c).cwiseMin(c);
    }
  }
  if (net.bound_mode != BoundMode::none && net.deep_bound > 0.0)
    for (int l = 1; l < net.depth(); ++l)
      net.hidden[l].W = net.hidden[l].W.cwiseMax(-net.deep_bound).cwiseMin(net.deep_bound);
}

/// Largest amount by which any constrained weight exceeds its bound (<= 0 when satisfied).
inline double bound_violation(const SinusoidalNet& net) {
  double worst = -std::numeric_limits<double>::infinity();
  if (net.bound_mode == BoundMode::none) return worst;
  const MatrixXd W = net.effective_matrix(0);
  for (Eigen::Index j = 0; j < W.cols(); ++j)
    worst = std::max(worst, W.col(j).cwiseAbs().maxCoeff() - std::abs(net.bounds[j]));
  if (net.deep_bound > 0.0)
    for (int l = 1; l < net.depth(); ++l)
      worst = std::max(worst, net.hidden[l].W.cwiseAbs().maxCoeff() - net.deep_bound);
  return worst;
}

inline double regularizer(const SinusoidalNet& net) {
  return net.bound_mode == BoundMode::learnable ? net.bounds.cwiseAbs().sum() : 0.0;
}

/// Thrown when the loss exceeds 1e6 or becomes non-finite; carries the net
/// as it was before the failing step.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, SinusoidalNet snapshot, int epoch, double loss)
      : NumericalError(what), snapshot_(std::move(snapshot)), epoch_(epoch), loss_(loss) {}
  const SinusoidalNet& snapshot() const { return snapshot_; }
  int epoch() const { return epoch_; }
  double loss() const { return loss_; }

 private:
  SinusoidalNet snapshot_;
  int epoch_;
  double loss_;
};

struct FinalMetrics {
  double train_psnr = std::numeric_limits<double>::quiet_NaN();
  double test_psnr = std::numeric_limits<double>::quiet_NaN();
  double grad_psnr = std::numeric_limits<double>::quiet_NaN();  // on test pixels
  double grad_psnr_all = std::numeric_limits<double>::quiet_NaN();
  double loss = std::numeric_limits<double>::quiet_NaN();
};

struct TrainRun {
  SinusoidalNet net;
  AdamState adam;
  std::vector<EpochRecord> history;
  Split split;
  TrainOptions options;
  FinalMetrics final;
};

namespace detail {

inline ParamGrads scaled_grads(const SinusoidalNet& net, const MatrixXd& coords, const MatrixXd& targets,
                               bool shifts, double& mse) {
  const ForwardCache cache = forward_cached(net, coords);
  const MatrixXd r = cache.out - targets;
  mse = r.squaredNorm() / static_cast<double>(r.size());
  ParamGrads g = param_gradients(net, cache, r, shifts);
  // param_gradients differentiates 0.5 * MSE.
  for (auto& m : g.W) m *= 2.0;
  for (auto& v : g.b) v *= 2.0;
  g.C *= 2.0;
  g.e *= 2.0;
  if (g.bounds.size()) g.bounds *= 2.0;
  if (g.shifts.size()) g.shifts *= 2.0;
  return g;
}

inline void adam_step(SinusoidalNet& net, AdamState& st, const ParamGrads& g, const AdamOptions& o) {
  ++st.step;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(st.step));
  const auto depth = static_cast<std::size_t>(net.depth());
  st.mW.resize(depth);
  st.vW.resize(depth);
  st.mb.resize(depth);
  st.vb.resize(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    adam_update(net.hidden[l].W, g.W[l], st.mW[l], st.vW[l], o, bc1, bc2);
    adam_update(net.hidden[l].b, g.b[l], st.mb[l], st.vb[l], o, bc1, bc2);
  }
  adam_update(net.C, g.C, st.mC, st.vC, o, bc1, bc2);
  adam_update(net.e, g.e, st.me, st.ve, o, bc1, bc2);
  if (g.bounds.size()) adam_update(net.bounds, g.bounds, st.mc, st.vc, o, bc1, bc2);
  if (g.shifts.size()) adam_update(net.bank.shifts, g.shifts, st.ms, st.vs, o, bc1, bc2);
}

}  // namespace detail

/// Trains `net` on `ds`. Deterministic given the options.
inline TrainRun train(SinusoidalNet net, const Dataset& ds, const TrainOptions& opt) {
  net.validate();
  if (opt.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (opt.eval_interval < 1) throw ConfigError("eval_interval must be positive");
  if (!(opt.adam.lr > 0.0)) throw ConfigError("lr must be positive");
  if (ds.coords.rows() != ds.values.rows()) throw DimensionError("dataset coords/values length mismatch");
  if (ds.values.cols() != net.channels()) throw DimensionError("dataset channels do not match net");
  if (ds.values.size() && ds.values.cwiseAbs().maxCoeff() > 1.0) throw DomainError("targets must lie in [-1, 1]");

  TrainRun run;
  run.options = opt;
  run.split = split_indices(ds.coords.rows(), opt.test_fraction, opt.seed);
  if (run.split.train.empty()) throw ConfigError("empty training split");
  apply_bound_spec(net, opt.bound);
  if (opt.epochs > 0) project(net);

  const MatrixXd x_train = take_rows(ds.coords, run.split.train);
  const MatrixXd y_train = take_rows(ds.values, run.split.train);
  const MatrixXd x_test = take_rows(ds.coords, run.split.test);
  const MatrixXd y_test = take_rows(ds.values, run.split.test);
  std::optional<GradientMetric> gm;
  if (opt.grad_metric && ds.width >= 2 && ds.height >= 2 && ds.coords.cols() == 2 &&
      static_cast<Eigen::Index>(ds.width) * ds.height == ds.coords.rows())
    gm.emplace(ds);
  const std::vector<Eigen::Index>* grad_rows = run.split.test.empty() ? nullptr : &run.split.test;

  const bool learnable = opt.bound.mode == BoundMode::learnable;
  std::mt19937_64 batch_rng(opt.seed ^ 0x2545f4914f6cdd1dULL);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x_train.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    const bool eval = epoch % opt.eval_interval == 0 || epoch == opt.epochs - 1;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.reg = regularizer(net);
    if (eval) {
      if (x_test.rows()) rec.test_psnr = psnr(forward(net, x_test), y_test);
      if (gm) rec.grad_psnr = (*gm)(net, grad_rows);
    }

    const std::size_t batch = opt.batch_size > 0 ? static_cast<std::size_t>(opt.batch_size) : order.size();
    if (batch < order.size())
      for (std::size_t i = order.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(batch_rng)]);
      }
    double mse_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      double mse = 0.0;
      ParamGrads g;
      if (batch >= order.size()) {
        g = detail::scaled_grads(net, x_train, y_train, opt.train_shifts, mse);
      } else {
        const std::vector<Eigen::Index> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                             order.begin() + static_cast<std::ptrdiff_t>(stop));
        g = detail::scaled_grads(net, take_rows(x_train, rows), take_rows(y_train, rows), opt.train_shifts, mse);
      }
      const double loss = mse + (learnable ? opt.bound.reg_weight * regularizer(net) : 0.0);
      if (!std::isfinite(loss) || loss > 1e6)
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + " (loss " +
                                  std::to_string(loss) + ")",
                              net, epoch, loss);
      if (learnable) g.bounds += opt.bound.reg_weight * net.bounds.unaryExpr([](double c) {
        return static_cast<double>((c > 0.0) - (c < 0.0));
      });
      detail::adam_step(net, run.adam, g, opt.adam);
      project(net);
      if (opt.on_step) opt.on_step(net, run.adam.step);
      mse_sum += mse * static_cast<double>(stop - start);
      seen += stop - start;
    }
    const double mse = mse_sum / static_cast<double>(seen);
    rec.loss = mse + (learnable ? opt.bound.reg_weight * rec.reg : 0.0);
    rec.train_psnr = psnr_from_mse(mse);
    run.history.push_back(rec);

    if (opt.checkpoint_interval > 0 && (epoch + 1) % opt.checkpoint_interval == 0 && !opt.checkpoint_dir.empty())
      save_net(net, (std::filesystem::path(opt.checkpoint_dir) / ("checkpoint_" + std::to_string(epoch + 1) + ".json"))
                        .string());
  }

  const MatrixXd pred_train = forward(net, x_train);
  run.final.loss = (pred_train - y_train).squaredNorm() / static_cast<double>(y_train.size());
  run.final.train_psnr = psnr_from_mse(run.final.loss);
  if (x_test.rows()) run.final.test_psnr = psnr(forward(net, x_test), y_test);
  if (gm) {
    run.final.grad_psnr = (*gm)(net, grad_rows);
    run.final.grad_psnr_all = (*gm)(net);
  }
  run.net = std::move(net);
  return run;
}

namespace detail {

inline void csv_number(std::ostream& out, double v) {
  if (std::isnan(v)) return;
  if (std::isinf(v)) {
    out << (v > 0 ? "inf" : "-inf");
    return;
  }
  out << v;
}

}  // namespace detail

/// CSV with header epoch,train_psnr,test_psnr,grad_psnr,loss,reg; metrics not
/// evaluated in an epoch are left empty.
inline void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& h) {
  out << "epoch,train_psnr,test_psnr,grad_psnr,loss,reg\n" << std::setprecision(10);
  for (const auto& r : h) {
    out << r.epoch << ',';
    detail::csv_number(out, r.train_psnr);
    out << ',';
    detail::csv_number(out, r.test_psnr);
    out << ',';
    detail::csv_number(out, r.grad_psnr);
    out << ',';
    detail::csv_number(out, r.loss);
    out << ',';
    detail::csv_number(out, r.reg);
    out << '\n';
  }
}

}  // namespace sinr
