#pragma once

// Sinusoidal MLP  f(x) = C * S_d( ... S_1( sin(omega x + phi) ) ) + e
// with integer input frequencies omega = (2 pi / p) * freq_int.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sinr/errors.hpp"

namespace sinr {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;

enum class BoundMode { none, clamped, learnable };

inline const char* to_string(BoundMode m) {
  switch (m) {
    case BoundMode::none: return "none";
    case BoundMode::clamped: return "clamped";
    case BoundMode::learnable: return "learnable";
  }
  return "none";
}

inline BoundMode parse_bound_mode(const std::string& s) {
  if (s == "none") return BoundMode::none;
  if (s == "clamped") return BoundMode::clamped;
  if (s == "learnable") return BoundMode::learnable;
  throw ConfigError("unknown bound_mode '" + s + "'");
}

/// Integer frequency dictionary of the input layer.
struct FrequencyBank {
  MatrixXi freq;  // m x d, row j is the integer frequency of input neuron j
  double period = 2.0;
  VectorXd shifts;  // m

  int rows() const { return static_cast<int>(freq.rows()); }
  int dim() const { return static_cast<int>(freq.cols()); }
  double base() const { return 2.0 * std::numbers::pi / period; }
  MatrixXd omega() const { return base() * freq.cast<double>(); }

  // Max-norm of row j.
  int row_inf_norm(int j) const { return freq.row(j).cwiseAbs().maxCoeff(); }
};

// True when rows are pairwise distinct, not negations of each other, and nonzero.
inline bool bank_rows_are_reduced(const MatrixXi& freq) {
  const auto m = freq.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (freq.row(i).isZero()) return false;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (freq.row(i) == freq.row(j)) return false;
      if (freq.row(i) == -freq.row(j)) return false;
    }
  }
  return true;
}

struct Layer {
  MatrixXd W;  // out x in
  VectorXd b;  // out
};

struct SinusoidalNet {
  FrequencyBank bank;
  std::vector<Layer> hidden;
  MatrixXd C;  // channels x (width of last layer)
  VectorXd e;  // channels
  BoundMode bound_mode = BoundMode::none;
  VectorXd bounds;  // per first-layer column; empty when bound_mode == none
  double deep_bound = 0.0;  // clamp for hidden layers >= 2; 0 disables

  int depth() const { return static_cast<int>(hidden.size()); }
  int input_dim() const { return bank.dim(); }
  int input_width() const { return bank.rows(); }
  int channels() const { return static_cast<int>(C.rows()); }
  int width(int layer) const {  // layer 0 is the input layer
    return layer == 0 ? bank.rows() : static_cast<int>(hidden[layer - 1].W.rows());
  }

  /// Weight matrix as it acts in the forward pass: tanh(W) diag(c) for the
  /// first hidden layer in learnable mode, the raw matrix otherwise.
  MatrixXd effective_matrix(int l) const {
    if (l == 0 && bound_mode == BoundMode::learnable)
      return hidden[0].W.array().tanh().matrix() * bounds.asDiagonal();
    return hidden[l].W;
  }

  void validate() const {
    const int m = bank.rows();
    if (bank.freq.cols() < 1) throw DimensionError("bank has no input dimension");
    if (bank.shifts.size() != m) throw DimensionError("shifts length != bank rows");
    if (!(bank.period > 0.0)) throw DimensionError("period must be positive");
    int in = m;
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      if (hidden[l].W.cols() != in)
        throw DimensionError("layer " + std::to_string(l) + " input width mismatch");
      if (hidden[l].b.size() != hidden[l].W.rows())
        throw DimensionError("layer " + std::to_string(l) + " bias length mismatch");
      in = static_cast<int>(hidden[l].W.rows());
    }
    if (C.cols() != in) throw DimensionError("output matrix width mismatch");
    if (e.size() != C.rows()) throw DimensionError("output bias length mismatch");
    if (bound_mode != BoundMode::none && bounds.size() != m)
      throw DimensionError("bounds vector must have one entry per input frequency");
    if (bound_mode == BoundMode::learnable && hidden.empty())
      throw DimensionError("learnable bounds need a hidden layer");
  }
};

/// Pre- and post-activations of every layer for a batch (rows are samples).
/// Index 0 is the input layer sin(omega x + phi).
struct ForwardCache {
  std::vector<MatrixXd> pre;
  std::vector<MatrixXd> act;
  MatrixXd out;
};

inline void check_coords(const SinusoidalNet& net, const MatrixXd& coords) {
  if (coords.cols() != net.input_dim())
    throw DimensionError("coords have " + std::to_string(coords.cols()) +
                         " columns, net expects " + std::to_string(net.input_dim()));
}

inline ForwardCache forward_cached(const SinusoidalNet& net, const MatrixXd& coords) {
  check_coords(net, coords);
  ForwardCache cache;
  const int depth = net.depth();
  cache.pre.resize(depth + 1);
  cache.act.resize(depth + 1);
  cache.pre[0] = coords * net.bank.omega().transpose();
  cache.pre[0].rowwise() += net.bank.shifts.transpose();
  cache.act[0] = cache.pre[0].array().sin().matrix();
  for (int l = 0; l < depth; ++l) {
    const MatrixXd W = net.effective_matrix(l);
    cache.pre[l + 1].noalias() = cache.act[l] * W.transpose();
    cache.pre[l + 1].rowwise() += net.hidden[l].b.transpose();
    cache.act[l + 1] = cache.pre[l + 1].array().sin().matrix();
  }
  cache.out.noalias() = cache.act[depth] * net.C.transpose();
  cache.out.rowwise() += net.e.transpose();
  return cache;
}

/// Network output for each row of coords (N x d) -> N x channels.
inline MatrixXd forward(const SinusoidalNet& net, const MatrixXd& coords) {
  return forward_cached(net, coords).out;
}

inline double forward_point(const SinusoidalNet& net, const VectorXd& x, int channel = 0) {
  MatrixXd c = x.transpose();
  return forward(net, c)(0, channel);
}

/// Exact d/dx of every output channel. Element a of the result is the
/// N x channels matrix of partial derivatives along input axis a.
inline std::vector<MatrixXd> input_gradient(const SinusoidalNet& net, const MatrixXd& coords) {
  const ForwardCache cache = forward_cached(net, coords);
  const MatrixXd omega = net.bank.omega();
  std::vector<MatrixXd> Ws;
  for (int l = 0; l < net.depth(); ++l) Ws.push_back(net.effective_matrix(l));

  std::vector<MatrixXd> grads;
  for (int a = 0; a < net.input_dim(); ++a) {
    // Tangent of layer activations along axis a.
    MatrixXd t = cache.pre[0].array().cos().matrix() * omega.col(a).asDiagonal();
    for (int l = 0; l < net.depth(); ++l) {
      MatrixXd z = t * Ws[l].transpose();
      t = z.cwiseProduct(cache.pre[l + 1].array().cos().matrix());
    }
    grads.push_back(t * net.C.transpose());
  }
  return grads;
}

/// Gradient set with the same layout as the trainable parameters.
struct ParamGrads {
  std::vector<MatrixXd> W;
  std::vector<VectorXd> b;
  MatrixXd C;
  VectorXd e;
  VectorXd bounds;  // learnable mode only
  VectorXd shifts;  // only when shifts are trained

  double max_abs() const {
    double v = 0.0;
    for (const auto& m : W) v = std::max(v, m.cwiseAbs().maxCoeff());
    for (const auto& m : b) v = std::max(v, m.cwiseAbs().maxCoeff());
    if (C.size()) v = std::max(v, C.cwiseAbs().maxCoeff());
    if (e.size()) v = std::max(v, e.cwiseAbs().maxCoeff());
    if (bounds.size()) v = std::max(v, bounds.cwiseAbs().maxCoeff());
    if (shifts.size()) v = std::max(v, shifts.cwiseAbs().maxCoeff());
    return v;
  }
};

/// Gradients of 0.5 * mean(residuals^2) (mean over samples and channels)
/// given residuals = forward(net, coords) - targets.
inline ParamGrads param_gradients(const SinusoidalNet& net, const ForwardCache& cache,
                                  const MatrixXd& residuals, bool with_shifts = false) {
  const int depth = net.depth();
  if (residuals.rows() != cache.out.rows() || residuals.cols() != cache.out.cols())
    throw DimensionError("residuals shape does not match network output");
  const double scale = 1.0 / static_cast<double>(residuals.size());

  ParamGrads g;
  const MatrixXd G = residuals * scale;  // d loss / d out
  g.C.noalias() = G.transpose() * cache.act[depth];
  g.e = G.colwise().sum().transpose();
  g.W.resize(depth);
  g.b.resize(depth);

  MatrixXd dact = G * net.C;  // d loss / d act[depth]
  for (int l = depth - 1; l >= 0; --l) {
    const MatrixXd dpre = dact.cwiseProduct(cache.pre[l + 1].array().cos().matrix());
    MatrixXd dW = dpre.transpose() * cache.act[l];
    g.b[l] = dpre.colwise().sum().transpose();
    const bool need_below = l > 0 || with_shifts;
    if (need_below) dact = dpre * net.effective_matrix(l);
    if (l == 0 && net.bound_mode == BoundMode::learnable) {
      const MatrixXd th = net.hidden[0].W.array().tanh().matrix();
      g.bounds = dW.cwiseProduct(th).colwise().sum().transpose();
      const MatrixXd dtanh = (1.0 - th.array().square()).matrix();
      dW = dW.cwiseProduct(dtanh) * net.bounds.asDiagonal();
    }
    g.W[l] = std::move(dW);
  }
  if (with_shifts) {
    if (depth == 0) dact = G * net.C;
    const MatrixXd dpre0 = dact.cwiseProduct(cache.pre[0].array().cos().matrix());
    g.shifts = dpre0.colwise().sum().transpose();
  }
  return g;
}

inline ParamGrads param_gradients(const SinusoidalNet& net, const MatrixXd& coords,
                                  const MatrixXd& residuals, bool with_shifts = false) {
  return param_gradients(net, forward_cached(net, coords), residuals, with_shifts);
}

}  // namespace sinr
