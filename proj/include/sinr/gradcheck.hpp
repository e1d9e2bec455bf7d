#pragma once

// Central finite-difference checks of input_gradient and param_gradients.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "sinr/net.hpp"

namespace sinr {

struct GradCheckReport {
  double max_rel_input = 0.0;
  double max_rel_param = 0.0;
  std::string worst_param;  // parameter class with the largest error
  double max_rel() const { return std::max(max_rel_input, max_rel_param); }
};

/// |a - b| / max(|a|, |b|, floor). The floor keeps entries whose true value
/// is at finite-difference noise level from dominating.
inline double relative_error(double a, double b, double floor = 1e-4) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

namespace detail {

inline double half_mse(const SinusoidalNet& net, const MatrixXd& coords, const MatrixXd& targets) {
  const MatrixXd r = forward(net, coords) - targets;
  return 0.5 * r.squaredNorm() / static_cast<double>(r.size());
}

}  // namespace detail

/// Compares analytic gradients against central differences with step h at
/// `samples` random points (targets random in [-1, 1]).
inline GradCheckReport gradcheck(const SinusoidalNet& net, std::uint64_t seed, int samples = 4, double h = 1e-5,
                                 bool with_shifts = false) {
  net.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int d = net.input_dim();
  MatrixXd coords(samples, d), targets(samples, net.channels());
  for (Eigen::Index i = 0; i < coords.size(); ++i) coords.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < targets.size(); ++i) targets.data()[i] = u(rng);

  GradCheckReport rep;

  const auto grads = input_gradient(net, coords);
  for (int a = 0; a < d; ++a) {
    MatrixXd plus = coords, minus = coords;
    plus.col(a).array() += h;
    minus.col(a).array() -= h;
    const MatrixXd fd = (forward(net, plus) - forward(net, minus)) / (2.0 * h);
    for (Eigen::Index i = 0; i < fd.size(); ++i)
      rep.max_rel_input = std::max(rep.max_rel_input, relative_error(grads[a].data()[i], fd.data()[i]));
  }

  const MatrixXd residuals = forward(net, coords) - targets;
  const ParamGrads g = param_gradients(net, coords, residuals, with_shifts);
  SinusoidalNet probe = net;
  auto check = [&](double& slot, double analytic, const std::string& name) {
    const double keep = slot;
    slot = keep + h;
    const double lp = detail::half_mse(probe, coords, targets);
    slot = keep - h;
    const double lm = detail::half_mse(probe, coords, targets);
    slot = keep;
    const double err = relative_error(analytic, (lp - lm) / (2.0 * h));
    if (err > rep.max_rel_param) {
      rep.max_rel_param = err;
      rep.worst_param = name;
    }
  };
  for (int l = 0; l < probe.depth(); ++l) {
    auto& L = probe.hidden[l];
    for (Eigen::Index i = 0; i < L.W.rows(); ++i)
      for (Eigen::Index j = 0; j < L.W.cols(); ++j) check(L.W(i, j), g.W[l](i, j), "W" + std::to_string(l));
    for (Eigen::Index i = 0; i < L.b.size(); ++i) check(L.b[i], g.b[l][i], "b" + std::to_string(l));
  }
  for (Eigen::Index i = 0; i < probe.C.rows(); ++i)
    for (Eigen::Index j = 0; j < probe.C.cols(); ++j) check(probe.C(i, j), g.C(i, j), "C");
  for (Eigen::Index i = 0; i < probe.e.size(); ++i) check(probe.e[i], g.e[i], "e");
  if (probe.bound_mode == BoundMode::learnable)
    for (Eigen::Index j = 0; j < probe.bounds.size(); ++j) check(probe.bounds[j], g.bounds[j], "bounds");
  if (with_shifts)
    for (Eigen::Index j = 0; j < probe.bank.shifts.size(); ++j)
      check(probe.bank.shifts[j], g.shifts[j], "shifts");
  return rep;
}

}  // namespace sinr
