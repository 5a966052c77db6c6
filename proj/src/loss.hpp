#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "error.hpp"
#include "math.hpp"

namespace siatext {

struct LossConfig {
  double margin = 0.5;    // hinge knee for different-class pairs
  double epsilon = 1e-8;  // zero-norm guard

  void validate() const {
    if (!(margin >= 0.0 && margin <= 1.0)) {
      throw Error(ErrorCategory::invalid_argument, "margin must lie in [0, 1]");
    }
    if (!(epsilon > 0.0)) {
      throw Error(ErrorCategory::invalid_argument, "loss epsilon must be positive");
    }
  }
};

namespace detail {

inline void check_pair_label(int y) {
  if (y != 1 && y != -1) {
    throw Error(ErrorCategory::invalid_argument, "pair label y must be +1 or -1");
  }
}

template <typename T>
void check_same_dims(const std::vector<T>& u, const std::vector<T>& v) {
  if (u.size() != v.size() || u.empty()) {
    throw Error(ErrorCategory::invalid_argument, "cosine needs two equal non-zero dimensions");
  }
}

}  // namespace detail

// u.v / (max(|u|, eps) * max(|v|, eps)), clamped to [-1, 1]. The guard makes
// the cosine of an exact zero vector 0 instead of NaN.
template <typename T>
T cosine(const std::vector<T>& u, const std::vector<T>& v, T eps = T(1e-8)) {
  detail::check_same_dims(u, v);
  T nu = std::max(norm(u.data(), u.size()), eps);
  T nv = std::max(norm(v.data(), v.size()), eps);
  T c = dot(u.data(), v.data(), u.size()) / (nu * nv);
  return std::clamp(c, T(-1), T(1));
}

// Same-class pairs pay 1 - cos; different-class pairs pay the hinge
// max(0, cos - margin).
template <typename T>
T contrastive_loss(const std::vector<T>& s1, const std::vector<T>& s2, int y,
                   const LossConfig& cfg) {
  detail::check_pair_label(y);
  cfg.validate();
  T c = cosine(s1, s2, static_cast<T>(cfg.epsilon));
  if (y == 1) return T(1) - c;
  return std::max(T(0), c - static_cast<T>(cfg.margin));
}

// Analytic d(loss)/d(s1), d(loss)/d(s2). In the hinge's flat region (including
// exactly at the margin) both gradients are zero.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> contrastive_loss_grad(const std::vector<T>& s1,
                                                                const std::vector<T>& s2,
                                                                int y,
                                                                const LossConfig& cfg) {
  detail::check_pair_label(y);
  cfg.validate();
  detail::check_same_dims(s1, s2);
  const size_t d = s1.size();
  std::vector<T> g1(d, T(0)), g2(d, T(0));

  const T eps = static_cast<T>(cfg.epsilon);
  T nu = std::max(norm(s1.data(), d), eps);
  T nv = std::max(norm(s2.data(), d), eps);
  T c = dot(s1.data(), s2.data(), d) / (nu * nv);

  if (y == -1 && !(c > static_cast<T>(cfg.margin))) {
    return {std::move(g1), std::move(g2)};
  }
  // d cos / d s1 = s2/(|s1||s2|) - cos * s1/|s1|^2, and symmetrically for s2.
  const T sign = (y == 1) ? T(-1) : T(1);
  for (size_t i = 0; i < d; ++i) {
    g1[i] = sign * (s2[i] / (nu * nv) - c * s1[i] / (nu * nu));
    g2[i] = sign * (s1[i] / (nu * nv) - c * s2[i] / (nv * nv));
  }
  return {std::move(g1), std::move(g2)};
}

template <typename T>
struct ProjectedPair {
  std::vector<T> s1;
  std::vector<T> s2;
  int8_t y = 1;
};

struct BatchLoss {
  double sum = 0.0;
  double mean = 0.0;
  size_t count = 0;
};

// Exact sum of per-pair losses over the batch; the mean is carried along for
// logging comparability across batch sizes.
template <typename T>
BatchLoss batch_loss(const std::vector<ProjectedPair<T>>& pairs, const LossConfig& cfg) {
  if (pairs.empty()) {
    throw Error(ErrorCategory::invalid_argument, "batch loss over an empty batch");
  }
  BatchLoss out;
  out.count = pairs.size();
  for (const ProjectedPair<T>& p : pairs) {
    out.sum += static_cast<double>(contrastive_loss(p.s1, p.s2, p.y, cfg));
  }
  out.mean = out.sum / static_cast<double>(out.count);
  return out;
}

}  // namespace siatext
