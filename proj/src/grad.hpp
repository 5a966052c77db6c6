#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "error.hpp"
#include "math.hpp"
#include "net.hpp"

namespace siatext {

namespace detail {

// Reverse-time recursion through one directional pass. dh_final is the
// upstream gradient on the pass's final hidden state; parameter contributions
// accumulate into acc_cell and the touched embedding rows.
template <typename T>
void backward_direction(const Params<T>& p, const CellParams<T>& dir,
                        const DirectionCache<T>& cache, const T* dh_final,
                        CellParams<T>& acc_cell, Matrix<T>& acc_embedding) {
  const size_t h = p.hidden_dim;
  const size_t n = cache.steps.size();

  std::vector<T> dh(dh_final, dh_final + h);
  std::vector<T> dc(h, T(0));
  std::vector<T> da(4 * h);
  std::vector<T> dh_prev(h);
  const std::vector<T> zero(h, T(0));

  for (size_t t = n; t-- > 0;) {
    const T* gates = cache.gates.row(t);
    const T* gi = gates + kGateInput * h;
    const T* gf = gates + kGateForget * h;
    const T* gg = gates + kGateCell * h;
    const T* go = gates + kGateOutput * h;
    const T* c_t = cache.cells.row(t);
    const T* c_prev = (t > 0) ? cache.cells.row(t - 1) : zero.data();
    const T* h_prev = (t > 0) ? cache.hidden.row(t - 1) : zero.data();

    for (size_t k = 0; k < h; ++k) {
      const T tc = std::tanh(c_t[k]);
      const T d_out = dh[k] * tc;
      const T d_cell = dc[k] + dh[k] * go[k] * (T(1) - tc * tc);
      const T d_in = d_cell * gg[k];
      const T d_cand = d_cell * gi[k];
      const T d_forget = d_cell * c_prev[k];
      dc[k] = d_cell * gf[k];  // flows to step t-1

      da[kGateInput * h + k] = d_in * gi[k] * (T(1) - gi[k]);
      da[kGateForget * h + k] = d_forget * gf[k] * (T(1) - gf[k]);
      da[kGateCell * h + k] = d_cand * (T(1) - gg[k] * gg[k]);
      da[kGateOutput * h + k] = d_out * go[k] * (T(1) - go[k]);
    }

    const T* x = p.embedding.row(cache.steps[t]);
    outer_add(acc_cell.w, da.data(), x);
    outer_add(acc_cell.u, da.data(), h_prev);
    for (size_t j = 0; j < 4 * h; ++j) acc_cell.b[j] += da[j];

    gemv_transpose_add(dir.w, da.data(), acc_embedding.row(cache.steps[t]));

    std::fill(dh_prev.begin(), dh_prev.end(), T(0));
    gemv_transpose_add(dir.u, da.data(), dh_prev.data());
    dh.swap(dh_prev);
  }
}

}  // namespace detail

// Exact chain rule from d(loss)/ds back to every shared parameter: ReLU gate,
// dense layer, concatenation split, both LSTM directions, embedding rows.
// Contributions accumulate into `acc`, so both branch evaluations of a pair
// sum into one buffer.
template <typename T>
void backward(const Params<T>& p, const ForwardCache<T>& cache,
              const std::vector<T>& grad_s, Gradients<T>& acc) {
  const size_t h = p.hidden_dim;
  const size_t d = p.output_dim;
  if (grad_s.size() != d || cache.s.size() != d || cache.concat.size() != 2 * h ||
      acc.dense_b.size() != d) {
    throw Error(ErrorCategory::invalid_argument, "cache/params/gradient shape mismatch");
  }

  // ReLU: zero where the dense pre-activation was <= 0.
  std::vector<T> dz(d);
  for (size_t i = 0; i < d; ++i) {
    dz[i] = (cache.dense_pre[i] > T(0)) ? grad_s[i] : T(0);
  }

  outer_add(acc.dense_w, dz.data(), cache.concat.data());
  for (size_t i = 0; i < d; ++i) acc.dense_b[i] += dz[i];

  std::vector<T> dconcat(2 * h, T(0));
  gemv_transpose_add(p.dense_w, dz.data(), dconcat.data());

  // both passes run the one shared cell, so both accumulate into it
  detail::backward_direction(p, p.cell, cache.fw, dconcat.data(), acc.cell, acc.embedding);
  detail::backward_direction(p, p.cell, cache.bw, dconcat.data() + h, acc.cell, acc.embedding);
}

template <typename T>
Gradients<T> backward(const Params<T>& p, const ForwardCache<T>& cache,
                      const std::vector<T>& grad_s) {
  Gradients<T> acc = zeros_like(p);
  backward(p, cache, grad_s, acc);
  return acc;
}

// Central-difference gradient of an arbitrary scalar function of the
// parameters. Verification oracle only: it never touches the backward pass.
// Parameters are restored bitwise before returning.
template <typename T>
Gradients<T> finite_difference_grad(const std::function<T(const Params<T>&)>& loss_fn,
                                    Params<T>& params, T epsilon) {
  if (!(epsilon > T(0))) {
    throw Error(ErrorCategory::invalid_argument, "finite-difference epsilon must be positive");
  }
  Gradients<T> grads = zeros_like(params);
  auto p_arrays = params.arrays();
  auto g_arrays = grads.arrays();
  for (size_t a = 0; a < p_arrays.size(); ++a) {
    std::vector<T>& pv = *p_arrays[a].values;
    std::vector<T>& gv = *g_arrays[a].values;
    for (size_t i = 0; i < pv.size(); ++i) {
      const T saved = pv[i];
      pv[i] = saved + epsilon;
      const T up = loss_fn(params);
      pv[i] = saved - epsilon;
      const T down = loss_fn(params);
      pv[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw Error(ErrorCategory::numeric,
                    std::string("non-finite loss while perturbing ") + p_arrays[a].name);
      }
      gv[i] = (up - down) / (T(2) * epsilon);
    }
  }
  return grads;
}

}  // namespace siatext
