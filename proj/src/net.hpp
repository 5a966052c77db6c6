#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "math.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace siatext {

struct NetConfig {
  uint32_t vocab_size = 0;
  uint32_t embed_dim = 64;
  uint32_t hidden_dim = 64;
  uint32_t output_dim = 128;
  float init_scale = 1.0f;
  uint64_t seed = 0;
};

// Gate block order inside the stacked 4H rows: input, forget, cell candidate,
// output.
inline constexpr size_t kGateInput = 0;
inline constexpr size_t kGateForget = 1;
inline constexpr size_t kGateCell = 2;
inline constexpr size_t kGateOutput = 3;

template <typename T>
struct CellParams {
  Matrix<T> w;       // [4H x E] input weights
  Matrix<T> u;       // [4H x H] recurrent weights
  std::vector<T> b;  // [4H] biases
};

// The single shared parameter set; both siamese branches read the same object,
// and the one recurrent cell drives both the forward pass and the pass over
// the reversed sequence. That makes encode(reverse(x)).fw == encode(x).bw an
// identity for every parameter value.
template <typename T>
struct Params {
  uint32_t vocab_size = 0;
  uint32_t embed_dim = 0;
  uint32_t hidden_dim = 0;
  uint32_t output_dim = 0;

  Matrix<T> embedding;  // [vocab x E]
  CellParams<T> cell;
  Matrix<T> dense_w;       // [d x 2H]
  std::vector<T> dense_b;  // [d]

  struct ArrayRef {
    const char* name;
    std::vector<T>* values;
  };

  // Every parameter array in declared order; the one traversal order used by
  // the optimizer, clipping, checkpointing, and the finite-difference oracle.
  std::vector<ArrayRef> arrays() {
    return {
        {"embedding", &embedding.data},
        {"cell.w", &cell.w.data},
        {"cell.u", &cell.u.data},
        {"cell.b", &cell.b},
        {"dense_w", &dense_w.data},
        {"dense_b", &dense_b},
    };
  }
  std::vector<ArrayRef> arrays() const {
    return const_cast<Params*>(this)->arrays();
  }
};

template <typename T>
using Gradients = Params<T>;

namespace detail {

template <typename T>
void fill_uniform(Rng& rng, std::vector<T>& values, double scale) {
  for (T& v : values) v = static_cast<T>(rng.symmetric_unit() * scale);
}

}  // namespace detail

// Weights uniform in [-init_scale, init_scale] / sqrt(fan-in); biases zero
// except the forget-gate slice, which starts at +1.
template <typename T>
Params<T> init_params(const NetConfig& config) {
  if (config.vocab_size == 0 || config.embed_dim == 0 || config.hidden_dim == 0 ||
      config.output_dim == 0) {
    throw Error(ErrorCategory::invalid_argument, "all network dimensions must be >= 1");
  }
  if (!(config.init_scale > 0.0f)) {
    throw Error(ErrorCategory::invalid_argument, "init_scale must be positive");
  }
  const size_t e = config.embed_dim;
  const size_t h = config.hidden_dim;
  const size_t d = config.output_dim;

  Params<T> p;
  p.vocab_size = config.vocab_size;
  p.embed_dim = config.embed_dim;
  p.hidden_dim = config.hidden_dim;
  p.output_dim = config.output_dim;
  p.embedding = Matrix<T>(config.vocab_size, e);
  p.cell.w = Matrix<T>(4 * h, e);
  p.cell.u = Matrix<T>(4 * h, h);
  p.cell.b.assign(4 * h, T(0));
  p.dense_w = Matrix<T>(d, 2 * h);
  p.dense_b.assign(d, T(0));

  Rng rng(config.seed);
  const double s = config.init_scale;
  detail::fill_uniform(rng, p.embedding.data, s / std::sqrt(double(e)));
  detail::fill_uniform(rng, p.cell.w.data, s / std::sqrt(double(e)));
  detail::fill_uniform(rng, p.cell.u.data, s / std::sqrt(double(h)));
  for (size_t i = kGateForget * h; i < (kGateForget + 1) * h; ++i) p.cell.b[i] = T(1);
  detail::fill_uniform(rng, p.dense_w.data, s / std::sqrt(double(2 * h)));
  return p;
}

template <typename T>
Params<T> zeros_like(const Params<T>& p) {
  Params<T> z;
  z.vocab_size = p.vocab_size;
  z.embed_dim = p.embed_dim;
  z.hidden_dim = p.hidden_dim;
  z.output_dim = p.output_dim;
  z.embedding = Matrix<T>(p.embedding.rows, p.embedding.cols);
  z.cell.w = Matrix<T>(p.cell.w.rows, p.cell.w.cols);
  z.cell.u = Matrix<T>(p.cell.u.rows, p.cell.u.cols);
  z.cell.b.assign(p.cell.b.size(), T(0));
  z.dense_w = Matrix<T>(p.dense_w.rows, p.dense_w.cols);
  z.dense_b.assign(p.dense_b.size(), T(0));
  return z;
}

template <typename T>
void fill_zero(Params<T>& p) {
  for (auto ref : p.arrays()) std::fill(ref.values->begin(), ref.values->end(), T(0));
}

// One LSTM cell update. gates_out, when given, receives the 4H post-activation
// gate values (i, f, g, o) needed by backpropagation.
template <typename T>
void lstm_step(const CellParams<T>& dir, const T* x, const T* h_prev,
               const T* c_prev, T* h_out, T* c_out, T* gates_out = nullptr) {
  const size_t h = dir.u.cols;
  std::vector<T> pre(dir.b.begin(), dir.b.end());  // [4H]
  gemv_add(dir.w, x, pre.data());
  gemv_add(dir.u, h_prev, pre.data());

  const T* ai = pre.data() + kGateInput * h;
  const T* af = pre.data() + kGateForget * h;
  const T* ag = pre.data() + kGateCell * h;
  const T* ao = pre.data() + kGateOutput * h;
  for (size_t k = 0; k < h; ++k) {
    T gi = stable_sigmoid(ai[k]);
    T gf = stable_sigmoid(af[k]);
    T gg = std::tanh(ag[k]);
    T go = stable_sigmoid(ao[k]);
    T c = gf * c_prev[k] + gi * gg;
    c_out[k] = c;
    h_out[k] = go * std::tanh(c);
    if (gates_out != nullptr) {
      gates_out[kGateInput * h + k] = gi;
      gates_out[kGateForget * h + k] = gf;
      gates_out[kGateCell * h + k] = gg;
      gates_out[kGateOutput * h + k] = go;
    }
  }
}

// Unfolded states of one directional pass, kept for backpropagation through
// time.
template <typename T>
struct DirectionCache {
  std::vector<uint32_t> steps;  // embedding index per step, in pass order
  Matrix<T> gates;              // [n x 4H] post-activation (i, f, g, o)
  Matrix<T> cells;              // [n x H]
  Matrix<T> hidden;             // [n x H]
};

template <typename T>
struct ForwardCache {
  DirectionCache<T> fw;
  DirectionCache<T> bw;
  std::vector<T> concat;     // [2H] = [fw_final, bw_final]
  std::vector<T> dense_pre;  // [d] pre-ReLU
  std::vector<T> s;          // [d] projection, elementwise >= 0
};

namespace detail {

template <typename T>
DirectionCache<T> run_direction(const Params<T>& p, const CellParams<T>& dir,
                                const std::vector<uint32_t>& steps) {
  const size_t h = p.hidden_dim;
  const size_t n = steps.size();
  DirectionCache<T> cache;
  cache.steps = steps;
  cache.gates = Matrix<T>(n, 4 * h);
  cache.cells = Matrix<T>(n, h);
  cache.hidden = Matrix<T>(n, h);

  std::vector<T> zero(h, T(0));
  const T* h_prev = zero.data();
  const T* c_prev = zero.data();
  for (size_t t = 0; t < n; ++t) {
    const T* x = p.embedding.row(steps[t]);
    lstm_step(dir, x, h_prev, c_prev, cache.hidden.row(t), cache.cells.row(t),
              cache.gates.row(t));
    h_prev = cache.hidden.row(t);
    c_prev = cache.cells.row(t);
  }
  return cache;
}

}  // namespace detail

// Eq-style readout: fw and bw are the final hidden states of the forward pass
// and of the pass over the reversed sequence; s = max(0, W [fw, bw] + b).
template <typename T>
ForwardCache<T> encode_sentence(const Params<T>& p, const SentenceEncoding& enc) {
  if (enc.indices.empty()) {
    throw Error(ErrorCategory::invalid_argument, "cannot encode an empty sentence encoding");
  }
  for (uint32_t idx : enc.indices) {
    if (idx >= p.vocab_size) {
      throw Error(ErrorCategory::invalid_argument,
                  "encoding index " + std::to_string(idx) + " out of range for vocabulary of " +
                      std::to_string(p.vocab_size));
    }
  }
  const size_t h = p.hidden_dim;
  const size_t d = p.output_dim;

  ForwardCache<T> cache;
  cache.fw = detail::run_direction(p, p.cell, enc.indices);
  std::vector<uint32_t> reversed(enc.indices.rbegin(), enc.indices.rend());
  cache.bw = detail::run_direction(p, p.cell, reversed);

  const size_t n = enc.indices.size();
  cache.concat.resize(2 * h);
  std::copy_n(cache.fw.hidden.row(n - 1), h, cache.concat.data());
  std::copy_n(cache.bw.hidden.row(n - 1), h, cache.concat.data() + h);

  cache.dense_pre.assign(p.dense_b.begin(), p.dense_b.end());
  gemv_add(p.dense_w, cache.concat.data(), cache.dense_pre.data());
  cache.s.resize(d);
  for (size_t i = 0; i < d; ++i) cache.s[i] = std::max(T(0), cache.dense_pre[i]);
  return cache;
}

// Projection without keeping intermediate state; used at classification time.
template <typename T>
std::vector<T> project(const Params<T>& p, const SentenceEncoding& enc) {
  return encode_sentence(p, enc).s;
}

}  // namespace siatext
