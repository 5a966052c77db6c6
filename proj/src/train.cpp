#include "train.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>
#include <thread>

#include "grad.hpp"
#include "rng.hpp"

namespace siatext {

namespace {

struct AdamState {
  Params<float> m;
  Params<float> v;
  uint64_t step = 0;
};

double global_norm(const Gradients<float>& grads) {
  double acc = 0.0;
  for (auto ref : grads.arrays()) {
    for (float g : *ref.values) acc += static_cast<double>(g) * static_cast<double>(g);
  }
  return std::sqrt(acc);
}

void clip_by_global_norm(Gradients<float>& grads, float clip_norm) {
  double gn = global_norm(grads);
  if (gn <= static_cast<double>(clip_norm)) return;
  const float scale = static_cast<float>(static_cast<double>(clip_norm) / gn);
  for (auto ref : grads.arrays()) {
    for (float& g : *ref.values) g *= scale;
  }
}

void sgd_step(Params<float>& params, const Gradients<float>& grads, float lr) {
  auto p = params.arrays();
  auto g = grads.arrays();
  for (size_t a = 0; a < p.size(); ++a) {
    std::vector<float>& pv = *p[a].values;
    const std::vector<float>& gv = *g[a].values;
    for (size_t i = 0; i < pv.size(); ++i) pv[i] -= lr * gv[i];
  }
}

void adam_step(Params<float>& params, const Gradients<float>& grads, AdamState& state,
               const TrainConfig& cfg) {
  ++state.step;
  const float b1 = cfg.adam_beta1;
  const float b2 = cfg.adam_beta2;
  const float c1 = static_cast<float>(
      1.0 - std::pow(static_cast<double>(b1), static_cast<double>(state.step)));
  const float c2 = static_cast<float>(
      1.0 - std::pow(static_cast<double>(b2), static_cast<double>(state.step)));

  auto p = params.arrays();
  auto g = grads.arrays();
  auto m = state.m.arrays();
  auto v = state.v.arrays();
  for (size_t a = 0; a < p.size(); ++a) {
    std::vector<float>& pv = *p[a].values;
    const std::vector<float>& gv = *g[a].values;
    std::vector<float>& mv = *m[a].values;
    std::vector<float>& vv = *v[a].values;
    for (size_t i = 0; i < pv.size(); ++i) {
      mv[i] = b1 * mv[i] + (1.0f - b1) * gv[i];
      vv[i] = b2 * vv[i] + (1.0f - b2) * gv[i] * gv[i];
      const float m_hat = mv[i] / c1;
      const float v_hat = vv[i] / c2;
      pv[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
    }
  }
}

void check_params_finite(const Params<float>& params, uint32_t epoch, size_t batch) {
  for (auto ref : params.arrays()) {
    for (float x : *ref.values) {
      if (!std::isfinite(x)) {
        throw Error(ErrorCategory::numeric,
                    std::string("non-finite parameter in '") + ref.name + "' after epoch " +
                        std::to_string(epoch + 1) + ", batch " + std::to_string(batch + 1));
      }
    }
  }
}

// Forward/backward for one slice of the batch; gradients and loss accumulate
// into thread-local buffers.
void process_slice(const Params<float>& params, const PairDataset& dataset,
                   const std::vector<size_t>& order, size_t begin, size_t end,
                   const LossConfig& loss_cfg, Gradients<float>& grads, double& loss_sum) {
  for (size_t i = begin; i < end; ++i) {
    const PairSample& pair = dataset.pairs[order[i]];
    ForwardCache<float> left = encode_sentence(params, pair.left);
    ForwardCache<float> right = encode_sentence(params, pair.right);
    loss_sum += static_cast<double>(contrastive_loss(left.s, right.s, pair.y, loss_cfg));
    auto [g_left, g_right] = contrastive_loss_grad(left.s, right.s, pair.y, loss_cfg);
    backward(params, left, g_left, grads);
    backward(params, right, g_right, grads);
  }
}

void add_gradients(Gradients<float>& into, const Gradients<float>& from) {
  auto a = into.arrays();
  auto b = from.arrays();
  for (size_t i = 0; i < a.size(); ++i) {
    std::vector<float>& av = *a[i].values;
    const std::vector<float>& bv = *b[i].values;
    for (size_t k = 0; k < av.size(); ++k) av[k] += bv[k];
  }
}

}  // namespace

uint64_t params_checksum(const Params<float>& params) {
  uint64_t hash = 1469598103934665603ULL;
  for (auto ref : params.arrays()) {
    for (float value : *ref.values) {
      uint32_t bits;
      std::memcpy(&bits, &value, sizeof(bits));
      for (int shift = 0; shift < 32; shift += 8) {
        hash ^= (bits >> shift) & 0xFF;
        hash *= 1099511628211ULL;
      }
    }
  }
  return hash;
}

TrainReport train(Params<float>& params, const PairDataset& dataset, const TrainConfig& cfg) {
  const size_t n = dataset.pairs.size();
  if (n == 0) {
    throw Error(ErrorCategory::invalid_argument, "training dataset is empty");
  }
  size_t positives = 0;
  size_t negatives = 0;
  for (const PairSample& pair : dataset.pairs) {
    (pair.y == 1 ? positives : negatives) += 1;
  }
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCategory::invalid_argument,
                "training dataset needs both positive and negative pairs");
  }
  if (cfg.batch_size == 0 || cfg.batch_size > n) {
    throw Error(ErrorCategory::invalid_argument,
                "batch_size must lie in [1, dataset size = " + std::to_string(n) + "]");
  }
  if (cfg.epochs == 0) {
    throw Error(ErrorCategory::invalid_argument, "epochs must be >= 1");
  }
  if (!(cfg.learning_rate >= 0.0f) || !std::isfinite(cfg.learning_rate)) {
    throw Error(ErrorCategory::invalid_argument, "learning_rate must be finite and >= 0");
  }
  if (cfg.threads == 0) {
    throw Error(ErrorCategory::invalid_argument, "threads must be >= 1");
  }
  cfg.loss.validate();

  Rng rng(cfg.seed);
  AdamState adam;
  if (cfg.optimizer == OptimizerKind::adam) {
    adam.m = zeros_like(params);
    adam.v = zeros_like(params);
  }

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t(0));

  Gradients<float> grads = zeros_like(params);

  TrainReport report;
  for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(order);

    double epoch_sum = 0.0;
    size_t batch_index = 0;
    for (size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const size_t end = std::min(n, start + cfg.batch_size);
      fill_zero(grads);
      double batch_sum = 0.0;

      const size_t batch_len = end - start;
      const size_t workers = std::min<size_t>(cfg.threads, batch_len);
      if (workers <= 1) {
        process_slice(params, dataset, order, start, end, cfg.loss, grads, batch_sum);
      } else {
        // Fixed contiguous slices reduced in slice order: deterministic for a
        // fixed thread count, bitwise-identical to sequential only at 1.
        std::vector<Gradients<float>> local_grads(workers);
        std::vector<double> local_sums(workers, 0.0);
        std::vector<std::thread> pool;
        const size_t chunk = (batch_len + workers - 1) / workers;
        for (size_t w = 0; w < workers; ++w) {
          local_grads[w] = zeros_like(params);
          const size_t lo = start + w * chunk;
          const size_t hi = std::min(end, lo + chunk);
          pool.emplace_back([&, w, lo, hi] {
            process_slice(params, dataset, order, lo, hi, cfg.loss, local_grads[w],
                          local_sums[w]);
          });
        }
        for (std::thread& t : pool) t.join();
        for (size_t w = 0; w < workers; ++w) {
          add_gradients(grads, local_grads[w]);
          batch_sum += local_sums[w];
        }
      }

      if (!std::isfinite(batch_sum)) {
        throw Error(ErrorCategory::numeric,
                    "non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                        std::to_string(batch_index + 1));
      }
      if (cfg.clip_norm > 0.0f) {
        clip_by_global_norm(grads, cfg.clip_norm);
      }
      if (cfg.optimizer == OptimizerKind::adam) {
        adam_step(params, grads, adam, cfg);
      } else {
        sgd_step(params, grads, cfg.learning_rate);
      }
      check_params_finite(params, epoch, batch_index);
      epoch_sum += batch_sum;
    }

    report.epoch_sum_loss.push_back(epoch_sum);
    report.epoch_mean_loss.push_back(epoch_sum / static_cast<double>(n));
    report.epoch_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  report.param_checksum = params_checksum(params);
  return report;
}

}  // namespace siatext
