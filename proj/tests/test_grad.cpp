#include <doctest.h>

#include <cmath>

#include "grad.hpp"
#include "loss.hpp"
#include "net.hpp"
#include "rng.hpp"

using namespace siatext;

namespace {

// The small model the gradient oracle runs on.
NetConfig oracle_config(uint64_t seed) {
  NetConfig cfg;
  cfg.vocab_size = 12;
  cfg.embed_dim = 3;
  cfg.hidden_dim = 4;
  cfg.output_dim = 6;
  cfg.seed = seed;
  return cfg;
}

SentenceEncoding random_encoding(Rng& rng, uint32_t vocab_size, size_t max_len) {
  SentenceEncoding enc;
  const size_t len = 1 + rng.below(max_len);
  for (size_t i = 0; i < len; ++i) {
    enc.indices.push_back(static_cast<uint32_t>(rng.below(vocab_size)));
  }
  enc.source_length = static_cast<uint32_t>(len);
  return enc;
}

// Full siamese pair loss as a pure function of the shared parameters.
double pair_loss(const Params<double>& p, const SentenceEncoding& a,
                 const SentenceEncoding& b, int y, const LossConfig& cfg) {
  std::vector<double> s1 = project(p, a);
  std::vector<double> s2 = project(p, b);
  return contrastive_loss(s1, s2, y, cfg);
}

// Analytic gradient of the pair loss: both branch contributions summed into
// one shared buffer.
Gradients<double> pair_gradient(const Params<double>& p, const SentenceEncoding& a,
                                const SentenceEncoding& b, int y, const LossConfig& cfg) {
  ForwardCache<double> left = encode_sentence(p, a);
  ForwardCache<double> right = encode_sentence(p, b);
  auto [g1, g2] = contrastive_loss_grad(left.s, right.s, y, cfg);
  Gradients<double> acc = zeros_like(p);
  backward(p, left, g1, acc);
  backward(p, right, g2, acc);
  return acc;
}

// Trial states too close to a ReLU or hinge kink are re-drawn: the derivative
// does not exist there and central differences would step across it.
bool near_kink(const Params<double>& p, const SentenceEncoding& a, const SentenceEncoding& b,
               int y, const LossConfig& cfg) {
  ForwardCache<double> left = encode_sentence(p, a);
  ForwardCache<double> right = encode_sentence(p, b);
  for (double z : left.dense_pre) {
    if (std::abs(z) < 1e-3) return true;
  }
  for (double z : right.dense_pre) {
    if (std::abs(z) < 1e-3) return true;
  }
  const double c = cosine(left.s, right.s);
  if (y == -1 && std::abs(c - cfg.margin) < 1e-3) return true;
  if (std::abs(c) > 0.999) return true;
  return false;
}

double max_relative_error(const Gradients<double>& analytic, const Gradients<double>& fd) {
  double worst = 0.0;
  auto a = analytic.arrays();
  auto f = fd.arrays();
  for (size_t i = 0; i < a.size(); ++i) {
    const std::vector<double>& av = *a[i].values;
    const std::vector<double>& fv = *f[i].values;
    for (size_t k = 0; k < av.size(); ++k) {
      const double denom = std::max({std::abs(av[k]), std::abs(fv[k]), 1e-4});
      worst = std::max(worst, std::abs(av[k] - fv[k]) / denom);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("zero upstream gradient backpropagates to exactly zero") {
  Params<double> p = init_params<double>(oracle_config(5));
  Rng rng(5);
  ForwardCache<double> cache = encode_sentence(p, random_encoding(rng, p.vocab_size, 5));
  Gradients<double> grads = backward(p, cache, std::vector<double>(p.output_dim, 0.0));
  for (auto ref : grads.arrays()) {
    for (double v : *ref.values) CHECK(v == 0.0);
  }
}

TEST_CASE("ReLU kills upstream gradient where the pre-activation is negative") {
  Rng rng(6);
  for (int attempt = 0; attempt < 50; ++attempt) {
    Params<double> p = init_params<double>(oracle_config(rng.next_u64()));
    ForwardCache<double> cache = encode_sentence(p, random_encoding(rng, p.vocab_size, 5));
    size_t dead = p.output_dim;
    for (size_t i = 0; i < cache.dense_pre.size(); ++i) {
      if (cache.dense_pre[i] < -1e-6) {
        dead = i;
        break;
      }
    }
    if (dead == p.output_dim) continue;

    std::vector<double> grad_s(p.output_dim, 0.0);
    grad_s[dead] = 1.7;
    Gradients<double> grads = backward(p, cache, grad_s);
    for (auto ref : grads.arrays()) {
      for (double v : *ref.values) CHECK(v == 0.0);
    }
    return;
  }
  FAIL("never found a negative dense pre-activation");
}

TEST_CASE("finite differences of a constant function are zero") {
  Params<double> p = init_params<double>(oracle_config(77));
  auto constant = [](const Params<double>&) { return 3.5; };
  Gradients<double> g = finite_difference_grad<double>(constant, p, 1e-5);
  for (auto ref : g.arrays()) {
    for (double v : *ref.values) CHECK(v == 0.0);
  }
}

TEST_CASE("finite differences of the entry sum are all ones") {
  Params<double> p = init_params<double>(oracle_config(78));
  auto entry_sum = [](const Params<double>& q) {
    double acc = 0.0;
    for (auto ref : q.arrays()) {
      for (double v : *ref.values) acc += v;
    }
    return acc;
  };
  Gradients<double> g = finite_difference_grad<double>(entry_sum, p, 1e-5);
  for (auto ref : g.arrays()) {
    for (double v : *ref.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("finite differences restore the parameters bitwise") {
  Params<double> p = init_params<double>(oracle_config(79));
  Params<double> copy = p;
  auto noop = [](const Params<double>& q) { return q.embedding.data[0] * 2.0; };
  finite_difference_grad<double>(noop, p, 1e-5);
  auto a = p.arrays();
  auto b = copy.arrays();
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(*a[i].values == *b[i].values);
  }
}

// The module's central property: analytic BPTT of the full siamese contrastive
// loss against the central-difference oracle on the small model.
TEST_CASE("gradient check: analytic BPTT matches central differences") {
  Rng rng(90210);
  LossConfig cfg;
  const double eps = 1e-5;
  int done = 0;
  while (done < 10) {
    Params<double> p = init_params<double>(oracle_config(rng.next_u64()));
    SentenceEncoding a = random_encoding(rng, p.vocab_size, 5);
    SentenceEncoding b = random_encoding(rng, p.vocab_size, 5);
    const int y = rng.below(2) == 0 ? 1 : -1;
    if (near_kink(p, a, b, y, cfg)) continue;
    ++done;

    Gradients<double> analytic = pair_gradient(p, a, b, y, cfg);
    auto loss_fn = [&](const Params<double>& q) { return pair_loss(q, a, b, y, cfg); };
    Gradients<double> fd = finite_difference_grad<double>(loss_fn, p, eps);

    CHECK(max_relative_error(analytic, fd) < 1e-4);
  }
}

TEST_CASE("shared-parameter additivity: pair gradient is the sum of branch gradients") {
  Rng rng(314);
  LossConfig cfg;
  Params<double> p = init_params<double>(oracle_config(314));
  SentenceEncoding a = random_encoding(rng, p.vocab_size, 5);
  SentenceEncoding b = random_encoding(rng, p.vocab_size, 5);

  ForwardCache<double> left = encode_sentence(p, a);
  ForwardCache<double> right = encode_sentence(p, b);
  auto [g1, g2] = contrastive_loss_grad(left.s, right.s, 1, cfg);

  Gradients<double> full = zeros_like(p);
  backward(p, left, g1, full);
  backward(p, right, g2, full);

  Gradients<double> left_only = backward(p, left, g1);
  Gradients<double> right_only = backward(p, right, g2);

  auto f = full.arrays();
  auto l = left_only.arrays();
  auto r = right_only.arrays();
  for (size_t i = 0; i < f.size(); ++i) {
    for (size_t k = 0; k < f[i].values->size(); ++k) {
      const double sum = (*l[i].values)[k] + (*r[i].values)[k];
      CHECK((*f[i].values)[k] == doctest::Approx(sum).epsilon(1e-12));
    }
  }
}

TEST_CASE("a self-pair contributes exactly twice the single branch") {
  Rng rng(2718);
  LossConfig cfg;
  Params<double> p = init_params<double>(oracle_config(2718));
  SentenceEncoding x = random_encoding(rng, p.vocab_size, 5);

  ForwardCache<double> branch = encode_sentence(p, x);

  // The loss-derived upstream of an identical positive pair (the cosine
  // gradient is zero at parallel vectors, so this degenerates to 0 == 2*0).
  auto [g1, g2] = contrastive_loss_grad(branch.s, branch.s, 1, cfg);
  Gradients<double> pair_grads = zeros_like(p);
  backward(p, branch, g1, pair_grads);
  backward(p, branch, g2, pair_grads);
  Gradients<double> single = backward(p, branch, g1);

  // A synthetic nonzero upstream exercises the shared buffer for real.
  std::vector<double> upstream(p.output_dim);
  for (double& v : upstream) v = rng.symmetric_unit();
  Gradients<double> twice = zeros_like(p);
  backward(p, branch, upstream, twice);
  backward(p, branch, upstream, twice);
  Gradients<double> once = backward(p, branch, upstream);

  for (auto [acc, one] : {std::pair{&pair_grads, &single}, std::pair{&twice, &once}}) {
    auto a = acc->arrays();
    auto s = one->arrays();
    for (size_t i = 0; i < a.size(); ++i) {
      for (size_t k = 0; k < a[i].values->size(); ++k) {
        CHECK((*a[i].values)[k] ==
              doctest::Approx(2.0 * (*s[i].values)[k]).epsilon(1e-6));
      }
    }
  }
}
