#include <doctest.h>

#include <cmath>

#include "error.hpp"
#include "net.hpp"
#include "rng.hpp"

using namespace siatext;

namespace {

NetConfig small_config(uint64_t seed) {
  NetConfig cfg;
  cfg.vocab_size = 10;
  cfg.embed_dim = 4;
  cfg.hidden_dim = 3;
  cfg.output_dim = 5;
  cfg.seed = seed;
  return cfg;
}

SentenceEncoding encoding_of(std::vector<uint32_t> indices) {
  SentenceEncoding enc;
  enc.indices = std::move(indices);
  enc.source_length = static_cast<uint32_t>(enc.indices.size());
  return enc;
}

}  // namespace

TEST_CASE("init produces the declared shapes") {
  Params<float> p = init_params<float>(small_config(1));
  CHECK(p.embedding.rows == 10);
  CHECK(p.embedding.cols == 4);
  CHECK(p.cell.w.rows == 12);
  CHECK(p.cell.w.cols == 4);
  CHECK(p.cell.u.rows == 12);
  CHECK(p.cell.u.cols == 3);
  CHECK(p.cell.b.size() == 12);
  CHECK(p.dense_w.rows == 5);
  CHECK(p.dense_w.cols == 6);
  CHECK(p.dense_b.size() == 5);
}

TEST_CASE("init is bitwise deterministic per seed") {
  Params<float> a = init_params<float>(small_config(7));
  Params<float> b = init_params<float>(small_config(7));
  auto aa = a.arrays();
  auto bb = b.arrays();
  for (size_t i = 0; i < aa.size(); ++i) {
    CHECK(*aa[i].values == *bb[i].values);
  }
  Params<float> c = init_params<float>(small_config(8));
  CHECK(a.embedding.data != c.embedding.data);
}

TEST_CASE("forget-gate bias starts at one, everything else at zero bias") {
  Params<float> p = init_params<float>(small_config(3));
  const size_t h = p.hidden_dim;
  for (size_t i = 0; i < 4 * h; ++i) {
    const bool forget = i >= kGateForget * h && i < (kGateForget + 1) * h;
    CHECK(p.cell.b[i] == (forget ? 1.0f : 0.0f));
  }
  for (float v : p.dense_b) CHECK(v == 0.0f);
}

TEST_CASE("init rejects zero dimensions") {
  NetConfig cfg = small_config(1);
  cfg.hidden_dim = 0;
  CHECK_THROWS_AS(init_params<float>(cfg), Error);
}

TEST_CASE("lstm_step at the zero-parameter fixed point") {
  const size_t h = 3, e = 2;
  CellParams<double> dir;
  dir.w = Matrix<double>(4 * h, e);
  dir.u = Matrix<double>(4 * h, h);
  dir.b.assign(4 * h, 0.0);

  std::vector<double> x = {0.4, -1.7};
  std::vector<double> h_prev(h, 0.0), c_prev(h, 0.0), h_out(h), c_out(h);
  lstm_step(dir, x.data(), h_prev.data(), c_prev.data(), h_out.data(), c_out.data());
  for (size_t k = 0; k < h; ++k) {
    CHECK(h_out[k] == doctest::Approx(0.0));
    CHECK(c_out[k] == doctest::Approx(0.0));
  }
}

// Independent scalar computation for H = 1 with all weights at 1, biases 0,
// x = 1 and zero initial state. The implementation must reproduce it exactly.
TEST_CASE("lstm_step against a hand-computed scalar step") {
  CellParams<double> dir;
  dir.w = Matrix<double>(4, 1);
  dir.u = Matrix<double>(4, 1);
  dir.b.assign(4, 0.0);
  for (double& v : dir.w.data) v = 1.0;
  for (double& v : dir.u.data) v = 1.0;

  double x = 1.0, h0 = 0.0, c0 = 0.0, h1 = 0.0, c1 = 0.0;
  lstm_step(dir, &x, &h0, &c0, &h1, &c1);

  const double sig = 1.0 / (1.0 + std::exp(-1.0));  // i = f = o
  const double cand = std::tanh(1.0);               // g
  const double c_expect = sig * 0.0 + sig * cand;
  const double h_expect = sig * std::tanh(c_expect);
  CHECK(c1 == doctest::Approx(c_expect).epsilon(1e-12));
  CHECK(h1 == doctest::Approx(h_expect).epsilon(1e-12));
  // the value the derivation pins down
  CHECK(h1 == doctest::Approx(0.3694).epsilon(1e-3));
  CHECK(c1 == doctest::Approx(0.5569).epsilon(1e-3));
}

TEST_CASE("property: hidden states stay inside (-1, 1)") {
  Rng rng(55);
  NetConfig cfg = small_config(21);
  Params<float> p = init_params<float>(cfg);
  // exaggerate the weights; the activation bounds must still hold
  for (float& v : p.cell.w.data) v *= 40.0f;
  for (float& v : p.cell.u.data) v *= 40.0f;
  const size_t h = p.hidden_dim;
  std::vector<float> h_prev(h), c_prev(h), h_out(h), c_out(h);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<float> x(p.embed_dim);
    for (float& v : x) v = static_cast<float>(rng.symmetric_unit() * 3.0);
    for (float& v : h_prev) v = static_cast<float>(rng.symmetric_unit());
    for (float& v : c_prev) v = static_cast<float>(rng.symmetric_unit() * 2.0);
    lstm_step(p.cell, x.data(), h_prev.data(), c_prev.data(), h_out.data(), c_out.data());
    for (size_t k = 0; k < h; ++k) {
      CHECK(h_out[k] > -1.0f);
      CHECK(h_out[k] < 1.0f);
      CHECK(std::isfinite(c_out[k]));
    }
  }
}

TEST_CASE("palindromic input gives equal forward and backward readouts") {
  Params<float> p = init_params<float>(small_config(13));
  ForwardCache<float> cache = encode_sentence(p, encoding_of({3, 5, 3}));
  const size_t h = p.hidden_dim;
  for (size_t k = 0; k < h; ++k) {
    CHECK(cache.concat[k] == cache.concat[h + k]);
  }
}

TEST_CASE("zeroed dense layer projects everything to zero") {
  Params<float> p = init_params<float>(small_config(17));
  std::fill(p.dense_w.data.begin(), p.dense_w.data.end(), 0.0f);
  std::fill(p.dense_b.begin(), p.dense_b.end(), 0.0f);
  ForwardCache<float> cache = encode_sentence(p, encoding_of({1, 2, 3, 4}));
  for (float v : cache.s) CHECK(v == 0.0f);
}

TEST_CASE("property: projections are non-negative and finite") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    Params<float> p = init_params<float>(small_config(rng.next_u64()));
    std::vector<uint32_t> indices;
    const size_t len = 1 + rng.below(12);
    for (size_t i = 0; i < len; ++i) {
      indices.push_back(static_cast<uint32_t>(rng.below(p.vocab_size)));
    }
    ForwardCache<float> cache = encode_sentence(p, encoding_of(std::move(indices)));
    for (float v : cache.s) {
      CHECK(v >= 0.0f);
      CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("siamese symmetry: one parameter set, bitwise-equal repeat encodings") {
  Params<float> p = init_params<float>(small_config(29));
  SentenceEncoding enc = encoding_of({2, 7, 1, 1, 9});
  ForwardCache<float> branch_one = encode_sentence(p, enc);
  ForwardCache<float> branch_two = encode_sentence(p, enc);
  CHECK(branch_one.s == branch_two.s);
  CHECK(branch_one.concat == branch_two.concat);
}

// One shared cell drives both passes, so running the reversed sequence through
// the forward pass reproduces the backward readout bitwise for any params.
TEST_CASE("reversal duality") {
  Params<float> p = init_params<float>(small_config(37));
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<uint32_t> indices;
    const size_t len = 1 + rng.below(9);
    for (size_t i = 0; i < len; ++i) {
      indices.push_back(static_cast<uint32_t>(rng.below(p.vocab_size)));
    }
    std::vector<uint32_t> reversed(indices.rbegin(), indices.rend());

    ForwardCache<float> fwd_cache = encode_sentence(p, encoding_of(std::move(indices)));
    ForwardCache<float> rev_cache = encode_sentence(p, encoding_of(std::move(reversed)));

    const size_t h = p.hidden_dim;
    for (size_t k = 0; k < h; ++k) {
      // encode(reverse(x)).fw == encode(x).bw
      CHECK(rev_cache.concat[k] == fwd_cache.concat[h + k]);
    }
  }
}

TEST_CASE("encode_sentence validates its input") {
  Params<float> p = init_params<float>(small_config(41));
  CHECK_THROWS_AS(encode_sentence(p, encoding_of({})), Error);
  CHECK_THROWS_AS(encode_sentence(p, encoding_of({1, 99})), Error);
}

TEST_CASE("long sequences stay finite") {
  Rng rng(47);
  Params<float> p = init_params<float>(small_config(47));
  std::vector<uint32_t> indices;
  for (int i = 0; i < 200; ++i) {
    indices.push_back(static_cast<uint32_t>(rng.below(p.vocab_size)));
  }
  ForwardCache<float> cache = encode_sentence(p, encoding_of(std::move(indices)));
  for (float v : cache.s) CHECK(std::isfinite(v));
  for (float v : cache.fw.hidden.data) CHECK(std::isfinite(v));
  for (float v : cache.bw.cells.data) CHECK(std::isfinite(v));
}
