#include <doctest.h>

#include <cmath>
#include <vector>

#include "scanleak/nn/layers.hpp"
#include "scanleak/nn/model.hpp"

using namespace scanleak;
using namespace scanleak::nn;

namespace {

Tensor random_input(std::vector<std::size_t> shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

Tensor* find_param(nn::Layer& layer, const std::string& name) {
  for (auto& p : layer.params())
    if (p.name == name) return p.value;
  for (auto& p : layer.buffers())
    if (p.name == name) return p.value;
  REQUIRE(false);
  return nullptr;
}

}  // namespace

TEST_SUITE("nn_layers") {

TEST_CASE("dense computes x W^T + b") {
  auto layer = make_dense(3, 2);
  Rng rng(31);
  layer->init(rng);
  const Tensor& w = *find_param(*layer, "weight");  // {out, in}
  const Tensor& b = *find_param(*layer, "bias");

  const Tensor x = random_input({4, 3}, 32);
  const Tensor y = layer->eval(x);
  REQUIRE(y.shape == std::vector<std::size_t>{4, 2});
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double want = b[j];
      for (std::size_t k = 0; k < 3; ++k) want += x.at(i, k) * w.at(j, k);
      CHECK(y.at(i, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }
  CHECK(layer->out_shape({3}) == std::vector<std::size_t>{2});
  CHECK_THROWS_AS(layer->out_shape({4}), DomainError);
}

TEST_CASE("dense init is bounded by 1/sqrt(fan_in) with zero biases") {
  auto layer = make_dense(64, 16);
  Rng rng(33);
  layer->init(rng);
  const Tensor& w = *find_param(*layer, "weight");
  const Tensor& b = *find_param(*layer, "bias");
  const double bound = 1.0 / std::sqrt(64.0);
  double lo = 0.0, hi = 0.0;
  for (double v : w.data) {
    CHECK(std::abs(v) <= bound);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo < -0.5 * bound);  // actually spreads over the interval
  CHECK(hi > 0.5 * bound);
  for (double v : b.data) CHECK(v == 0.0);
}

TEST_CASE("relu clamps negatives only") {
  auto layer = make_relu();
  Tensor x({1, 5});
  x.data = {-2.0, -0.5, 0.0, 0.5, 2.0};
  const Tensor y = layer->eval(x);
  CHECK(y.data == std::vector<double>{0.0, 0.0, 0.0, 0.5, 2.0});
  CHECK(layer->out_shape({5}) == std::vector<std::size_t>{5});
}

TEST_CASE("conv1d cross-correlates with stride and padding") {
  auto layer = make_conv1d(2, 1, 3, 2, 1);
  Rng rng(34);
  layer->init(rng);
  const Tensor& w = *find_param(*layer, "weight");  // {out_ch, in_ch, k}
  const Tensor& b = *find_param(*layer, "bias");

  const Tensor x = random_input({1, 2, 6}, 35);  // {B, C, L}
  const Tensor y = layer->eval(x);
  // L_out = floor((6 + 2*1 - 3)/2) + 1 = 3
  REQUIRE(y.shape == std::vector<std::size_t>{1, 1, 3});
  for (std::size_t o = 0; o < 3; ++o) {
    double want = b[0];
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t k = 0; k < 3; ++k) {
        const auto pos = static_cast<long long>(o * 2 + k) - 1;  // minus padding
        if (pos < 0 || pos >= 6) continue;
        want += x.at(0, c, static_cast<std::size_t>(pos)) * w.at(0, c, k);
      }
    }
    CHECK(y.at(0, 0, o) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("conv1d rejects inputs shorter than its kernel") {
  auto layer = make_conv1d(1, 4, 8, 4);
  CHECK_THROWS_AS(layer->out_shape({1, 7}), DomainError);
  CHECK(layer->out_shape({1, 8}) == std::vector<std::size_t>{4, 1});
}

TEST_CASE("maxpool takes window maxima") {
  auto layer = make_maxpool1d(2, 2);
  Tensor x({1, 1, 6});
  x.data = {1.0, 3.0, -4.0, -2.0, 5.0, 0.0};
  const Tensor y = layer->eval(x);
  REQUIRE(y.shape == std::vector<std::size_t>{1, 1, 3});
  CHECK(y.data == std::vector<double>{3.0, -2.0, 5.0});
}

TEST_CASE("flatten concatenates per-sample dims") {
  auto layer = make_flatten();
  const Tensor x = random_input({2, 3, 4}, 36);
  const Tensor y = layer->eval(x);
  CHECK(y.shape == std::vector<std::size_t>{2, 12});
  CHECK(y.data == x.data);
  CHECK(layer->out_shape({3, 4}) == std::vector<std::size_t>{12});
}

TEST_CASE("batchnorm normalizes batches in training and uses running stats in eval") {
  auto layer = make_batchnorm1d(3);
  Rng rng(37);
  layer->init(rng);

  Tensor x({8, 3});
  Rng data_rng(38);
  for (double& v : x.data) v = data_rng.normal(2.0, 3.0);

  const Tensor y = layer->train_fwd(x, rng);
  // Batch statistics per feature must come out standardized (gamma=1, beta=0
  // right after init).
  for (std::size_t f = 0; f < 3; ++f) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 8; ++i) mean += y.at(i, f);
    mean /= 8.0;
    double var = 0.0;
    for (std::size_t i = 0; i < 8; ++i)
      var += (y.at(i, f) - mean) * (y.at(i, f) - mean);
    var /= 8.0;
    CHECK(std::abs(mean) < 1e-9);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
  }

  // Eval mode uses the running estimates: after one training batch with
  // momentum 0.1, running_mean = 0.9 * 0 + 0.1 * batch_mean.
  const Tensor& rm = *find_param(*layer, "running_mean");
  double batch_mean0 = 0.0;
  for (std::size_t i = 0; i < 8; ++i) batch_mean0 += x.at(i, 0);
  batch_mean0 /= 8.0;
  CHECK(rm[0] == doctest::Approx(0.1 * batch_mean0).epsilon(1e-9));

  const Tensor z = layer->eval(x);
  CHECK(z.shape == x.shape);
  bool differs = false;
  for (std::size_t i = 0; i < z.data.size(); ++i)
    if (z.data[i] != y.data[i]) differs = true;
  CHECK(differs);
}

TEST_CASE("dropout is identity in eval and rescales in training") {
  auto layer = make_dropout(0.5);
  const Tensor x = random_input({4, 50}, 39);
  const Tensor y = layer->eval(x);
  CHECK(y.data == x.data);

  Rng rng(40);
  const Tensor t = layer->train_fwd(x, rng);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    if (t.data[i] == 0.0) {
      ++zeros;
    } else {
      // surviving values are scaled by 1/(1-rate)
      CHECK(t.data[i] == doctest::Approx(x.data[i] * 2.0).epsilon(1e-12));
    }
  }
  CHECK(zeros > 50);
  CHECK(zeros < 150);

  // Globally disabled dropout: training path becomes the identity too.
  nn::set_dropout_enabled(*layer, false);
  const Tensor u = layer->train_fwd(x, rng);
  CHECK(u.data == x.data);
}

TEST_CASE("positional encoding adds interleaved sinusoids") {
  auto layer = make_positional_encoding(8, 100);
  // Input is channels-first {batch, d_model, len}; output is sequence-major.
  Tensor x({1, 8, 4});
  x.fill(0.0);
  const Tensor y = layer->eval(x);
  for (std::size_t pos = 0; pos < 4; ++pos) {
    for (std::size_t j = 0; j < 8; ++j) {
      const double freq =
          std::pow(10000.0, -static_cast<double>(2 * (j / 2)) / 8.0);
      const double want = (j % 2 == 0)
                              ? std::sin(static_cast<double>(pos) * freq)
                              : std::cos(static_cast<double>(pos) * freq);
      CHECK(y.at(0, pos, j) == doctest::Approx(want).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(layer->out_shape({8, 101}), DomainError);
}

TEST_CASE("attention pooling weights form a distribution over positions") {
  auto layer = make_attention_pool(16);
  Rng rng(41);
  layer->init(rng);
  const Tensor x = random_input({3, 5, 16}, 42);
  const Tensor w = nn::attention_pool_weights(*layer, x);
  REQUIRE(w.shape == std::vector<std::size_t>{3, 5});
  for (std::size_t b = 0; b < 3; ++b) {
    double sum = 0.0;
    for (std::size_t l = 0; l < 5; ++l) {
      CHECK(w.at(b, l) >= 0.0);
      sum += w.at(b, l);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }

  // The pooled output is the weight-blended input rows.
  const Tensor y = layer->eval(x);
  REQUIRE(y.shape == std::vector<std::size_t>{3, 16});
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t d = 0; d < 16; ++d) {
      double want = 0.0;
      for (std::size_t l = 0; l < 5; ++l) want += w.at(b, l) * x.at(b, l, d);
      CHECK(y.at(b, d) == doctest::Approx(want).epsilon(1e-9));
    }
  }

  auto dense = make_dense(2, 2);
  CHECK_THROWS_AS(nn::attention_pool_weights(*dense, x), DomainError);
}

TEST_CASE("softmax rows are normalized and shift-invariant") {
  Tensor logits({2, 3});
  logits.data = {1.0, 2.0, 3.0, -5.0, 0.0, 5.0};
  const Tensor p = nn::softmax_rows(logits);
  for (std::size_t i = 0; i < 2; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(p.at(i, j) > 0.0);
      sum += p.at(i, j);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  Tensor shifted = logits;
  for (std::size_t j = 0; j < 3; ++j) shifted.at(0, j) += 100.0;
  const Tensor q = nn::softmax_rows(shifted);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(q.at(0, j) == doctest::Approx(p.at(0, j)).epsilon(1e-9));
}

TEST_CASE("cross entropy agrees with the log-softmax definition") {
  Tensor logits({2, 3});
  logits.data = {0.5, -0.25, 1.5, 2.0, 0.0, -1.0};
  const std::vector<int> labels{2, 0};
  const double got = nn::cross_entropy(logits, labels);
  double want = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < 3; ++j) denom += std::exp(logits.at(i, j));
    want -= std::log(std::exp(logits.at(i, static_cast<std::size_t>(labels[i]))) / denom);
  }
  want /= 2.0;
  CHECK(got == doctest::Approx(want).epsilon(1e-10));

  // Gradient: softmax minus one-hot, averaged over the batch.
  Tensor grad;
  nn::cross_entropy(logits, labels, &grad);
  const Tensor p = nn::softmax_rows(logits);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const double onehot = (static_cast<int>(j) == labels[i]) ? 1.0 : 0.0;
      CHECK(grad.at(i, j) ==
            doctest::Approx((p.at(i, j) - onehot) / 2.0).epsilon(1e-10));
    }
}

TEST_CASE("layers rebuild from kind and config") {
  auto conv = make_conv1d(3, 5, 7, 2, 1);
  auto clone = nn::make_layer(conv->kind(), conv->config());
  CHECK(clone->kind() == "conv1d");
  CHECK(clone->out_shape({3, 20}) == conv->out_shape({3, 20}));

  auto bn = make_batchnorm1d(12, 0.2, 1e-4);
  auto bn2 = nn::make_layer(bn->kind(), bn->config());
  CHECK(bn2->out_shape({12}) == std::vector<std::size_t>{12});
  CHECK_THROWS_AS(nn::make_layer("telepathy", {}), DomainError);
}

}  // TEST_SUITE
