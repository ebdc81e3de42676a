#include "scanleak/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scanleak/errors.hpp"
#include "scanleak/rng.hpp"

namespace scanleak::nn {

namespace {

[[noreturn]] void bail(const std::string& msg) { throw DomainError(msg); }

void check_input(const Tensor& x, const std::vector<std::size_t>& per_sample) {
  bool ok = x.ndim() == per_sample.size() + 1 && x.shape[0] > 0;
  for (std::size_t i = 0; ok && i < per_sample.size(); ++i)
    ok = x.shape[i + 1] == per_sample[i];
  if (!ok) bail("model: batch shape does not match the declared input shape");
}

std::size_t conv_len(std::size_t len, std::size_t kernel, std::size_t stride,
                     const char* what) {
  if (len < kernel)
    bail(std::string(what) + ": input length " + std::to_string(len) +
         " shorter than kernel " + std::to_string(kernel));
  return (len - kernel) / stride + 1;
}

}  // namespace

Model::Model(ModelSpec spec, std::uint64_t init_seed) : spec_(std::move(spec)) {
  if (spec_.input_shape.empty()) bail("model: empty input shape");
  if (spec_.layers.empty()) bail("model: no layers");
  for (const LayerSpec& ls : spec_.layers)
    layers_.push_back(make_layer(ls.kind, ls.args));
  output_shape();  // validates shape compatibility across the whole stack
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Rng rng(derive_seed(init_seed, "layer-init", i));
    layers_[i]->init(rng);
  }
}

Tensor Model::predict(const Tensor& x) const {
  check_input(x, spec_.input_shape);
  Tensor cur = x;
  for (const auto& layer : layers_) cur = layer->eval(cur);
  return cur;
}

std::vector<int> Model::predict_labels(const Tensor& x) const {
  const Tensor p = predict(x);
  std::vector<int> out(p.shape[0]);
  for (std::size_t b = 0; b < p.shape[0]; ++b) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < p.shape[1]; ++j)
      if (p.at(b, j) > p.at(b, best)) best = j;
    out[b] = static_cast<int>(best);
  }
  return out;
}

Tensor Model::train_forward_logits(const Tensor& x, Rng& rng) {
  check_input(x, spec_.input_shape);
  Tensor cur = x;
  for (auto& layer : layers_) cur = layer->train_fwd(cur, rng);
  return cur;
}

void Model::backward_from_logits(const Tensor& grad_logits) {
  Tensor g = grad_logits;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->train_bwd(g);
}

double Model::train_loss(const Tensor& x, const std::vector<int>& labels) {
  Rng rng(0);  // consumed by dropout only; fixed so repeated probes agree
  const Tensor logits = train_forward_logits(x, rng);
  return cross_entropy(logits, labels, nullptr);
}

std::vector<ParamRef> Model::parameters() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (ParamRef p : layers_[i]->params()) {
      p.name = "layer" + std::to_string(i) + "." + p.name;
      out.push_back(p);
    }
  }
  return out;
}

std::vector<ParamRef> Model::state() {
  std::vector<ParamRef> out = parameters();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (ParamRef p : layers_[i]->buffers()) {
      p.name = "layer" + std::to_string(i) + "." + p.name;
      out.push_back(p);
    }
  }
  return out;
}

void Model::zero_grad() {
  for (auto& layer : layers_)
    for (ParamRef p : layer->params())
      if (p.grad != nullptr) p.grad->fill(0.0);
}

void Model::set_dropout_enabled(bool enabled) {
  for (auto& layer : layers_) nn::set_dropout_enabled(*layer, enabled);
}

std::size_t Model::n_classes() const {
  std::size_t p = 1;
  for (std::size_t d : output_shape()) p *= d;
  return p;
}

std::vector<std::size_t> Model::output_shape() const {
  std::vector<std::size_t> cur = spec_.input_shape;
  for (const auto& layer : layers_) cur = layer->out_shape(cur);
  return cur;
}

Tensor softmax_rows(const Tensor& logits) {
  if (logits.ndim() != 2) bail("softmax_rows: expected {batch, classes}");
  Tensor p = logits;
  for (std::size_t b = 0; b < p.shape[0]; ++b) {
    double hi = p.at(b, 0);
    for (std::size_t j = 1; j < p.shape[1]; ++j) hi = std::max(hi, p.at(b, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < p.shape[1]; ++j) {
      p.at(b, j) = std::exp(p.at(b, j) - hi);
      sum += p.at(b, j);
    }
    for (std::size_t j = 0; j < p.shape[1]; ++j) p.at(b, j) /= sum;
  }
  return p;
}

double cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                     Tensor* grad_logits) {
  if (logits.ndim() != 2) bail("cross_entropy: expected {batch, classes}");
  const std::size_t batch = logits.shape[0];
  const std::size_t classes = logits.shape[1];
  if (labels.size() != batch) bail("cross_entropy: label count mismatch");
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int y = labels[b];
    if (y < 0 || static_cast<std::size_t>(y) >= classes)
      bail("cross_entropy: label " + std::to_string(y) + " out of range");
    // log-sum-exp keeps the per-sample loss finite for extreme logits
    double hi = logits.at(b, 0);
    for (std::size_t j = 1; j < classes; ++j) hi = std::max(hi, logits.at(b, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < classes; ++j)
      sum += std::exp(logits.at(b, j) - hi);
    loss += std::log(sum) + hi - logits.at(b, static_cast<std::size_t>(y));
  }
  loss /= static_cast<double>(batch);
  if (grad_logits != nullptr) {
    *grad_logits = softmax_rows(logits);
    for (std::size_t b = 0; b < batch; ++b)
      grad_logits->at(b, static_cast<std::size_t>(labels[b])) -= 1.0;
    for (double& g : grad_logits->data) g /= static_cast<double>(batch);
  }
  return loss;
}

// ---- canonical architectures ------------------------------------------------

namespace {

LayerSpec dense_spec(std::size_t in, std::size_t out) {
  return {"dense",
          {{"in", static_cast<double>(in)}, {"out", static_cast<double>(out)}}};
}

}  // namespace

ModelSpec mlp_spec(std::size_t n_input, std::size_t n_class) {
  if (n_input < 1) bail("mlp: n_input must be >= 1");
  if (n_class < 2) bail("mlp: n_class must be >= 2");
  ModelSpec s;
  s.input_shape = {n_input};
  s.layers.push_back({"flatten", {}});
  auto stage = [&s](std::size_t in, std::size_t out, double drop) {
    s.layers.push_back(dense_spec(in, out));
    s.layers.push_back({"relu", {}});
    s.layers.push_back({"batchnorm1d",
                        {{"features", static_cast<double>(out)},
                         {"momentum", 0.1},
                         {"eps", 1e-5}}});
    s.layers.push_back({"dropout", {{"rate", drop}}});
  };
  stage(n_input, 512, 0.3);
  stage(512, 256, 0.3);
  stage(256, 128, 0.2);
  s.layers.push_back(dense_spec(128, n_class));
  s.layers.push_back({"softmax_output", {}});
  return s;
}

ModelSpec cnn_spec(std::size_t n_input, std::size_t n_class) {
  if (n_class < 2) bail("cnn: n_class must be >= 2");
  const std::size_t l1 = conv_len(n_input, 8, 4, "cnn conv 1");
  const std::size_t p1 = conv_len(l1, 4, 4, "cnn pool 1");
  const std::size_t l2 = conv_len(p1, 8, 4, "cnn conv 2");
  const std::size_t p2 = conv_len(l2, 4, 4, "cnn pool 2");
  ModelSpec s;
  s.input_shape = {1, n_input};
  auto conv = [&s](std::size_t in_ch, std::size_t out_ch) {
    s.layers.push_back({"conv1d",
                        {{"in_ch", static_cast<double>(in_ch)},
                         {"out_ch", static_cast<double>(out_ch)},
                         {"kernel", 8.0},
                         {"stride", 4.0},
                         {"padding", 0.0}}});
    s.layers.push_back({"relu", {}});
    s.layers.push_back({"maxpool1d", {{"kernel", 4.0}, {"stride", 4.0}}});
  };
  conv(1, 16);
  conv(16, 32);
  s.layers.push_back({"flatten", {}});
  s.layers.push_back(dense_spec(32 * p2, 128));
  s.layers.push_back({"relu", {}});
  s.layers.push_back({"dropout", {{"rate", 0.5}}});
  s.layers.push_back(dense_spec(128, n_class));
  s.layers.push_back({"softmax_output", {}});
  return s;
}

ModelSpec transformer_spec(std::size_t n_input, std::size_t n_class,
                           std::size_t n_enc, std::size_t n_heads) {
  if (n_class < 2) bail("transformer: n_class must be >= 2");
  if (n_enc < 1) bail("transformer: need at least one encoder block");
  const std::size_t l1 = conv_len(n_input, 7, 2, "transformer conv 1");
  const std::size_t l2 = conv_len(l1, 5, 2, "transformer conv 2");
  constexpr std::size_t kDModel = 256, kDFf = 1024, kMaxLen = 5000;
  if (l2 > kMaxLen)
    bail("transformer: post-conv sequence length " + std::to_string(l2) +
         " exceeds max_len " + std::to_string(kMaxLen));
  ModelSpec s;
  s.input_shape = {1, n_input};
  s.layers.push_back({"conv1d",
                      {{"in_ch", 1.0},
                       {"out_ch", 64.0},
                       {"kernel", 7.0},
                       {"stride", 2.0},
                       {"padding", 0.0}}});
  s.layers.push_back({"conv1d",
                      {{"in_ch", 64.0},
                       {"out_ch", static_cast<double>(kDModel)},
                       {"kernel", 5.0},
                       {"stride", 2.0},
                       {"padding", 0.0}}});
  s.layers.push_back({"positional_encoding",
                      {{"d_model", static_cast<double>(kDModel)},
                       {"max_len", static_cast<double>(kMaxLen)}}});
  for (std::size_t i = 0; i < n_enc; ++i)
    s.layers.push_back({"encoder_block",
                        {{"d_model", static_cast<double>(kDModel)},
                         {"d_ff", static_cast<double>(kDFf)},
                         {"n_heads", static_cast<double>(n_heads)}}});
  s.layers.push_back(
      {"attention_pool", {{"d_model", static_cast<double>(kDModel)}}});
  s.layers.push_back(dense_spec(kDModel, 512));
  s.layers.push_back({"relu", {}});
  s.layers.push_back(dense_spec(512, 256));
  s.layers.push_back({"relu", {}});
  s.layers.push_back(dense_spec(256, n_class));
  s.layers.push_back({"softmax_output", {}});
  return s;
}

Model build_model(const ModelSpec& spec, std::uint64_t init_seed) {
  return Model(spec, init_seed);
}

std::size_t parameter_count(Model& model) {
  std::size_t total = 0;
  for (const ParamRef& p : model.parameters()) total += p.value->numel();
  return total;
}

double gradient_check(Model& model, const Tensor& x,
                      const std::vector<int>& labels, double eps) {
  model.set_dropout_enabled(false);
  model.zero_grad();
  Rng rng(0);
  const Tensor logits = model.train_forward_logits(x, rng);
  Tensor g;
  cross_entropy(logits, labels, &g);
  model.backward_from_logits(g);

  double worst = 0.0;
  for (ParamRef p : model.parameters()) {
    for (std::size_t i = 0; i < p.value->numel(); ++i) {
      const double saved = (*p.value)[i];
      (*p.value)[i] = saved + eps;
      const double up = model.train_loss(x, labels);
      (*p.value)[i] = saved - eps;
      const double down = model.train_loss(x, labels);
      (*p.value)[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = (*p.grad)[i];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  model.set_dropout_enabled(true);
  return worst;
}

}  // namespace scanleak::nn
