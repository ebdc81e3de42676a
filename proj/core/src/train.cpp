#include "scanleak/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "scanleak/errors.hpp"
#include "scanleak/rng.hpp"

namespace scanleak::nn {

TrainResult train(Model& model, const Tensor& x, const std::vector<int>& y,
                  const TrainConfig& cfg) {
  if (x.ndim() < 2) throw DomainError("train: batched input required");
  const std::size_t n = x.shape[0];
  if (n == 0) throw DomainError("train: empty dataset");
  if (y.size() != n) throw DomainError("train: label count mismatch");
  if (cfg.batch_size == 0) throw DomainError("train: batch_size must be >= 1");
  if (!(cfg.lr >= 0.0)) throw DomainError("train: negative learning rate");

  const std::size_t sample = x.numel() / n;
  std::vector<std::size_t> batch_shape = x.shape;

  std::vector<ParamRef> params = model.parameters();
  std::vector<std::vector<double>> m1(params.size()), m2(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    m1[i].assign(params[i].value->numel(), 0.0);
    m2[i].assign(params[i].value->numel(), 0.0);
  }
  std::size_t step = 0;

  Rng rng(derive_seed(cfg.seed, "train"));
  TrainResult result;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> order = rng.permutation(n);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, n - start);
      batch_shape[0] = b;
      Tensor xb(batch_shape);
      std::vector<int> yb(b);
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t src = order[start + i];
        std::copy_n(x.data.begin() + static_cast<std::ptrdiff_t>(src * sample),
                    sample,
                    xb.data.begin() + static_cast<std::ptrdiff_t>(i * sample));
        yb[i] = y[src];
      }

      model.zero_grad();
      const Tensor logits = model.train_forward_logits(xb, rng);
      Tensor grad;
      const double loss = cross_entropy(logits, yb, &grad);
      model.backward_from_logits(grad);

      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& value = *params[i].value;
        const Tensor& g = *params[i].grad;
        for (std::size_t j = 0; j < value.numel(); ++j) {
          m1[i][j] = cfg.beta1 * m1[i][j] + (1.0 - cfg.beta1) * g[j];
          m2[i][j] = cfg.beta2 * m2[i][j] + (1.0 - cfg.beta2) * g[j] * g[j];
          value[j] -=
              cfg.lr * (m1[i][j] / c1) / (std::sqrt(m2[i][j] / c2) + cfg.eps);
        }
      }
      loss_sum += loss * static_cast<double>(b);
    }
    result.loss_history.push_back(loss_sum / static_cast<double>(n));
  }
  return result;
}

double accuracy(const Model& model, const Tensor& x,
                const std::vector<int>& y) {
  if (x.shape.empty() || x.shape[0] == 0)
    throw DomainError("accuracy: empty batch");
  if (y.size() != x.shape[0]) throw DomainError("accuracy: label count mismatch");
  const std::vector<int> pred = model.predict_labels(x);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == y[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace scanleak::nn
