#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scanleak/nn/tensor.hpp"
#include "scanleak/rng.hpp"

namespace scanleak::nn {

struct ParamRef {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

// A differentiable stage. `eval` is the pure inference path: const, no
// caching, safe to call from many threads on a trained model. `train_fwd`
// caches whatever `train_bwd` needs and may update internal statistics, so
// training is single-threaded by contract.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  // Per-sample output shape given the per-sample input shape (batch dim
  // excluded). Throws DomainError for invalid input shapes.
  virtual std::vector<std::size_t> out_shape(
      const std::vector<std::size_t>& in) const = 0;

  virtual Tensor eval(const Tensor& x) const = 0;
  virtual Tensor train_fwd(const Tensor& x, Rng& rng) { (void)rng; return eval(x); }
  // Consumes the gradient w.r.t. this layer's output, accumulates parameter
  // gradients, returns the gradient w.r.t. the input.
  virtual Tensor train_bwd(const Tensor& grad_out) = 0;

  virtual void init(Rng& rng) { (void)rng; }
  virtual std::vector<ParamRef> params() { return {}; }
  // Non-trainable state that still belongs in a checkpoint (e.g. running
  // statistics).
  virtual std::vector<ParamRef> buffers() { return {}; }
  // Integer/double constructor arguments, for serialization.
  virtual std::map<std::string, double> config() const { return {}; }
};

std::unique_ptr<Layer> make_dense(std::size_t in, std::size_t out);
std::unique_ptr<Layer> make_relu();
std::unique_ptr<Layer> make_batchnorm1d(std::size_t features,
                                        double momentum = 0.1,
                                        double eps = 1e-5);
std::unique_ptr<Layer> make_dropout(double rate);
std::unique_ptr<Layer> make_conv1d(std::size_t in_ch, std::size_t out_ch,
                                   std::size_t kernel, std::size_t stride,
                                   std::size_t padding = 0);
std::unique_ptr<Layer> make_maxpool1d(std::size_t kernel, std::size_t stride);
std::unique_ptr<Layer> make_flatten();
std::unique_ptr<Layer> make_positional_encoding(std::size_t d_model,
                                                std::size_t max_len = 5000);
std::unique_ptr<Layer> make_encoder_block(std::size_t d_model, std::size_t d_ff,
                                          std::size_t n_heads);
std::unique_ptr<Layer> make_attention_pool(std::size_t d_model);
std::unique_ptr<Layer> make_softmax_output();

// Reconstruct a layer from kind + config (checkpoint loading).
std::unique_ptr<Layer> make_layer(const std::string& kind,
                                  const std::map<std::string, double>& config);

// Dropout layers expose a global off-switch per model (gradient checking and
// pure evaluation paths run with dropout disabled).
void set_dropout_enabled(Layer& layer, bool enabled);

// Attention-pool position weights for one input batch {B, L, d} -> {B, L}.
// Exposed for tests; throws DomainError for other layer kinds.
Tensor attention_pool_weights(const Layer& layer, const Tensor& x);

}  // namespace scanleak::nn
