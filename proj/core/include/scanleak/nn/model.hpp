#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scanleak/nn/layers.hpp"

namespace scanleak::nn {

// Declarative network description: an ordered list of layer kinds with their
// constructor arguments, plus the per-sample input shape.
struct LayerSpec {
  std::string kind;
  std::map<std::string, double> args;
};

struct ModelSpec {
  std::vector<std::size_t> input_shape;  // per sample, batch dim excluded
  std::vector<LayerSpec> layers;
};

// Stack of layers ending in a softmax output. Owns parameters.
class Model {
 public:
  Model() = default;
  Model(ModelSpec spec, std::uint64_t init_seed);

  const ModelSpec& spec() const { return spec_; }
  std::size_t n_layers() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  // Class probabilities for a batch. Thread-safe on a trained model.
  Tensor predict(const Tensor& x) const;
  std::vector<int> predict_labels(const Tensor& x) const;

  // Training-mode forward returning logits (pre-softmax); caches for
  // backward. Dropout can be globally disabled (gradient checks).
  Tensor train_forward_logits(const Tensor& x, Rng& rng);
  // Backpropagate the gradient w.r.t. logits through every layer.
  void backward_from_logits(const Tensor& grad_logits);

  // Mean cross-entropy of a batch in training mode (batch statistics, but no
  // parameter update). Deterministic when dropout is disabled.
  double train_loss(const Tensor& x, const std::vector<int>& labels);

  std::vector<ParamRef> parameters();
  std::vector<ParamRef> state();  // parameters + buffers
  void zero_grad();
  void set_dropout_enabled(bool enabled);

  // Output class count (width of the final dense layer).
  std::size_t n_classes() const;
  // Shape check: per-sample shapes through the stack; throws on mismatch.
  std::vector<std::size_t> output_shape() const;

 private:
  ModelSpec spec_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

// Softmax + cross-entropy helpers on logits {B, C}.
Tensor softmax_rows(const Tensor& logits);
double cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                     Tensor* grad_logits = nullptr);

// ---- canonical architectures ------------------------------------------------

// Dense classifier: Flatten, three Dense+ReLU+BatchNorm+Dropout stages
// (512/0.3, 256/0.3, 128/0.2), Dense to n_class, softmax.
ModelSpec mlp_spec(std::size_t n_input, std::size_t n_class);

// 1-D convolutional classifier: two Conv(kernel 8, stride 4)+ReLU+MaxPool(4,4)
// stages at 16 and 32 channels, Flatten, Dense 128+ReLU+Dropout(0.5), Dense
// to n_class, softmax. Intermediate lengths follow from the convolution
// arithmetic; inputs too short to survive both stages throw DomainError.
ModelSpec cnn_spec(std::size_t n_input, std::size_t n_class = 4);

// Convolutional front end (1->64, kernel 7, stride 2; 64->256, kernel 5,
// stride 2), positional encoding, n_enc encoder blocks (d_model 256, d_ff
// 1024), attention pooling, then a 512/256 dense head.
ModelSpec transformer_spec(std::size_t n_input, std::size_t n_class,
                           std::size_t n_enc = 2, std::size_t n_heads = 8);

Model build_model(const ModelSpec& spec, std::uint64_t init_seed);

// Total trainable parameter count.
std::size_t parameter_count(Model& model);

// ---- gradient verification --------------------------------------------------

// Central-difference check of every parameter of every layer: returns the
// maximum relative error between analytic and numeric gradients. Runs in
// training mode with dropout disabled. eps is the probe step.
double gradient_check(Model& model, const Tensor& x,
                      const std::vector<int>& labels, double eps = 1e-5);

// ---- checkpoints ------------------------------------------------------------

// Binary checkpoint: architecture plus named little-endian f32 blobs for
// every parameter and buffer. save(load(p)) is byte-identical to save(p).
void save_model(Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace scanleak::nn
