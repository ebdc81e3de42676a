#include "scanleak/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "scanleak/errors.hpp"
#include "scanleak/nn/tensor.hpp"
#include "scanleak/rng.hpp"

namespace scanleak::nn {

namespace {

constexpr double kLayerNormEps = 1e-5;

[[noreturn]] void bail(const std::string& msg) { throw DomainError(msg); }

std::size_t product(const std::vector<std::size_t>& s) {
  std::size_t p = 1;
  for (std::size_t d : s) p *= d;
  return p;
}

// Every weight matrix is drawn uniform with fan-in scaling; biases start at
// zero so an untrained head is symmetric across classes.
void init_uniform(Tensor& w, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (double& v : w.data) v = rng.uniform(-bound, bound);
}

std::size_t conv_out_len(std::size_t in_len, std::size_t kernel,
                         std::size_t stride, std::size_t padding,
                         const char* what) {
  if (in_len + 2 * padding < kernel)
    bail(std::string(what) + ": kernel " + std::to_string(kernel) +
         " exceeds padded input length " +
         std::to_string(in_len + 2 * padding));
  return (in_len + 2 * padding - kernel) / stride + 1;
}

// out[j] += sum over rows of g[. , j], for g with `rows` rows of width `n`.
void add_col_sums(const double* g, std::size_t rows, std::size_t n,
                  double* out) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < n; ++j) out[j] += g[r * n + j];
}

// y = x * w^T + b over `rows` independent rows.
void linear_rows(const double* x, std::size_t rows, std::size_t in,
                 std::size_t out, const Tensor& w, const Tensor& b, double* y) {
  gemm_nt(rows, out, in, x, w.data.data(), y);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < out; ++j) y[r * out + j] += b[j];
}

void softmax_row(double* row, std::size_t n) {
  double hi = row[0];
  for (std::size_t j = 1; j < n; ++j) hi = std::max(hi, row[j]);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    row[j] = std::exp(row[j] - hi);
    sum += row[j];
  }
  for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
}

// Row-wise layer normalization; xhat/invstd are per-row caches for backward
// (pass nullptr on the inference path).
void layernorm_rows(const double* x, std::size_t rows, std::size_t d,
                    const Tensor& gamma, const Tensor& beta, double* y,
                    double* xhat, double* invstd) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += xr[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = xr[j] - mu;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + kLayerNormEps);
    if (invstd != nullptr) invstd[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double xh = (xr[j] - mu) * is;
      if (xhat != nullptr) xhat[r * d + j] = xh;
      y[r * d + j] = gamma[j] * xh + beta[j];
    }
  }
}

// Gradient of layernorm_rows w.r.t. its input; accumulates gamma/beta grads.
void layernorm_backward(const double* gy, std::size_t rows, std::size_t d,
                        const double* xhat, const double* invstd,
                        const Tensor& gamma, Tensor& ggamma, Tensor& gbeta,
                        double* gx) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* gr = gy + r * d;
    const double* xh = xhat + r * d;
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double gg = gr[j] * gamma[j];
      s1 += gg;
      s2 += gg * xh[j];
      ggamma[j] += gr[j] * xh[j];
      gbeta[j] += gr[j];
    }
    s1 /= static_cast<double>(d);
    s2 /= static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j)
      gx[r * d + j] = invstd[r] * (gr[j] * gamma[j] - s1 - xh[j] * s2);
  }
}

// ---- dense ------------------------------------------------------------------

class Dense : public Layer {
 public:
  Dense(std::size_t in, std::size_t out) : in_(in), out_(out) {
    if (in == 0 || out == 0) bail("dense: zero width");
    w_ = Tensor({out, in});
    b_ = Tensor({out});
    gw_ = Tensor({out, in});
    gb_ = Tensor({out});
  }

  std::string kind() const override { return "dense"; }

  std::vector<std::size_t> out_shape(
      const std::vector<std::size_t>& in) const override {
    if (in.size() != 1 || in[0] != in_)
      bail("dense: expected a flat input of width " + std::to_string(in_));
    return {out_};
  }

  Tensor eval(const Tensor& x) const override { return apply(x); }

  Tensor train_fwd(const Tensor& x, Rng&) override {
    x_ = x;
    return apply(x);
  }

  Tensor train_bwd(const Tensor& gy) override {
    const std::size_t batch = x_.shape[0];
    gemm_tn(out_, in_, batch, gy.data.data(), x_.data.data(), gw_.data.data(),
            1.0);
    add_col_sums(gy.data.data(), batch, out_, gb_.data.data());
    Tensor gx({batch, in_});
    gemm_nn(batch, in_, out_, gy.data.data(), w_.data.data(), gx.data.data());
    return gx;
  }

  void init(Rng& rng) override {
    init_uniform(w_, in_, rng);
    b_.fill(0.0);
  }

  std::vector<ParamRef> params() override {
    return {{"weight", &w_, &gw_}, {"bias", &b_, &gb_}};
  }

  std::map<std::string, double> config() const override {
    return {{"in", static_cast<double>(in_)},
            {"out", static_cast<double>(out_)}};
  }

 private:
  Tensor apply(const Tensor& x) const {
    if (x.ndim() != 2 || x.shape[1] != in_)
      bail("dense: batch has width " +
           std::to_string(x.ndim() == 2 ? x.shape[1] : 0) + ", expected " +
           std::to_string(in_));
    Tensor y({x.shape[0], out_});
    linear_rows(x.data.data(), x.shape[0], in_, out_, w_, b_, y.data.data());
    return y;
  }

  std::size_t in_, out_;
  Tensor w_, b_, gw_, gb_;
  Tensor x_;
};

// ---- relu -------------------------------------------------------------------

class Relu : public Layer {
 public:
  std::string kind() const override { return "relu"; }

  std::vector<std::size_t> out_shape(
      const std::vector<std::size_t>& in) const override {
    return in;
  }

  Tensor eval(const Tensor& x) const override {
    Tensor y = x;
    for (double& v : y.data) v = std::max(0.0, v);
    return y;
  }

  Tensor train_fwd(const Tensor& x, Rng&) override {
    mask_.assign(x.numel(), 0.0);
    Tensor y = x;
    for (std::size_t i = 0; i < y.numel(); ++i) {
      if (y[i] > 0.0)
        mask_[i] = 1.0;
      else
        y[i] = 0.0;
    }
    return y;
  }

  Tensor train_bwd(const Tensor& gy) override {
    Tensor gx = gy;
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] *= mask_[i];
    return gx;
  }

 private:
  std::vector<double> mask_;
};

// ---- batchnorm --------------------------------------------------------------

class BatchNorm1d : public Layer {
 public:
  BatchNorm1d(std::size_t features, double momentum, double eps)
      : features_(features), momentum_(momentum), eps_(eps) {
    if (features == 0) bail("batchnorm1d: zero features");
    if (momentum <= 0.0 || momentum > 1.0)
      bail("batchnorm1d: momentum must be in (0, 1]");
    if (eps <= 0.0) bail("batchnorm1d: eps must be positive");
    gamma_ = Tensor({features});
    beta_ = Tensor({features});
    ggamma_ = Tensor({features});
    gbeta_ = Tensor({features});
    running_mean_ = Tensor({features});
    running_var_ = Tensor({features});
    init_state();
  }

  std::string kind() const override { return "batchnorm1d"; }

  std::vector<std::size_t> out_shape(
      const std::vector<std::size_t>& in) const override {
    if (in.size() != 1 || in[0] != features_)
      bail("batchnorm1d: expected a flat input of width " +
           std::to_string(features_));
    return in;
  }

  Tensor eval(const Tensor& x) const override {
    check_batch(x);
    Tensor y({x.shape[0], features_});
    for (std::size_t j = 0; j < features_; ++j) {
      const double is = 1.0 / std::sqrt(running_var_[j] + eps_);
      for (std::size_t b = 0; b < x.shape[0]; ++b)
        y.at(b, j) = gamma_[j] * (x.at(b, j) - running_mean_[j]) * is + beta_[j];
    }
    return y;
  }

  Tensor train_fwd(const Tensor& x, Rng&) override {
    check_batch(x);
    const std::size_t batch = x.shape[0];
    const double n = static_cast<double>(batch);
    xhat_ = Tensor({batch, features_});
    invstd_.assign(features_, 0.0);
    Tensor y({batch, features_});
    for (std::size_t j = 0; j < features_; ++j) {
      double mu = 0.0;
      for (std::size_t b = 0; b < batch; ++b) mu += x.at(b, j);
      mu /= n;
      double var = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        const double c = x.at(b, j) - mu;
        var += c * c;
      }
      var /= n;
      const double is = 1.0 / std::sqrt(var + eps_);
      invstd_[j] = is;
      for (std::size_t b = 0; b < batch; ++b) {
        const double xh = (x.at(b, j) - mu) * is;
        xhat_.at(b, j) = xh;
        y.at(b, j) = gamma_[j] * xh + beta_[j];
      }
      // Running statistics track the unbiased variance, matching the usual
      // train/eval convention.
      const double var_run = batch > 1 ? var * n / (n - 1.0) : var;
      running_mean_[j] = (1.0 - momentum_) * running_mean_[j] + momentum_ * mu;
      running_var_[j] = (1.0 - momentum_) * running_var_[j] + momentum_ * var_run;
    }
    return y;
  }

  Tensor train_bwd(const Tensor& gy) override {
    const std::size_t batch = gy.shape[0];
    const double n = static_cast<double>(batch);
    Tensor gx({batch, features_});
    for (std::size_t j = 0; j < features_; ++j) {
      double s1 = 0.0, s2 = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        s1 += gy.at(b, j);
        s2 += gy.at(b, j) * xhat_.at(b, j);
        ggamma_[j] += gy.at(b, j) * xhat_.at(b, j);
        gbeta_[j] += gy.at(b, j);
      }
      s1 /= n;
      s2 /= n;
      for (std::size_t b = 0; b < batch; ++b)
        gx.at(b, j) = gamma_[j] * invstd_[j] *
                      (gy.at(b, j) - s1 - xhat_.at(b, j) * s2);
    }
    return gx;
  }

  void init(Rng&) override { init_state(); }

  std::vector<ParamRef> params() override {
    return {{"gamma", &gamma_, &ggamma_}, {"beta", &beta_, &gbeta_}};
  }

  std::vector<ParamRef> buffers() override {
    return {{"running_mean", &running_mean_, nullptr},
            {"running_var", &running_var_, nullptr}};
  }

  std::map<std::string, double> config() const override {
    return {{"features", static_cast<double>(features_)},
            {"momentum", momentum_},
            {"eps", eps_}};
  }

 private:
  void init_state() {
    gamma_.fill(1.0);
    beta_.fill(0.0);
    running_mean_.fill(0.0);
    running_var_.fill(1.0);
  }

  void check_batch(const Tensor& x) const {
    if (x.ndim() != 2 || x.shape[1] != features_)
      bail("batchnorm1d: batch shape mismatch");
  }

  std::size_t features_;
  double momentum_, eps_;
  Tensor gamma_, beta_, ggamma_, gbeta_;
  Tensor running_mean_, running_var_;
  Tensor xhat_;
  std::vector<double> invstd_;
};

// ---- dropout ----------------------------------------------------------------

class Dropout : public Layer {
 public:
  explicit Dropout(double rate) : rate_(rate) {
    if (!(rate >= 0.0 && rate < 1.0)) bail("dropout: rate must be in [0, 1)");
  }

  std::string kind() const override { return "dropout"; }

  std::vector<std::size_t> out_shape(
      const std::vector<std::size_t>& in) const override {
    return in;
  }

  Tensor eval(const Tensor& x) const override { return x; }

  Tensor train_fwd(const Tensor& x, Rng& rng) override {
    active_ = enabled_ && rate_ > 0.0;
    if (!active_) return x;
    // Inverted dropout: survivors are scaled up so the expectation matches
    // the eval-mode identity.
    const double keep = 1.0 - rate_;
    mask_.assign(x.numel(), 0.0);
    Tensor y = x;
    for (std::size_t i = 0; i < y.numel(); ++i) {
      if (rng.uniform() < keep)
        mask_[i] = 1.0 / keep;
      else
        mask_[i] = 0.0;
      y[i] *= mask_[i];
    }
    return y;
  }

  Tensor train_bwd(const Tensor& gy) override {
    if (!active_) return gy;
    Tensor gx = gy;
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] *= mask_[i];
    return gx;
  }

  std::map<std::string, double> config() const override {
    return {{"rate", rate_}};
  }

  void set_enabled(bool enabled) { enabled_ = enabled; }

 private:
  double rate_;
  bool enabled_ = true;
  bool active_ = false;
  std::vector<double> mask_;
};

// ---- conv1d -----------------------------------------------------------------

class Conv1d : public Layer {
 public:
  Conv1d(std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
         std::size_t stride, std::size_t padding)
      : in_ch_(in_ch),
        out_ch_(out_ch),
        kernel_(kernel),
        stride_(stride),
        padding_(padding) {
    if (in_ch == 0 || out_ch == 0) bail("conv1d: zero channels");
    if (kernel == 0 || stride == 0) bail("conv1d: kernel and stride must be >= 1");
    w_ = Tensor({out_ch, in_ch, kernel});
    b_ = Tensor({out_ch});
    gw_ = Tensor({out_ch, in_ch, kernel});
    gb_ = Tensor({out_ch});
  }

  std::string kind() const override { return "conv1d"; }

  std::vector<std::size_t> out_shape(
      const std::vector<std::size_t>& in) const override {
    if (in.size() != 2 || in[0] != in_ch_)
      bail("conv1d: expected input {" + std::to_string(in_ch_) +
           " channels, length}");
    return {out_ch_, conv_out_len(in[1], kernel_, stride_, padding_, "conv1d")};
  }

  Tensor eval(const Tensor& x) const override { return apply(x); }

  Tensor train_fwd(const Tensor& x, Rng&) override {
    x_ = x;
    return apply(x);
  }

  Tensor train_bwd(const Tensor& gy) override {
    const std::size_t batch = x_.shape[0];
    const std::size_t len = x_.shape[2];
    const std::size_t out_len = gy.shape[2];
    Tensor gx(x_.shape);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t oc = 0; oc < out_ch_; ++oc) {
        for (std::size_t t = 0; t < out_len; ++t) {
          const double g = gy.at(b, oc, t);
          gb_[oc] += g;
          for (std::size_t ic = 0; ic < in_ch_; ++ic) {
            for (std::size_t k = 0; k < kernel_; ++k) {
              const std::ptrdiff_t pos =
                  static_cast<std::ptrdiff_t>(t * stride_ + k) -
                  static_cast<std::ptrdiff_t>(padding_);
              if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(len)) continue;
              gw_.at(oc, ic, k) += g * x_.at(b, ic, static_cast<std::size_t>(pos));
              gx.at(b, ic, static_cast<std::size_t>(pos)) += g * w_.at(oc, ic, k);
            }
          }
        }
      }
    }
    return gx;
  }

  void init(Rng& rng) override {
    init_uniform(w_, in_ch_ * kernel_, rng);
    b_.fill(0.0);
  }

  std::vector<ParamRef> params() override {
    return {{"weight", &w_, &gw_}, {"bias", &b_, &gb_}};
  }

  std::map<std::string, double> config() const override {
    return {{"in_ch", static_cast<double>(in_ch_)},
            {"out_ch", static_cast<double>(out_ch_)},
            {"kernel", static_cast<double>(kernel_)},
            {"stride", static_cast<double>(stride_)},
            {"padding", static_cast<double>(padding_)}};
  }

 private:
  Tensor apply(const Tensor& x) const {
    if (x.ndim() != 3 || x.shape[1] != in_ch_)
      bail("conv1d: batch shape mismatch");
    const std::size_t batch = x.shape[0];
    const std::size_t len = x.shape[2];
    const std::size_t out_len =
        conv_out_len(len, kernel_, stride_, padding_, "conv1d");
    Tensor y({batch, out_ch_, out_len});
#pragma omp parallel for schedule(static) if (batch > 1)
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t oc = 0; oc < out_ch_; ++oc) {
        for (std::size_t t = 0; t < out_len; ++t) {
          double acc = b_[oc];
          for (std::size_t ic = 0; ic < in_ch_; ++ic) {
            for (std::size_t k = 0; k < kernel_; ++k) {
              const std::ptrdiff_t pos =
                  static_cast<std::ptrdiff_t>(t * stride_ + k) -
                  static_cast<std::ptrdiff_t>(padding_);
              if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(len)) continue;
              acc += w_.at(oc, ic, k) * x.at(b, ic, static_cast<std::size_t>(pos));
            }
          }
          y.at(b, oc, t) = acc;
        }
      }
    }
    return y;
  }

  std::size_t in_ch_, out_ch_, kernel_, stride_, padding_;
  Tensor w_, b_, gw_, gb_;
  Tensor x_;
};

// ---- maxpool ----------------------------------------------------------------

class MaxPool1d : public Layer {
 public:
  MaxPool1d(std::size_t kernel, std::size_t stride)
      : kernel_(kernel), stride_(stride) {
    if (kernel == 0 || stride == 0)
      bail("maxpool1d: kernel and stride must be >= 1");
  }

  std::string kind() const override { return "maxpool1d"; }

  std::vector<std::size_t> out_shape(
      const std::vector<std::size_t>& in) const override {
    if (in.size() != 2) bail("maxpool1d: expected input {channels, length}");
    return {in[0], conv_out_len(in[1], kernel_, stride_, 0, "maxpool1d")};
  }

  Tensor eval(const Tensor& x) const override { return apply(x, nullptr); }

  Tensor train_fwd(const Tensor& x, Rng&) override {
    in_shape_ = x.shape;
    argmax_.clear();
    return apply(x, &argmax_);
  }

  Tensor train_bwd(const Tensor& gy) override {
    Tensor gx(in_shape_);
    for (std::size_t i = 0; i < gy.numel(); ++i) gx[argmax_[i]] += gy[i];
    return gx;
  }

  std::map<std::string, double> config() const override {
    return {{"kernel", static_cast<double>(kernel_)},
            {"stride", static_cast<double>(stride_)}};
  }

 private:
  Tensor apply(const Tensor& x, std::vector<std::size_t>* argmax) const {
    if (x.ndim() != 3) bail("maxpool1d: batch shape mismatch");
    const std::size_t batch = x.shape[0];
    const std::size_t ch = x.shape[1];
    const std::size_t len = x.shape[2];
    const std::size_t out_len = conv_out_len(len, kernel_, stride_, 0, "maxpool1d");
    Tensor y({batch, ch, out_len});
    if (argmax != nullptr) argmax->resize(y.numel());
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t t = 0; t < out_len; ++t) {
          std::size_t best = (b * ch + c) * len + t * stride_;
          double hi = x.data[best];
          for (std::size_t k = 1; k < kernel_; ++k) {
            const std::size_t idx = (b * ch + c) * len + t * stride_ + k;
            if (x.data[idx] > hi) {
              hi = x.data[idx];
              best = idx;
            }
          }
          y.at(b, c, t) = hi;
          if (argmax != nullptr) (*argmax)[(b * ch + c) * out_len + t] = best;
        }
      }
    }
    return y;
  }

  std::size_t kernel_, stride_;
  std::vector<std::size_t> in_shape_;
  std::vector<std::size_t> argmax_;
};

// ---- flatten ----------------------------------------------------------------

class Flatten : public Layer {
 public:
  std::string kind() const override { return "flatten"; }

  std::vector<std::size_t> out_shape(
      const std::vector<std::size_t>& in) const override {
    if (in.empty()) bail("flatten: scalar input");
    return {product(in)};
  }

  Tensor eval(const Tensor& x) const override { return flat(x); }

  Tensor train_fwd(const Tensor& x, Rng&) override {
    in_shape_ = x.shape;
    return flat(x);
  }

  Tensor train_bwd(const Tensor& gy) override { return gy.reshaped(in_shape_); }

 private:
  static Tensor flat(const Tensor& x) {
    if (x.ndim() < 2) bail("flatten: batch shape mismatch");
    return x.reshaped({x.shape[0], x.numel() / x.shape[0]});
  }

  std::vector<std::size_t> in_shape_;
};

// ---- positional encoding ----------------------------------------------------

// Adds the fixed sinusoid table and hands the sequence over in time-major
// order: convolution stacks produce {batch, channels, length}, attention
// wants {batch, length, channels}.
class PositionalEncoding : public Layer {
 public:
  PositionalEncoding(std::size_t d_model, std::size_t max_len)
      : d_(d_model), max_len_(max_len), pe_({max_len, d_model}) {
    if (d_model == 0 || max_len == 0)
      bail("positional_encoding: zero dimension");
    for (std::size_t pos = 0; pos < max_len; ++pos) {
      for (std::size_t j = 0; j < d_; ++j) {
        const double freq = std::pow(
            10000.0, -static_cast<double>(2 * (j / 2)) / static_cast<double>(d_));
        const double angle = static_cast<double>(pos) * freq;
        pe_.at(pos, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
      }
    }
  }

  std::string kind() const override { return "positional_encoding"; }

  std::vector<std::size_t> out_shape(
      const std::vector<std::size_t>& in) const override {
    if (in.size() != 2 || in[0] != d_)
      bail("positional_encoding: expected input {" + std::to_string(d_) +
           " channels, length}");
    if (in[1] > max_len_)
      bail("positional_encoding: sequence length " + std::to_string(in[1]) +
           " exceeds max_len " + std::to_string(max_len_));
    return {in[1], d_};
  }

  Tensor eval(const Tensor& x) const override {
    if (x.ndim() != 3 || x.shape[1] != d_ || x.shape[2] > max_len_)
      bail("positional_encoding: batch shape mismatch");
    const std::size_t batch = x.shape[0];
    const std::size_t len = x.shape[2];
    Tensor y({batch, len, d_});
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t l = 0; l < len; ++l)
        for (std::size_t j = 0; j < d_; ++j)
          y.at(b, l, j) = x.at(b, j, l) + pe_.at(l, j);
    return y;
  }

  Tensor train_bwd(const Tensor& gy) override {
    const std::size_t batch = gy.shape[0];
    const std::size_t len = gy.shape[1];
    Tensor gx({batch, d_, len});
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t l = 0; l < len; ++l)
        for (std::size_t j = 0; j < d_; ++j) gx.at(b, j, l) = gy.at(b, l, j);
    return gx;
  }

  std::map<std::string, double> config() const override {
    return {{"d_model", static_cast<double>(d_)},
            {"max_len", static_cast<double>(max_len_)}};
  }

 private:
  std::size_t d_, max_len_;
  Tensor pe_;
};

// ---- encoder block ----------------------------------------------------------

// Post-norm transformer encoder: multi-head self-attention and a two-layer
// feed-forward, each wrapped in residual + layer normalization.
class EncoderBlock : public Layer {
 public:
  EncoderBlock(std::size_t d_model, std::size_t d_ff, std::size_t n_heads)
      : d_(d_model), dff_(d_ff), heads_(n_heads) {
    if (d_ == 0 || dff_ == 0 || heads_ == 0) bail("encoder_block: zero dimension");
    if (d_ % heads_ != 0)
      bail("encoder_block: d_model " + std::to_string(d_) +
           " not divisible by " + std::to_string(heads_) + " heads");
    dh_ = d_ / heads_;
    auto mat = [&](Tensor& t, std::size_t r, std::size_t c) {
      t = Tensor({r, c});
    };
    mat(wq_, d_, d_); mat(wk_, d_, d_); mat(wv_, d_, d_); mat(wo_, d_, d_);
    mat(gwq_, d_, d_); mat(gwk_, d_, d_); mat(gwv_, d_, d_); mat(gwo_, d_, d_);
    bq_ = Tensor({d_}); bk_ = Tensor({d_}); bv_ = Tensor({d_}); bo_ = Tensor({d_});
    gbq_ = Tensor({d_}); gbk_ = Tensor({d_}); gbv_ = Tensor({d_}); gbo_ = Tensor({d_});
    ln1_g_ = Tensor({d_}); ln1_b_ = Tensor({d_});
    gln1_g_ = Tensor({d_}); gln1_b_ = Tensor({d_});
    ln2_g_ = Tensor({d_}); ln2_b_ = Tensor({d_});
    gln2_g_ = Tensor({d_}); gln2_b_ = Tensor({d_});
    mat(w1_, dff_, d_); mat(gw1_, dff_, d_);
    b1_ = Tensor({dff_}); gb1_ = Tensor({dff_});
    mat(w2_, d_, dff_); mat(gw2_, d_, dff_);
    b2_ = Tensor({d_}); gb2_ = Tensor({d_});
    reset_state();
  }

  std::string kind() const override { return "encoder_block"; }

  std::vector<std::size_t> out_shape(
      const std::vector<std::size_t>& in) const override {
    if (in.size() != 2 || in[1] != d_)
      bail("encoder_block: expected input {length, " + std::to_string(d_) + "}");
    return in;
  }

  Tensor eval(const Tensor& x) const override { return forward(x, nullptr); }

  Tensor train_fwd(const Tensor& x, Rng&) override {
    return forward(x, &cache_);
  }

  Tensor train_bwd(const Tensor& gy) override {
    const Cache& c = cache_;
    const std::size_t batch = c.x.shape[0];
    const std::size_t len = c.x.shape[1];
    const std::size_t rows = batch * len;

    // Second residual block: layernorm, then feed-forward + identity.
    Tensor dsum2({batch, len, d_});
    layernorm_backward(gy.data.data(), rows, d_, c.xhat2.data.data(),
                       c.invstd2.data(), ln2_g_, gln2_g_, gln2_b_,
                       dsum2.data.data());
    Tensor dh = dsum2;
    gemm_tn(d_, dff_, rows, dsum2.data.data(), c.a1.data.data(),
            gw2_.data.data(), 1.0);
    add_col_sums(dsum2.data.data(), rows, d_, gb2_.data.data());
    Tensor dz1({batch, len, dff_});
    gemm_nn(rows, dff_, d_, dsum2.data.data(), w2_.data.data(),
            dz1.data.data());
    for (std::size_t i = 0; i < dz1.numel(); ++i)
      if (c.z1[i] <= 0.0) dz1[i] = 0.0;
    gemm_tn(dff_, d_, rows, dz1.data.data(), c.h.data.data(), gw1_.data.data(),
            1.0);
    add_col_sums(dz1.data.data(), rows, dff_, gb1_.data.data());
    gemm_nn(rows, d_, dff_, dz1.data.data(), w1_.data.data(), dh.data.data(),
            1.0);

    // First residual block: layernorm, then attention + identity.
    Tensor dsum1({batch, len, d_});
    layernorm_backward(dh.data.data(), rows, d_, c.xhat1.data.data(),
                       c.invstd1.data(), ln1_g_, gln1_g_, gln1_b_,
                       dsum1.data.data());
    Tensor dx = dsum1;
    gemm_tn(d_, d_, rows, dsum1.data.data(), c.concat.data.data(),
            gwo_.data.data(), 1.0);
    add_col_sums(dsum1.data.data(), rows, d_, gbo_.data.data());
    Tensor dconcat({batch, len, d_});
    gemm_nn(rows, d_, d_, dsum1.data.data(), wo_.data.data(),
            dconcat.data.data());

    Tensor dq({batch, len, d_}), dk({batch, len, d_}), dv({batch, len, d_});
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh_));
    std::vector<double> qh(len * dh_), kh(len * dh_), vh(len * dh_);
    std::vector<double> dout(len * dh_), da(len * len), ds(len * len);
    std::vector<double> dqh(len * dh_), dkh(len * dh_), dvh(len * dh_);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t head = 0; head < heads_; ++head) {
        const std::size_t off = head * dh_;
        for (std::size_t l = 0; l < len; ++l) {
          for (std::size_t cdx = 0; cdx < dh_; ++cdx) {
            qh[l * dh_ + cdx] = c.q.at(b, l, off + cdx);
            kh[l * dh_ + cdx] = c.k.at(b, l, off + cdx);
            vh[l * dh_ + cdx] = c.v.at(b, l, off + cdx);
            dout[l * dh_ + cdx] = dconcat.at(b, l, off + cdx);
          }
        }
        const double* attn = c.attn.data() + ((b * heads_) + head) * len * len;
        gemm_nt(len, len, dh_, dout.data(), vh.data(), da.data());
        gemm_tn(len, dh_, len, attn, dout.data(), dvh.data());
        for (std::size_t i = 0; i < len; ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < len; ++j)
            dot += da[i * len + j] * attn[i * len + j];
          for (std::size_t j = 0; j < len; ++j)
            ds[i * len + j] =
                attn[i * len + j] * (da[i * len + j] - dot) * scale;
        }
        gemm_nn(len, dh_, len, ds.data(), kh.data(), dqh.data());
        gemm_tn(len, dh_, len, ds.data(), qh.data(), dkh.data());
        for (std::size_t l = 0; l < len; ++l) {
          for (std::size_t cdx = 0; cdx < dh_; ++cdx) {
            dq.at(b, l, off + cdx) = dqh[l * dh_ + cdx];
            dk.at(b, l, off + cdx) = dkh[l * dh_ + cdx];
            dv.at(b, l, off + cdx) = dvh[l * dh_ + cdx];
          }
        }
      }
    }

    gemm_tn(d_, d_, rows, dq.data.data(), c.x.data.data(), gwq_.data.data(), 1.0);
    add_col_sums(dq.data.data(), rows, d_, gbq_.data.data());
    gemm_nn(rows, d_, d_, dq.data.data(), wq_.data.data(), dx.data.data(), 1.0);
    gemm_tn(d_, d_, rows, dk.data.data(), c.x.data.data(), gwk_.data.data(), 1.0);
    add_col_sums(dk.data.data(), rows, d_, gbk_.data.data());
    gemm_nn(rows, d_, d_, dk.data.data(), wk_.data.data(), dx.data.data(), 1.0);
    gemm_tn(d_, d_, rows, dv.data.data(), c.x.data.data(), gwv_.data.data(), 1.0);
    add_col_sums(dv.data.data(), rows, d_, gbv_.data.data());
    gemm_nn(rows, d_, d_, dv.data.data(), wv_.data.data(), dx.data.data(), 1.0);
    return dx;
  }

  void init(Rng& rng) override {
    init_uniform(wq_, d_, rng);
    init_uniform(wk_, d_, rng);
    init_uniform(wv_, d_, rng);
    init_uniform(wo_, d_, rng);
    init_uniform(w1_, d_, rng);
    init_uniform(w2_, dff_, rng);
    reset_state();
  }

  std::vector<ParamRef> params() override {
    return {{"wq", &wq_, &gwq_},         {"bq", &bq_, &gbq_},
            {"wk", &wk_, &gwk_},         {"bk", &bk_, &gbk_},
            {"wv", &wv_, &gwv_},         {"bv", &bv_, &gbv_},
            {"wo", &wo_, &gwo_},         {"bo", &bo_, &gbo_},
            {"ln1_gamma", &ln1_g_, &gln1_g_}, {"ln1_beta", &ln1_b_, &gln1_b_},
            {"ffn_w1", &w1_, &gw1_},     {"ffn_b1", &b1_, &gb1_},
            {"ffn_w2", &w2_, &gw2_},     {"ffn_b2", &b2_, &gb2_},
            {"ln2_gamma", &ln2_g_, &gln2_g_}, {"ln2_beta", &ln2_b_, &gln2_b_}};
  }

  std::map<std::string, double> config() const override {
    return {{"d_model", static_cast<double>(d_)},
            {"d_ff", static_cast<double>(dff_)},
            {"n_heads", static_cast<double>(heads_)}};
  }

 private:
  struct Cache {
    Tensor x, q, k, v, concat;
    std::vector<double> attn;  // batch * heads * len * len
    Tensor xhat1, h, z1, a1, xhat2;
    std::vector<double> invstd1, invstd2;
  };

  void reset_state() {
    bq_.fill(0.0); bk_.fill(0.0); bv_.fill(0.0); bo_.fill(0.0);
    b1_.fill(0.0); b2_.fill(0.0);
    ln1_g_.fill(1.0); ln1_b_.fill(0.0);
    ln2_g_.fill(1.0); ln2_b_.fill(0.0);
  }

  Tensor forward(const Tensor& x, Cache* c) const {
    if (x.ndim() != 3 || x.shape[2] != d_)
      bail("encoder_block: batch shape mismatch");
    const std::size_t batch = x.shape[0];
    const std::size_t len = x.shape[1];
    const std::size_t rows = batch * len;

    Tensor q({batch, len, d_}), k({batch, len, d_}), v({batch, len, d_});
    linear_rows(x.data.data(), rows, d_, d_, wq_, bq_, q.data.data());
    linear_rows(x.data.data(), rows, d_, d_, wk_, bk_, k.data.data());
    linear_rows(x.data.data(), rows, d_, d_, wv_, bv_, v.data.data());

    Tensor concat({batch, len, d_});
    std::vector<double> attn(batch * heads_ * len * len);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh_));
    std::vector<double> qh(len * dh_), kh(len * dh_), vh(len * dh_);
    std::vector<double> scores(len * len), out(len * dh_);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t head = 0; head < heads_; ++head) {
        const std::size_t off = head * dh_;
        for (std::size_t l = 0; l < len; ++l) {
          for (std::size_t cdx = 0; cdx < dh_; ++cdx) {
            qh[l * dh_ + cdx] = q.at(b, l, off + cdx);
            kh[l * dh_ + cdx] = k.at(b, l, off + cdx);
            vh[l * dh_ + cdx] = v.at(b, l, off + cdx);
          }
        }
        gemm_nt(len, len, dh_, qh.data(), kh.data(), scores.data());
        for (double& s : scores) s *= scale;
        for (std::size_t i = 0; i < len; ++i)
          softmax_row(scores.data() + i * len, len);
        gemm_nn(len, dh_, len, scores.data(), vh.data(), out.data());
        for (std::size_t l = 0; l < len; ++l)
          for (std::size_t cdx = 0; cdx < dh_; ++cdx)
            concat.at(b, l, off + cdx) = out[l * dh_ + cdx];
        std::copy(scores.begin(), scores.end(),
                  attn.begin() + ((b * heads_) + head) * len * len);
      }
    }

    Tensor sum1({batch, len, d_});
    linear_rows(concat.data.data(), rows, d_, d_, wo_, bo_, sum1.data.data());
    for (std::size_t i = 0; i < sum1.numel(); ++i) sum1[i] += x[i];

    Tensor h({batch, len, d_});
    Tensor xhat1, xhat2;
    std::vector<double> invstd1, invstd2;
    if (c != nullptr) {
      xhat1 = Tensor({batch, len, d_});
      invstd1.resize(rows);
    }
    layernorm_rows(sum1.data.data(), rows, d_, ln1_g_, ln1_b_, h.data.data(),
                   c != nullptr ? xhat1.data.data() : nullptr,
                   c != nullptr ? invstd1.data() : nullptr);

    Tensor z1({batch, len, dff_});
    linear_rows(h.data.data(), rows, d_, dff_, w1_, b1_, z1.data.data());
    Tensor a1 = z1;
    for (double& vv : a1.data) vv = std::max(0.0, vv);
    Tensor sum2({batch, len, d_});
    linear_rows(a1.data.data(), rows, dff_, d_, w2_, b2_, sum2.data.data());
    for (std::size_t i = 0; i < sum2.numel(); ++i) sum2[i] += h[i];

    Tensor y({batch, len, d_});
    if (c != nullptr) {
      xhat2 = Tensor({batch, len, d_});
      invstd2.resize(rows);
    }
    layernorm_rows(sum2.data.data(), rows, d_, ln2_g_, ln2_b_, y.data.data(),
                   c != nullptr ? xhat2.data.data() : nullptr,
                   c != nullptr ? invstd2.data() : nullptr);

    if (c != nullptr) {
      c->x = x;
      c->q = std::move(q);
      c->k = std::move(k);
      c->v = std::move(v);
      c->concat = std::move(concat);
      c->attn = std::move(attn);
      c->xhat1 = std::move(xhat1);
      c->h = std::move(h);
      c->z1 = std::move(z1);
      c->a1 = std::move(a1);
      c->xhat2 = std::move(xhat2);
      c->invstd1 = std::move(invstd1);
      c->invstd2 = std::move(invstd2);
    }
    return y;
  }

  std::size_t d_, dff_, heads_, dh_ = 0;
  Tensor wq_, bq_, wk_, bk_, wv_, bv_, wo_, bo_;
  Tensor gwq_, gbq_, gwk_, gbk_, gwv_, gbv_, gwo_, gbo_;
  Tensor ln1_g_, ln1_b_, gln1_g_, gln1_b_;
  Tensor ln2_g_, ln2_b_, gln2_g_, gln2_b_;
  Tensor w1_, b1_, gw1_, gb1_, w2_, b2_, gw2_, gb2_;
  Cache cache_;
};

// ---- attention pool ---------------------------------------------------------

// Collapses {batch, length, d} to {batch, d} with learned position weights:
// a two-layer scorer (tanh hidden) softmaxed over positions.
class AttentionPool : public Layer {
 public:
  explicit AttentionPool(std::size_t d_model) : d_(d_model) {
    if (d_ == 0) bail("attention_pool: zero dimension");
    w1_ = Tensor({d_, d_});
    b1_ = Tensor({d_});
    w2_ = Tensor({d_});
    gw1_ = Tensor({d_, d_});
    gb1_ = Tensor({d_});
    gw2_ = Tensor({d_});
  }

  std::string kind() const override { return "attention_pool"; }

  std::vector<std::size_t> out_shape(
      const std::vector<std::size_t>& in) const override {
    if (in.size() != 2 || in[1] != d_)
      bail("attention_pool: expected input {length, " + std::to_string(d_) + "}");
    return {d_};
  }

  Tensor eval(const Tensor& x) const override {
    Tensor t, a;
    score(x, t, a);
    return pool(x, a);
  }

  Tensor train_fwd(const Tensor& x, Rng&) override {
    x_ = x;
    score(x, t_, a_);
    return pool(x, a_);
  }

  Tensor train_bwd(const Tensor& gy) override {
    const std::size_t batch = x_.shape[0];
    const std::size_t len = x_.shape[1];
    const std::size_t rows = batch * len;
    Tensor gx({batch, len, d_});
    Tensor ds({batch, len});
    for (std::size_t b = 0; b < batch; ++b) {
      // Weighted-sum branch plus the weight branch through the softmax.
      double dot = 0.0;
      std::vector<double> da(len);
      for (std::size_t l = 0; l < len; ++l) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d_; ++j) {
          gx.at(b, l, j) = a_.at(b, l) * gy.at(b, j);
          acc += gy.at(b, j) * x_.at(b, l, j);
        }
        da[l] = acc;
        dot += a_.at(b, l) * acc;
      }
      for (std::size_t l = 0; l < len; ++l)
        ds.at(b, l) = a_.at(b, l) * (da[l] - dot);
    }
    Tensor dz1({batch, len, d_});
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t l = 0; l < len; ++l) {
        for (std::size_t j = 0; j < d_; ++j) {
          const double t = t_.at(b, l, j);
          gw2_[j] += ds.at(b, l) * t;
          dz1.at(b, l, j) = ds.at(b, l) * w2_[j] * (1.0 - t * t);
        }
      }
    }
    gemm_tn(d_, d_, rows, dz1.data.data(), x_.data.data(), gw1_.data.data(),
            1.0);
    add_col_sums(dz1.data.data(), rows, d_, gb1_.data.data());
    gemm_nn(rows, d_, d_, dz1.data.data(), w1_.data.data(), gx.data.data(),
            1.0);
    return gx;
  }

  void init(Rng& rng) override {
    init_uniform(w1_, d_, rng);
    init_uniform(w2_, d_, rng);
    b1_.fill(0.0);
  }

  std::vector<ParamRef> params() override {
    return {{"w1", &w1_, &gw1_}, {"b1", &b1_, &gb1_}, {"w2", &w2_, &gw2_}};
  }

  std::map<std::string, double> config() const override {
    return {{"d_model", static_cast<double>(d_)}};
  }

  // Position weights for one batch, exposed for inspection.
  Tensor weights(const Tensor& x) const {
    Tensor t, a;
    score(x, t, a);
    return a;
  }

 private:
  void score(const Tensor& x, Tensor& t, Tensor& a) const {
    if (x.ndim() != 3 || x.shape[2] != d_)
      bail("attention_pool: batch shape mismatch");
    const std::size_t batch = x.shape[0];
    const std::size_t len = x.shape[1];
    t = Tensor({batch, len, d_});
    linear_rows(x.data.data(), batch * len, d_, d_, w1_, b1_, t.data.data());
    for (double& v : t.data) v = std::tanh(v);
    a = Tensor({batch, len});
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t l = 0; l < len; ++l) {
        // No score bias: a constant shift cancels inside the softmax.
        double s = 0.0;
        for (std::size_t j = 0; j < d_; ++j) s += t.at(b, l, j) * w2_[j];
        a.at(b, l) = s;
      }
      softmax_row(&a.at(b, 0), len);
    }
  }

  Tensor pool(const Tensor& x, const Tensor& a) const {
    const std::size_t batch = x.shape[0];
    const std::size_t len = x.shape[1];
    Tensor y({batch, d_});
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t l = 0; l < len; ++l)
        for (std::size_t j = 0; j < d_; ++j)
          y.at(b, j) += a.at(b, l) * x.at(b, l, j);
    return y;
  }

  std::size_t d_;
  Tensor w1_, b1_, w2_;
  Tensor gw1_, gb1_, gw2_;
  Tensor x_, t_, a_;
};

// ---- softmax output ---------------------------------------------------------

// Terminal layer. Inference emits probabilities; the training path passes
// logits through unchanged because the loss differentiates softmax and
// cross-entropy together.
class SoftmaxOutput : public Layer {
 public:
  std::string kind() const override { return "softmax_output"; }

  std::vector<std::size_t> out_shape(
      const std::vector<std::size_t>& in) const override {
    if (in.size() != 1) bail("softmax_output: expected a flat input");
    return in;
  }

  Tensor eval(const Tensor& x) const override {
    if (x.ndim() != 2) bail("softmax_output: batch shape mismatch");
    Tensor y = x;
    for (std::size_t b = 0; b < y.shape[0]; ++b)
      softmax_row(&y.at(b, 0), y.shape[1]);
    return y;
  }

  Tensor train_fwd(const Tensor& x, Rng&) override { return x; }

  Tensor train_bwd(const Tensor& gy) override { return gy; }
};

double arg(const std::map<std::string, double>& cfg, const std::string& key) {
  auto it = cfg.find(key);
  if (it == cfg.end()) bail("layer config missing '" + key + "'");
  return it->second;
}

double arg_or(const std::map<std::string, double>& cfg, const std::string& key,
              double fallback) {
  auto it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

std::size_t uarg(const std::map<std::string, double>& cfg,
                 const std::string& key) {
  const double v = arg(cfg, key);
  if (v < 0.0) bail("layer config '" + key + "' must be non-negative");
  return static_cast<std::size_t>(std::llround(v));
}

std::size_t uarg_or(const std::map<std::string, double>& cfg,
                    const std::string& key, std::size_t fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  if (it->second < 0.0) bail("layer config '" + key + "' must be non-negative");
  return static_cast<std::size_t>(std::llround(it->second));
}

}  // namespace

std::unique_ptr<Layer> make_dense(std::size_t in, std::size_t out) {
  return std::make_unique<Dense>(in, out);
}

std::unique_ptr<Layer> make_relu() { return std::make_unique<Relu>(); }

std::unique_ptr<Layer> make_batchnorm1d(std::size_t features, double momentum,
                                        double eps) {
  return std::make_unique<BatchNorm1d>(features, momentum, eps);
}

std::unique_ptr<Layer> make_dropout(double rate) {
  return std::make_unique<Dropout>(rate);
}

std::unique_ptr<Layer> make_conv1d(std::size_t in_ch, std::size_t out_ch,
                                   std::size_t kernel, std::size_t stride,
                                   std::size_t padding) {
  return std::make_unique<Conv1d>(in_ch, out_ch, kernel, stride, padding);
}

std::unique_ptr<Layer> make_maxpool1d(std::size_t kernel, std::size_t stride) {
  return std::make_unique<MaxPool1d>(kernel, stride);
}

std::unique_ptr<Layer> make_flatten() { return std::make_unique<Flatten>(); }

std::unique_ptr<Layer> make_positional_encoding(std::size_t d_model,
                                                std::size_t max_len) {
  return std::make_unique<PositionalEncoding>(d_model, max_len);
}

std::unique_ptr<Layer> make_encoder_block(std::size_t d_model, std::size_t d_ff,
                                          std::size_t n_heads) {
  return std::make_unique<EncoderBlock>(d_model, d_ff, n_heads);
}

std::unique_ptr<Layer> make_attention_pool(std::size_t d_model) {
  return std::make_unique<AttentionPool>(d_model);
}

std::unique_ptr<Layer> make_softmax_output() {
  return std::make_unique<SoftmaxOutput>();
}

std::unique_ptr<Layer> make_layer(const std::string& kind,
                                  const std::map<std::string, double>& config) {
  if (kind == "dense") return make_dense(uarg(config, "in"), uarg(config, "out"));
  if (kind == "relu") return make_relu();
  if (kind == "batchnorm1d")
    return make_batchnorm1d(uarg(config, "features"),
                            arg_or(config, "momentum", 0.1),
                            arg_or(config, "eps", 1e-5));
  if (kind == "dropout") return make_dropout(arg(config, "rate"));
  if (kind == "conv1d")
    return make_conv1d(uarg(config, "in_ch"), uarg(config, "out_ch"),
                       uarg(config, "kernel"), uarg(config, "stride"),
                       uarg_or(config, "padding", 0));
  if (kind == "maxpool1d")
    return make_maxpool1d(uarg(config, "kernel"), uarg(config, "stride"));
  if (kind == "flatten") return make_flatten();
  if (kind == "positional_encoding")
    return make_positional_encoding(uarg(config, "d_model"),
                                    uarg_or(config, "max_len", 5000));
  if (kind == "encoder_block")
    return make_encoder_block(uarg(config, "d_model"), uarg(config, "d_ff"),
                              uarg(config, "n_heads"));
  if (kind == "attention_pool")
    return make_attention_pool(uarg(config, "d_model"));
  if (kind == "softmax_output") return make_softmax_output();
  bail("unknown layer kind '" + kind + "'");
}

void set_dropout_enabled(Layer& layer, bool enabled) {
  if (auto* d = dynamic_cast<Dropout*>(&layer)) d->set_enabled(enabled);
}

Tensor attention_pool_weights(const Layer& layer, const Tensor& x) {
  const auto* pool = dynamic_cast<const AttentionPool*>(&layer);
  if (pool == nullptr)
    bail("attention_pool_weights: layer is not an attention pool");
  return pool->weights(x);
}

}  // namespace scanleak::nn
