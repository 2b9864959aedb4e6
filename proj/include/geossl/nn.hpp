#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "geossl/util.hpp"

namespace geossl::nn {

// Minimal CPU training stack: float tensors, explicit per-layer backward,
// activation caches held outside the layers so one network instance can keep
// several forward passes alive within a single optimization step.

struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(numel_of(shape), 0.f) {}

    static std::size_t numel_of(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) n *= static_cast<std::size_t>(d);
        return n;
    }
    std::size_t numel() const { return data.size(); }
    int dim(std::size_t i) const { return shape[i]; }
    void zero() { std::fill(data.begin(), data.end(), 0.f); }
};

/// Forward-pass options. `update_stats` only matters in train mode and lets a
/// caller run a gradient-free train-mode pass (batch statistics used, running
/// statistics untouched).
struct Mode {
    bool train = false;
    bool update_stats = true;
};

inline constexpr Mode kEval{false, false};
inline constexpr Mode kTrain{true, true};

/// Per-call activation cache. Layers push in forward order and pop in exact
/// reverse during backward.
class Ctx {
  public:
    void push(Tensor t) { stack_.push_back(std::move(t)); }
    Tensor pop() {
        if (stack_.empty()) throw ShapeError("backward cache underflow");
        Tensor t = std::move(stack_.back());
        stack_.pop_back();
        return t;
    }
    bool empty() const { return stack_.empty(); }

  private:
    std::vector<Tensor> stack_;
};

struct ParamRef {
    std::string name;
    Tensor* value;
    Tensor* grad;
};

struct BufferRef {
    std::string name;
    Tensor* value;
};

class Layer {
  public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, Ctx* ctx, const Mode& mode) = 0;
    /// Accumulates into parameter grads and returns d(input).
    virtual Tensor backward(const Tensor& dy, Ctx& ctx) = 0;
    virtual void init(Rng& rng) { (void)rng; }
    virtual void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
        (void)prefix;
        (void)out;
    }
    virtual void collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) {
        (void)prefix;
        (void)out;
    }
};

class Conv2d final : public Layer {
  public:
    Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, bool bias = false);
    Tensor forward(const Tensor& x, Ctx* ctx, const Mode& mode) override;
    Tensor backward(const Tensor& dy, Ctx& ctx) override;
    void init(Rng& rng) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;

  private:
    int in_ch_, out_ch_, kernel_, stride_, pad_;
    bool has_bias_;
    Tensor weight_, weight_grad_;  // [out_ch, in_ch*k*k]
    Tensor bias_, bias_grad_;      // [out_ch]
};

class BatchNorm2d final : public Layer {
  public:
    explicit BatchNorm2d(int channels, float momentum = 0.1f, float eps = 1e-5f);
    Tensor forward(const Tensor& x, Ctx* ctx, const Mode& mode) override;
    Tensor backward(const Tensor& dy, Ctx& ctx) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) override;

  private:
    int channels_;
    float momentum_, eps_;
    Tensor gamma_, gamma_grad_, beta_, beta_grad_;
    Tensor running_mean_, running_var_;
};

class ReLU final : public Layer {
  public:
    Tensor forward(const Tensor& x, Ctx* ctx, const Mode& mode) override;
    Tensor backward(const Tensor& dy, Ctx& ctx) override;
};

class Linear final : public Layer {
  public:
    Linear(int in_features, int out_features, bool bias = true);
    Tensor forward(const Tensor& x, Ctx* ctx, const Mode& mode) override;
    Tensor backward(const Tensor& dy, Ctx& ctx) override;
    void init(Rng& rng) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    int in_features() const { return in_; }
    int out_features() const { return out_; }

  private:
    int in_, out_;
    bool has_bias_;
    Tensor weight_, weight_grad_;  // [out, in]
    Tensor bias_, bias_grad_;
};

/// Mean over the spatial extent: [N,C,H,W] -> [N,C].
class GlobalAvgPool final : public Layer {
  public:
    Tensor forward(const Tensor& x, Ctx* ctx, const Mode& mode) override;
    Tensor backward(const Tensor& dy, Ctx& ctx) override;
};

class Sequential final : public Layer {
  public:
    Sequential() = default;
    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
    Tensor forward(const Tensor& x, Ctx* ctx, const Mode& mode) override;
    Tensor backward(const Tensor& dy, Ctx& ctx) override;
    void init(Rng& rng) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) override;
    std::size_t size() const { return layers_.size(); }

  private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

/// Residual bottleneck (1x1 -> 3x3 -> 1x1 with projection shortcut when the
/// shape changes), as used by the "paper" preset encoder.
class Bottleneck final : public Layer {
  public:
    Bottleneck(int in_ch, int mid_ch, int out_ch, int stride);
    Tensor forward(const Tensor& x, Ctx* ctx, const Mode& mode) override;
    Tensor backward(const Tensor& dy, Ctx& ctx) override;
    void init(Rng& rng) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) override;

  private:
    bool has_projection_;
    Sequential main_;
    Sequential projection_;
};

/// Two affine layers with a single ReLU in between.
std::unique_ptr<Sequential> make_mlp(int in_dim, int hidden_dim, int out_dim);

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

class Optimizer {
  public:
    virtual ~Optimizer() = default;
    void attach(std::vector<ParamRef> params) { params_ = std::move(params); }
    const std::vector<ParamRef>& params() const { return params_; }
    void zero_grad();
    virtual void step(float lr) = 0;
    /// Internal state tensors (moments, velocities) for checkpointing.
    virtual std::vector<BufferRef> state(std::vector<std::string>& scalar_keys,
                                         std::vector<double>& scalar_values) = 0;
    virtual void set_scalar(const std::string& key, double value) = 0;

  protected:
    std::vector<ParamRef> params_;
};

class Adam final : public Optimizer {
  public:
    Adam(float beta1, float beta2, float eps, float weight_decay)
        : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}
    void step(float lr) override;
    std::vector<BufferRef> state(std::vector<std::string>& scalar_keys,
                                 std::vector<double>& scalar_values) override;
    void set_scalar(const std::string& key, double value) override;

  private:
    void ensure_state();
    float beta1_, beta2_, eps_, weight_decay_;
    std::int64_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

class SgdMomentum final : public Optimizer {
  public:
    SgdMomentum(float momentum, float weight_decay)
        : momentum_(momentum), weight_decay_(weight_decay) {}
    void step(float lr) override;
    std::vector<BufferRef> state(std::vector<std::string>& scalar_keys,
                                 std::vector<double>& scalar_values) override;
    void set_scalar(const std::string& key, double value) override;

  private:
    float momentum_, weight_decay_;
    std::vector<Tensor> velocity_;
};

}  // namespace geossl::nn
