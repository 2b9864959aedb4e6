#include "geossl/nn.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace geossl::nn {

namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

void require(bool cond, const char* msg) {
    if (!cond) throw ShapeError(msg);
}

int conv_out_dim(int in, int kernel, int stride, int pad) {
    return (in + 2 * pad - kernel) / stride + 1;
}

// Gathers conv patches: result is [C*k*k, N*outH*outW], patch-channel major.
Tensor im2col(const Tensor& x, int kernel, int stride, int pad, int out_h, int out_w) {
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    Tensor col({c * kernel * kernel, n * out_h * out_w});
    const int cols = n * out_h * out_w;
    for (int ch = 0; ch < c; ++ch) {
        for (int ky = 0; ky < kernel; ++ky) {
            for (int kx = 0; kx < kernel; ++kx) {
                const int row = (ch * kernel + ky) * kernel + kx;
                float* dst = &col.data[static_cast<size_t>(row) * cols];
                for (int img = 0; img < n; ++img) {
                    const float* src = &x.data[(static_cast<size_t>(img) * c + ch) * h * w];
                    for (int oy = 0; oy < out_h; ++oy) {
                        const int iy = oy * stride + ky - pad;
                        const bool y_ok = iy >= 0 && iy < h;
                        float* d = dst + (static_cast<size_t>(img) * out_h + oy) * out_w;
                        for (int ox = 0; ox < out_w; ++ox) {
                            const int ix = ox * stride + kx - pad;
                            d[ox] = (y_ok && ix >= 0 && ix < w)
                                        ? src[static_cast<size_t>(iy) * w + ix]
                                        : 0.f;
                        }
                    }
                }
            }
        }
    }
    return col;
}

// Scatter-add of column gradients back to input layout.
void col2im(const Tensor& col, Tensor& dx, int kernel, int stride, int pad, int out_h,
            int out_w) {
    const int n = dx.dim(0), c = dx.dim(1), h = dx.dim(2), w = dx.dim(3);
    const int cols = n * out_h * out_w;
    for (int ch = 0; ch < c; ++ch) {
        for (int ky = 0; ky < kernel; ++ky) {
            for (int kx = 0; kx < kernel; ++kx) {
                const int row = (ch * kernel + ky) * kernel + kx;
                const float* src = &col.data[static_cast<size_t>(row) * cols];
                for (int img = 0; img < n; ++img) {
                    float* dst = &dx.data[(static_cast<size_t>(img) * c + ch) * h * w];
                    for (int oy = 0; oy < out_h; ++oy) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= h) continue;
                        const float* s = src + (static_cast<size_t>(img) * out_h + oy) * out_w;
                        for (int ox = 0; ox < out_w; ++ox) {
                            const int ix = ox * stride + kx - pad;
                            if (ix >= 0 && ix < w) dst[static_cast<size_t>(iy) * w + ix] += s[ox];
                        }
                    }
                }
            }
        }
    }
}

Tensor shape_tensor(std::initializer_list<int> vals) {
    Tensor t({static_cast<int>(vals.size())});
    int i = 0;
    for (int v : vals) t.data[static_cast<size_t>(i++)] = static_cast<float>(v);
    return t;
}

}  // namespace

// ----- Conv2d ---------------------------------------------------------------

Conv2d::Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, bool bias)
    : in_ch_(in_ch),
      out_ch_(out_ch),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      has_bias_(bias),
      weight_({out_ch, in_ch * kernel * kernel}),
      weight_grad_({out_ch, in_ch * kernel * kernel}),
      bias_({bias ? out_ch : 0}),
      bias_grad_({bias ? out_ch : 0}) {}

void Conv2d::init(Rng& rng) {
    const double std = std::sqrt(2.0 / (in_ch_ * kernel_ * kernel_));
    for (auto& v : weight_.data) v = static_cast<float>(rng.normal() * std);
    bias_.zero();
}

void Conv2d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".weight", &weight_, &weight_grad_});
    if (has_bias_) out.push_back({prefix + ".bias", &bias_, &bias_grad_});
}

Tensor Conv2d::forward(const Tensor& x, Ctx* ctx, const Mode&) {
    require(x.shape.size() == 4 && x.dim(1) == in_ch_, "Conv2d: bad input shape");
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const int oh = conv_out_dim(h, kernel_, stride_, pad_);
    const int ow = conv_out_dim(w, kernel_, stride_, pad_);
    require(oh > 0 && ow > 0, "Conv2d: output would be empty");

    Tensor col = im2col(x, kernel_, stride_, pad_, oh, ow);
    const int cols = n * oh * ow;
    Tensor y({n, out_ch_, oh, ow});
    {
        CMapRM wmat(weight_.data.data(), out_ch_, in_ch_ * kernel_ * kernel_);
        CMapRM cmat(col.data.data(), in_ch_ * kernel_ * kernel_, cols);
        MatRM prod = wmat * cmat;  // [out_ch, n*oh*ow]
        for (int img = 0; img < n; ++img)
            for (int oc = 0; oc < out_ch_; ++oc) {
                float* dst = &y.data[(static_cast<size_t>(img) * out_ch_ + oc) * oh * ow];
                const float* src = prod.row(oc).data() + static_cast<size_t>(img) * oh * ow;
                std::copy(src, src + static_cast<size_t>(oh) * ow, dst);
                if (has_bias_)
                    for (int i = 0; i < oh * ow; ++i) dst[i] += bias_.data[static_cast<size_t>(oc)];
            }
    }
    if (ctx) {
        ctx->push(std::move(col));
        ctx->push(shape_tensor({n, h, w, oh, ow}));
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& dy, Ctx& ctx) {
    Tensor meta = ctx.pop();
    const int n = static_cast<int>(meta.data[0]);
    const int h = static_cast<int>(meta.data[1]);
    const int w = static_cast<int>(meta.data[2]);
    const int oh = static_cast<int>(meta.data[3]);
    const int ow = static_cast<int>(meta.data[4]);
    Tensor col = ctx.pop();
    const int cols = n * oh * ow;
    const int ckk = in_ch_ * kernel_ * kernel_;

    // Regroup dy into [out_ch, n*oh*ow].
    MatRM dy_mat(out_ch_, cols);
    for (int img = 0; img < n; ++img)
        for (int oc = 0; oc < out_ch_; ++oc) {
            const float* src = &dy.data[(static_cast<size_t>(img) * out_ch_ + oc) * oh * ow];
            std::copy(src, src + static_cast<size_t>(oh) * ow,
                      dy_mat.row(oc).data() + static_cast<size_t>(img) * oh * ow);
        }

    CMapRM cmat(col.data.data(), ckk, cols);
    MapRM dw(weight_grad_.data.data(), out_ch_, ckk);
    dw.noalias() += dy_mat * cmat.transpose();
    if (has_bias_) {
        for (int oc = 0; oc < out_ch_; ++oc)
            bias_grad_.data[static_cast<size_t>(oc)] += dy_mat.row(oc).sum();
    }

    CMapRM wmat(weight_.data.data(), out_ch_, ckk);
    MatRM dcol_m = wmat.transpose() * dy_mat;  // [ckk, cols]
    Tensor dcol({ckk, cols});
    std::copy(dcol_m.data(), dcol_m.data() + dcol_m.size(), dcol.data.begin());

    Tensor dx({n, in_ch_, h, w});
    col2im(dcol, dx, kernel_, stride_, pad_, oh, ow);
    return dx;
}

// ----- BatchNorm2d ----------------------------------------------------------

BatchNorm2d::BatchNorm2d(int channels, float momentum, float eps)
    : channels_(channels),
      momentum_(momentum),
      eps_(eps),
      gamma_({channels}),
      gamma_grad_({channels}),
      beta_({channels}),
      beta_grad_({channels}),
      running_mean_({channels}),
      running_var_({channels}) {
    std::fill(gamma_.data.begin(), gamma_.data.end(), 1.f);
    std::fill(running_var_.data.begin(), running_var_.data.end(), 1.f);
}

void BatchNorm2d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".gamma", &gamma_, &gamma_grad_});
    out.push_back({prefix + ".beta", &beta_, &beta_grad_});
}

void BatchNorm2d::collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) {
    out.push_back({prefix + ".running_mean", &running_mean_});
    out.push_back({prefix + ".running_var", &running_var_});
}

Tensor BatchNorm2d::forward(const Tensor& x, Ctx* ctx, const Mode& mode) {
    require(x.shape.size() == 4 && x.dim(1) == channels_, "BatchNorm2d: bad input shape");
    const int n = x.dim(0), c = channels_, h = x.dim(2), w = x.dim(3);
    const std::size_t plane = static_cast<size_t>(h) * w;
    const double count = static_cast<double>(n) * h * w;

    Tensor y(x.shape);
    Tensor xhat(x.shape);
    Tensor invstd({c});
    for (int ch = 0; ch < c; ++ch) {
        double mean, var;
        if (mode.train) {
            double sum = 0, sq = 0;
            for (int img = 0; img < n; ++img) {
                const float* p = &x.data[(static_cast<size_t>(img) * c + ch) * plane];
                for (std::size_t i = 0; i < plane; ++i) {
                    sum += p[i];
                    sq += static_cast<double>(p[i]) * p[i];
                }
            }
            mean = sum / count;
            var = std::max(0.0, sq / count - mean * mean);
            if (mode.update_stats) {
                running_mean_.data[size_t(ch)] = static_cast<float>(
                    (1.0 - momentum_) * running_mean_.data[size_t(ch)] + momentum_ * mean);
                running_var_.data[size_t(ch)] = static_cast<float>(
                    (1.0 - momentum_) * running_var_.data[size_t(ch)] + momentum_ * var);
            }
        } else {
            mean = running_mean_.data[size_t(ch)];
            var = running_var_.data[size_t(ch)];
        }
        const float is = static_cast<float>(1.0 / std::sqrt(var + eps_));
        invstd.data[size_t(ch)] = is;
        const float g = gamma_.data[size_t(ch)], b = beta_.data[size_t(ch)];
        const float m = static_cast<float>(mean);
        for (int img = 0; img < n; ++img) {
            const float* p = &x.data[(static_cast<size_t>(img) * c + ch) * plane];
            float* xh = &xhat.data[(static_cast<size_t>(img) * c + ch) * plane];
            float* out = &y.data[(static_cast<size_t>(img) * c + ch) * plane];
            for (std::size_t i = 0; i < plane; ++i) {
                xh[i] = (p[i] - m) * is;
                out[i] = g * xh[i] + b;
            }
        }
    }
    if (ctx) {
        ctx->push(std::move(xhat));
        ctx->push(std::move(invstd));
    }
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy, Ctx& ctx) {
    Tensor invstd = ctx.pop();
    Tensor xhat = ctx.pop();
    const int n = dy.dim(0), c = channels_, h = dy.dim(2), w = dy.dim(3);
    const std::size_t plane = static_cast<size_t>(h) * w;
    const double count = static_cast<double>(n) * h * w;

    Tensor dx(dy.shape);
    for (int ch = 0; ch < c; ++ch) {
        double sum_dy = 0, sum_dy_xhat = 0;
        for (int img = 0; img < n; ++img) {
            const float* d = &dy.data[(static_cast<size_t>(img) * c + ch) * plane];
            const float* xh = &xhat.data[(static_cast<size_t>(img) * c + ch) * plane];
            for (std::size_t i = 0; i < plane; ++i) {
                sum_dy += d[i];
                sum_dy_xhat += static_cast<double>(d[i]) * xh[i];
            }
        }
        gamma_grad_.data[size_t(ch)] += static_cast<float>(sum_dy_xhat);
        beta_grad_.data[size_t(ch)] += static_cast<float>(sum_dy);

        const double g_is = gamma_.data[size_t(ch)] * static_cast<double>(invstd.data[size_t(ch)]);
        for (int img = 0; img < n; ++img) {
            const float* d = &dy.data[(static_cast<size_t>(img) * c + ch) * plane];
            const float* xh = &xhat.data[(static_cast<size_t>(img) * c + ch) * plane];
            float* o = &dx.data[(static_cast<size_t>(img) * c + ch) * plane];
            for (std::size_t i = 0; i < plane; ++i)
                o[i] = static_cast<float>(
                    g_is * (d[i] - sum_dy / count - xh[i] * sum_dy_xhat / count));
        }
    }
    return dx;
}

// ----- ReLU -----------------------------------------------------------------

Tensor ReLU::forward(const Tensor& x, Ctx* ctx, const Mode&) {
    Tensor y = x;
    for (auto& v : y.data) v = v > 0.f ? v : 0.f;
    if (ctx) {
        Tensor mask(x.shape);
        for (std::size_t i = 0; i < x.numel(); ++i) mask.data[i] = x.data[i] > 0.f ? 1.f : 0.f;
        ctx->push(std::move(mask));
    }
    return y;
}

Tensor ReLU::backward(const Tensor& dy, Ctx& ctx) {
    Tensor mask = ctx.pop();
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.numel(); ++i) dx.data[i] *= mask.data[i];
    return dx;
}

// ----- Linear ---------------------------------------------------------------

Linear::Linear(int in_features, int out_features, bool bias)
    : in_(in_features),
      out_(out_features),
      has_bias_(bias),
      weight_({out_features, in_features}),
      weight_grad_({out_features, in_features}),
      bias_({bias ? out_features : 0}),
      bias_grad_({bias ? out_features : 0}) {}

void Linear::init(Rng& rng) {
    const double std = std::sqrt(2.0 / in_);
    for (auto& v : weight_.data) v = static_cast<float>(rng.normal() * std);
    bias_.zero();
}

void Linear::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".weight", &weight_, &weight_grad_});
    if (has_bias_) out.push_back({prefix + ".bias", &bias_, &bias_grad_});
}

Tensor Linear::forward(const Tensor& x, Ctx* ctx, const Mode&) {
    require(x.shape.size() == 2 && x.dim(1) == in_, "Linear: bad input shape");
    const int n = x.dim(0);
    Tensor y({n, out_});
    CMapRM xm(x.data.data(), n, in_);
    CMapRM wm(weight_.data.data(), out_, in_);
    MapRM ym(y.data.data(), n, out_);
    ym.noalias() = xm * wm.transpose();
    if (has_bias_) {
        CMapRM bm(bias_.data.data(), 1, out_);
        ym.rowwise() += bm.row(0);
    }
    if (ctx) ctx->push(x);
    return y;
}

Tensor Linear::backward(const Tensor& dy, Ctx& ctx) {
    Tensor x = ctx.pop();
    const int n = x.dim(0);
    CMapRM xm(x.data.data(), n, in_);
    CMapRM dym(dy.data.data(), n, out_);
    MapRM dwm(weight_grad_.data.data(), out_, in_);
    dwm.noalias() += dym.transpose() * xm;
    if (has_bias_) {
        MapRM dbm(bias_grad_.data.data(), 1, out_);
        dbm.row(0) += dym.colwise().sum();
    }
    Tensor dx({n, in_});
    CMapRM wm(weight_.data.data(), out_, in_);
    MapRM dxm(dx.data.data(), n, in_);
    dxm.noalias() = dym * wm;
    return dx;
}

// ----- GlobalAvgPool ---------------------------------------------------------

Tensor GlobalAvgPool::forward(const Tensor& x, Ctx* ctx, const Mode&) {
    require(x.shape.size() == 4, "GlobalAvgPool: expects NCHW");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const std::size_t plane = static_cast<size_t>(h) * w;
    Tensor y({n, c});
    for (int img = 0; img < n; ++img)
        for (int ch = 0; ch < c; ++ch) {
            const float* p = &x.data[(static_cast<size_t>(img) * c + ch) * plane];
            double sum = 0;
            for (std::size_t i = 0; i < plane; ++i) sum += p[i];
            y.data[static_cast<size_t>(img) * c + ch] = static_cast<float>(sum / double(plane));
        }
    if (ctx) ctx->push(shape_tensor({n, c, h, w}));
    return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy, Ctx& ctx) {
    Tensor meta = ctx.pop();
    const int n = static_cast<int>(meta.data[0]);
    const int c = static_cast<int>(meta.data[1]);
    const int h = static_cast<int>(meta.data[2]);
    const int w = static_cast<int>(meta.data[3]);
    const std::size_t plane = static_cast<size_t>(h) * w;
    Tensor dx({n, c, h, w});
    for (int img = 0; img < n; ++img)
        for (int ch = 0; ch < c; ++ch) {
            const float g = dy.data[static_cast<size_t>(img) * c + ch] / static_cast<float>(plane);
            float* p = &dx.data[(static_cast<size_t>(img) * c + ch) * plane];
            std::fill(p, p + plane, g);
        }
    return dx;
}

// ----- Sequential -------------------------------------------------------------

Tensor Sequential::forward(const Tensor& x, Ctx* ctx, const Mode& mode) {
    Tensor cur = x;
    for (auto& layer : layers_) cur = layer->forward(cur, ctx, mode);
    return cur;
}

Tensor Sequential::backward(const Tensor& dy, Ctx& ctx) {
    Tensor cur = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur, ctx);
    return cur;
}

void Sequential::init(Rng& rng) {
    for (auto& layer : layers_) layer->init(rng);
}

void Sequential::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->collect_params(prefix + "." + std::to_string(i), out);
}

void Sequential::collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) {
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->collect_buffers(prefix + "." + std::to_string(i), out);
}

// ----- Bottleneck --------------------------------------------------------------

Bottleneck::Bottleneck(int in_ch, int mid_ch, int out_ch, int stride)
    : has_projection_(stride != 1 || in_ch != out_ch) {
    main_.add(std::make_unique<Conv2d>(in_ch, mid_ch, 1, 1, 0));
    main_.add(std::make_unique<BatchNorm2d>(mid_ch));
    main_.add(std::make_unique<ReLU>());
    main_.add(std::make_unique<Conv2d>(mid_ch, mid_ch, 3, stride, 1));
    main_.add(std::make_unique<BatchNorm2d>(mid_ch));
    main_.add(std::make_unique<ReLU>());
    main_.add(std::make_unique<Conv2d>(mid_ch, out_ch, 1, 1, 0));
    main_.add(std::make_unique<BatchNorm2d>(out_ch));
    if (has_projection_) {
        projection_.add(std::make_unique<Conv2d>(in_ch, out_ch, 1, stride, 0));
        projection_.add(std::make_unique<BatchNorm2d>(out_ch));
    }
}

Tensor Bottleneck::forward(const Tensor& x, Ctx* ctx, const Mode& mode) {
    Tensor branch = main_.forward(x, ctx, mode);
    Tensor skip = has_projection_ ? projection_.forward(x, ctx, mode) : x;
    Tensor sum(branch.shape);
    for (std::size_t i = 0; i < sum.numel(); ++i) sum.data[i] = branch.data[i] + skip.data[i];
    // Final ReLU, mask cached last so backward sees it first.
    Tensor y = sum;
    for (auto& v : y.data) v = v > 0.f ? v : 0.f;
    if (ctx) {
        Tensor mask(sum.shape);
        for (std::size_t i = 0; i < sum.numel(); ++i)
            mask.data[i] = sum.data[i] > 0.f ? 1.f : 0.f;
        ctx->push(std::move(mask));
    }
    return y;
}

Tensor Bottleneck::backward(const Tensor& dy, Ctx& ctx) {
    Tensor mask = ctx.pop();
    Tensor dsum = dy;
    for (std::size_t i = 0; i < dsum.numel(); ++i) dsum.data[i] *= mask.data[i];
    Tensor dx_skip = has_projection_ ? projection_.backward(dsum, ctx) : dsum;
    Tensor dx_main = main_.backward(dsum, ctx);
    require(dx_main.shape == dx_skip.shape, "Bottleneck: branch gradient shape mismatch");
    for (std::size_t i = 0; i < dx_main.numel(); ++i) dx_main.data[i] += dx_skip.data[i];
    return dx_main;
}

void Bottleneck::init(Rng& rng) {
    main_.init(rng);
    if (has_projection_) projection_.init(rng);
}

void Bottleneck::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    main_.collect_params(prefix + ".main", out);
    if (has_projection_) projection_.collect_params(prefix + ".proj", out);
}

void Bottleneck::collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) {
    main_.collect_buffers(prefix + ".main", out);
    if (has_projection_) projection_.collect_buffers(prefix + ".proj", out);
}

std::unique_ptr<Sequential> make_mlp(int in_dim, int hidden_dim, int out_dim) {
    auto mlp = std::make_unique<Sequential>();
    mlp->add(std::make_unique<Linear>(in_dim, hidden_dim));
    mlp->add(std::make_unique<ReLU>());
    mlp->add(std::make_unique<Linear>(hidden_dim, out_dim));
    return mlp;
}

// ----- Optimizers -----------------------------------------------------------

void Optimizer::zero_grad() {
    for (auto& p : params_) p.grad->zero();
}

void Adam::ensure_state() {
    if (!m_.empty()) return;
    for (auto& p : params_) {
        m_.emplace_back(p.value->shape);
        v_.emplace_back(p.value->shape);
    }
}

void Adam::step(float lr) {
    ensure_state();
    ++t_;
    const double bc1 = 1.0 - std::pow(static_cast<double>(beta1_), static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(static_cast<double>(beta2_), static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        float* w = params_[i].value->data.data();
        const float* g = params_[i].grad->data.data();
        float* m = m_[i].data.data();
        float* v = v_[i].data.data();
        const std::size_t n = params_[i].value->numel();
        for (std::size_t j = 0; j < n; ++j) {
            const float grad = g[j] + weight_decay_ * w[j];
            m[j] = beta1_ * m[j] + (1.f - beta1_) * grad;
            v[j] = beta2_ * v[j] + (1.f - beta2_) * grad * grad;
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            w[j] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + eps_));
        }
    }
}

std::vector<BufferRef> Adam::state(std::vector<std::string>& scalar_keys,
                                   std::vector<double>& scalar_values) {
    ensure_state();
    std::vector<BufferRef> out;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        out.push_back({"adam.m." + params_[i].name, &m_[i]});
        out.push_back({"adam.v." + params_[i].name, &v_[i]});
    }
    scalar_keys.push_back("adam.t");
    scalar_values.push_back(static_cast<double>(t_));
    return out;
}

void Adam::set_scalar(const std::string& key, double value) {
    if (key == "adam.t") t_ = static_cast<std::int64_t>(value);
}

void SgdMomentum::step(float lr) {
    if (velocity_.empty())
        for (auto& p : params_) velocity_.emplace_back(p.value->shape);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        float* w = params_[i].value->data.data();
        const float* g = params_[i].grad->data.data();
        float* v = velocity_[i].data.data();
        const std::size_t n = params_[i].value->numel();
        for (std::size_t j = 0; j < n; ++j) {
            const float grad = g[j] + weight_decay_ * w[j];
            v[j] = momentum_ * v[j] + grad;
            w[j] -= lr * v[j];
        }
    }
}

std::vector<BufferRef> SgdMomentum::state(std::vector<std::string>& scalar_keys,
                                          std::vector<double>& scalar_values) {
    if (velocity_.empty())
        for (auto& p : params_) velocity_.emplace_back(p.value->shape);
    std::vector<BufferRef> out;
    for (std::size_t i = 0; i < params_.size(); ++i)
        out.push_back({"sgd.velocity." + params_[i].name, &velocity_[i]});
    (void)scalar_keys;
    (void)scalar_values;
    return out;
}

void SgdMomentum::set_scalar(const std::string&, double) {}

}  // namespace geossl::nn
