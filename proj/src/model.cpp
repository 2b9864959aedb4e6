#include "geossl/model.hpp"

#include <algorithm>

namespace geossl::model {

using nn::BufferRef;
using nn::ParamRef;
using nn::Tensor;

Preset preset_from_string(const std::string& s) {
    if (s == "desk") return Preset::desk;
    if (s == "paper") return Preset::paper;
    throw ValidationError("unknown preset: '" + s + "'");
}

std::string to_string(Preset p) {
    return p == Preset::desk ? "desk" : "paper";
}

Placement placement_from_string(const std::string& s) {
    if (s == "on_f") return Placement::on_f;
    if (s == "on_g") return Placement::on_g;
    throw ValidationError("unknown placement: '" + s + "'");
}

std::string to_string(Placement p) {
    return p == Placement::on_f ? "on_f" : "on_g";
}

void ModelConfig::validate() const {
    if (p < 8 || p % 8 != 0) throw ValidationError("model.p must be a positive multiple of 8");
    if (k <= 0 || hidden <= 0) throw ValidationError("model.k and model.hidden must be positive");
    if (with_regressor && m <= 0) throw ValidationError("model.m must be positive");
    if (preset == Preset::paper && p != 2048)
        throw ValidationError("paper preset fixes p = 2048");
}

int ModelConfig::regressor_in() const {
    const int base = placement == Placement::on_f ? p : k;
    return concat_latents ? 2 * base : base;
}

namespace {

std::unique_ptr<nn::Sequential> desk_encoder(int p) {
    // Four conv blocks with channel widths p/8, p/4, p/2, p; strided
    // downsampling; global average pool to a p-dim vector.
    auto net = std::make_unique<nn::Sequential>();
    const int c1 = p / 8, c2 = p / 4, c3 = p / 2;
    net->add(std::make_unique<nn::Conv2d>(3, c1, 3, 1, 1));
    net->add(std::make_unique<nn::BatchNorm2d>(c1));
    net->add(std::make_unique<nn::ReLU>());
    net->add(std::make_unique<nn::Conv2d>(c1, c2, 3, 2, 1));
    net->add(std::make_unique<nn::BatchNorm2d>(c2));
    net->add(std::make_unique<nn::ReLU>());
    net->add(std::make_unique<nn::Conv2d>(c2, c3, 3, 2, 1));
    net->add(std::make_unique<nn::BatchNorm2d>(c3));
    net->add(std::make_unique<nn::ReLU>());
    net->add(std::make_unique<nn::Conv2d>(c3, p, 3, 2, 1));
    net->add(std::make_unique<nn::BatchNorm2d>(p));
    net->add(std::make_unique<nn::ReLU>());
    net->add(std::make_unique<nn::GlobalAvgPool>());
    return net;
}

std::unique_ptr<nn::Sequential> paper_encoder() {
    // Bottleneck-residual encoder, 3-4-6-3 blocks, small-image stem.
    auto net = std::make_unique<nn::Sequential>();
    net->add(std::make_unique<nn::Conv2d>(3, 64, 3, 1, 1));
    net->add(std::make_unique<nn::BatchNorm2d>(64));
    net->add(std::make_unique<nn::ReLU>());
    const int counts[4] = {3, 4, 6, 3};
    const int mids[4] = {64, 128, 256, 512};
    int in_ch = 64;
    for (int stage = 0; stage < 4; ++stage) {
        const int out_ch = mids[stage] * 4;
        for (int block = 0; block < counts[stage]; ++block) {
            const int stride = (stage > 0 && block == 0) ? 2 : 1;
            net->add(std::make_unique<nn::Bottleneck>(in_ch, mids[stage], out_ch, stride));
            in_ch = out_ch;
        }
    }
    net->add(std::make_unique<nn::GlobalAvgPool>());
    return net;
}

}  // namespace

Bundle Bundle::build(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Bundle b;
    b.cfg_ = cfg;
    b.f_ = cfg.preset == Preset::desk ? desk_encoder(cfg.p) : paper_encoder();
    b.g_ = nn::make_mlp(cfg.p, cfg.hidden, cfg.k);
    if (cfg.with_regressor) b.h_ = nn::make_mlp(cfg.regressor_in(), cfg.hidden, cfg.m);
    if (cfg.with_predictor) b.q_ = nn::make_mlp(cfg.k, cfg.hidden, cfg.k);

    // Every submodule draws from its own stream so that the presence of one
    // never shifts another's initialization.
    {
        Rng rng(derive_seed(seed, "init.f"));
        b.f_->init(rng);
    }
    {
        Rng rng(derive_seed(seed, "init.g"));
        b.g_->init(rng);
    }
    if (b.h_) {
        Rng rng(derive_seed(seed, "init.h"));
        b.h_->init(rng);
    }
    if (b.q_) {
        Rng rng(derive_seed(seed, "init.q"));
        b.q_->init(rng);
    }

    if (cfg.with_target) {
        b.f_target_ = cfg.preset == Preset::desk ? desk_encoder(cfg.p) : paper_encoder();
        b.g_target_ = nn::make_mlp(cfg.p, cfg.hidden, cfg.k);
        b.copy_online_to_target();
    }
    return b;
}

Tensor Bundle::encode(const Tensor& images, nn::Ctx* ctx, const nn::Mode& mode) {
    if (images.shape.size() != 4 || images.dim(1) != 3)
        throw ShapeError("encode: expected [N,3,H,W] image batch");
    return f_->forward(images, ctx, mode);
}

Tensor Bundle::project(const Tensor& latents, nn::Ctx* ctx, const nn::Mode& mode) {
    if (latents.shape.size() != 2 || latents.dim(1) != cfg_.p)
        throw ShapeError("project: expected [N,p] latents");
    return g_->forward(latents, ctx, mode);
}

Tensor Bundle::regress(const Tensor& latent_diffs, nn::Ctx* ctx, const nn::Mode& mode) {
    if (!h_) throw ValidationError("regress: bundle was built without a regression head");
    if (latent_diffs.shape.size() != 2 || latent_diffs.dim(1) != cfg_.regressor_in())
        throw ShapeError("regress: input width does not match the configured head");
    return h_->forward(latent_diffs, ctx, mode);
}

Tensor Bundle::predict(const Tensor& projections, nn::Ctx* ctx, const nn::Mode& mode) {
    if (!q_) throw ValidationError("predict: bundle was built without a predictor");
    return q_->forward(projections, ctx, mode);
}

Tensor Bundle::encode_target(const Tensor& images, const nn::Mode& mode) {
    if (!f_target_) throw ValidationError("encode_target: bundle has no target copy");
    return f_target_->forward(images, nullptr, mode);
}

Tensor Bundle::project_target(const Tensor& latents, const nn::Mode& mode) {
    if (!g_target_) throw ValidationError("project_target: bundle has no target copy");
    return g_target_->forward(latents, nullptr, mode);
}

std::vector<ParamRef> Bundle::trainable_params() {
    std::vector<ParamRef> out;
    f_->collect_params("f", out);
    g_->collect_params("g", out);
    if (h_) h_->collect_params("h", out);
    if (q_) q_->collect_params("q", out);
    return out;
}

std::vector<BufferRef> Bundle::buffers() {
    std::vector<BufferRef> out;
    f_->collect_buffers("f", out);
    g_->collect_buffers("g", out);
    if (h_) h_->collect_buffers("h", out);
    if (q_) q_->collect_buffers("q", out);
    return out;
}

namespace {

std::vector<BufferRef> full_state(nn::Sequential& f, nn::Sequential& g, const char* fp,
                                  const char* gp) {
    std::vector<BufferRef> out;
    std::vector<ParamRef> params;
    f.collect_params(fp, params);
    g.collect_params(gp, params);
    for (auto& p : params) out.push_back({p.name, p.value});
    f.collect_buffers(fp, out);
    g.collect_buffers(gp, out);
    return out;
}

}  // namespace

std::vector<BufferRef> Bundle::target_state() {
    if (!f_target_) throw ValidationError("bundle has no target copy");
    return full_state(*f_target_, *g_target_, "target.f", "target.g");
}

std::vector<BufferRef> Bundle::online_state_for_target() {
    return full_state(*f_, *g_, "f", "g");
}

void Bundle::copy_online_to_target() {
    auto dst = target_state();
    auto src = online_state_for_target();
    if (dst.size() != src.size()) throw ShapeError("target/online structure mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i].value->data = src[i].value->data;
}

std::string Bundle::hash_tensors(const std::vector<BufferRef>& tensors) {
    std::string bytes;
    for (const auto& t : tensors) {
        bytes.append(t.name);
        bytes.append(reinterpret_cast<const char*>(t.value->data.data()),
                     t.value->data.size() * sizeof(float));
    }
    return sha256_hex(bytes);
}

std::string Bundle::encoder_projector_hash() {
    std::vector<BufferRef> out;
    std::vector<ParamRef> params;
    f_->collect_params("f", params);
    g_->collect_params("g", params);
    for (auto& p : params) out.push_back({p.name, p.value});
    return hash_tensors(out);
}

std::string Bundle::params_hash() {
    std::vector<BufferRef> out;
    for (auto& p : trainable_params()) out.push_back({p.name, p.value});
    return hash_tensors(out);
}

void ema_update(const std::vector<BufferRef>& target, const std::vector<BufferRef>& online,
                double tau) {
    if (tau < 0.0 || tau > 1.0) throw ValidationError("ema tau must lie in [0, 1]");
    if (target.size() != online.size())
        throw ShapeError("ema_update: parameter lists differ in length");
    for (std::size_t i = 0; i < target.size(); ++i) {
        Tensor& t = *target[i].value;
        const Tensor& o = *online[i].value;
        if (t.shape != o.shape)
            throw ShapeError("ema_update: shape mismatch at " + target[i].name);
        if (tau == 1.0) continue;
        if (tau == 0.0) {
            t.data = o.data;
            continue;
        }
        for (std::size_t j = 0; j < t.numel(); ++j)
            t.data[j] = static_cast<float>(tau * static_cast<double>(t.data[j]) +
                                           (1.0 - tau) * static_cast<double>(o.data[j]));
    }
}

}  // namespace geossl::model
