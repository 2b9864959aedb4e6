#pragma once

#include <memory>
#include <string>
#include <vector>

#include "geossl/geometry.hpp"
#include "geossl/nn.hpp"

namespace geossl::model {

enum class Preset { desk, paper };
enum class Placement { on_f, on_g };

Preset preset_from_string(const std::string& s);
std::string to_string(Preset p);
Placement placement_from_string(const std::string& s);
std::string to_string(Placement p);

/// Architecture description. The desk preset is a 4-block CNN sized to train
/// on a CPU in minutes; the paper preset is a bottleneck-residual encoder
/// with p = 2048.
struct ModelConfig {
    Preset preset = Preset::desk;
    int p = 128;
    int k = 64;
    int hidden = 256;
    int m = 6;  // regression head width; matches the configured transform mode
    bool with_regressor = true;
    bool with_predictor = false;  // BYOL prediction head q
    bool with_target = false;     // BYOL EMA target copy of f and g
    bool concat_latents = false;  // h consumes [l ; l'] instead of l - l'
    Placement placement = Placement::on_f;

    void validate() const;
    /// Input width of the regression head implied by placement/concat.
    int regressor_in() const;
};

/// The trainable mappings: encoder f, projection head g, regression head h,
/// plus the optional BYOL predictor and target copies. Single writer during
/// training; concurrent read-only inference is safe.
class Bundle {
  public:
    static Bundle build(const ModelConfig& cfg, std::uint64_t seed);

    const ModelConfig& cfg() const { return cfg_; }

    /// f: [N,3,H,W] -> [N,p]
    nn::Tensor encode(const nn::Tensor& images, nn::Ctx* ctx, const nn::Mode& mode);
    /// g: [N,p] -> [N,k]
    nn::Tensor project(const nn::Tensor& latents, nn::Ctx* ctx, const nn::Mode& mode);
    /// h: [N,regressor_in] -> [N,m]
    nn::Tensor regress(const nn::Tensor& latent_diffs, nn::Ctx* ctx, const nn::Mode& mode);
    /// q: [N,k] -> [N,k]
    nn::Tensor predict(const nn::Tensor& projections, nn::Ctx* ctx, const nn::Mode& mode);

    nn::Tensor encode_target(const nn::Tensor& images, const nn::Mode& mode);
    nn::Tensor project_target(const nn::Tensor& latents, const nn::Mode& mode);

    nn::Sequential& f() { return *f_; }
    nn::Sequential& g() { return *g_; }
    nn::Sequential& h() { return *h_; }
    nn::Sequential& q() { return *q_; }
    bool has_regressor() const { return h_ != nullptr; }
    bool has_predictor() const { return q_ != nullptr; }
    bool has_target() const { return f_target_ != nullptr; }

    /// All gradient-trained parameters (f, g, h, q), fixed order.
    std::vector<nn::ParamRef> trainable_params();
    /// Non-trained state of the online nets (batch-norm statistics).
    std::vector<nn::BufferRef> buffers();
    /// Target-network tensors (parameters + statistics) and the matching
    /// online tensors, aligned index by index for the EMA update.
    std::vector<nn::BufferRef> target_state();
    std::vector<nn::BufferRef> online_state_for_target();

    void copy_online_to_target();

    /// SHA-256 over the named tensors' raw bytes, order-stable.
    static std::string hash_tensors(const std::vector<nn::BufferRef>& tensors);
    /// Hash of the shared f+g trainable parameters (used by reduction checks).
    std::string encoder_projector_hash();
    /// Hash of every trainable parameter.
    std::string params_hash();

  private:
    ModelConfig cfg_;
    std::unique_ptr<nn::Sequential> f_, g_, h_, q_;
    std::unique_ptr<nn::Sequential> f_target_, g_target_;
};

/// target <- tau*target + (1-tau)*online, elementwise (double accumulate).
/// Structural mismatch throws ShapeError.
void ema_update(const std::vector<nn::BufferRef>& target,
                const std::vector<nn::BufferRef>& online, double tau);

}  // namespace geossl::model
