#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geossl/augment.hpp"
#include "geossl/model.hpp"
#include "geossl/objectives.hpp"

namespace geossl::config {

enum class Method { simclr, byol };
enum class Module { none, affine, homography, rotation, translation, scale, shear };
enum class LossVariant { regression, invariant, concat };

Method method_from_string(const std::string& s);
Module module_from_string(const std::string& s);
LossVariant loss_variant_from_string(const std::string& s);
std::string to_string(Method m);
std::string to_string(Module m);
std::string to_string(LossVariant v);

struct OptimizerConfig {
    std::string type = "adam";  // adam | sgd
    double lr = 3e-4;
    double momentum = 0.9;  // sgd only
    double weight_decay = 1e-6;
};

struct DatasetConfig {
    std::string name = "synthetic-shapes";
    std::string root;  // empty -> GEOSSL_DATA_ROOT or ./data
    int train_n = 500;             // synthetic sizes
    int test_n = 200;
    std::uint64_t generator_seed = 7;
    std::vector<int> classes;  // optional class subset
};

struct EvalConfig {
    int epochs = 50;
    int batch_size = 64;
    double lr = 3e-4;
};

struct ModelDims {
    int p = 128;
    int k = 64;
    int hidden = 256;
};

/// Full declarative description of one run. Preset defaults follow the
/// published experimental setup; the desk preset shrinks sizes to CPU scale.
struct ExperimentConfig {
    Method method = Method::simclr;
    Module module = Module::affine;
    LossVariant loss_variant = LossVariant::regression;
    model::Placement placement = model::Placement::on_f;
    bool two_modules = false;
    objectives::RegressionKind regression_kind = objectives::RegressionKind::mse;

    int batch_size = 64;
    int epochs = 20;
    int warmup_epochs = 2;
    OptimizerConfig optimizer;
    double temperature = 0.5;
    double tau = 0.99;
    double lambda = 1.0;
    bool byol_symmetrize = true;

    DatasetConfig dataset;
    std::uint64_t seed = 1;
    model::Preset preset = model::Preset::desk;
    ModelDims model_dims;
    aug::B1Config b1;
    aug::B2Config b2;
    EvalConfig eval;
    int checkpoint_every = 10;
    geometry::Interp interp = geometry::Interp::bilinear;

    void validate() const;

    nlohmann::json to_json() const;
    /// Strict parse: unknown keys anywhere raise ValidationError.
    static ExperimentConfig from_json(const nlohmann::json& j);

    /// Preset + method defaults (before any file/override values).
    static ExperimentConfig defaults(model::Preset preset, Method method);

    model::ModelConfig to_model_config() const;
    aug::B2Config to_b2_config() const;
    geometry::TransformMode transform_mode() const;
};

/// Loads a config file, then applies dotted `key=value` overrides
/// (CLI > file > preset defaults). Validates the result.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

/// Same merge logic starting from an in-memory JSON document.
ExperimentConfig config_from_document(nlohmann::json doc, const std::vector<std::string>& overrides);

/// Applies one dotted override (e.g. "b2.perspective=0.2") onto a JSON doc.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace geossl::config
