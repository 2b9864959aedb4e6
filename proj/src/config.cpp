#include "geossl/config.hpp"

#include <set>

namespace geossl::config {

using nlohmann::json;

Method method_from_string(const std::string& s) {
    if (s == "simclr") return Method::simclr;
    if (s == "byol") return Method::byol;
    throw ValidationError("unknown method: '" + s + "'");
}

Module module_from_string(const std::string& s) {
    if (s == "none") return Module::none;
    if (s == "affine") return Module::affine;
    if (s == "homography") return Module::homography;
    if (s == "rotation") return Module::rotation;
    if (s == "translation") return Module::translation;
    if (s == "scale") return Module::scale;
    if (s == "shear") return Module::shear;
    throw ValidationError("unknown module: '" + s + "'");
}

LossVariant loss_variant_from_string(const std::string& s) {
    if (s == "regression") return LossVariant::regression;
    if (s == "invariant") return LossVariant::invariant;
    if (s == "concat") return LossVariant::concat;
    throw ValidationError("unknown loss variant: '" + s + "'");
}

std::string to_string(Method m) {
    return m == Method::simclr ? "simclr" : "byol";
}

std::string to_string(Module m) {
    switch (m) {
        case Module::none: return "none";
        case Module::affine: return "affine";
        case Module::homography: return "homography";
        case Module::rotation: return "rotation";
        case Module::translation: return "translation";
        case Module::scale: return "scale";
        case Module::shear: return "shear";
    }
    return "none";
}

std::string to_string(LossVariant v) {
    switch (v) {
        case LossVariant::regression: return "regression";
        case LossVariant::invariant: return "invariant";
        case LossVariant::concat: return "concat";
    }
    return "regression";
}

ExperimentConfig ExperimentConfig::defaults(model::Preset preset, Method method) {
    ExperimentConfig c;
    c.preset = preset;
    c.method = method;
    if (method == Method::byol) {
        c.optimizer.type = "sgd";
        c.optimizer.lr = 0.03;
        c.optimizer.momentum = 0.9;
        c.optimizer.weight_decay = 4e-4;
    } else {
        c.optimizer.type = "adam";
        c.optimizer.lr = 3e-4;
        c.optimizer.weight_decay = 1e-6;  // reading of "10e-06"; overridable
    }
    if (preset == model::Preset::paper) {
        c.batch_size = 256;
        c.epochs = 100;
        c.warmup_epochs = 10;
        c.model_dims = {2048, 256, 2048};
        c.eval.epochs = 200;
        c.dataset.name = "cifar10";
    } else {
        c.batch_size = 64;
        c.epochs = 20;
        c.warmup_epochs = 2;
        c.model_dims = {128, 64, 256};
        c.eval.epochs = 50;
        c.dataset.name = "synthetic-shapes";
    }
    return c;
}

void ExperimentConfig::validate() const {
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (warmup_epochs < 0 || warmup_epochs >= epochs)
        throw ValidationError("warmup_epochs must satisfy 0 <= warmup < epochs");
    if (optimizer.type != "adam" && optimizer.type != "sgd")
        throw ValidationError("optimizer.type must be adam or sgd");
    if (optimizer.lr <= 0) throw ValidationError("optimizer.lr must be positive");
    if (!(temperature > 0)) throw ValidationError("temperature must be positive");
    if (tau < 0 || tau > 1) throw ValidationError("tau must lie in [0, 1]");
    if (lambda < 0) throw ValidationError("lambda must be non-negative");
    if (checkpoint_every < 1) throw ValidationError("checkpoint_every must be >= 1");
    if (eval.epochs < 1 || eval.batch_size < 1 || eval.lr <= 0)
        throw ValidationError("eval settings must be positive");
    if (module == Module::none && loss_variant != LossVariant::regression)
        throw ValidationError("loss_variant '" + to_string(loss_variant) +
                              "' requires an enabled module (module != none)");
    if (two_modules && module == Module::none)
        throw ValidationError("two_modules requires an enabled module");
    b1.validate();
    b2.validate();
    to_model_config().validate();
}

geometry::TransformMode ExperimentConfig::transform_mode() const {
    if (module == Module::none)
        throw ValidationError("no transform mode when module is disabled");
    return geometry::transform_mode_from_string(to_string(module));
}

model::ModelConfig ExperimentConfig::to_model_config() const {
    model::ModelConfig mc;
    mc.preset = preset;
    mc.p = model_dims.p;
    mc.k = model_dims.k;
    mc.hidden = model_dims.hidden;
    mc.with_regressor = module != Module::none && loss_variant != LossVariant::invariant;
    mc.m = mc.with_regressor ? geometry::mode_dim(transform_mode()) : 0;
    mc.with_predictor = method == Method::byol;
    mc.with_target = method == Method::byol;
    mc.concat_latents = loss_variant == LossVariant::concat;
    mc.placement = placement;
    return mc;
}

aug::B2Config ExperimentConfig::to_b2_config() const {
    aug::B2Config out = b2;
    out.mode = transform_mode();
    return out;
}

// ---------------------------------------------------------------------------
// JSON (strict on unknown keys)
// ---------------------------------------------------------------------------

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError("config section '" + where + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ValidationError("unknown config key '" + where + key + "'");
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void maybe_u64(const json& j, const char* key, std::uint64_t& out) {
    if (j.contains(key)) out = j.at(key).get<std::uint64_t>();
}

}  // namespace

json ExperimentConfig::to_json() const {
    json j;
    j["preset"] = model::to_string(preset);
    j["method"] = to_string(method);
    j["module"] = to_string(module);
    j["loss_variant"] = to_string(loss_variant);
    j["placement"] = model::to_string(placement);
    j["two_modules"] = two_modules;
    j["regression_kind"] = objectives::to_string(regression_kind);
    j["batch_size"] = batch_size;
    j["epochs"] = epochs;
    j["warmup_epochs"] = warmup_epochs;
    j["optimizer"] = {{"type", optimizer.type},
                      {"lr", optimizer.lr},
                      {"momentum", optimizer.momentum},
                      {"weight_decay", optimizer.weight_decay}};
    j["temperature"] = temperature;
    j["tau"] = tau;
    j["lambda"] = lambda;
    j["byol_symmetrize"] = byol_symmetrize;
    j["dataset"] = {{"name", dataset.name},
                    {"root", dataset.root},
                    {"train_n", dataset.train_n},
                    {"test_n", dataset.test_n},
                    {"generator_seed", dataset.generator_seed},
                    {"classes", dataset.classes}};
    j["seed"] = seed;
    j["model"] = {{"p", model_dims.p}, {"k", model_dims.k}, {"hidden", model_dims.hidden}};
    j["b1"] = {{"crop_area_min", b1.crop.area_min},
               {"crop_area_max", b1.crop.area_max},
               {"crop_prob", b1.crop.prob},
               {"flip_prob", b1.flip_prob},
               {"jitter_brightness", b1.jitter.brightness},
               {"jitter_contrast", b1.jitter.contrast},
               {"jitter_saturation", b1.jitter.saturation},
               {"jitter_hue", b1.jitter.hue},
               {"jitter_prob", b1.jitter.prob},
               {"grayscale_prob", b1.grayscale_prob},
               {"blur_variance_min", b1.blur.variance_min},
               {"blur_variance_max", b1.blur.variance_max},
               {"blur_prob", b1.blur.prob},
               {"out_size", b1.out_size}};
    j["b2"] = {{"rotation_max_deg", b2.rotation_max_deg},
               {"translate_frac_max", b2.translate_frac_max},
               {"scale_min", b2.scale_min},
               {"scale_max", b2.scale_max},
               {"shear_max_deg", b2.shear_max_deg},
               {"perspective", b2.perspective_factor},
               {"extra_transforms", b2.extra_transforms}};
    j["eval"] = {{"epochs", eval.epochs}, {"batch_size", eval.batch_size}, {"lr", eval.lr}};
    j["checkpoint_every"] = checkpoint_every;
    j["interp"] = interp == geometry::Interp::bilinear ? "bilinear" : "nearest";
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    check_keys(j, {"preset", "method", "module", "loss_variant", "placement", "two_modules",
                   "regression_kind", "batch_size", "epochs", "warmup_epochs", "optimizer",
                   "temperature", "tau", "lambda", "byol_symmetrize", "dataset", "seed", "model",
                   "b1", "b2", "eval", "checkpoint_every", "interp"},
               "");

    const auto preset = j.contains("preset")
                            ? model::preset_from_string(j.at("preset").get<std::string>())
                            : model::Preset::desk;
    const auto method = j.contains("method")
                            ? method_from_string(j.at("method").get<std::string>())
                            : Method::simclr;
    ExperimentConfig c = defaults(preset, method);

    if (j.contains("module")) c.module = module_from_string(j.at("module").get<std::string>());
    if (j.contains("loss_variant"))
        c.loss_variant = loss_variant_from_string(j.at("loss_variant").get<std::string>());
    if (j.contains("placement"))
        c.placement = model::placement_from_string(j.at("placement").get<std::string>());
    maybe(j, "two_modules", c.two_modules);
    if (j.contains("regression_kind"))
        c.regression_kind =
            objectives::regression_kind_from_string(j.at("regression_kind").get<std::string>());
    maybe(j, "batch_size", c.batch_size);
    maybe(j, "epochs", c.epochs);
    maybe(j, "warmup_epochs", c.warmup_epochs);
    if (j.contains("optimizer")) {
        const json& o = j.at("optimizer");
        check_keys(o, {"type", "lr", "momentum", "weight_decay"}, "optimizer.");
        maybe(o, "type", c.optimizer.type);
        maybe(o, "lr", c.optimizer.lr);
        maybe(o, "momentum", c.optimizer.momentum);
        maybe(o, "weight_decay", c.optimizer.weight_decay);
    }
    maybe(j, "temperature", c.temperature);
    maybe(j, "tau", c.tau);
    maybe(j, "lambda", c.lambda);
    maybe(j, "byol_symmetrize", c.byol_symmetrize);
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        check_keys(d, {"name", "root", "train_n", "test_n", "generator_seed", "classes"},
                   "dataset.");
        maybe(d, "name", c.dataset.name);
        maybe(d, "root", c.dataset.root);
        maybe(d, "train_n", c.dataset.train_n);
        maybe(d, "test_n", c.dataset.test_n);
        maybe_u64(d, "generator_seed", c.dataset.generator_seed);
        maybe(d, "classes", c.dataset.classes);
    }
    maybe_u64(j, "seed", c.seed);
    if (j.contains("model")) {
        const json& m = j.at("model");
        check_keys(m, {"p", "k", "hidden"}, "model.");
        maybe(m, "p", c.model_dims.p);
        maybe(m, "k", c.model_dims.k);
        maybe(m, "hidden", c.model_dims.hidden);
    }
    if (j.contains("b1")) {
        const json& b = j.at("b1");
        check_keys(b,
                   {"crop_area_min", "crop_area_max", "crop_prob", "flip_prob",
                    "jitter_brightness", "jitter_contrast", "jitter_saturation", "jitter_hue",
                    "jitter_prob", "grayscale_prob", "blur_variance_min", "blur_variance_max",
                    "blur_prob", "out_size"},
                   "b1.");
        maybe(b, "crop_area_min", c.b1.crop.area_min);
        maybe(b, "crop_area_max", c.b1.crop.area_max);
        maybe(b, "crop_prob", c.b1.crop.prob);
        maybe(b, "flip_prob", c.b1.flip_prob);
        maybe(b, "jitter_brightness", c.b1.jitter.brightness);
        maybe(b, "jitter_contrast", c.b1.jitter.contrast);
        maybe(b, "jitter_saturation", c.b1.jitter.saturation);
        maybe(b, "jitter_hue", c.b1.jitter.hue);
        maybe(b, "jitter_prob", c.b1.jitter.prob);
        maybe(b, "grayscale_prob", c.b1.grayscale_prob);
        maybe(b, "blur_variance_min", c.b1.blur.variance_min);
        maybe(b, "blur_variance_max", c.b1.blur.variance_max);
        maybe(b, "blur_prob", c.b1.blur.prob);
        maybe(b, "out_size", c.b1.out_size);
    }
    if (j.contains("b2")) {
        const json& b = j.at("b2");
        check_keys(b,
                   {"rotation_max_deg", "translate_frac_max", "scale_min", "scale_max",
                    "shear_max_deg", "perspective", "extra_transforms"},
                   "b2.");
        maybe(b, "rotation_max_deg", c.b2.rotation_max_deg);
        maybe(b, "translate_frac_max", c.b2.translate_frac_max);
        maybe(b, "scale_min", c.b2.scale_min);
        maybe(b, "scale_max", c.b2.scale_max);
        maybe(b, "shear_max_deg", c.b2.shear_max_deg);
        maybe(b, "perspective", c.b2.perspective_factor);
        maybe(b, "extra_transforms", c.b2.extra_transforms);
    }
    if (j.contains("eval")) {
        const json& e = j.at("eval");
        check_keys(e, {"epochs", "batch_size", "lr"}, "eval.");
        maybe(e, "epochs", c.eval.epochs);
        maybe(e, "batch_size", c.eval.batch_size);
        maybe(e, "lr", c.eval.lr);
    }
    maybe(j, "checkpoint_every", c.checkpoint_every);
    if (j.contains("interp")) {
        const std::string s = j.at("interp").get<std::string>();
        if (s == "bilinear")
            c.interp = geometry::Interp::bilinear;
        else if (s == "nearest")
            c.interp = geometry::Interp::nearest;
        else
            throw ValidationError("interp must be bilinear or nearest");
    }
    return c;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ValidationError("override must look like key.path=value: '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    json* node = &doc;
    size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw ValidationError("empty key segment in override '" + assignment + "'");
        if (dot == std::string::npos) {
            json parsed = json::parse(value, nullptr, false);
            (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

ExperimentConfig config_from_document(json doc, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) apply_override(doc, o);
    ExperimentConfig cfg = ExperimentConfig::from_json(doc);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json doc = json::parse(read_file(path));
    return config_from_document(std::move(doc), overrides);
}

}  // namespace geossl::config
