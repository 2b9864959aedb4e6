#include "geossl/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace geossl::aug {

using geometry::AffineParams;
using geometry::Vec2;

void B1Config::validate() const {
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(crop.prob) || !prob_ok(flip_prob) || !prob_ok(jitter.prob) ||
        !prob_ok(grayscale_prob) || !prob_ok(blur.prob))
        throw ValidationError("B1 probabilities must lie in [0, 1]");
    if (!(crop.area_min > 0.0 && crop.area_min <= crop.area_max && crop.area_max <= 1.0))
        throw ValidationError("B1 crop area range must be within (0, 1]");
    if (!(crop.aspect_min > 0.0 && crop.aspect_min <= crop.aspect_max))
        throw ValidationError("B1 crop aspect range invalid");
    if (!(blur.variance_min > 0.0 && blur.variance_min <= blur.variance_max))
        throw ValidationError("B1 blur variance range invalid");
    if (out_size <= 0) throw ValidationError("B1 out_size must be positive");
    if (jitter.brightness < 0 || jitter.contrast < 0 || jitter.saturation < 0 ||
        jitter.hue < 0 || jitter.hue > 0.5)
        throw ValidationError("B1 colour jitter strengths invalid");
}

const std::vector<std::string>& B1Config::member_names() {
    static const std::vector<std::string> names{"random_resized_crop", "horizontal_flip",
                                                "color_jitter", "grayscale", "gaussian_blur"};
    return names;
}

void B2Config::validate() const {
    if (rotation_max_deg < 0 || rotation_max_deg > geometry::kMaxAbsRotationDeg)
        throw ValidationError("B2 rotation range must be within [0, 90] degrees");
    if (translate_frac_max < 0 || translate_frac_max > geometry::kMaxTranslateFrac)
        throw ValidationError("B2 translation range must be within [0, 0.25]");
    if (!(scale_min >= geometry::kMinScale && scale_min <= scale_max &&
          scale_max <= geometry::kMaxScale))
        throw ValidationError("B2 scale range must be within [0.7, 1.3]");
    if (shear_max_deg < 0 || shear_max_deg > geometry::kMaxAbsShearDeg)
        throw ValidationError("B2 shear range must be within [0, 25] degrees");
    if (!(perspective_factor > 0 && perspective_factor <= 1.0))
        throw ValidationError("B2 perspective factor must be within (0, 1]");
}

std::vector<std::string> validate_disjointness(const B1Config& b1, const B2Config& b2) {
    std::vector<std::string> violations;
    const auto& b1_names = B1Config::member_names();
    // Transforms that do not preserve a projective relation between the views.
    static const std::vector<std::string> breaks_homography{
        "random_resized_crop", "random_crop", "crop", "cutout", "elastic"};
    for (const auto& name : b2.extra_transforms) {
        if (std::find(b1_names.begin(), b1_names.end(), name) != b1_names.end())
            violations.push_back("'" + name + "' is already a member of B1 (sets must be disjoint)");
        else if (std::find(breaks_homography.begin(), breaks_homography.end(), name) !=
                 breaks_homography.end())
            violations.push_back("'" + name + "' would break the homography relation between views");
        else
            violations.push_back("'" + name + "' is not a spatial base transformation");
    }
    (void)b1;
    return violations;
}

nlohmann::json AugmentationSpec::to_json() const {
    nlohmann::json steps = nlohmann::json::array();
    steps.push_back({{"kind", "random_resized_crop"},
                     {"fired", crop.fired},
                     {"x0", crop.x0},
                     {"y0", crop.y0},
                     {"w", crop.w},
                     {"h", crop.h}});
    steps.push_back({{"kind", "horizontal_flip"}, {"fired", flip}});
    steps.push_back({{"kind", "color_jitter"},
                     {"fired", jitter.fired},
                     {"brightness", jitter.brightness},
                     {"contrast", jitter.contrast},
                     {"saturation", jitter.saturation},
                     {"hue", jitter.hue}});
    steps.push_back({{"kind", "grayscale"}, {"fired", grayscale}});
    steps.push_back({{"kind", "gaussian_blur"}, {"fired", blur.fired}, {"variance", blur.variance}});
    return nlohmann::json{{"out_size", out_size}, {"steps", steps}};
}

AugmentationSpec AugmentationSpec::from_json(const nlohmann::json& j) {
    AugmentationSpec s;
    s.out_size = j.at("out_size").get<int>();
    const auto& steps = j.at("steps");
    if (steps.size() != 5) throw ValidationError("augmentation spec must list 5 steps");
    auto expect = [&](size_t i, const char* kind) -> const nlohmann::json& {
        const auto& st = steps.at(i);
        if (st.at("kind").get<std::string>() != kind)
            throw ValidationError(std::string("augmentation spec: step ") + std::to_string(i) +
                                  " must be '" + kind + "'");
        return st;
    };
    {
        const auto& st = expect(0, "random_resized_crop");
        s.crop.fired = st.at("fired").get<bool>();
        s.crop.x0 = st.at("x0").get<double>();
        s.crop.y0 = st.at("y0").get<double>();
        s.crop.w = st.at("w").get<double>();
        s.crop.h = st.at("h").get<double>();
    }
    s.flip = expect(1, "horizontal_flip").at("fired").get<bool>();
    {
        const auto& st = expect(2, "color_jitter");
        s.jitter.fired = st.at("fired").get<bool>();
        s.jitter.brightness = st.at("brightness").get<double>();
        s.jitter.contrast = st.at("contrast").get<double>();
        s.jitter.saturation = st.at("saturation").get<double>();
        s.jitter.hue = st.at("hue").get<double>();
    }
    s.grayscale = expect(3, "grayscale").at("fired").get<bool>();
    {
        const auto& st = expect(4, "gaussian_blur");
        s.blur.fired = st.at("fired").get<bool>();
        s.blur.variance = st.at("variance").get<double>();
    }
    return s;
}

AugmentationSpec sample_b1(Rng& rng, const B1Config& cfg) {
    cfg.validate();
    AugmentationSpec s;
    s.out_size = cfg.out_size;

    s.crop.fired = rng.bernoulli(cfg.crop.prob);
    if (s.crop.fired) {
        bool placed = false;
        for (int attempt = 0; attempt < 10 && !placed; ++attempt) {
            const double area = rng.uniform(cfg.crop.area_min, cfg.crop.area_max);
            const double ratio =
                std::exp(rng.uniform(std::log(cfg.crop.aspect_min), std::log(cfg.crop.aspect_max)));
            const double w = std::sqrt(area * ratio);
            const double h = std::sqrt(area / ratio);
            if (w <= 1.0 && h <= 1.0) {
                s.crop.w = w;
                s.crop.h = h;
                s.crop.x0 = rng.uniform(0.0, 1.0 - w);
                s.crop.y0 = rng.uniform(0.0, 1.0 - h);
                placed = true;
            }
        }
        if (!placed) {
            s.crop = {true, 0, 0, 1, 1};  // fall back to the full frame
        }
    }

    s.flip = rng.bernoulli(cfg.flip_prob);

    s.jitter.fired = rng.bernoulli(cfg.jitter.prob);
    if (s.jitter.fired) {
        s.jitter.brightness = rng.uniform(std::max(0.0, 1.0 - cfg.jitter.brightness),
                                          1.0 + cfg.jitter.brightness);
        s.jitter.contrast =
            rng.uniform(std::max(0.0, 1.0 - cfg.jitter.contrast), 1.0 + cfg.jitter.contrast);
        s.jitter.saturation =
            rng.uniform(std::max(0.0, 1.0 - cfg.jitter.saturation), 1.0 + cfg.jitter.saturation);
        s.jitter.hue = rng.uniform(-cfg.jitter.hue, cfg.jitter.hue);
    }

    s.grayscale = rng.bernoulli(cfg.grayscale_prob);

    s.blur.fired = rng.bernoulli(cfg.blur.prob);
    if (s.blur.fired) s.blur.variance = rng.uniform(cfg.blur.variance_min, cfg.blur.variance_max);

    return s;
}

namespace {

inline float clamp01(double v) {
    return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

Image crop_resize(const Image& img, double x0f, double y0f, double wf, double hf, int out) {
    int x0 = static_cast<int>(std::floor(x0f * img.width));
    int y0 = static_cast<int>(std::floor(y0f * img.height));
    int w = std::max(1, static_cast<int>(std::round(wf * img.width)));
    int h = std::max(1, static_cast<int>(std::round(hf * img.height)));
    x0 = std::clamp(x0, 0, img.width - 1);
    y0 = std::clamp(y0, 0, img.height - 1);
    w = std::min(w, img.width - x0);
    h = std::min(h, img.height - y0);
    Image sub(h, w, img.channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < img.channels; ++c) sub.at(y, x, c) = img.at(y0 + y, x0 + x, c);
    return resize_bilinear(sub, out, out);
}

void rgb_to_hsv(float r, float g, float b, float& h, float& s, float& v) {
    const float mx = std::max({r, g, b});
    const float mn = std::min({r, g, b});
    v = mx;
    const float d = mx - mn;
    s = mx > 0 ? d / mx : 0.f;
    if (d <= 0) {
        h = 0;
        return;
    }
    if (mx == r)
        h = (g - b) / d + (g < b ? 6.f : 0.f);
    else if (mx == g)
        h = (b - r) / d + 2.f;
    else
        h = (r - g) / d + 4.f;
    h /= 6.f;
}

void hsv_to_rgb(float h, float s, float v, float& r, float& g, float& b) {
    h = h - std::floor(h);
    const float hh = h * 6.f;
    const int i = std::min(5, static_cast<int>(hh));
    const float f = hh - i;
    const float p = v * (1 - s);
    const float q = v * (1 - s * f);
    const float t = v * (1 - s * (1 - f));
    switch (i) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
}

inline float luma(const Image& img, int y, int x) {
    return 0.299f * img.at(y, x, 0) + 0.587f * img.at(y, x, 1) + 0.114f * img.at(y, x, 2);
}

}  // namespace

Image adjust_brightness(const Image& img, double factor) {
    Image out = img;
    for (auto& v : out.data) v = clamp01(v * factor);
    return out;
}

Image adjust_contrast(const Image& img, double factor) {
    if (img.channels != 3) return img;
    double mean = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) mean += luma(img, y, x);
    mean /= static_cast<double>(img.height) * img.width;
    Image out = img;
    for (auto& v : out.data) v = clamp01(mean + factor * (v - mean));
    return out;
}

Image adjust_saturation(const Image& img, double factor) {
    if (img.channels != 3) return img;
    Image out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const float g = luma(img, y, x);
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = clamp01(g + factor * (img.at(y, x, c) - g));
        }
    return out;
}

Image adjust_hue(const Image& img, double delta) {
    if (img.channels != 3) return img;
    Image out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            float h, s, v;
            rgb_to_hsv(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2), h, s, v);
            float r, g, b;
            hsv_to_rgb(h + static_cast<float>(delta), s, v, r, g, b);
            out.at(y, x, 0) = r;
            out.at(y, x, 1) = g;
            out.at(y, x, 2) = b;
        }
    return out;
}

Image to_grayscale(const Image& img) {
    if (img.channels != 3) return img;
    Image out = img;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const float g = luma(img, y, x);
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = g;
        }
    return out;
}

Image gaussian_blur3(const Image& img, double variance) {
    if (variance <= 0) throw ValidationError("blur variance must be positive");
    // 3-tap separable kernel from sigma^2 = variance, replicated borders.
    const double w1 = std::exp(-0.5 / variance);
    const double norm = 1.0 + 2.0 * w1;
    const float k0 = static_cast<float>(1.0 / norm);
    const float k1 = static_cast<float>(w1 / norm);

    Image tmp(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const int xm = std::max(0, x - 1), xp = std::min(img.width - 1, x + 1);
            for (int c = 0; c < img.channels; ++c)
                tmp.at(y, x, c) = k1 * img.at(y, xm, c) + k0 * img.at(y, x, c) + k1 * img.at(y, xp, c);
        }
    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y) {
        const int ym = std::max(0, y - 1), yp = std::min(img.height - 1, y + 1);
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, x, c) = k1 * tmp.at(ym, x, c) + k0 * tmp.at(y, x, c) + k1 * tmp.at(yp, x, c);
    }
    return out;
}

Image apply_b1(const Image& img, const AugmentationSpec& spec) {
    if (img.empty()) throw ValidationError("apply_b1: empty image");
    Image out = spec.crop.fired
                    ? crop_resize(img, spec.crop.x0, spec.crop.y0, spec.crop.w, spec.crop.h,
                                  spec.out_size)
                    : img;
    if (spec.flip) out = flip_horizontal(out);
    if (spec.jitter.fired) {
        out = adjust_brightness(out, spec.jitter.brightness);
        out = adjust_contrast(out, spec.jitter.contrast);
        out = adjust_saturation(out, spec.jitter.saturation);
        out = adjust_hue(out, spec.jitter.hue);
    }
    if (spec.grayscale) out = to_grayscale(out);
    if (spec.blur.fired) out = gaussian_blur3(out, spec.blur.variance);
    if (out.height != spec.out_size || out.width != spec.out_size)
        out = resize_bilinear(out, spec.out_size, spec.out_size);
    return out;
}

std::pair<HomographyMatrix, TransformParams> sample_b2(Rng& rng, const B2Config& cfg,
                                                       int width, int height) {
    cfg.validate();
    AffineParams raw;
    const bool want_rotation = cfg.mode == TransformMode::affine ||
                               cfg.mode == TransformMode::homography ||
                               cfg.mode == TransformMode::rotation;
    const bool want_translation = cfg.mode == TransformMode::affine ||
                                  cfg.mode == TransformMode::homography ||
                                  cfg.mode == TransformMode::translation;
    const bool want_scale = cfg.mode == TransformMode::affine ||
                            cfg.mode == TransformMode::homography ||
                            cfg.mode == TransformMode::scale;
    const bool want_shear = cfg.mode == TransformMode::affine ||
                            cfg.mode == TransformMode::homography ||
                            cfg.mode == TransformMode::shear;
    if (want_rotation) raw.rotation_deg = rng.uniform(-cfg.rotation_max_deg, cfg.rotation_max_deg);
    if (want_translation) {
        raw.translate_x_frac = rng.uniform(0.0, cfg.translate_frac_max);
        raw.translate_y_frac = rng.uniform(0.0, cfg.translate_frac_max);
    }
    if (want_scale) raw.scale = rng.uniform(cfg.scale_min, cfg.scale_max);
    if (want_shear) {
        raw.shear_x_deg = rng.uniform(-cfg.shear_max_deg, cfg.shear_max_deg);
        raw.shear_y_deg = rng.uniform(-cfg.shear_max_deg, cfg.shear_max_deg);
    }

    if (cfg.mode == TransformMode::homography) {
        // Perspective component: corners pushed inward by up to d * (dim/2).
        std::array<Vec2, 4> shifts;
        const double sx[4] = {1, -1, -1, 1}, sy[4] = {1, 1, -1, -1};
        for (int i = 0; i < 4; ++i)
            shifts[size_t(i)] = {sx[i] * rng.uniform(0.0, cfg.perspective_factor * width / 2.0),
                                 sy[i] * rng.uniform(0.0, cfg.perspective_factor * height / 2.0)};
        HomographyMatrix persp = geometry::perspective_matrix(shifts, width, height);
        HomographyMatrix affine = geometry::affine_matrix(raw, width, height);
        HomographyMatrix combined = geometry::compose(affine, persp);
        TransformParams phi = geometry::homography_param_vector(combined, width, height);
        // Canonical rebuild keeps phi the exact source of truth for the warp.
        return {geometry::matrix_from_params(phi, width, height), phi};
    }

    TransformParams phi = geometry::params_for_mode(cfg.mode, raw, width, height);
    return {geometry::matrix_from_params(phi, width, height), phi};
}

ViewTriple make_view_triple(const Image& x, Rng& rng_b1, Rng& rng_b2, const B1Config& b1,
                            const B2Config& b2, Interp interp, bool with_spatial,
                            bool second_stream) {
    ViewTriple t;
    AugmentationSpec spec_a = sample_b1(rng_b1, b1);
    AugmentationSpec spec_b = sample_b1(rng_b1, b1);
    t.x1 = apply_b1(x, spec_a);
    t.x2 = apply_b1(x, spec_b);
    if (!with_spatial) return t;
    auto [h, phi] = sample_b2(rng_b2, b2, b1.out_size, b1.out_size);
    t.warp = h;
    t.phi = std::move(phi);
    t.x1_prime = geometry::warp_image(t.x1, t.warp, interp, 0.f);
    if (second_stream) {
        auto [h2, phi2] = sample_b2(rng_b2, b2, b1.out_size, b1.out_size);
        t.phi2 = std::move(phi2);
        t.x2_prime = geometry::warp_image(t.x2, h2, interp, 0.f);
        t.has_second = true;
    }
    return t;
}

TripleSampler::TripleSampler(B1Config b1, B2Config b2, std::uint64_t seed, Interp interp)
    : b1_(std::move(b1)),
      b2_(std::move(b2)),
      rng_b1_(derive_seed(seed, "b1")),
      rng_b2_(derive_seed(seed, "b2")),
      interp_(interp) {
    b1_.validate();
    b2_.validate();
    auto violations = validate_disjointness(b1_, b2_);
    if (!violations.empty()) {
        std::ostringstream os;
        os << "base transformation sets are not disjoint:";
        for (const auto& v : violations) os << "\n  - " << v;
        throw ValidationError(os.str());
    }
}

std::string TripleSampler::rng_state() const {
    return rng_b1_.state() + "|" + rng_b2_.state();
}

void TripleSampler::set_rng_state(const std::string& s) {
    auto sep = s.find('|');
    if (sep == std::string::npos) throw IoError("malformed sampler rng state");
    rng_b1_.set_state(s.substr(0, sep));
    rng_b2_.set_state(s.substr(sep + 1));
}

}  // namespace geossl::aug
