#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geossl/geometry.hpp"
#include "geossl/image.hpp"
#include "geossl/util.hpp"

namespace geossl::aug {

using geometry::HomographyMatrix;
using geometry::Interp;
using geometry::TransformMode;
using geometry::TransformParams;

// ---------------------------------------------------------------------------
// Base transformation set B1: the contrastive-view augmentations.
// Application order is fixed: crop, flip, colour jitter, grayscale, blur.
// ---------------------------------------------------------------------------

struct B1Config {
    struct {
        double area_min = 0.08;
        double area_max = 1.0;
        double aspect_min = 3.0 / 4.0;
        double aspect_max = 4.0 / 3.0;
        double prob = 1.0;
    } crop;
    double flip_prob = 0.5;
    struct {
        double brightness = 0.8;
        double contrast = 0.8;
        double saturation = 0.8;
        double hue = 0.2;
        double prob = 0.8;
    } jitter;
    double grayscale_prob = 0.2;
    struct {
        double variance_min = 0.1;  // 3x3 kernel, sigma^2 drawn uniformly
        double variance_max = 2.0;
        double prob = 1.0;
    } blur;
    int out_size = 32;

    void validate() const;
    /// Names of the base transformations this set contains.
    static const std::vector<std::string>& member_names();
};

// ---------------------------------------------------------------------------
// Base transformation set B2: the spatial transforms whose parameters the
// network regresses. Ranges may be narrowed but never widened beyond the
// base sampling box (the geometry layer rejects wider values).
// ---------------------------------------------------------------------------

struct B2Config {
    TransformMode mode = TransformMode::affine;
    double rotation_max_deg = geometry::kMaxAbsRotationDeg;
    double translate_frac_max = geometry::kMaxTranslateFrac;
    double scale_min = geometry::kMinScale;
    double scale_max = geometry::kMaxScale;
    double shear_max_deg = geometry::kMaxAbsShearDeg;
    double perspective_factor = 0.5;  // "distortion factor" d in (0, 1]
    /// Extra named base transformations (for disjointness analysis only; no
    /// sampler exists for them, so construction fails if any is listed).
    std::vector<std::string> extra_transforms;

    void validate() const;
};

/// Eq.-style disjointness check between the two base sets; returns one
/// human-readable violation per offending transformation, empty when ok.
std::vector<std::string> validate_disjointness(const B1Config& b1, const B2Config& b2);

// ---------------------------------------------------------------------------
// Materialized augmentation specs (replayable, serializable)
// ---------------------------------------------------------------------------

struct AugmentationSpec {
    int out_size = 32;
    struct {
        bool fired = false;
        double x0 = 0, y0 = 0, w = 1, h = 1;  // fractions of the source dims
    } crop;
    bool flip = false;
    struct {
        bool fired = false;
        double brightness = 1, contrast = 1, saturation = 1, hue = 0;
    } jitter;
    bool grayscale = false;
    struct {
        bool fired = false;
        double variance = 0.1;
    } blur;

    nlohmann::json to_json() const;
    static AugmentationSpec from_json(const nlohmann::json& j);
};

/// Draws one fully materialized spec; replaying it is deterministic.
AugmentationSpec sample_b1(Rng& rng, const B1Config& cfg);

/// Applies the spec in its fixed order; output is spec.out_size square.
Image apply_b1(const Image& img, const AugmentationSpec& spec);

/// Samples a spatial transform for the configured mode. Components outside
/// the mode stay at their identity values. The returned matrix is always
/// matrix_from_params(params), so the stored normalized vector is the exact
/// ground truth for the warp.
std::pair<HomographyMatrix, TransformParams> sample_b2(Rng& rng, const B2Config& cfg,
                                                       int width, int height);

// ---------------------------------------------------------------------------
// Training triples
// ---------------------------------------------------------------------------

struct ViewTriple {
    Image x1, x2, x1_prime;
    TransformParams phi;    // normalized ground truth
    HomographyMatrix warp;  // == matrix_from_params(phi)
    // Second regression stream (two-module variant): x2 warped by its own
    // independently sampled transform. Unused by default.
    Image x2_prime;
    TransformParams phi2;
    bool has_second = false;
};

ViewTriple make_view_triple(const Image& x, Rng& rng_b1, Rng& rng_b2, const B1Config& b1,
                            const B2Config& b2, Interp interp = Interp::bilinear,
                            bool with_spatial = true, bool second_stream = false);

/// Owns the two sampling streams; refuses construction when the base sets
/// overlap. One sampler per worker.
class TripleSampler {
  public:
    TripleSampler(B1Config b1, B2Config b2, std::uint64_t seed,
                  Interp interp = Interp::bilinear);

    /// `with_spatial = false` produces only the two contrastive views and
    /// leaves the B2 stream untouched (baseline methods).
    ViewTriple make(const Image& x, bool with_spatial = true, bool second_stream = false) {
        return make_view_triple(x, rng_b1_, rng_b2_, b1_, b2_, interp_, with_spatial,
                                second_stream);
    }

    const B1Config& b1() const { return b1_; }
    const B2Config& b2() const { return b2_; }
    std::string rng_state() const;
    void set_rng_state(const std::string& s);

  private:
    B1Config b1_;
    B2Config b2_;
    Rng rng_b1_;
    Rng rng_b2_;
    Interp interp_;
};

// Individual photometric ops, exposed for tests.
Image adjust_brightness(const Image& img, double factor);
Image adjust_contrast(const Image& img, double factor);
Image adjust_saturation(const Image& img, double factor);
Image adjust_hue(const Image& img, double delta);
Image to_grayscale(const Image& img);
Image gaussian_blur3(const Image& img, double variance);

}  // namespace geossl::aug
