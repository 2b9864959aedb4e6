#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "geossl/image.hpp"

namespace geossl::geometry {

// ---------------------------------------------------------------------------
// Conventions
//
//   * Pixel centers sit at integer coordinates; rotation, scale and shear act
//     about the image center ((W-1)/2, (H-1)/2). x grows rightwards, y grows
//     downwards.
//   * A matrix maps source points to destination points in homogeneous
//     coordinates and is stored gauge-fixed with the bottom-right entry == 1.
//   * Affine matrices additionally have a zero bottom-left pair.
//   * Canonical affine composition, in the centered frame: shear, then scale,
//     then rotation, then translation. Rotation is the standard
//     counter-clockwise matrix, so at +90 degrees the center-relative point
//     (1,0) maps to (0,1).
// ---------------------------------------------------------------------------

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Sampling box for the base spatial transformation set; see B2Config for the
// runtime-configurable (narrower) ranges.
inline constexpr double kMaxAbsRotationDeg = 90.0;
inline constexpr double kMaxTranslateFrac = 0.25;
inline constexpr double kMinScale = 0.7;
inline constexpr double kMaxScale = 1.3;
inline constexpr double kMaxAbsShearDeg = 25.0;

/// Raw (unnormalized) affine parameters. Defaults give the identity.
struct AffineParams {
    double rotation_deg = 0.0;     // [-90, 90]
    double translate_x_frac = 0.0; // [0, 0.25], fraction of width
    double translate_y_frac = 0.0; // [0, 0.25], fraction of height
    double scale = 1.0;            // [0.7, 1.3]
    double shear_x_deg = 0.0;      // [-25, 25]
    double shear_y_deg = 0.0;      // [-25, 25]
};

/// Throws ValidationError naming the first out-of-range field.
void validate_affine_params(const AffineParams& p);

/// 3x3 projective matrix, row-major, bottom-right entry fixed to 1.
struct HomographyMatrix {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static HomographyMatrix identity() { return {}; }
    /// Gauge-fixes by dividing through by the bottom-right entry.
    /// Throws GeometryError if that entry is (near) zero.
    static HomographyMatrix from_array(const std::array<double, 9>& raw);

    double operator()(int r, int c) const { return m[static_cast<size_t>(r) * 3 + c]; }
    double& operator()(int r, int c) { return m[static_cast<size_t>(r) * 3 + c]; }

    bool is_affine() const { return m[6] == 0.0 && m[7] == 0.0; }
    double det() const;
};

enum class TransformMode { affine, homography, rotation, translation, scale, shear };

/// Regression target dimensionality for each mode: 6, 8, 1, 2, 1, 2.
int mode_dim(TransformMode mode);
std::string to_string(TransformMode mode);
TransformMode transform_mode_from_string(const std::string& s);

/// Normalized parameter vector the regressor predicts. `values` has length
/// mode_dim(mode); see normalize_params for the per-component scaling.
struct TransformParams {
    TransformMode mode = TransformMode::affine;
    std::vector<double> values;
};

enum class Interp { nearest, bilinear };

// ----- Matrix constructors -------------------------------------------------

/// Affine matrix for the canonical composition above. Validates ranges.
HomographyMatrix affine_matrix(const AffineParams& p, int width, int height);

/// Unique homography mapping the four image corners
/// (0,0), (W-1,0), (W-1,H-1), (0,H-1) to corner + shift. Shifts are signed
/// pixel offsets, each bounded by half the corresponding image dimension.
/// Throws GeometryError when the shifted quad is degenerate.
HomographyMatrix perspective_matrix(const std::array<Vec2, 4>& corner_shifts,
                                    int width, int height);

// ----- Matrix algebra ------------------------------------------------------

/// Result applies `b` first, then `a`; re-gauged so the corner entry is 1.
HomographyMatrix compose(const HomographyMatrix& a, const HomographyMatrix& b);

HomographyMatrix invert(const HomographyMatrix& h);

/// Maps a point through h; throws GeometryError if the point is sent to
/// infinity (third homogeneous coordinate underflows).
Vec2 apply_to_point(const HomographyMatrix& h, double x, double y);

// ----- Warping ---------------------------------------------------------

/// Inverse-mapping warp: each output pixel samples the source at
/// invert(h) * pixel. Out-of-bounds samples take `fill`. Output dims equal
/// input dims.
Image warp_image(const Image& img, const HomographyMatrix& h,
                 Interp interp = Interp::bilinear, float fill = 0.f);

// ----- Parameter normalization (regression targets) -------------------------

/// Packs [rotation, t_y, t_x, scale, shear_y, shear_x] with
/// rotation/360, t_y/H, t_x/W, shear/25; scale passed through raw.
TransformParams normalize_params(const AffineParams& raw, int width, int height);

AffineParams denormalize_params(const TransformParams& params, int width, int height);

/// Normalized subset vector for a single-component mode (identity values
/// elsewhere); affine mode returns the full 6-vector.
TransformParams params_for_mode(TransformMode mode, const AffineParams& raw,
                                int width, int height);

/// Expands a (possibly component-mode) vector back to raw affine params,
/// identity for components outside the mode. Rejects homography mode.
AffineParams affine_from_mode_params(const TransformParams& params, int width, int height);

/// 8-vector encoding of a homography:
/// [m00, m01, m02/W, m10, m11, m12/H, m20*W, m21*H].
TransformParams homography_param_vector(const HomographyMatrix& h, int width, int height);

HomographyMatrix matrix_from_homography_params(const TransformParams& params,
                                               int width, int height);

/// Single deterministic params -> matrix function used by the augmentation
/// pipeline; the stored normalized vector is the canonical ground truth and
/// the warp matrix is always rebuilt from it through here.
HomographyMatrix matrix_from_params(const TransformParams& params, int width, int height);

// ----- Estimation oracle -----------------------------------------------

/// Least-squares DLT with Hartley normalization; gauge-fixed result.
/// Needs >= 4 correspondences with no three source points collinear;
/// throws GeometryError on rank deficiency.
HomographyMatrix estimate_homography_dlt(std::span<const Vec2> src,
                                         std::span<const Vec2> dst);

}  // namespace geossl::geometry
