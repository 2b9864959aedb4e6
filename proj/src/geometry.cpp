#include "geossl/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

#include "geossl/util.hpp"

namespace geossl::geometry {

namespace {

constexpr double kGaugeEps = 1e-12;
constexpr double kDegToRad = M_PI / 180.0;

void check_range(double v, double lo, double hi, const char* field) {
    if (!(v >= lo && v <= hi)) {
        std::ostringstream os;
        os << "affine parameter '" << field << "' = " << v << " outside [" << lo << ", "
           << hi << "]";
        throw ValidationError(os.str());
    }
}

Eigen::Matrix3d to_eigen(const HomographyMatrix& h) {
    Eigen::Matrix3d e;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) e(r, c) = h(r, c);
    return e;
}

HomographyMatrix from_eigen(const Eigen::Matrix3d& e) {
    std::array<double, 9> raw;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) raw[static_cast<size_t>(r) * 3 + c] = e(r, c);
    return HomographyMatrix::from_array(raw);
}

}  // namespace

void validate_affine_params(const AffineParams& p) {
    check_range(p.rotation_deg, -kMaxAbsRotationDeg, kMaxAbsRotationDeg, "rotation_deg");
    check_range(p.translate_x_frac, 0.0, kMaxTranslateFrac, "translate_x_frac");
    check_range(p.translate_y_frac, 0.0, kMaxTranslateFrac, "translate_y_frac");
    check_range(p.scale, kMinScale, kMaxScale, "scale");
    check_range(p.shear_x_deg, -kMaxAbsShearDeg, kMaxAbsShearDeg, "shear_x_deg");
    check_range(p.shear_y_deg, -kMaxAbsShearDeg, kMaxAbsShearDeg, "shear_y_deg");
}

HomographyMatrix HomographyMatrix::from_array(const std::array<double, 9>& raw) {
    if (std::abs(raw[8]) < kGaugeEps)
        throw GeometryError("gauge error: bottom-right entry is zero");
    HomographyMatrix h;
    for (int i = 0; i < 8; ++i) h.m[static_cast<size_t>(i)] = raw[static_cast<size_t>(i)] / raw[8];
    h.m[8] = 1.0;
    return h;
}

double HomographyMatrix::det() const {
    return to_eigen(*this).determinant();
}

int mode_dim(TransformMode mode) {
    switch (mode) {
        case TransformMode::affine: return 6;
        case TransformMode::homography: return 8;
        case TransformMode::rotation: return 1;
        case TransformMode::translation: return 2;
        case TransformMode::scale: return 1;
        case TransformMode::shear: return 2;
    }
    throw ValidationError("unknown transform mode");
}

std::string to_string(TransformMode mode) {
    switch (mode) {
        case TransformMode::affine: return "affine";
        case TransformMode::homography: return "homography";
        case TransformMode::rotation: return "rotation";
        case TransformMode::translation: return "translation";
        case TransformMode::scale: return "scale";
        case TransformMode::shear: return "shear";
    }
    throw ValidationError("unknown transform mode");
}

TransformMode transform_mode_from_string(const std::string& s) {
    if (s == "affine") return TransformMode::affine;
    if (s == "homography") return TransformMode::homography;
    if (s == "rotation") return TransformMode::rotation;
    if (s == "translation") return TransformMode::translation;
    if (s == "scale") return TransformMode::scale;
    if (s == "shear") return TransformMode::shear;
    throw ValidationError("unknown transform mode: '" + s + "'");
}

HomographyMatrix affine_matrix(const AffineParams& p, int width, int height) {
    validate_affine_params(p);
    if (width <= 0 || height <= 0) throw ValidationError("image dims must be positive");

    const double cx = (width - 1) / 2.0;
    const double cy = (height - 1) / 2.0;
    const double a = p.rotation_deg * kDegToRad;
    const double ca = std::cos(a), sa = std::sin(a);
    const double shx = std::tan(p.shear_x_deg * kDegToRad);
    const double shy = std::tan(p.shear_y_deg * kDegToRad);
    const double s = p.scale;
    const double tx = p.translate_x_frac * width;
    const double ty = p.translate_y_frac * height;

    // Rotation * (scale * shear), both acting in the centered frame.
    // shear: x += tan(shear_x) * y, y += tan(shear_y) * x.
    const double l00 = s * (ca - sa * shy);
    const double l01 = s * (ca * shx - sa);
    const double l10 = s * (sa + ca * shy);
    const double l11 = s * (sa * shx + ca);

    HomographyMatrix h;
    h(0, 0) = l00;
    h(0, 1) = l01;
    h(0, 2) = tx + cx - (l00 * cx + l01 * cy);
    h(1, 0) = l10;
    h(1, 1) = l11;
    h(1, 2) = ty + cy - (l10 * cx + l11 * cy);
    h(2, 0) = 0.0;
    h(2, 1) = 0.0;
    h(2, 2) = 1.0;
    return h;
}

HomographyMatrix perspective_matrix(const std::array<Vec2, 4>& corner_shifts,
                                    int width, int height) {
    if (width <= 0 || height <= 0) throw ValidationError("image dims must be positive");
    const double w1 = width - 1.0, h1 = height - 1.0;
    const std::array<Vec2, 4> corners{{{0, 0}, {w1, 0}, {w1, h1}, {0, h1}}};
    std::array<Vec2, 4> shifted;
    for (int i = 0; i < 4; ++i) {
        const Vec2& d = corner_shifts[static_cast<size_t>(i)];
        if (std::abs(d.x) > width / 2.0 || std::abs(d.y) > height / 2.0)
            throw ValidationError("corner shift exceeds half the image dimension");
        shifted[static_cast<size_t>(i)] = {corners[static_cast<size_t>(i)].x + d.x,
                                           corners[static_cast<size_t>(i)].y + d.y};
    }
    try {
        return estimate_homography_dlt(corners, shifted);
    } catch (const GeometryError&) {
        throw GeometryError("degenerate quad: shifted corners admit no unique homography");
    }
}

HomographyMatrix compose(const HomographyMatrix& a, const HomographyMatrix& b) {
    Eigen::Matrix3d prod = to_eigen(a) * to_eigen(b);
    if (std::abs(prod(2, 2)) < kGaugeEps)
        throw GeometryError("gauge error: composition sends the origin gauge to infinity");
    return from_eigen(prod);
}

HomographyMatrix invert(const HomographyMatrix& h) {
    Eigen::Matrix3d e = to_eigen(h);
    double d = e.determinant();
    if (std::abs(d) < kGaugeEps) throw GeometryError("singular matrix: cannot invert");
    Eigen::Matrix3d inv = e.inverse();
    if (std::abs(inv(2, 2)) < kGaugeEps)
        throw GeometryError("gauge error: inverse has zero corner entry");
    return from_eigen(inv);
}

Vec2 apply_to_point(const HomographyMatrix& h, double x, double y) {
    const double u = h(0, 0) * x + h(0, 1) * y + h(0, 2);
    const double v = h(1, 0) * x + h(1, 1) * y + h(1, 2);
    const double w = h(2, 0) * x + h(2, 1) * y + h(2, 2);
    if (std::abs(w) < kGaugeEps) throw GeometryError("point maps to infinity");
    return {u / w, v / w};
}

namespace {

inline float sample_nearest(const Image& img, double x, double y, float fill) {
    // llround, not lround: keeps the -0.5 boundary consistent across channels.
    const long xi = std::llround(x);
    const long yi = std::llround(y);
    if (xi < 0 || yi < 0 || xi >= img.width || yi >= img.height) return fill;
    return img.at(static_cast<int>(yi), static_cast<int>(xi), 0);
}

}  // namespace

Image warp_image(const Image& img, const HomographyMatrix& h, Interp interp, float fill) {
    if (img.empty()) throw ValidationError("warp_image: empty image");
    const HomographyMatrix inv = invert(h);
    Image out(img.height, img.width, img.channels, fill);

    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double u = inv(0, 0) * x + inv(0, 1) * y + inv(0, 2);
            const double v = inv(1, 0) * x + inv(1, 1) * y + inv(1, 2);
            const double w = inv(2, 0) * x + inv(2, 1) * y + inv(2, 2);
            if (std::abs(w) < kGaugeEps) continue;  // stays at fill
            const double sx = u / w, sy = v / w;
            if (interp == Interp::nearest) {
                const long xi = std::llround(sx);
                const long yi = std::llround(sy);
                if (xi < 0 || yi < 0 || xi >= img.width || yi >= img.height) continue;
                for (int c = 0; c < img.channels; ++c)
                    out.at(y, x, c) = img.at(static_cast<int>(yi), static_cast<int>(xi), c);
            } else {
                const int x0 = static_cast<int>(std::floor(sx));
                const int y0 = static_cast<int>(std::floor(sy));
                const double fx = sx - x0, fy = sy - y0;
                for (int c = 0; c < img.channels; ++c) {
                    auto tap = [&](int yy, int xx) -> double {
                        if (xx < 0 || yy < 0 || xx >= img.width || yy >= img.height)
                            return fill;
                        return img.at(yy, xx, c);
                    };
                    const double val = (1 - fy) * ((1 - fx) * tap(y0, x0) + fx * tap(y0, x0 + 1)) +
                                       fy * ((1 - fx) * tap(y0 + 1, x0) + fx * tap(y0 + 1, x0 + 1));
                    out.at(y, x, c) = static_cast<float>(val);
                }
            }
        }
    }
    return out;
}

TransformParams normalize_params(const AffineParams& raw, int width, int height) {
    validate_affine_params(raw);
    if (width <= 0 || height <= 0) throw ValidationError("image dims must be positive");
    TransformParams p;
    p.mode = TransformMode::affine;
    // Packing order follows the component listing: rotation, vertical
    // translation, horizontal translation, scale, vertical shear,
    // horizontal shear. Scale is already O(1) and stays raw.
    p.values = {raw.rotation_deg / 360.0,
                raw.translate_y_frac,  // t_y/H with t_y given as a fraction already
                raw.translate_x_frac,
                raw.scale,
                raw.shear_y_deg / kMaxAbsShearDeg,
                raw.shear_x_deg / kMaxAbsShearDeg};
    return p;
}

AffineParams denormalize_params(const TransformParams& params, int width, int height) {
    if (width <= 0 || height <= 0) throw ValidationError("image dims must be positive");
    if (params.mode != TransformMode::affine || params.values.size() != 6)
        throw ValidationError("denormalize_params expects a 6-dim affine vector");
    AffineParams raw;
    raw.rotation_deg = params.values[0] * 360.0;
    raw.translate_y_frac = params.values[1];
    raw.translate_x_frac = params.values[2];
    raw.scale = params.values[3];
    raw.shear_y_deg = params.values[4] * kMaxAbsShearDeg;
    raw.shear_x_deg = params.values[5] * kMaxAbsShearDeg;
    return raw;
}

TransformParams params_for_mode(TransformMode mode, const AffineParams& raw,
                                int width, int height) {
    TransformParams full = normalize_params(raw, width, height);
    TransformParams p;
    p.mode = mode;
    switch (mode) {
        case TransformMode::affine:
            return full;
        case TransformMode::rotation:
            p.values = {full.values[0]};
            break;
        case TransformMode::translation:
            p.values = {full.values[1], full.values[2]};
            break;
        case TransformMode::scale:
            p.values = {full.values[3]};
            break;
        case TransformMode::shear:
            p.values = {full.values[4], full.values[5]};
            break;
        case TransformMode::homography:
            throw ValidationError("params_for_mode: homography is not an affine subset");
    }
    return p;
}

AffineParams affine_from_mode_params(const TransformParams& params, int width, int height) {
    const int want = mode_dim(params.mode);
    if (static_cast<int>(params.values.size()) != want)
        throw ValidationError("transform params length " + std::to_string(params.values.size()) +
                              " does not match mode " + to_string(params.mode));
    TransformParams full;
    full.mode = TransformMode::affine;
    full.values = {0.0, 0.0, 0.0, 1.0, 0.0, 0.0};
    switch (params.mode) {
        case TransformMode::affine:
            full.values = params.values;
            break;
        case TransformMode::rotation:
            full.values[0] = params.values[0];
            break;
        case TransformMode::translation:
            full.values[1] = params.values[0];
            full.values[2] = params.values[1];
            break;
        case TransformMode::scale:
            full.values[3] = params.values[0];
            break;
        case TransformMode::shear:
            full.values[4] = params.values[0];
            full.values[5] = params.values[1];
            break;
        case TransformMode::homography:
            throw ValidationError("affine_from_mode_params: not defined for homography mode");
    }
    return denormalize_params(full, width, height);
}

TransformParams homography_param_vector(const HomographyMatrix& h, int width, int height) {
    if (width <= 0 || height <= 0) throw ValidationError("image dims must be positive");
    TransformParams p;
    p.mode = TransformMode::homography;
    p.values = {h(0, 0), h(0, 1), h(0, 2) / width,
                h(1, 0), h(1, 1), h(1, 2) / height,
                h(2, 0) * width, h(2, 1) * height};
    return p;
}

HomographyMatrix matrix_from_homography_params(const TransformParams& params,
                                               int width, int height) {
    if (params.mode != TransformMode::homography || params.values.size() != 8)
        throw ValidationError("matrix_from_homography_params expects an 8-dim vector");
    const auto& v = params.values;
    HomographyMatrix h;
    h(0, 0) = v[0];
    h(0, 1) = v[1];
    h(0, 2) = v[2] * width;
    h(1, 0) = v[3];
    h(1, 1) = v[4];
    h(1, 2) = v[5] * height;
    h(2, 0) = v[6] / width;
    h(2, 1) = v[7] / height;
    h(2, 2) = 1.0;
    return h;
}

HomographyMatrix matrix_from_params(const TransformParams& params, int width, int height) {
    if (params.mode == TransformMode::homography)
        return matrix_from_homography_params(params, width, height);
    return affine_matrix(affine_from_mode_params(params, width, height), width, height);
}

HomographyMatrix estimate_homography_dlt(std::span<const Vec2> src,
                                         std::span<const Vec2> dst) {
    const size_t n = src.size();
    if (n < 4 || dst.size() != n)
        throw ValidationError("estimate_homography_dlt needs >= 4 matched correspondences");

    // Hartley normalization of both point sets for conditioning.
    auto normalizer = [](std::span<const Vec2> pts) {
        Vec2 c{0, 0};
        for (const auto& p : pts) {
            c.x += p.x;
            c.y += p.y;
        }
        c.x /= static_cast<double>(pts.size());
        c.y /= static_cast<double>(pts.size());
        double mean_dist = 0;
        for (const auto& p : pts) mean_dist += std::hypot(p.x - c.x, p.y - c.y);
        mean_dist /= static_cast<double>(pts.size());
        const double s = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
        Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
        t(0, 0) = s;
        t(1, 1) = s;
        t(0, 2) = -s * c.x;
        t(1, 2) = -s * c.y;
        return t;
    };
    const Eigen::Matrix3d t_src = normalizer(src);
    const Eigen::Matrix3d t_dst = normalizer(dst);

    Eigen::MatrixXd a(2 * static_cast<Eigen::Index>(n), 9);
    for (size_t i = 0; i < n; ++i) {
        const double x = t_src(0, 0) * src[i].x + t_src(0, 2);
        const double y = t_src(1, 1) * src[i].y + t_src(1, 2);
        const double u = t_dst(0, 0) * dst[i].x + t_dst(0, 2);
        const double v = t_dst(1, 1) * dst[i].y + t_dst(1, 2);
        const auto r = static_cast<Eigen::Index>(2 * i);
        a.row(r) << x, y, 1, 0, 0, 0, -u * x, -u * y, -u;
        a.row(r + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y, -v;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sing = svd.singularValues();
    // A unique solution needs rank 8: the second-smallest singular value must
    // be well separated from zero.
    if (sing(7) < 1e-9 * sing(0))
        throw GeometryError("rank-deficient correspondences (degenerate configuration)");
    Eigen::VectorXd hvec = svd.matrixV().col(8);

    Eigen::Matrix3d hn;
    hn << hvec(0), hvec(1), hvec(2), hvec(3), hvec(4), hvec(5), hvec(6), hvec(7), hvec(8);
    Eigen::Matrix3d h = t_dst.inverse() * hn * t_src;
    if (std::abs(h(2, 2)) < kGaugeEps)
        throw GeometryError("gauge error: estimated homography has zero corner entry");
    return from_eigen(h);
}

}  // namespace geossl::geometry
