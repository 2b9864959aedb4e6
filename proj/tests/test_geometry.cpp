#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "geossl/geometry.hpp"
#include "geossl/util.hpp"

using namespace geossl;
using namespace geossl::geometry;

namespace {

AffineParams random_in_range(Rng& rng) {
    AffineParams p;
    p.rotation_deg = rng.uniform(-kMaxAbsRotationDeg, kMaxAbsRotationDeg);
    p.translate_x_frac = rng.uniform(0.0, kMaxTranslateFrac);
    p.translate_y_frac = rng.uniform(0.0, kMaxTranslateFrac);
    p.scale = rng.uniform(kMinScale, kMaxScale);
    p.shear_x_deg = rng.uniform(-kMaxAbsShearDeg, kMaxAbsShearDeg);
    p.shear_y_deg = rng.uniform(-kMaxAbsShearDeg, kMaxAbsShearDeg);
    return p;
}

double max_entry_diff(const HomographyMatrix& a, const HomographyMatrix& b) {
    double m = 0;
    for (int i = 0; i < 9; ++i) m = std::max(m, std::abs(a.m[size_t(i)] - b.m[size_t(i)]));
    return m;
}

// Four fixed non-collinear probe points, away from the image border.
const std::array<Vec2, 4> kProbe{{{4, 5}, {27, 6}, {25, 26}, {6, 24}}};

HomographyMatrix reestimate(const HomographyMatrix& h) {
    std::array<Vec2, 4> dst;
    for (size_t i = 0; i < 4; ++i) dst[i] = apply_to_point(h, kProbe[i].x, kProbe[i].y);
    return estimate_homography_dlt(kProbe, dst);
}

// Smooth low-frequency test pattern standing in for a natural image.
Image smooth_image(int h, int w, int c, uint64_t seed) {
    Rng rng(seed);
    struct Blob { double cx, cy, sx, sy, amp; int ch; };
    std::vector<Blob> blobs;
    for (int i = 0; i < 8; ++i)
        blobs.push_back({rng.uniform(0, w), rng.uniform(0, h), rng.uniform(3, 9),
                         rng.uniform(3, 9), rng.uniform(0.2, 0.7), int(rng.below(uint64_t(c)))});
    Image img(h, w, c, 0.25f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (const auto& b : blobs) {
                double g = b.amp * std::exp(-0.5 * (std::pow((x - b.cx) / b.sx, 2) +
                                                    std::pow((y - b.cy) / b.sy, 2)));
                float& v = img.at(y, x, b.ch);
                v = std::min(1.f, v + float(g));
            }
    return img;
}

}  // namespace

TEST_CASE("affine_matrix identity parameters give the identity matrix") {
    HomographyMatrix h = affine_matrix(AffineParams{}, 32, 32);
    CHECK(max_entry_diff(h, HomographyMatrix::identity()) == doctest::Approx(0.0));
}

TEST_CASE("affine_matrix rotation by 90 degrees maps center-relative (1,0) to (0,1)") {
    AffineParams p;
    p.rotation_deg = 90.0;
    HomographyMatrix h = affine_matrix(p, 32, 32);
    const double cx = 15.5, cy = 15.5;
    Vec2 out = apply_to_point(h, cx + 1.0, cy + 0.0);
    CHECK(out.x - cx == doctest::Approx(0.0).epsilon(0).scale(1e-12));
    CHECK(out.y - cy == doctest::Approx(1.0));
}

TEST_CASE("affine_matrix round-trips through the DLT oracle") {
    AffineParams p;
    p.rotation_deg = 30.0;
    p.translate_x_frac = 0.1;
    p.translate_y_frac = 0.05;
    p.scale = 1.2;
    p.shear_x_deg = 10.0;
    p.shear_y_deg = -5.0;
    HomographyMatrix h = affine_matrix(p, 32, 32);
    CHECK(max_entry_diff(h, reestimate(h)) < 1e-9);
}

TEST_CASE("affine_matrix rejects out-of-range fields by name") {
    AffineParams p;
    p.rotation_deg = 91.0;
    CHECK_THROWS_WITH_AS(affine_matrix(p, 32, 32), doctest::Contains("rotation_deg"),
                         ValidationError);
    p = AffineParams{};
    p.scale = 0.5;
    CHECK_THROWS_WITH_AS(affine_matrix(p, 32, 32), doctest::Contains("scale"), ValidationError);
    p = AffineParams{};
    p.translate_x_frac = -0.01;
    CHECK_THROWS_WITH_AS(affine_matrix(p, 32, 32), doctest::Contains("translate_x_frac"),
                         ValidationError);
}

TEST_CASE("DLT oracle equivalence over 200 random in-range parameter sets") {
    Rng rng(7);
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        HomographyMatrix h = affine_matrix(random_in_range(rng), 32, 32);
        worst = std::max(worst, max_entry_diff(h, reestimate(h)));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("perspective_matrix with zero shifts is the identity") {
    HomographyMatrix h = perspective_matrix({Vec2{}, Vec2{}, Vec2{}, Vec2{}}, 32, 32);
    CHECK(max_entry_diff(h, HomographyMatrix::identity()) < 1e-10);
}

TEST_CASE("perspective_matrix with equal inward fractions is a pure central scaling") {
    const int w = 32, h = 32;
    const double mu = 0.2;
    const double hx = mu * (w - 1) / 2.0, hy = mu * (h - 1) / 2.0;
    // Corner order: top-left, top-right, bottom-right, bottom-left.
    std::array<Vec2, 4> shifts{{{hx, hy}, {-hx, hy}, {-hx, -hy}, {hx, -hy}}};
    HomographyMatrix persp = perspective_matrix(shifts, w, h);
    AffineParams p;
    p.scale = 1.0 - mu;
    HomographyMatrix aff = affine_matrix(p, w, h);
    CHECK(max_entry_diff(persp, aff) < 1e-8);
}

TEST_CASE("perspective_matrix maps all four corners onto their shifts") {
    Rng rng(11);
    const int w = 32, h = 32;
    const double d = 0.5;
    for (int trial = 0; trial < 50; ++trial) {
        std::array<Vec2, 4> shifts;
        const double sx[4] = {1, -1, -1, 1}, sy[4] = {1, 1, -1, -1};
        for (int i = 0; i < 4; ++i)
            shifts[size_t(i)] = {sx[i] * rng.uniform(0, d * w / 2.0),
                                 sy[i] * rng.uniform(0, d * h / 2.0)};
        HomographyMatrix hm = perspective_matrix(shifts, w, h);
        const std::array<Vec2, 4> corners{{{0, 0}, {w - 1.0, 0}, {w - 1.0, h - 1.0}, {0, h - 1.0}}};
        for (int i = 0; i < 4; ++i) {
            Vec2 got = apply_to_point(hm, corners[size_t(i)].x, corners[size_t(i)].y);
            CHECK(std::abs(got.x - (corners[size_t(i)].x + shifts[size_t(i)].x)) < 1e-7);
            CHECK(std::abs(got.y - (corners[size_t(i)].y + shifts[size_t(i)].y)) < 1e-7);
        }
    }
}

TEST_CASE("perspective_matrix rejects shifts that collapse the quad") {
    // Collapse all corners toward a line: top corners meet bottom corners.
    std::array<Vec2, 4> shifts{{{0, 15.5}, {0, 15.5}, {0, -15.5}, {0, -15.5}}};
    CHECK_THROWS_AS(perspective_matrix(shifts, 32, 32), GeometryError);
}

TEST_CASE("compose applies right operand first and re-gauges") {
    AffineParams t1, t2;
    t1.translate_x_frac = 0.1;
    t2.translate_x_frac = 0.05;
    t2.translate_y_frac = 0.2;
    HomographyMatrix a = affine_matrix(t1, 32, 32);
    HomographyMatrix b = affine_matrix(t2, 32, 32);
    HomographyMatrix c = compose(a, b);
    CHECK(c(0, 2) == doctest::Approx(0.15 * 32).epsilon(1e-12));
    CHECK(c(1, 2) == doctest::Approx(0.2 * 32).epsilon(1e-12));

    Rng rng(3);
    HomographyMatrix h = affine_matrix(random_in_range(rng), 32, 32);
    CHECK(max_entry_diff(compose(HomographyMatrix::identity(), h), h) == 0.0);
    CHECK(max_entry_diff(compose(h, invert(h)), HomographyMatrix::identity()) < 1e-9);
}

TEST_CASE("compose is associative within 1e-9") {
    Rng rng(17);
    for (int i = 0; i < 50; ++i) {
        HomographyMatrix a = affine_matrix(random_in_range(rng), 32, 32);
        HomographyMatrix b = affine_matrix(random_in_range(rng), 32, 32);
        HomographyMatrix c = affine_matrix(random_in_range(rng), 32, 32);
        CHECK(max_entry_diff(compose(compose(a, b), c), compose(a, compose(b, c))) < 1e-9);
    }
}

TEST_CASE("invert inverts") {
    CHECK(max_entry_diff(invert(HomographyMatrix::identity()), HomographyMatrix::identity()) ==
          0.0);

    AffineParams t;
    t.translate_x_frac = 0.125;
    t.translate_y_frac = 0.25;
    HomographyMatrix inv = invert(affine_matrix(t, 32, 32));
    CHECK(inv(0, 2) == doctest::Approx(-4.0));
    CHECK(inv(1, 2) == doctest::Approx(-8.0));

    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        HomographyMatrix h = affine_matrix(random_in_range(rng), 32, 32);
        CHECK(max_entry_diff(compose(h, invert(h)), HomographyMatrix::identity()) < 1e-9);
        CHECK(max_entry_diff(compose(invert(h), h), HomographyMatrix::identity()) < 1e-9);
    }
}

TEST_CASE("invert rejects a singular matrix") {
    HomographyMatrix h;
    h(0, 0) = 0;
    h(1, 1) = 0;  // rank 1
    CHECK_THROWS_AS(invert(h), GeometryError);
}

TEST_CASE("apply_to_point matches direct homogeneous arithmetic") {
    Vec2 p = apply_to_point(HomographyMatrix::identity(), 5, 7);
    CHECK(p.x == 5.0);
    CHECK(p.y == 7.0);

    HomographyMatrix t;
    t(0, 2) = 2;
    t(1, 2) = 3;
    p = apply_to_point(t, 0, 0);
    CHECK(p.x == 2.0);
    CHECK(p.y == 3.0);

    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        HomographyMatrix h = affine_matrix(random_in_range(rng), 32, 32);
        h(2, 0) = rng.uniform(-0.01, 0.01);
        h(2, 1) = rng.uniform(-0.01, 0.01);
        const double x = rng.uniform(0, 31), y = rng.uniform(0, 31);
        const double u = h(0, 0) * x + h(0, 1) * y + h(0, 2);
        const double v = h(1, 0) * x + h(1, 1) * y + h(1, 2);
        const double w = h(2, 0) * x + h(2, 1) * y + h(2, 2);
        Vec2 got = apply_to_point(h, x, y);
        CHECK(std::abs(got.x - u / w) < 1e-12);
        CHECK(std::abs(got.y - v / w) < 1e-12);
    }
}

TEST_CASE("apply_to_point reports points at infinity") {
    HomographyMatrix h;
    h(2, 0) = -1.0;  // w = 1 - x: vanishes at x = 1
    CHECK_THROWS_AS(apply_to_point(h, 1.0, 0.0), GeometryError);
}

TEST_CASE("warp_image identity is exact for nearest and near-exact for bilinear") {
    Image img = smooth_image(32, 32, 3, 99);
    Image nearest = warp_image(img, HomographyMatrix::identity(), Interp::nearest);
    CHECK(images_equal(img, nearest));
    Image bilinear = warp_image(img, HomographyMatrix::identity(), Interp::bilinear);
    CHECK(max_abs_diff(img, bilinear) < 1e-6f);
}

TEST_CASE("warp_image integer translation with nearest is an exact pixel shift") {
    Image img = smooth_image(32, 32, 3, 12);
    AffineParams t;
    t.translate_x_frac = 3.0 / 32.0;
    Image out = warp_image(img, affine_matrix(t, 32, 32), Interp::nearest, 0.f);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            for (int c = 0; c < 3; ++c) {
                float expect = x >= 3 ? img.at(y, x - 3, c) : 0.f;
                CHECK(out.at(y, x, c) == expect);
            }
}

TEST_CASE("warp round trip keeps interior PSNR above 20 dB") {
    Rng rng(31);
    Image img = smooth_image(32, 32, 3, 55);
    for (int trial = 0; trial < 10; ++trial) {
        HomographyMatrix h = affine_matrix(random_in_range(rng), 32, 32);
        HomographyMatrix hinv = invert(h);
        Image warped = warp_image(img, h, Interp::bilinear);
        Image back = warp_image(warped, hinv, Interp::bilinear);

        // Interior mask: pixels whose forward image (with a one-pixel margin
        // for the bilinear support) never leaves the frame.
        std::vector<uint8_t> mask(32 * 32, 0);
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                Vec2 f = apply_to_point(h, x, y);
                mask[size_t(y) * 32 + x] =
                    f.x >= 1 && f.x <= 30 && f.y >= 1 && f.y <= 30 ? 1 : 0;
            }
        CHECK(psnr(img, back, mask) > 20.0);
    }
}

TEST_CASE("warp_image refuses a singular matrix") {
    Image img = smooth_image(8, 8, 1, 1);
    HomographyMatrix h;
    h(0, 0) = 0;
    h(1, 1) = 0;
    CHECK_THROWS_AS(warp_image(img, h), GeometryError);
}

TEST_CASE("normalize_params follows the published scaling") {
    AffineParams p;
    p.rotation_deg = 90.0;
    TransformParams n = normalize_params(p, 32, 32);
    CHECK(n.values[0] == doctest::Approx(0.25));

    p = AffineParams{};
    p.translate_x_frac = 8.0 / 32.0;
    n = normalize_params(p, 32, 32);
    CHECK(n.values[2] == doctest::Approx(0.25));

    p = AffineParams{};
    p.shear_x_deg = 25.0;
    n = normalize_params(p, 32, 32);
    CHECK(n.values[5] == doctest::Approx(1.0));

    n = normalize_params(AffineParams{}, 32, 32);
    CHECK(n.values == std::vector<double>{0, 0, 0, 1, 0, 0});
}

TEST_CASE("normalization is a bijection on the sampling box") {
    Rng rng(41);
    for (int i = 0; i < 1000; ++i) {
        AffineParams p = random_in_range(rng);
        AffineParams q = denormalize_params(normalize_params(p, 32, 32), 32, 32);
        CHECK(std::abs(p.rotation_deg - q.rotation_deg) < 1e-9 * std::max(1.0, std::abs(p.rotation_deg)));
        CHECK(std::abs(p.translate_x_frac - q.translate_x_frac) < 1e-9);
        CHECK(std::abs(p.translate_y_frac - q.translate_y_frac) < 1e-9);
        CHECK(std::abs(p.scale - q.scale) < 1e-9);
        CHECK(std::abs(p.shear_x_deg - q.shear_x_deg) < 1e-9 * std::max(1.0, std::abs(p.shear_x_deg)));
        CHECK(std::abs(p.shear_y_deg - q.shear_y_deg) < 1e-9 * std::max(1.0, std::abs(p.shear_y_deg)));
    }
}

TEST_CASE("component modes expose the documented dimensionalities") {
    CHECK(mode_dim(TransformMode::affine) == 6);
    CHECK(mode_dim(TransformMode::homography) == 8);
    CHECK(mode_dim(TransformMode::rotation) == 1);
    CHECK(mode_dim(TransformMode::translation) == 2);
    CHECK(mode_dim(TransformMode::scale) == 1);
    CHECK(mode_dim(TransformMode::shear) == 2);

    AffineParams p;
    p.rotation_deg = 45;
    p.shear_y_deg = 12.5;
    TransformParams rot = params_for_mode(TransformMode::rotation, p, 32, 32);
    CHECK(rot.values.size() == 1);
    CHECK(rot.values[0] == doctest::Approx(0.125));
    TransformParams sh = params_for_mode(TransformMode::shear, p, 32, 32);
    CHECK(sh.values.size() == 2);
    CHECK(sh.values[0] == doctest::Approx(0.5));

    AffineParams back = affine_from_mode_params(rot, 32, 32);
    CHECK(back.rotation_deg == doctest::Approx(45.0));
    CHECK(back.scale == 1.0);
    CHECK(back.shear_y_deg == 0.0);
}

TEST_CASE("homography_param_vector encoding") {
    TransformParams id = homography_param_vector(HomographyMatrix::identity(), 32, 32);
    CHECK(id.values == std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0});

    HomographyMatrix t;
    t(0, 2) = 8;
    t(1, 2) = 8;
    TransformParams tv = homography_param_vector(t, 32, 32);
    CHECK(tv.values == std::vector<double>{1, 0, 0.25, 0, 1, 0.25, 0, 0});

    Rng rng(53);
    for (int i = 0; i < 100; ++i) {
        std::array<Vec2, 4> shifts;
        const double sx[4] = {1, -1, -1, 1}, sy[4] = {1, 1, -1, -1};
        for (int k = 0; k < 4; ++k)
            shifts[size_t(k)] = {sx[k] * rng.uniform(0, 8), sy[k] * rng.uniform(0, 8)};
        HomographyMatrix h = perspective_matrix(shifts, 32, 32);
        HomographyMatrix back =
            matrix_from_homography_params(homography_param_vector(h, 32, 32), 32, 32);
        CHECK(max_entry_diff(h, back) < 1e-9);
    }
}

TEST_CASE("matrix_from_params is the canonical rebuild path for every mode") {
    Rng rng(61);
    AffineParams p = random_in_range(rng);
    for (TransformMode mode : {TransformMode::affine, TransformMode::rotation,
                               TransformMode::translation, TransformMode::scale,
                               TransformMode::shear}) {
        TransformParams tp = params_for_mode(mode, p, 32, 32);
        HomographyMatrix a = matrix_from_params(tp, 32, 32);
        HomographyMatrix b = matrix_from_params(tp, 32, 32);
        CHECK(max_entry_diff(a, b) == 0.0);  // bitwise deterministic
        CHECK(a.is_affine());
    }
}

TEST_CASE("estimate_homography_dlt recovers known transforms") {
    const std::array<Vec2, 4> square{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    HomographyMatrix id = estimate_homography_dlt(square, square);
    CHECK(max_entry_diff(id, HomographyMatrix::identity()) < 1e-10);

    Rng rng(71);
    for (int i = 0; i < 50; ++i) {
        HomographyMatrix h = affine_matrix(random_in_range(rng), 32, 32);
        CHECK(max_entry_diff(h, reestimate(h)) < 1e-8);
    }
    for (int i = 0; i < 50; ++i) {
        std::array<Vec2, 4> shifts;
        const double sx[4] = {1, -1, -1, 1}, sy[4] = {1, 1, -1, -1};
        for (int k = 0; k < 4; ++k)
            shifts[size_t(k)] = {sx[k] * rng.uniform(0, 8), sy[k] * rng.uniform(0, 8)};
        HomographyMatrix h = perspective_matrix(shifts, 32, 32);
        CHECK(max_entry_diff(h, reestimate(h)) < 1e-8);
    }
}

TEST_CASE("estimate_homography_dlt rejects degenerate configurations") {
    // Three collinear source points.
    const std::array<Vec2, 4> src{{{0, 0}, {1, 1}, {2, 2}, {0, 1}}};
    const std::array<Vec2, 4> dst{{{0, 0}, {1, 1}, {2, 2}, {1, 0}}};
    CHECK_THROWS_AS(estimate_homography_dlt(src, dst), GeometryError);
    const std::array<Vec2, 3> few{{{0, 0}, {1, 1}, {2, 0}}};
    CHECK_THROWS_AS(estimate_homography_dlt(few, few), ValidationError);
}

TEST_CASE("produced matrices honor the gauge invariants") {
    Rng rng(83);
    for (int i = 0; i < 100; ++i) {
        HomographyMatrix a = affine_matrix(random_in_range(rng), 32, 32);
        CHECK(a(2, 2) == 1.0);
        CHECK(a.is_affine());
        CHECK(a.det() != 0.0);
        HomographyMatrix c = compose(a, invert(a));
        CHECK(c(2, 2) == 1.0);
    }
}
