#include "geossl/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geossl {

bool images_equal(const Image& a, const Image& b) {
    return a.same_dims(b) && a.data == b.data;
}

float max_abs_diff(const Image& a, const Image& b) {
    if (!a.same_dims(b)) return std::numeric_limits<float>::infinity();
    float m = 0.f;
    for (size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

double psnr(const Image& a, const Image& b, const std::vector<std::uint8_t>& mask) {
    if (!a.same_dims(b)) return 0.0;
    double se = 0.0;
    size_t n = 0;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            if (!mask.empty() && !mask[static_cast<size_t>(y) * a.width + x]) continue;
            for (int c = 0; c < a.channels; ++c) {
                double d = static_cast<double>(a.at(y, x, c)) - b.at(y, x, c);
                se += d * d;
                ++n;
            }
        }
    }
    if (n == 0) return std::numeric_limits<double>::infinity();
    double mse = se / static_cast<double>(n);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
    if (img.height == out_h && img.width == out_w) return img;
    Image out(out_h, out_w, img.channels);
    const double sy = static_cast<double>(img.height) / out_h;
    const double sx = static_cast<double>(img.width) / out_w;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y0c = std::clamp(y0, 0, img.height - 1);
        int y1c = std::clamp(y0 + 1, 0, img.height - 1);
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x0c = std::clamp(x0, 0, img.width - 1);
            int x1c = std::clamp(x0 + 1, 0, img.width - 1);
            for (int c = 0; c < img.channels; ++c) {
                double v = (1 - wy) * ((1 - wx) * img.at(y0c, x0c, c) + wx * img.at(y0c, x1c, c)) +
                           wy * ((1 - wx) * img.at(y1c, x0c, c) + wx * img.at(y1c, x1c, c));
                out.at(y, x, c) = static_cast<float>(v);
            }
        }
    }
    return out;
}

Image rotate180(const Image& img) {
    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, x, c) = img.at(img.height - 1 - y, img.width - 1 - x, c);
    return out;
}

Image flip_horizontal(const Image& img) {
    Image out(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
    return out;
}

}  // namespace geossl
