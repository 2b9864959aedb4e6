#pragma once

#include <cstdint>
#include <vector>

namespace geossl {

/// HxWxC image with float channels in [0, 1], interleaved row-major.
/// Pixel centers sit at integer coordinates; the image center used by the
/// geometric transforms is ((W-1)/2, (H-1)/2).
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int h, int w, int c, float fill = 0.f)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {}

    float& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    bool empty() const { return data.empty(); }
    size_t numel() const { return data.size(); }
    bool same_dims(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

bool images_equal(const Image& a, const Image& b);

/// Max absolute channel difference; infinity on dimension mismatch.
float max_abs_diff(const Image& a, const Image& b);

/// PSNR in dB over pixels where mask (H*W bytes) is nonzero; empty mask
/// means all pixels. Peak value 1.0.
double psnr(const Image& a, const Image& b, const std::vector<std::uint8_t>& mask = {});

/// Bilinear resample to (out_h, out_w) with half-pixel alignment.
Image resize_bilinear(const Image& img, int out_h, int out_w);

/// 180-degree rotation (pixel array reversal, exact).
Image rotate180(const Image& img);

Image flip_horizontal(const Image& img);

}  // namespace geossl
