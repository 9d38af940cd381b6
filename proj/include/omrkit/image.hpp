#pragma once

#include <cstdint>
#include <vector>

namespace omrkit::img {

// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t* at(int x, int y) {
        return pixels.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                                static_cast<std::size_t>(x)) *
                                   3;
    }
    const std::uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                                static_cast<std::size_t>(x)) *
                                   3;
    }
};

Image make_image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Bilinear resample with pixel-center alignment; out dimensions must be >= 1.
Image resize_bilinear(const Image& in, int out_width, int out_height);

// Inclusive bounds of the non-background pixels; background is every pixel
// whose three channels all reach `threshold`. empty() when the image is
// background throughout.
struct ContentBox {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;
    bool empty() const { return x1 < x0 || y1 < y0; }
};

ContentBox content_box(const Image& image, int threshold);

} // namespace omrkit::img
