#include "omrkit/image.hpp"

#include <algorithm>
#include <cmath>

namespace omrkit::img {

Image make_image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    Image im;
    im.width = width;
    im.height = height;
    im.pixels.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
    for (std::size_t i = 0; i < im.pixels.size(); i += 3) {
        im.pixels[i] = r;
        im.pixels[i + 1] = g;
        im.pixels[i + 2] = b;
    }
    return im;
}

Image resize_bilinear(const Image& in, int out_width, int out_height) {
    Image out;
    out.width = out_width;
    out.height = out_height;
    out.pixels.resize(static_cast<std::size_t>(out_width) * static_cast<std::size_t>(out_height) *
                      3);
    const double sx = static_cast<double>(in.width) / out_width;
    const double sy = static_cast<double>(in.height) / out_height;
    for (int oy = 0; oy < out_height; ++oy) {
        double fy = (oy + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(in.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, in.height - 1);
        const double wy = fy - y0;
        for (int ox = 0; ox < out_width; ++ox) {
            double fx = (ox + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(in.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, in.width - 1);
            const double wx = fx - x0;
            const std::uint8_t* p00 = in.at(x0, y0);
            const std::uint8_t* p10 = in.at(x1, y0);
            const std::uint8_t* p01 = in.at(x0, y1);
            const std::uint8_t* p11 = in.at(x1, y1);
            std::uint8_t* dst = out.at(ox, oy);
            for (int c = 0; c < 3; ++c) {
                const double top = p00[c] + (p10[c] - p00[c]) * wx;
                const double bot = p01[c] + (p11[c] - p01[c]) * wx;
                dst[c] = static_cast<std::uint8_t>(std::lround(top + (bot - top) * wy));
            }
        }
    }
    return out;
}

ContentBox content_box(const Image& image, int threshold) {
    ContentBox box;
    box.x0 = image.width;
    box.y0 = image.height;
    box.x1 = -1;
    box.y1 = -1;
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const std::uint8_t* p = image.at(x, y);
            if (p[0] >= threshold && p[1] >= threshold && p[2] >= threshold)
                continue;
            box.x0 = std::min(box.x0, x);
            box.y0 = std::min(box.y0, y);
            box.x1 = std::max(box.x1, x);
            box.y1 = std::max(box.y1, y);
        }
    }
    return box;
}

} // namespace omrkit::img
