#include "omrkit/imgprep.hpp"

#include "omrkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace omrkit::img {

namespace {

// std::uniform_*_distribution output is implementation-defined, so samplers
// are built directly on the standardized mt19937_64 stream to keep augmented
// images bit-identical everywhere.
long uniform_long(std::mt19937_64& rng, long lo, long hi) {
    return lo + static_cast<long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

Image crop(const Image& in, int x0, int y0, int w, int h) {
    Image out;
    out.width = w;
    out.height = h;
    out.pixels.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
    for (int y = 0; y < h; ++y)
        std::copy_n(in.at(x0, y0 + y), static_cast<std::size_t>(w) * 3, out.at(0, y));
    return out;
}

} // namespace

SegmentBatch segment_image(const Image& image, double overlap_frac) {
    const long width = image.width;
    const long height = image.height;
    if (width < 1 || height < 1)
        throw Error(ErrorCode::DegenerateImage, "image has a zero dimension");
    if (overlap_frac < 0.0 || overlap_frac >= 1.0)
        throw std::invalid_argument("overlap fraction must lie in [0, 1)");

    const long seg_height = std::min(height, 4 * width);
    const double stride = seg_height * (1.0 - overlap_frac);
    const std::size_t segments =
        height <= seg_height
            ? 1
            : static_cast<std::size_t>(std::ceil((height - seg_height) / stride)) + 1;

    SegmentBatch batch;
    batch.segments = segments;
    batch.geometry.reserve(segments);
    batch.data.resize(segments * 4ull * 3 * kPatchSize * kPatchSize);

    // Aspect-preserving scale of a W x seg_height slice onto the canvas.
    const double scale = std::min(static_cast<double>(kCanvasSize) / width,
                                  static_cast<double>(kCanvasSize) / seg_height);
    const int scaled_w = std::max(1, static_cast<int>(std::lround(width * scale)));
    const int scaled_h = std::max(1, static_cast<int>(std::lround(seg_height * scale)));

    long prev_offset = 0;
    for (std::size_t s = 0; s < segments; ++s) {
        long offset = std::min(static_cast<long>(std::floor(stride * static_cast<double>(s))),
                               height - seg_height);
        SegmentGeometry geo;
        geo.y_offset_px = offset;
        geo.height_px = seg_height;
        geo.overlap_px = s == 0 ? 0 : prev_offset + seg_height - offset;
        batch.geometry.push_back(geo);
        prev_offset = offset;

        Image slice = crop(image, 0, static_cast<int>(offset), static_cast<int>(width),
                           static_cast<int>(seg_height));
        Image scaled = resize_bilinear(slice, scaled_w, scaled_h);

        // White canvas, anchored top-left, split 2x2 in row-major order.
        float* seg_data = batch.data.data() + s * 4ull * 3 * kPatchSize * kPatchSize;
        for (int patch = 0; patch < 4; ++patch) {
            const int base_y = (patch / 2) * kPatchSize;
            const int base_x = (patch % 2) * kPatchSize;
            for (int c = 0; c < 3; ++c) {
                float* plane =
                    seg_data + (static_cast<std::size_t>(patch) * 3 + static_cast<std::size_t>(c)) *
                                   kPatchSize * kPatchSize;
                for (int y = 0; y < kPatchSize; ++y) {
                    const int cy = base_y + y;
                    for (int x = 0; x < kPatchSize; ++x) {
                        const int cx = base_x + x;
                        float v = 1.0f;
                        if (cy < scaled_h && cx < scaled_w)
                            v = static_cast<float>(scaled.at(cx, cy)[c]) / 255.0f;
                        plane[static_cast<std::size_t>(y) * kPatchSize + x] = v;
                    }
                }
            }
        }
    }
    return batch;
}

Image augment(const Image& image, const AugmentConfig& cfg) {
    if (cfg.background_gray_min > cfg.background_gray_max ||
        cfg.background_gray_min < 0 || cfg.background_gray_max > 255)
        throw std::invalid_argument("background gray range must stay within [0, 255]");
    if (cfg.scale_min > cfg.scale_max || cfg.scale_min <= 0.0)
        throw std::invalid_argument("scale range must be positive");
    if (cfg.margin_crop_max < 0)
        throw std::invalid_argument("margin crop range must be non-negative");
    if (image.width < 1 || image.height < 1)
        return image;

    // Draws happen in a fixed order so the pipeline is reproducible per seed.
    std::mt19937_64 rng(cfg.seed);
    const std::uint8_t gray = static_cast<std::uint8_t>(
        uniform_long(rng, cfg.background_gray_min, cfg.background_gray_max));
    const double scale = uniform_real(rng, cfg.scale_min, cfg.scale_max);
    long margins[4]; // left, top, right, bottom
    for (long& m : margins)
        m = uniform_long(rng, 0, cfg.margin_crop_max);

    // Crop before recolor: the content box is only well defined while the
    // background is still near-white.
    ContentBox box = content_box(image, cfg.background_threshold);
    if (box.empty()) {
        box.x0 = 0;
        box.y0 = 0;
        box.x1 = image.width - 1;
        box.y1 = image.height - 1;
    }
    const long left = std::min(margins[0], static_cast<long>(box.x0));
    const long top = std::min(margins[1], static_cast<long>(box.y0));
    const long right = std::min(margins[2], static_cast<long>(image.width - 1 - box.x1));
    const long bottom = std::min(margins[3], static_cast<long>(image.height - 1 - box.y1));
    Image out = crop(image, static_cast<int>(left), static_cast<int>(top),
                     image.width - static_cast<int>(left + right),
                     image.height - static_cast<int>(top + bottom));

    for (std::size_t i = 0; i < out.pixels.size(); i += 3) {
        if (out.pixels[i] >= cfg.background_threshold &&
            out.pixels[i + 1] >= cfg.background_threshold &&
            out.pixels[i + 2] >= cfg.background_threshold) {
            out.pixels[i] = gray;
            out.pixels[i + 1] = gray;
            out.pixels[i + 2] = gray;
        }
    }

    const int sw = std::max(1, static_cast<int>(std::lround(out.width * scale)));
    const int sh = std::max(1, static_cast<int>(std::lround(out.height * scale)));
    if (sw == out.width && sh == out.height)
        return out;
    return resize_bilinear(out, sw, sh);
}

} // namespace omrkit::img
