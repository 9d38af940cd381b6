#pragma once

#include <cstdint>
#include <vector>

#include "omrkit/image.hpp"

namespace omrkit::img {

inline constexpr int kPatchSize = 448;                // D
inline constexpr int kCanvasSize = 2 * kPatchSize;    // segments resize to 2D x 2D
inline constexpr double kDefaultOverlap = 0.25;

struct SegmentGeometry {
    long y_offset_px = 0;
    long height_px = 0;
    long overlap_px = 0; // rows shared with the previous segment; 0 for the first
};

// data holds S*4*3*448*448 floats in [0,1]: segment, then patch (row-major
// 2x2 over the 896x896 canvas), then channel plane, then rows.
struct SegmentBatch {
    std::size_t segments = 0;
    std::vector<float> data;
    std::vector<SegmentGeometry> geometry;

    float at(std::size_t s, std::size_t patch, std::size_t channel, std::size_t y,
             std::size_t x) const {
        return data[(((s * 4 + patch) * 3 + channel) * kPatchSize + y) * kPatchSize + x];
    }
};

// Cuts a score page into vertically overlapping segments of height
// h = min(H, 4W), so every segment keeps an aspect ratio of at most 4:1.
// Segment count follows S = max(1, ceil((H - h) / (h * (1 - overlap))) + 1);
// each segment lands on a white 896x896 canvas (aspect-preserving, anchored
// top-left) and splits into four 448x448 patches. Throws DegenerateImage on
// an empty raster.
SegmentBatch segment_image(const Image& image, double overlap_frac = kDefaultOverlap);

struct AugmentConfig {
    int background_gray_min = 192;
    int background_gray_max = 255;
    double scale_min = 0.9;
    double scale_max = 1.0;
    int margin_crop_max = 0;          // per-side crop drawn from [0, max] pixels
    int background_threshold = 245;   // channels at/above this count as background
    std::uint64_t seed = 0;
};

// Margin crop (clamped so the content box keeps every pixel), background
// recolor to a sampled gray, then uniform rescale. Deterministic per seed.
Image augment(const Image& image, const AugmentConfig& cfg);

} // namespace omrkit::img
