#pragma once

#include <cstdint>
#include <vector>

#include "specmap/imaging/texture.hpp"

namespace specmap::imaging {

/// Inclusive texel rectangle, e.g. the 10x10 window over the reflectance
/// target in a baked texture.
struct PatchRect {
    std::int32_t col0 = 0;
    std::int32_t row0 = 0;
    std::int32_t col1 = 0;
    std::int32_t row1 = 0;

    std::int64_t texel_count() const {
        return static_cast<std::int64_t>(col1 - col0 + 1) * static_cast<std::int64_t>(row1 - row0 + 1);
    }
};

/// Throws ValidationError when the rectangle is empty or leaves the image.
void check_patch(const PatchRect& rect, std::int32_t width, std::int32_t height);

struct ChannelStats {
    std::vector<double> median;
};

/// Per-channel median over the patch. With an even number of samples the
/// median is the mean of the two middle order statistics.
ChannelStats patch_stats(const Texture& tex, const PatchRect& rect);

/// Median of an arbitrary sample (reorders `values`).
double median_of(std::vector<double>& values);

} // namespace specmap::imaging
