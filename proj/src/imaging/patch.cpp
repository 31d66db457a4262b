#include "specmap/imaging/patch.hpp"

#include <algorithm>
#include <string>

#include "specmap/common/error.hpp"

namespace specmap::imaging {

void check_patch(const PatchRect& r, std::int32_t width, std::int32_t height) {
    if (r.col1 < r.col0 || r.row1 < r.row0) throw ValidationError("patch rectangle is empty");
    if (r.col0 < 0 || r.row0 < 0 || r.col1 >= width || r.row1 >= height) {
        throw ValidationError("patch rectangle [" + std::to_string(r.col0) + "," + std::to_string(r.row0) + "]-[" +
                              std::to_string(r.col1) + "," + std::to_string(r.row1) + "] outside " +
                              std::to_string(width) + "x" + std::to_string(height) + " texture");
    }
}

double median_of(std::vector<double>& values) {
    if (values.empty()) throw ValidationError("median of an empty sample");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return (lower + upper) / 2.0;
}

ChannelStats patch_stats(const Texture& tex, const PatchRect& rect) {
    check_patch(rect, tex.width, tex.height);
    ChannelStats stats;
    std::vector<double> sample;
    sample.reserve(static_cast<std::size_t>(rect.texel_count()));
    for (std::int32_t ch = 0; ch < tex.channels; ++ch) {
        sample.clear();
        for (std::int32_t row = rect.row0; row <= rect.row1; ++row)
            for (std::int32_t col = rect.col0; col <= rect.col1; ++col) sample.push_back(tex.at({col, row}, ch));
        stats.median.push_back(median_of(sample));
    }
    return stats;
}

} // namespace specmap::imaging
