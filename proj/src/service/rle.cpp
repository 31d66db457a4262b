#include "specmap/service/rle.hpp"

#include <string>

#include "specmap/common/error.hpp"

namespace specmap::service {

RleRows encode_rle_rows(const RegionMask& mask) {
    RleRows rows(static_cast<std::size_t>(mask.height));
    for (std::int32_t r = 0; r < mask.height; ++r) {
        auto& runs = rows[static_cast<std::size_t>(r)];
        std::uint8_t current = 0;
        std::uint32_t length = 0;
        for (std::int32_t c = 0; c < mask.width; ++c) {
            const std::uint8_t v = mask[{c, r}] ? 1 : 0;
            if (v != current) {
                runs.push_back(length);
                current = v;
                length = 0;
            }
            ++length;
        }
        runs.push_back(length);
    }
    return rows;
}

RegionMask decode_rle_rows(const RleRows& rows, std::int32_t width, std::int32_t height) {
    if (width < 0 || height < 0) throw ValidationError("negative mask dimensions");
    if (rows.size() != static_cast<std::size_t>(height))
        throw ValidationError("RLE has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(height));
    RegionMask mask(width, height, 0);
    for (std::int32_t r = 0; r < height; ++r) {
        std::int64_t col = 0;
        std::uint8_t value = 0;
        for (const std::uint32_t run : rows[static_cast<std::size_t>(r)]) {
            if (col + run > width) throw ValidationError("RLE row " + std::to_string(r) + " overruns the width");
            for (std::uint32_t k = 0; k < run; ++k) mask[{static_cast<std::int32_t>(col + k), r}] = value;
            col += run;
            value ^= 1;
        }
        if (col != width) throw ValidationError("RLE row " + std::to_string(r) + " does not cover the width");
    }
    return mask;
}

} // namespace specmap::service
