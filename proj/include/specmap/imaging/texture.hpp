#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "specmap/common/types.hpp"

namespace specmap::imaging {

enum class Modality { VIS, UVF, IRR, OTHER };

std::string_view to_string(Modality m);
/// Case-insensitive; throws ValidationError for unknown names.
Modality modality_from_string(std::string_view name);

struct BandMeta {
    Modality modality = Modality::OTHER;
    std::vector<std::string> channel_names;  // empty = default names
};

/// Floating-point image, row 0 on top, channels interleaved per texel.
/// Values are kept in double precision in memory and written as float32.
struct Texture {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::int32_t channels = 0;
    std::vector<double> data;
    BandMeta meta;

    Texture() = default;
    Texture(std::int32_t w, std::int32_t h, std::int32_t c, BandMeta m = {});

    std::size_t texel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    std::size_t offset(Texel t) const {
        return (static_cast<std::size_t>(t.row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(t.col)) *
               static_cast<std::size_t>(channels);
    }
    double& at(Texel t, std::int32_t ch) { return data[offset(t) + static_cast<std::size_t>(ch)]; }
    double at(Texel t, std::int32_t ch) const { return data[offset(t) + static_cast<std::size_t>(ch)]; }

    /// Channel name `ch`, falling back to R/G/B (3-channel) or Y (1-channel).
    std::string channel_name(std::int32_t ch) const;
    /// Checks size, channel count and finiteness; throws ValidationError.
    void validate() const;
};

bool same_shape(const Texture& a, const Texture& b);

} // namespace specmap::imaging
