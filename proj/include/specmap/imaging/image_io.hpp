#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "specmap/imaging/texture.hpp"

namespace specmap::imaging {

/// Portable float map. `PF` = 3 channels, `Pf` = 1 channel; negative scale
/// means little-endian samples. Rows are stored bottom-to-top in the file and
/// top-to-bottom in memory.
Texture decode_pfm(std::string_view bytes);
/// Little-endian float32 samples with scale -1.
std::string encode_pfm(const Texture& tex);

/// 8- or 16-bit grayscale or RGB PNG, promoted to [0,1] by dividing by
/// 2^bits - 1. No gamma or color-management transforms are applied.
Texture decode_png(std::string_view bytes);
/// 8-bit PNG from interleaved samples; channels in {1, 3, 4}.
std::string encode_png8(std::int32_t width, std::int32_t height, std::int32_t channels,
                        std::span<const std::uint8_t> samples);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames into place.
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Loads a PFM or PNG (detected from content) and attaches band metadata.
Texture load_texture(const std::filesystem::path& path, const BandMeta& meta = {});
/// Always writes PFM; float32 data round-trips bit-exactly through load_texture.
void save_texture(const Texture& tex, const std::filesystem::path& path);

} // namespace specmap::imaging
