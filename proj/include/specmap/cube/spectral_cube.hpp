#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specmap/common/grid.hpp"
#include "specmap/common/types.hpp"
#include "specmap/imaging/texture.hpp"

namespace specmap::cube {

struct BandDescriptor {
    imaging::Modality modality = imaging::Modality::OTHER;
    std::string channel;
    std::string source;  // id or file name of the texture the band came from

    friend bool operator==(const BandDescriptor&, const BandDescriptor&) = default;
};

/// Registered bands over one uv atlas, stored band-interleaved by texel.
/// Texels outside the validity mask hold zeros and read back as invalid.
class SpectralCube {
public:
    SpectralCube() = default;
    /// Takes ownership of interleaved data (width*height*bands values).
    SpectralCube(std::int32_t width, std::int32_t height, std::vector<BandDescriptor> bands, std::vector<double> data,
                 RegionMask valid);

    std::int32_t width() const { return width_; }
    std::int32_t height() const { return height_; }
    std::size_t band_count() const { return bands_.size(); }
    const std::vector<BandDescriptor>& bands() const { return bands_; }
    const RegionMask& valid_mask() const { return valid_; }
    std::size_t valid_count() const;

    bool in_bounds(Texel t) const { return valid_.contains(t); }
    bool is_valid(Texel t) const;
    /// Spectrum at a texel; std::nullopt when the texel is masked out.
    /// Throws ValidationError when the texel is outside the atlas.
    std::optional<std::span<const double>> spectrum_at(Texel t) const;

    /// Interleaved samples (texel-major); masked texels are zero.
    std::span<const double> samples() const { return data_; }

private:
    std::int32_t width_ = 0;
    std::int32_t height_ = 0;
    std::vector<BandDescriptor> bands_;
    std::vector<double> data_;
    RegionMask valid_;
};

struct BandSource {
    const imaging::Texture* texture = nullptr;
    std::string source;
};

/// Concatenates the channels of the given textures in order (e.g. VIS R,G,B
/// then UVF R,G,B) and keeps only texels set in `valid`.
SpectralCube assemble(const std::vector<BandSource>& sources, const RegionMask& valid);

/// One 1-channel PFM per band, the validity mask as a 0/1 PFM, and a
/// key/value descriptor `cube.toml` listing them. Returns the descriptor path.
std::filesystem::path save_cube(const SpectralCube& cube, const std::filesystem::path& dir);
SpectralCube load_cube(const std::filesystem::path& descriptor);

inline constexpr const char* kDescriptorName = "cube.toml";

} // namespace specmap::cube
