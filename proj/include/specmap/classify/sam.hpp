#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specmap/common/error.hpp"
#include "specmap/common/grid.hpp"
#include "specmap/cube/spectral_cube.hpp"

namespace specmap::classify {

/// Threshold used for the single-pick workflow unless configured otherwise.
inline constexpr double kDefaultThetaMax = 0.15;

/// Stored in SamMap for masked texels and zero-magnitude spectra.
inline constexpr double kUndefinedAngle = -1.0;

/// Per-texel spectral angle in radians, or kUndefinedAngle.
using SamMap = Grid<double>;

inline constexpr std::int32_t kUnclassified = -1;
using LabelMap = Grid<std::int32_t>;

/// The reference texel is outside the mesh-covered part of the atlas.
class MaskedTexelError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

struct ReferenceSpectrum {
    std::string label;
    std::vector<double> values;
};

/// acos(dot / sqrt(|u|^2 |v|^2)) with the ratio clamped to [-1, 1]. Undefined
/// (nullopt) when either squared magnitude is zero.
inline std::optional<double> angle_from_products(double dot, double norm2_u, double norm2_v) {
    if (norm2_u == 0.0 || norm2_v == 0.0) return std::nullopt;
    double ratio = dot / std::sqrt(norm2_u * norm2_v);
    if (ratio > 1.0) ratio = 1.0;
    if (ratio < -1.0) ratio = -1.0;
    return std::acos(ratio);
}

/// Spectral angle between two spectra of equal length.
std::optional<double> spectral_angle(std::span<const double> u, std::span<const double> v);

SamMap sam_map(const cube::SpectralCube& cube, const ReferenceSpectrum& ref, unsigned workers = 1);

/// Texels whose defined angle is <= theta_max.
RegionMask threshold_region(const SamMap& map, double theta_max);

/// Per texel the reference with the smallest angle, if that angle is within
/// theta_max; equal angles go to the lower reference index.
LabelMap classify_multi(const cube::SpectralCube& cube, const std::vector<ReferenceSpectrum>& refs, double theta_max,
                        unsigned workers = 1);

/// Mean spectrum over valid texels in the (2r+1)^2 window centred on `texel`
/// (radius 0 = the texel itself). Throws MaskedTexelError when the centre
/// texel is not on the surface.
ReferenceSpectrum reference_from_texel(const cube::SpectralCube& cube, Texel texel, std::int32_t radius,
                                       std::string label = "picked");

struct RegionStats {
    std::size_t count = 0;
    std::optional<double> min_angle;
    std::optional<double> median_angle;
};

RegionStats region_stats(const SamMap& map, const RegionMask& region);

/// Keeps the 4-connected component of `region` containing `seed` (empty if
/// the seed is not selected). Optional post-step; not applied by default.
RegionMask keep_connected(const RegionMask& region, Texel seed);

struct Rgba {
    std::uint8_t r = 0, g = 0, b = 0, a = 0;
    friend bool operator==(const Rgba&, const Rgba&) = default;
};

inline constexpr Rgba kMagenta{255, 0, 255, 255};

using Overlay = Grid<Rgba>;

/// Selected texels take `color`; everything else is fully transparent.
Overlay make_overlay(const RegionMask& mask, Rgba color = kMagenta);

/// Interleaved RGBA bytes for PNG encoding.
std::vector<std::uint8_t> overlay_bytes(const Overlay& overlay);

} // namespace specmap::classify
