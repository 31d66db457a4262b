#pragma once

#include <cstddef>
#include <vector>

#include "specmap/imaging/patch.hpp"
#include "specmap/imaging/texture.hpp"

namespace specmap::calibration {

/// Nominal reflectance of the Spectralon standard (>99% from 400 to 1500 nm).
inline constexpr double kSpectralonNominal = 0.99;

/// Per-channel normalization against the reflectance target:
/// factor = target median / nominal reflectance.
struct NormVector {
    std::vector<double> target;
    std::vector<double> nominal;
    std::vector<double> factor;
};

/// Per-channel stray visible light measured on the (non-fluorescent) target
/// in the UV-fluorescence texture.
struct StrayLight {
    std::vector<double> level;
};

/// `nominal` may hold one value per channel or a single value for all channels.
/// Throws ValidationError on a non-positive target median (patch likely
/// misplaced) or a nominal value outside (0, 1].
NormVector compute_norm(const imaging::ChannelStats& target_stats, const std::vector<double>& nominal);

/// Throws ValidationError on negative levels.
StrayLight stray_from_stats(const imaging::ChannelStats& stats);

/// acquired / factor per texel and channel; values above 1 are kept.
imaging::Texture calibrate_vis(const imaging::Texture& acquired, const NormVector& norm, unsigned workers = 1);

struct UvfResult {
    imaging::Texture texture;
    std::size_t clamped = 0;        // channel samples that went negative
    double max_undershoot = 0.0;    // most negative raw value, as a positive number
};

/// fluorescence - stray * vis_calibrated per texel and channel, negatives
/// clamped to 0 and counted. The two textures must be registered (same shape).
UvfResult calibrate_uvf(const imaging::Texture& fluorescence, const StrayLight& stray,
                        const imaging::Texture& vis_calibrated, unsigned workers = 1);

} // namespace specmap::calibration
