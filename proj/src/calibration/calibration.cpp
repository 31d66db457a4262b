#include "specmap/calibration/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specmap/common/error.hpp"
#include "specmap/common/parallel.hpp"

namespace specmap::calibration {
namespace {

using imaging::Texture;

std::vector<double> per_channel(const std::vector<double>& values, std::size_t channels, const char* what) {
    if (values.size() == channels) return values;
    if (values.size() == 1) return std::vector<double>(channels, values.front());
    throw ValidationError(std::string(what) + " has " + std::to_string(values.size()) + " entries for " +
                          std::to_string(channels) + " channels");
}

} // namespace

NormVector compute_norm(const imaging::ChannelStats& target_stats, const std::vector<double>& nominal) {
    const std::size_t n = target_stats.median.size();
    if (n == 0) throw ValidationError("target statistics are empty");
    NormVector out;
    out.target = target_stats.median;
    out.nominal = per_channel(nominal, n, "nominal reflectance");
    out.factor.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        if (!(out.nominal[c] > 0.0 && out.nominal[c] <= 1.0))
            throw ValidationError("nominal reflectance must be in (0, 1], got " + std::to_string(out.nominal[c]));
        if (!(out.target[c] > 0.0)) {
            throw ValidationError("reflectance target median is " + std::to_string(out.target[c]) + " in channel " +
                                  std::to_string(c) + "; the target patch is probably misplaced");
        }
        out.factor[c] = out.target[c] / out.nominal[c];
    }
    return out;
}

StrayLight stray_from_stats(const imaging::ChannelStats& stats) {
    for (double s : stats.median)
        if (!(s >= 0.0)) throw ValidationError("stray light level must be non-negative");
    return {stats.median};
}

Texture calibrate_vis(const Texture& acquired, const NormVector& norm, unsigned workers) {
    if (norm.factor.size() != static_cast<std::size_t>(acquired.channels)) {
        throw ValidationError("normalization vector has " + std::to_string(norm.factor.size()) +
                              " channels, texture has " + std::to_string(acquired.channels));
    }
    Texture out = acquired;
    const std::size_t ch = static_cast<std::size_t>(acquired.channels);
    const std::size_t row_len = static_cast<std::size_t>(acquired.width) * ch;
    parallel_rows(static_cast<std::size_t>(acquired.height), workers, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0 * row_len; i < r1 * row_len; ++i) out.data[i] = acquired.data[i] / norm.factor[i % ch];
    });
    return out;
}

UvfResult calibrate_uvf(const Texture& fluorescence, const StrayLight& stray, const Texture& vis_calibrated,
                        unsigned workers) {
    if (!imaging::same_shape(fluorescence, vis_calibrated)) {
        throw ValidationError("fluorescence and calibrated visible textures are not registered (" +
                              std::to_string(fluorescence.width) + "x" + std::to_string(fluorescence.height) + "x" +
                              std::to_string(fluorescence.channels) + " vs " + std::to_string(vis_calibrated.width) +
                              "x" + std::to_string(vis_calibrated.height) + "x" +
                              std::to_string(vis_calibrated.channels) + ")");
    }
    if (stray.level.size() != static_cast<std::size_t>(fluorescence.channels))
        throw ValidationError("stray light vector does not match the fluorescence channel count");

    UvfResult result{fluorescence, 0, 0.0};
    const std::size_t ch = static_cast<std::size_t>(fluorescence.channels);
    const std::size_t row_len = static_cast<std::size_t>(fluorescence.width) * ch;
    const std::size_t rows = static_cast<std::size_t>(fluorescence.height);

    // Per-row tallies keep the reduction independent of the partitioning.
    std::vector<std::size_t> clamped(rows, 0);
    std::vector<double> undershoot(rows, 0.0);
    parallel_rows(rows, workers, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            for (std::size_t i = r * row_len; i < (r + 1) * row_len; ++i) {
                const double raw = fluorescence.data[i] - stray.level[i % ch] * vis_calibrated.data[i];
                if (raw < 0.0) {
                    ++clamped[r];
                    undershoot[r] = std::max(undershoot[r], -raw);
                    result.texture.data[i] = 0.0;
                } else {
                    result.texture.data[i] = raw;
                }
            }
        }
    });
    for (std::size_t r = 0; r < rows; ++r) {
        result.clamped += clamped[r];
        result.max_undershoot = std::max(result.max_undershoot, undershoot[r]);
    }
    return result;
}

} // namespace specmap::calibration
