#include "specmap/classify/sam.hpp"

#include <algorithm>
#include <limits>
#include <queue>

#include "specmap/common/parallel.hpp"
#include "specmap/imaging/patch.hpp"

namespace specmap::classify {
namespace {

double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

void check_reference(const ReferenceSpectrum& ref, std::size_t bands) {
    if (ref.values.size() != bands) {
        throw ValidationError("reference '" + ref.label + "' has " + std::to_string(ref.values.size()) +
                              " bands, cube has " + std::to_string(bands));
    }
    for (double x : ref.values)
        if (!std::isfinite(x)) throw ValidationError("reference '" + ref.label + "' has a non-finite value");
    if (!(squared_norm(ref.values) > 0.0)) throw ValidationError("reference '" + ref.label + "' has zero magnitude");
}

} // namespace

std::optional<double> spectral_angle(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw ValidationError("spectral vectors differ in length (" + std::to_string(u.size()) + " vs " +
                              std::to_string(v.size()) + ")");
    }
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        dot += u[k] * v[k];
        nu += u[k] * u[k];
        nv += v[k] * v[k];
    }
    return angle_from_products(dot, nu, nv);
}

SamMap sam_map(const cube::SpectralCube& cube, const ReferenceSpectrum& ref, unsigned workers) {
    const std::size_t b = cube.band_count();
    check_reference(ref, b);
    SamMap map(cube.width(), cube.height(), kUndefinedAngle);
    const double* r = ref.values.data();
    const double ref_norm2 = squared_norm(ref.values);
    const auto samples = cube.samples();
    const auto& valid = cube.valid_mask().data;
    const auto w = static_cast<std::size_t>(cube.width());

    parallel_rows(static_cast<std::size_t>(cube.height()), workers, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0 * w; i < r1 * w; ++i) {
            if (!valid[i]) continue;
            const double* s = samples.data() + i * b;
            double dot = 0.0, nu = 0.0;
            for (std::size_t k = 0; k < b; ++k) {
                dot += s[k] * r[k];
                nu += s[k] * s[k];
            }
            if (const auto a = angle_from_products(dot, nu, ref_norm2)) map.data[i] = *a;
        }
    });
    return map;
}

RegionMask threshold_region(const SamMap& map, double theta_max) {
    if (!(theta_max >= 0.0)) throw ValidationError("theta_max must be non-negative");
    RegionMask mask(map.width, map.height, 0);
    for (std::size_t i = 0; i < map.size(); ++i) {
        const double a = map.data[i];
        mask.data[i] = (a != kUndefinedAngle && a <= theta_max) ? 1 : 0;
    }
    return mask;
}

LabelMap classify_multi(const cube::SpectralCube& cube, const std::vector<ReferenceSpectrum>& refs, double theta_max,
                        unsigned workers) {
    if (refs.empty()) throw ValidationError("at least one reference spectrum is required");
    if (!(theta_max >= 0.0)) throw ValidationError("theta_max must be non-negative");
    const std::size_t b = cube.band_count();
    std::vector<double> ref_norm2;
    for (const auto& ref : refs) {
        check_reference(ref, b);
        ref_norm2.push_back(squared_norm(ref.values));
    }

    LabelMap labels(cube.width(), cube.height(), kUnclassified);
    const auto samples = cube.samples();
    const auto& valid = cube.valid_mask().data;
    const auto w = static_cast<std::size_t>(cube.width());

    parallel_rows(static_cast<std::size_t>(cube.height()), workers, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0 * w; i < r1 * w; ++i) {
            if (!valid[i]) continue;
            const double* s = samples.data() + i * b;
            double nu = 0.0;
            for (std::size_t k = 0; k < b; ++k) nu += s[k] * s[k];
            if (nu == 0.0) continue;

            double best = std::numeric_limits<double>::infinity();
            std::int32_t best_label = kUnclassified;
            for (std::size_t j = 0; j < refs.size(); ++j) {
                const double* r = refs[j].values.data();
                double dot = 0.0;
                for (std::size_t k = 0; k < b; ++k) dot += s[k] * r[k];
                const double a = *angle_from_products(dot, nu, ref_norm2[j]);
                if (a < best) {
                    best = a;
                    best_label = static_cast<std::int32_t>(j);
                }
            }
            if (best <= theta_max) labels.data[i] = best_label;
        }
    });
    return labels;
}

ReferenceSpectrum reference_from_texel(const cube::SpectralCube& cube, Texel texel, std::int32_t radius,
                                       std::string label) {
    if (radius < 0) throw ValidationError("neighborhood radius must be non-negative");
    if (!cube.spectrum_at(texel)) {
        throw MaskedTexelError("reference texel not on surface: (" + std::to_string(texel.col) + "," +
                               std::to_string(texel.row) + ") is outside the mesh-covered atlas area");
    }
    const std::size_t b = cube.band_count();
    std::vector<double> sum(b, 0.0);
    std::size_t n = 0;
    const std::int32_t c0 = std::max(0, texel.col - radius), c1 = std::min(cube.width() - 1, texel.col + radius);
    const std::int32_t r0 = std::max(0, texel.row - radius), r1 = std::min(cube.height() - 1, texel.row + radius);
    for (std::int32_t row = r0; row <= r1; ++row) {
        for (std::int32_t col = c0; col <= c1; ++col) {
            const auto s = cube.spectrum_at({col, row});
            if (!s) continue;
            for (std::size_t k = 0; k < b; ++k) sum[k] += (*s)[k];
            ++n;
        }
    }
    for (double& x : sum) x /= static_cast<double>(n);
    return {std::move(label), std::move(sum)};
}

RegionStats region_stats(const SamMap& map, const RegionMask& region) {
    if (!same_shape(map, region)) throw ValidationError("region and angle map dimensions differ");
    RegionStats stats;
    std::vector<double> angles;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (region.data[i] && map.data[i] != kUndefinedAngle) angles.push_back(map.data[i]);
    }
    stats.count = angles.size();
    if (!angles.empty()) {
        stats.min_angle = *std::min_element(angles.begin(), angles.end());
        stats.median_angle = imaging::median_of(angles);
    }
    return stats;
}

RegionMask keep_connected(const RegionMask& region, Texel seed) {
    RegionMask out(region.width, region.height, 0);
    if (!region.contains(seed) || !region[seed]) return out;
    std::queue<Texel> todo;
    todo.push(seed);
    out[seed] = 1;
    while (!todo.empty()) {
        const Texel t = todo.front();
        todo.pop();
        const Texel next[4] = {{t.col - 1, t.row}, {t.col + 1, t.row}, {t.col, t.row - 1}, {t.col, t.row + 1}};
        for (const Texel n : next) {
            if (region.contains(n) && region[n] && !out[n]) {
                out[n] = 1;
                todo.push(n);
            }
        }
    }
    return out;
}

Overlay make_overlay(const RegionMask& mask, Rgba color) {
    Overlay out(mask.width, mask.height, Rgba{});
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask.data[i]) out.data[i] = color;
    return out;
}

std::vector<std::uint8_t> overlay_bytes(const Overlay& overlay) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(overlay.size() * 4);
    for (const Rgba& p : overlay.data) {
        bytes.push_back(p.r);
        bytes.push_back(p.g);
        bytes.push_back(p.b);
        bytes.push_back(p.a);
    }
    return bytes;
}

} // namespace specmap::classify
