#include "specmap/geometry/atlas.hpp"

#include <algorithm>
#include <cmath>

#include "specmap/common/error.hpp"
#include "specmap/common/parallel.hpp"

namespace specmap::geometry {
namespace {

void check_dims(std::int32_t width, std::int32_t height) {
    if (width < 1 || height < 1) throw ValidationError("atlas dimensions must be at least 1x1");
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Twice the signed area of (a, b, p) in the y-down pixel frame.
std::int64_t edge(FixedPoint a, FixedPoint b, FixedPoint p) {
    return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

struct PreparedFace {
    std::uint32_t id;
    FixedPoint v[3];
    bool top_left[3];
    std::int32_t col0, col1, row0, row1;
};

std::int32_t first_center_at_or_after(std::int64_t fixed) {
    // Smallest k with k*S + S/2 >= fixed.
    const std::int64_t num = fixed - kSubpixelScale / 2;
    const std::int64_t q = num >= 0 ? (num + kSubpixelScale - 1) / kSubpixelScale : -((-num) / kSubpixelScale);
    return static_cast<std::int32_t>(std::clamp<std::int64_t>(q, INT32_MIN, INT32_MAX));
}

std::int32_t last_center_at_or_before(std::int64_t fixed) {
    const std::int64_t num = fixed - kSubpixelScale / 2;
    const std::int64_t q = num >= 0 ? num / kSubpixelScale : -((-num + kSubpixelScale - 1) / kSubpixelScale);
    return static_cast<std::int32_t>(std::clamp<std::int64_t>(q, INT32_MIN, INT32_MAX));
}

} // namespace

Texel uv_to_texel(UV uv, std::int32_t width, std::int32_t height, UvConvention convention) {
    check_dims(width, height);
    const double u = clamp01(uv.u);
    const double v = clamp01(uv.v);
    const double y = convention.v_flip ? v : 1.0 - v;
    const auto col = static_cast<std::int32_t>(std::min<double>(std::floor(u * width), width - 1));
    const auto row = static_cast<std::int32_t>(std::min<double>(std::floor(y * height), height - 1));
    return {col, row};
}

UV texel_center_uv(Texel texel, std::int32_t width, std::int32_t height, UvConvention convention) {
    check_dims(width, height);
    const double u = (texel.col + 0.5) / width;
    const double y = (texel.row + 0.5) / height;
    return {u, convention.v_flip ? y : 1.0 - y};
}

FixedPoint to_fixed(UV uv, std::int32_t width, std::int32_t height, UvConvention convention) {
    const std::int64_t sx = width * kSubpixelScale;
    const std::int64_t sy = height * kSubpixelScale;
    const std::int64_t x = std::llround(uv.u * static_cast<double>(sx));
    const std::int64_t vy = std::llround(uv.v * static_cast<double>(sy));
    return {x, convention.v_flip ? vy : sy - vy};
}

OccupancyResult rasterize_occupancy(const Mesh& mesh, std::int32_t width, std::int32_t height,
                                    UvConvention convention, unsigned workers) {
    check_dims(width, height);
    OccupancyResult result{FaceIdMap(width, height, kNoFace), 0};

    std::vector<PreparedFace> prepared;
    prepared.reserve(mesh.face_count());
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const auto& uv = mesh.uv_corners[f];
        const double uv_area =
            0.5 * std::abs((uv[1].u - uv[0].u) * (uv[2].v - uv[0].v) - (uv[2].u - uv[0].u) * (uv[1].v - uv[0].v));
        PreparedFace pf{};
        pf.id = static_cast<std::uint32_t>(f);
        for (int k = 0; k < 3; ++k) pf.v[k] = to_fixed(uv[k], width, height, convention);
        const std::int64_t area2 = edge(pf.v[0], pf.v[1], pf.v[2]);
        if (uv_area < kDegenerateUvArea || area2 == 0) {
            ++result.degenerate_faces;
            continue;
        }
        if (area2 < 0) std::swap(pf.v[1], pf.v[2]);
        for (int k = 0; k < 3; ++k) {
            const FixedPoint a = pf.v[k], b = pf.v[(k + 1) % 3];
            const std::int64_t dx = b.x - a.x, dy = b.y - a.y;
            pf.top_left[k] = dy < 0 || (dy == 0 && dx > 0);
        }
        const auto [minx, maxx] = std::minmax({pf.v[0].x, pf.v[1].x, pf.v[2].x});
        const auto [miny, maxy] = std::minmax({pf.v[0].y, pf.v[1].y, pf.v[2].y});
        pf.col0 = std::max(0, first_center_at_or_after(minx));
        pf.col1 = std::min(width - 1, last_center_at_or_before(maxx));
        pf.row0 = std::max(0, first_center_at_or_after(miny));
        pf.row1 = std::min(height - 1, last_center_at_or_before(maxy));
        if (pf.col0 > pf.col1 || pf.row0 > pf.row1) continue;
        prepared.push_back(pf);
    }

    auto& map = result.face_ids;
    parallel_rows(static_cast<std::size_t>(height), workers, [&](std::size_t begin, std::size_t end) {
        const auto r_begin = static_cast<std::int32_t>(begin);
        const auto r_end = static_cast<std::int32_t>(end);
        for (const PreparedFace& pf : prepared) {
            const std::int32_t row0 = std::max(pf.row0, r_begin);
            const std::int32_t row1 = std::min(pf.row1, r_end - 1);
            for (std::int32_t row = row0; row <= row1; ++row) {
                for (std::int32_t col = pf.col0; col <= pf.col1; ++col) {
                    const FixedPoint p = texel_center_fixed({col, row});
                    bool inside = true;
                    for (int k = 0; k < 3 && inside; ++k) {
                        const std::int64_t e = edge(pf.v[k], pf.v[(k + 1) % 3], p);
                        inside = e > 0 || (e == 0 && pf.top_left[k]);
                    }
                    if (!inside) continue;
                    auto& owner = map[{col, row}];
                    if (owner == kNoFace) owner = pf.id;
                }
            }
        }
    });
    return result;
}

RegionMask occupancy_mask(const FaceIdMap& face_ids) {
    RegionMask mask(face_ids.width, face_ids.height, 0);
    for (std::size_t i = 0; i < face_ids.size(); ++i) mask.data[i] = face_ids.data[i] != kNoFace ? 1 : 0;
    return mask;
}

std::vector<std::uint32_t> mask_to_faces(const RegionMask& mask, const FaceIdMap& face_ids, double min_fraction) {
    if (!same_shape(mask, face_ids)) throw ValidationError("mask and face map dimensions differ");
    if (!(min_fraction >= 0.0 && min_fraction <= 1.0)) throw ValidationError("min_fraction must be in [0, 1]");

    std::uint32_t max_id = 0;
    bool any = false;
    for (const auto id : face_ids.data) {
        if (id == kNoFace) continue;
        max_id = std::max(max_id, id);
        any = true;
    }
    if (!any) return {};

    std::vector<std::size_t> owned(static_cast<std::size_t>(max_id) + 1, 0);
    std::vector<std::size_t> masked(owned.size(), 0);
    for (std::size_t i = 0; i < face_ids.size(); ++i) {
        const auto id = face_ids.data[i];
        if (id == kNoFace) continue;
        ++owned[id];
        if (mask.data[i]) ++masked[id];
    }
    std::vector<std::uint32_t> out;
    for (std::size_t f = 0; f < owned.size(); ++f) {
        if (owned[f] == 0 || masked[f] == 0) continue;
        if (static_cast<double>(masked[f]) / static_cast<double>(owned[f]) >= min_fraction)
            out.push_back(static_cast<std::uint32_t>(f));
    }
    return out;
}

} // namespace specmap::geometry
