#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "specmap/common/grid.hpp"
#include "specmap/common/types.hpp"
#include "specmap/geometry/mesh.hpp"

namespace specmap::geometry {

/// Orientation of the v axis relative to image rows. By default v = 0 is the
/// bottom row of the texture (OBJ convention); `v_flip` makes v = 0 the top.
struct UvConvention {
    bool v_flip = false;
};

/// col = min(floor(u*W), W-1); row = min(floor((1-v)*H), H-1), or floor(v*H)
/// when flipped. Total on [0,1]^2; inputs outside are clamped first.
Texel uv_to_texel(UV uv, std::int32_t width, std::int32_t height, UvConvention convention = {});

/// uv of the center (col + 0.5, row + 0.5) of a texel.
UV texel_center_uv(Texel texel, std::int32_t width, std::int32_t height, UvConvention convention = {});

/// Rasterization works on a fixed-point pixel grid: atlas pixel coordinates
/// (x right, y down, texel centers at k + 0.5) are snapped to 1/256 texel so
/// that every inside/outside decision is an exact integer computation.
inline constexpr int kSubpixelBits = 8;
inline constexpr std::int64_t kSubpixelScale = std::int64_t{1} << kSubpixelBits;

struct FixedPoint {
    std::int64_t x = 0;
    std::int64_t y = 0;
    friend bool operator==(const FixedPoint&, const FixedPoint&) = default;
};

/// Snaps a uv coordinate to the fixed-point pixel grid of a width x height atlas.
FixedPoint to_fixed(UV uv, std::int32_t width, std::int32_t height, UvConvention convention = {});

/// Fixed-point position of a texel center.
inline FixedPoint texel_center_fixed(Texel t) {
    return {t.col * kSubpixelScale + kSubpixelScale / 2, t.row * kSubpixelScale + kSubpixelScale / 2};
}

inline constexpr std::uint32_t kNoFace = std::numeric_limits<std::uint32_t>::max();

/// Owning face per texel, or kNoFace for atlas background.
using FaceIdMap = Grid<std::uint32_t>;

struct OccupancyResult {
    FaceIdMap face_ids;
    std::size_t degenerate_faces = 0;
};

/// Uv triangles smaller than this (in uv units squared) own no texels.
inline constexpr double kDegenerateUvArea = 1e-12;

/// Assigns every texel whose center lies inside a face's uv triangle to that
/// face. Points on shared edges follow the top-left fill rule; where uv
/// triangles overlap the lowest face id wins. Rows may be processed by
/// `workers` threads; the result does not depend on the worker count.
OccupancyResult rasterize_occupancy(const Mesh& mesh, std::int32_t width, std::int32_t height,
                                    UvConvention convention = {}, unsigned workers = 1);

/// 1 where a face owns the texel.
RegionMask occupancy_mask(const FaceIdMap& face_ids);

/// Faces with at least one masked texel whose masked/owned texel ratio is at
/// least min_fraction. Sorted ascending.
std::vector<std::uint32_t> mask_to_faces(const RegionMask& mask, const FaceIdMap& face_ids, double min_fraction);

} // namespace specmap::geometry
