#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "specmap/common/types.hpp"
#include "specmap/geometry/atlas.hpp"
#include "specmap/geometry/mesh.hpp"

namespace specmap::geometry {

using Barycentric = std::array<double, 3>;

/// A surface hit resolved all the way down to a texel of the atlas.
struct PickResult {
    std::size_t face_id = 0;
    Barycentric barycentric{};
    Vec3 point{};
    UV uv{};
    Texel texel{};
    double distance = 0.0;
};

struct RayHit {
    std::size_t face_id = 0;
    double t = 0.0;
    Barycentric barycentric{};
};

/// Watertight ray/triangle test (shear-and-scale formulation). Both windings
/// are accepted. Returns the ray parameter and corner weights of the hit.
std::optional<RayHit> intersect_triangle(Vec3 origin, Vec3 dir, Vec3 a, Vec3 b, Vec3 c);

/// Nearest hit with t > 0 over all faces; equal distances resolve to the lower
/// face id. `dir` need not be normalized but must be non-zero.
std::optional<RayHit> raycast(const Mesh& mesh, Vec3 origin, Vec3 dir);

/// Interpolates the face's uv corners. Weights must be non-negative and sum
/// to 1 within 1e-9.
UV uv_of(const Mesh& mesh, std::size_t face_id, const Barycentric& weights);

Vec3 point_of(const Mesh& mesh, std::size_t face_id, const Barycentric& weights);

/// Raycast followed by the uv and texel lookups for an atlas of the given size.
std::optional<PickResult> pick(const Mesh& mesh, Vec3 origin, Vec3 dir, std::int32_t width, std::int32_t height,
                               UvConvention convention = {});

} // namespace specmap::geometry
