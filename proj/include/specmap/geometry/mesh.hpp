#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "specmap/common/types.hpp"

namespace specmap::geometry {

using Face = std::array<std::uint32_t, 3>;
using FaceUV = std::array<UV, 3>;

/// Triangle mesh with one uv triangle per face. Positions are in meters.
///
/// Invariants established by the loader: every face index is below
/// vertices.size(), every uv component is finite and inside [0, 1], and no
/// face repeats the same vertex three times.
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::vector<FaceUV> uv_corners;

    std::size_t face_count() const { return faces.size(); }
};

struct MeshLoadReport {
    std::size_t clamped_uv_components = 0;
    std::size_t dropped_degenerate_faces = 0;
    std::size_t fan_triangulated_polygons = 0;
};

struct LoadedMesh {
    Mesh mesh;
    MeshLoadReport report;
};

/// Parses Wavefront OBJ text (`v`, `vt`, `f` records; normals and everything
/// else ignored). Polygons are fan-triangulated in corner order. Throws
/// ValidationError for malformed records, out-of-range indices, or faces
/// without texture coordinates.
LoadedMesh parse_obj(std::string_view text);

LoadedMesh load_mesh(const std::filesystem::path& path);

/// Writes positions, one `vt` per face corner, and `f v/vt` triangles.
std::string to_obj(const Mesh& mesh);
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);

} // namespace specmap::geometry
