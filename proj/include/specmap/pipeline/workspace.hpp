#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "specmap/classify/sam.hpp"
#include "specmap/common/error.hpp"
#include "specmap/cube/spectral_cube.hpp"
#include "specmap/geometry/atlas.hpp"
#include "specmap/geometry/mesh.hpp"
#include "specmap/pipeline/manifest.hpp"

namespace specmap::pipeline {

/// Stage directory names under the output directory.
inline constexpr const char* kCalibrateStage = "calibrate";
inline constexpr const char* kCubeStage = "cube";
inline constexpr const char* kClassifyStage = "classify";

/// Everything classification needs, loaded from a built cube. Read-only after
/// construction; safe to share between threads.
struct Workspace {
    Manifest manifest;
    fs::path output_dir;
    fs::path cube_run;
    geometry::Mesh mesh;
    std::string mesh_bytes;  // the mesh file exactly as on disk
    cube::SpectralCube cube;
    geometry::FaceIdMap face_ids;
    geometry::UvConvention convention;
};

/// Throws ValidationError telling the user to run build-cube when no cube exists.
fs::path require_cube(const fs::path& output_dir);

Workspace open_workspace(const Manifest& manifest, const fs::path& output_dir);

/// The reference point for a single-reference classification.
struct Reference {
    enum class Kind { Uv, Texel, Ray };
    Kind kind = Kind::Texel;
    UV uv;
    Texel texel;
    Vec3 origin;
    Vec3 direction;

    static Reference at_uv(UV uv) { return {Kind::Uv, uv, {}, {}, {}}; }
    static Reference at_texel(Texel t) { return {Kind::Texel, {}, t, {}, {}}; }
    static Reference along_ray(Vec3 o, Vec3 d) { return {Kind::Ray, {}, {}, o, d}; }
};

/// The ray missed the mesh.
class NoSurfaceHit : public ValidationError {
public:
    NoSurfaceHit() : ValidationError("no surface hit") {}
};

struct ClassifyParams {
    double theta_max = classify::kDefaultThetaMax;
    std::int32_t radius = 0;
    bool connected = false;
    double min_face_fraction = 0.5;
    unsigned workers = 1;
};

ClassifyParams params_from(const Manifest& m);

struct Picked {
    Texel texel;
    UV uv;
    std::optional<std::uint32_t> face_id;
    std::optional<Vec3> point;
};

struct SingleResult {
    Picked picked;
    classify::ReferenceSpectrum reference;
    classify::SamMap sam;
    RegionMask region;
    classify::RegionStats stats;
    std::vector<std::uint32_t> faces;
};

/// Resolves the reference, builds the angle map and thresholds it. Throws
/// NoSurfaceHit for a missed ray, classify::MaskedTexelError for a reference
/// off the surface and ValidationError for anything out of range.
SingleResult classify_single(const Workspace& ws, const Reference& ref, const ClassifyParams& params);

/// Reads `label v1 ... vB` lines ('#' starts a comment).
std::vector<classify::ReferenceSpectrum> parse_reference_file(std::string_view text, std::size_t bands,
                                                              const std::string& origin);

} // namespace specmap::pipeline
