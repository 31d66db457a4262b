#pragma once

#include <array>
#include <cstdint>
#include <filesystem>

#include "specmap/common/types.hpp"

namespace specmap::pipeline {

namespace fs = std::filesystem;

/// Synthetic two-material project with known ground truth: a 500-face
/// half-and-half cylinder plus a flat reflectance target, baked into a
/// 1024x1024 atlas. Material A covers three uv discs; everything else on the
/// cylinder is material B, 0.5 rad away from A in spectral angle.
struct FixtureInfo {
    fs::path manifest;
    fs::path ground_truth;  // 1-channel PFM: -1 background, 0 A, 1 B, 2 target

    std::array<double, 3> illumination;  // per-channel VIS gain; equals R_norm
    std::array<double, 3> stray;         // UVF reading on the target; equals S_target
    std::array<double, 6> material_a;    // unit spectra
    std::array<double, 6> material_b;

    UV pick_uv;
    Texel pick_texel;
    std::uint32_t pick_face = 0;
    Vec3 ray_origin;
    Vec3 ray_direction;

    std::size_t valid_texels = 0;
    std::size_t material_a_texels = 0;
    std::size_t material_b_texels = 0;
    std::size_t target_texels = 0;
};

/// Writes mesh.obj, vis_acquired.pfm, uvf_acquired.pfm, project.toml,
/// ground_truth.pfm, fixture.toml and README.md into `dir`. Output is a pure
/// function of `seed`.
FixtureInfo make_fixture(const fs::path& dir, std::uint64_t seed = 20240501);

/// Reads fixture.toml back.
FixtureInfo read_fixture_info(const fs::path& dir);

inline constexpr std::int32_t kFixtureAtlas = 1024;

} // namespace specmap::pipeline
