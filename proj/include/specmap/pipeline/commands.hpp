#pragma once

#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include "specmap/pipeline/manifest.hpp"
#include "specmap/pipeline/workspace.hpp"

namespace specmap::pipeline {

struct CommandOptions {
    unsigned workers = 0;                 // 0 = all hardware threads
    std::optional<fs::path> output_dir;   // overrides the manifest
};

fs::path output_dir_for(const Manifest& m, const CommandOptions& options);

/// Patch statistics, calibration of VIS then UVF, and a JSON report.
/// Returns the committed run directory.
fs::path cmd_calibrate(const Manifest& m, const CommandOptions& options);

/// Occupancy raster, cube assembly in canonical band order, band files,
/// validity mask, face-id map and descriptor.
fs::path cmd_build_cube(const Manifest& m, const CommandOptions& options);

/// A reference file with one spectrum per line, for multi-reference labelling.
struct ReferenceFile {
    fs::path path;
};

using ClassifyReference = std::variant<Reference, ReferenceFile>;

/// Single reference: sam.pfm, region.pfm, overlay.png, faces.txt, stats.json.
/// Reference file: labels.pfm, overlay.png, faces.txt, stats.json.
fs::path cmd_classify(const Manifest& m, const ClassifyReference& ref, const ClassifyParams& params,
                      const CommandOptions& options);

/// File names inside run directories.
namespace files {
inline constexpr const char* kVisCalib = "vis_calib.pfm";
inline constexpr const char* kUvfCalib = "uvf_calib.pfm";
inline constexpr const char* kCalibrationReport = "calibration.json";
inline constexpr const char* kFaceIds = "face_ids.pfm";
inline constexpr const char* kCubeReport = "cube.json";
inline constexpr const char* kSam = "sam.pfm";
inline constexpr const char* kRegion = "region.pfm";
inline constexpr const char* kLabels = "labels.pfm";
inline constexpr const char* kOverlay = "overlay.png";
inline constexpr const char* kFaces = "faces.txt";
inline constexpr const char* kStats = "stats.json";
inline constexpr const char* kProvenance = "provenance.toml";
} // namespace files

} // namespace specmap::pipeline
