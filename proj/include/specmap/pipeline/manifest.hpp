#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "specmap/common/keyvalue.hpp"
#include "specmap/imaging/patch.hpp"
#include "specmap/imaging/texture.hpp"

namespace specmap::pipeline {

namespace fs = std::filesystem;

enum class TextureRole { Acquired, Calibrated };

struct TextureEntry {
    std::string id;  // the `x` in [texture.x]
    fs::path path;   // resolved against the manifest directory
    imaging::Modality modality = imaging::Modality::OTHER;
    TextureRole role = TextureRole::Acquired;
    std::vector<std::string> channels;  // optional channel names
};

/// A project manifest with every path resolved and every value checked.
///
/// The workflow needs exactly one acquired VIS texture and one acquired
/// UVF texture. Further bands (e.g. infrared) must already be calibrated and
/// are appended to the cube after VIS and UVF, in manifest order.
struct Manifest {
    fs::path file;
    std::string name;
    fs::path output_dir;

    fs::path mesh;
    bool v_flip = false;

    std::int32_t atlas_width = 0;
    std::int32_t atlas_height = 0;

    std::vector<TextureEntry> textures;

    std::vector<double> nominal_reflectance;
    imaging::PatchRect vis_patch;
    imaging::PatchRect uvf_patch;

    double theta_max = 0.15;
    std::int32_t radius = 0;
    double min_face_fraction = 0.5;
    bool connected = false;

    kv::Section provenance;  // free-form acquisition notes, copied to outputs

    const TextureEntry& vis() const;
    const TextureEntry& uvf() const;
    /// Calibrated extra bands in manifest order.
    std::vector<const TextureEntry*> extra_bands() const;
};

/// Parses and validates; throws ValidationError naming the file and key.
Manifest parse_manifest(std::string_view text, const fs::path& file);
Manifest load_manifest(const fs::path& file);

/// Throws ValidationError listing the first referenced input that is missing.
void check_inputs_exist(const Manifest& m);

/// Canonical text form (used for the fixture and for provenance copies).
std::string to_text(const Manifest& m);

} // namespace specmap::pipeline
