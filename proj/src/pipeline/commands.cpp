#include "specmap/pipeline/commands.hpp"

#include <array>
#include <functional>
#include <sstream>

#include "specmap/calibration/calibration.hpp"
#include "specmap/common/parallel.hpp"
#include "specmap/imaging/grid_io.hpp"
#include "specmap/imaging/image_io.hpp"
#include "specmap/pipeline/report.hpp"
#include "specmap/pipeline/runs.hpp"

#ifndef SPECMAP_VERSION
#define SPECMAP_VERSION "0.0.0"
#endif

namespace specmap::pipeline {
namespace {

using nlohmann::json;

/// Runs `fn`, prefixing validation messages with the stage that failed.
template <class Fn>
auto staged(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const classify::MaskedTexelError&) {
        throw;
    } catch (const NoSurfaceHit&) {
        throw;
    } catch (const ValidationError& e) {
        throw ValidationError(stage + ": " + e.what());
    }
}

imaging::BandMeta meta_of(const TextureEntry& t) {
    return {t.modality, t.channels};
}

void require_atlas_size(const imaging::Texture& tex, const Manifest& m, const std::string& what) {
    if (tex.width != m.atlas_width || tex.height != m.atlas_height) {
        throw ValidationError("atlas size " + std::to_string(m.atlas_width) + "x" + std::to_string(m.atlas_height) +
                              " in the manifest does not match " + what + " (" + std::to_string(tex.width) + "x" +
                              std::to_string(tex.height) + ")");
    }
}

json rect_json(const imaging::PatchRect& r) {
    return {r.col0, r.row0, r.col1, r.row1};
}

std::string provenance_text(const Manifest& m, const std::string& stage, unsigned workers,
                            const std::vector<std::pair<std::string, fs::path>>& inputs) {
    kv::Document doc;
    auto& run = doc.section("run");
    run.set("stage", kv::Value::of(stage));
    run.set("created_utc", kv::Value::of(utc_stamp()));
    run.set("version", kv::Value::of(SPECMAP_VERSION));
    run.set("workers", kv::Value::of(static_cast<std::int64_t>(workers)));
    run.set("manifest", kv::Value::of(m.file.string()));
    auto& in = doc.section("inputs");
    for (const auto& [key, path] : inputs) in.set(key, kv::Value::of(path.string()));
    if (!m.provenance.entries.empty()) {
        kv::Section acquisition = m.provenance;
        acquisition.name = "acquisition";
        doc.sections.push_back(std::move(acquisition));
    }
    return kv::serialize(doc);
}

std::string faces_text(const std::vector<std::uint32_t>& faces) {
    std::string out;
    for (const auto f : faces) out += std::to_string(f) + "\n";
    return out;
}

std::string overlay_png(const classify::Overlay& overlay) {
    const auto bytes = classify::overlay_bytes(overlay);
    return imaging::encode_png8(overlay.width, overlay.height, 4, bytes);
}

// Label colours for multi-reference overlays; label 0 keeps the magenta used
// for single-reference regions.
constexpr std::array<classify::Rgba, 8> kPalette = {{{255, 0, 255, 255},
                                                     {0, 200, 255, 255},
                                                     {255, 200, 0, 255},
                                                     {0, 220, 90, 255},
                                                     {255, 80, 40, 255},
                                                     {120, 80, 255, 255},
                                                     {255, 255, 255, 255},
                                                     {120, 120, 120, 255}}};

} // namespace

fs::path output_dir_for(const Manifest& m, const CommandOptions& options) {
    return options.output_dir ? fs::absolute(*options.output_dir).lexically_normal() : m.output_dir;
}

fs::path cmd_calibrate(const Manifest& m, const CommandOptions& options) {
    check_inputs_exist(m);
    const unsigned workers = resolve_workers(options.workers);
    const fs::path out = output_dir_for(m, options);

    const auto vis = staged("calibrate: load VIS texture", [&] {
        auto t = imaging::load_texture(m.vis().path, meta_of(m.vis()));
        require_atlas_size(t, m, "VIS texture " + m.vis().path.string());
        return t;
    });
    const auto uvf = staged("calibrate: load UVF texture", [&] {
        auto t = imaging::load_texture(m.uvf().path, meta_of(m.uvf()));
        require_atlas_size(t, m, "UVF texture " + m.uvf().path.string());
        return t;
    });

    const auto norm = staged("calibrate: VIS reflectance patch", [&] {
        return calibration::compute_norm(imaging::patch_stats(vis, m.vis_patch), m.nominal_reflectance);
    });
    const auto vis_cal = staged("calibrate: VIS", [&] { return calibration::calibrate_vis(vis, norm, workers); });
    const auto stray = staged("calibrate: UVF stray-light patch",
                              [&] { return calibration::stray_from_stats(imaging::patch_stats(uvf, m.uvf_patch)); });
    const auto uvf_cal =
        staged("calibrate: UVF", [&] { return calibration::calibrate_uvf(uvf, stray, vis_cal, workers); });

    json report = {
        {"vis",
         {{"texture", m.vis().path.filename().string()},
          {"patch", rect_json(m.vis_patch)},
          {"R_target", norm.target},
          {"R_nominal", norm.nominal},
          {"R_norm", norm.factor}}},
        {"uvf",
         {{"texture", m.uvf().path.filename().string()},
          {"patch", rect_json(m.uvf_patch)},
          {"S_target", stray.level},
          {"clamped_samples", uvf_cal.clamped},
          {"max_undershoot", uvf_cal.max_undershoot}}},
        {"width", vis.width},
        {"height", vis.height},
        {"channels", vis.channels},
    };

    OutputLock lock(out);
    RunDir run(out, kCalibrateStage);
    imaging::save_texture(vis_cal, run.path() / files::kVisCalib);
    imaging::save_texture(uvf_cal.texture, run.path() / files::kUvfCalib);
    imaging::write_file(run.path() / files::kCalibrationReport, to_text(report));
    imaging::write_file(run.path() / files::kProvenance,
                        provenance_text(m, kCalibrateStage, workers, {{"vis", m.vis().path}, {"uvf", m.uvf().path}}));
    return run.commit();
}

fs::path cmd_build_cube(const Manifest& m, const CommandOptions& options) {
    check_inputs_exist(m);
    const unsigned workers = resolve_workers(options.workers);
    const fs::path out = output_dir_for(m, options);
    const fs::path calibrated = latest_run(out, kCalibrateStage, "run calibrate first");

    const auto loaded = staged("build-cube: mesh", [&] { return geometry::load_mesh(m.mesh); });
    // Face ids are stored as float32; every id must be exactly representable.
    if (loaded.mesh.face_count() >= (std::size_t{1} << 24))
        throw ValidationError("build-cube: mesh has more than 16777215 faces");

    std::vector<imaging::Texture> textures;
    std::vector<std::string> sources;
    staged("build-cube: calibrated textures", [&] {
        textures.push_back(imaging::load_texture(calibrated / files::kVisCalib, meta_of(m.vis())));
        sources.emplace_back(files::kVisCalib);
        textures.push_back(imaging::load_texture(calibrated / files::kUvfCalib, meta_of(m.uvf())));
        sources.emplace_back(files::kUvfCalib);
        for (const auto* extra : m.extra_bands()) {
            textures.push_back(imaging::load_texture(extra->path, meta_of(*extra)));
            sources.push_back(extra->path.filename().string());
        }
        for (std::size_t i = 0; i < textures.size(); ++i) require_atlas_size(textures[i], m, sources[i]);
        return 0;
    });

    const auto occupancy = geometry::rasterize_occupancy(loaded.mesh, m.atlas_width, m.atlas_height,
                                                         {.v_flip = m.v_flip}, workers);
    std::vector<cube::BandSource> band_sources;
    for (std::size_t i = 0; i < textures.size(); ++i) band_sources.push_back({&textures[i], sources[i]});
    const auto cube = staged("build-cube: assemble",
                             [&] { return cube::assemble(band_sources, geometry::occupancy_mask(occupancy.face_ids)); });

    geometry::FaceIdMap ids = occupancy.face_ids;
    imaging::Texture face_tex(ids.width, ids.height, 1);
    for (std::size_t i = 0; i < ids.size(); ++i)
        face_tex.data[i] = ids.data[i] == geometry::kNoFace ? -1.0 : static_cast<double>(ids.data[i]);

    json bands = json::array();
    for (const auto& b : cube.bands())
        bands.push_back({{"modality", imaging::to_string(b.modality)}, {"channel", b.channel}, {"source", b.source}});
    const json report = {
        {"width", cube.width()},
        {"height", cube.height()},
        {"bands", std::move(bands)},
        {"valid_texels", cube.valid_count()},
        {"mesh",
         {{"faces", loaded.mesh.face_count()},
          {"vertices", loaded.mesh.vertices.size()},
          {"degenerate_uv_faces", occupancy.degenerate_faces},
          {"dropped_faces", loaded.report.dropped_degenerate_faces},
          {"clamped_uv_components", loaded.report.clamped_uv_components},
          {"fan_triangulated_polygons", loaded.report.fan_triangulated_polygons}}},
    };

    OutputLock lock(out);
    RunDir run(out, kCubeStage);
    cube::save_cube(cube, run.path());
    imaging::save_texture(face_tex, run.path() / files::kFaceIds);
    imaging::write_file(run.path() / files::kCubeReport, to_text(report));
    imaging::write_file(run.path() / files::kProvenance,
                        provenance_text(m, kCubeStage, workers, {{"mesh", m.mesh}, {"calibrated", calibrated}}));
    return run.commit();
}

fs::path cmd_classify(const Manifest& m, const ClassifyReference& ref, const ClassifyParams& params_in,
                      const CommandOptions& options) {
    const unsigned workers = resolve_workers(options.workers);
    const fs::path out = output_dir_for(m, options);
    check_inputs_exist(m);
    const Workspace ws = open_workspace(m, out);
    ClassifyParams params = params_in;
    params.workers = workers;

    std::vector<std::pair<std::string, std::string>> outputs;  // file name -> bytes
    std::vector<std::pair<std::string, fs::path>> inputs = {{"cube", ws.cube_run}};

    if (const auto* single = std::get_if<Reference>(&ref)) {
        const SingleResult r = staged("classify", [&] { return classify_single(ws, *single, params); });
        outputs.emplace_back(files::kSam, imaging::encode_pfm(imaging::grid_to_texture(r.sam)));
        outputs.emplace_back(files::kRegion, imaging::encode_pfm(imaging::grid_to_texture(r.region)));
        outputs.emplace_back(files::kOverlay, overlay_png(classify::make_overlay(r.region, classify::kMagenta)));
        outputs.emplace_back(files::kFaces, faces_text(r.faces));
        outputs.emplace_back(files::kStats, to_text(describe(r, params)));
    } else {
        const auto& file = std::get<ReferenceFile>(ref);
        const auto refs = staged("classify: reference file", [&] {
            return parse_reference_file(imaging::read_file(file.path), ws.cube.band_count(), file.path.string());
        });
        if (!(params.theta_max >= 0.0)) throw ValidationError("classify: theta_max must be non-negative");
        if (!(params.min_face_fraction >= 0.0 && params.min_face_fraction <= 1.0))
            throw ValidationError("classify: min_face_fraction must lie in [0, 1]");
        inputs.emplace_back("references", file.path);
        const auto labels =
            staged("classify", [&] { return classify::classify_multi(ws.cube, refs, params.theta_max, workers); });

        classify::Overlay overlay(labels.width, labels.height, classify::Rgba{});
        json per_label = json::array();
        std::string faces;
        std::size_t unclassified = 0;
        for (std::size_t j = 0; j < refs.size(); ++j) {
            const auto map = classify::sam_map(ws.cube, refs[j], workers);
            RegionMask mask(labels.width, labels.height, 0);
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (labels.data[i] != static_cast<std::int32_t>(j)) continue;
                mask.data[i] = 1;
                overlay.data[i] = kPalette[j % kPalette.size()];
            }
            const auto stats = classify::region_stats(map, mask);
            const auto label_faces = geometry::mask_to_faces(mask, ws.face_ids, params.min_face_fraction);
            for (const auto f : label_faces) faces += refs[j].label + " " + std::to_string(f) + "\n";
            per_label.push_back({{"label", refs[j].label},
                                 {"index", j},
                                 {"values", refs[j].values},
                                 {"count", stats.count},
                                 {"min_angle", stats.min_angle ? json(*stats.min_angle) : json(nullptr)},
                                 {"median_angle", stats.median_angle ? json(*stats.median_angle) : json(nullptr)},
                                 {"face_count", label_faces.size()}});
        }
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels.data[i] == classify::kUnclassified && ws.cube.valid_mask().data[i]) ++unclassified;

        outputs.emplace_back(files::kLabels, imaging::encode_pfm(imaging::grid_to_texture(labels)));
        outputs.emplace_back(files::kOverlay, overlay_png(overlay));
        outputs.emplace_back(files::kFaces, faces);
        outputs.emplace_back(files::kStats, to_text({{"references", std::move(per_label)},
                                                     {"unclassified_valid_texels", unclassified},
                                                     {"theta_max", params.theta_max},
                                                     {"min_face_fraction", params.min_face_fraction}}));
    }

    OutputLock lock(out);
    RunDir run(out, kClassifyStage);
    for (const auto& [name, bytes] : outputs) imaging::write_file(run.path() / name, bytes);
    imaging::write_file(run.path() / files::kProvenance, provenance_text(m, kClassifyStage, workers, inputs));
    return run.commit();
}

} // namespace specmap::pipeline
