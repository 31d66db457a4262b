#include "specmap/pipeline/workspace.hpp"

#include <charconv>
#include <cmath>

#include "specmap/geometry/pick.hpp"
#include "specmap/imaging/grid_io.hpp"
#include "specmap/imaging/image_io.hpp"
#include "specmap/pipeline/commands.hpp"
#include "specmap/pipeline/report.hpp"
#include "specmap/pipeline/runs.hpp"

namespace specmap::pipeline {

fs::path require_cube(const fs::path& output_dir) {
    const fs::path run = latest_run(output_dir, kCubeStage, "run build-cube first");
    if (!fs::is_regular_file(run / cube::kDescriptorName))
        throw ValidationError("cube run " + run.string() + " has no descriptor; run build-cube first");
    return run;
}

Workspace open_workspace(const Manifest& manifest, const fs::path& output_dir) {
    Workspace ws;
    ws.manifest = manifest;
    ws.output_dir = output_dir;
    ws.cube_run = require_cube(output_dir);
    ws.convention.v_flip = manifest.v_flip;
    ws.mesh_bytes = imaging::read_file(manifest.mesh);
    ws.mesh = geometry::parse_obj(ws.mesh_bytes).mesh;
    ws.cube = cube::load_cube(ws.cube_run / cube::kDescriptorName);

    const auto ids = imaging::load_texture(ws.cube_run / files::kFaceIds);
    if (ids.channels != 1 || ids.width != ws.cube.width() || ids.height != ws.cube.height())
        throw ValidationError("face-id map does not match the cube; rerun build-cube");
    ws.face_ids = geometry::FaceIdMap(ids.width, ids.height, geometry::kNoFace);
    for (std::size_t i = 0; i < ws.face_ids.size(); ++i) {
        const double v = ids.data[i];
        if (v < 0.0) continue;
        if (v >= static_cast<double>(ws.mesh.face_count()) || v != std::floor(v))
            throw ValidationError("face-id map refers to faces the mesh does not have; rerun build-cube");
        ws.face_ids.data[i] = static_cast<std::uint32_t>(v);
    }
    return ws;
}

ClassifyParams params_from(const Manifest& m) {
    ClassifyParams p;
    p.theta_max = m.theta_max;
    p.radius = m.radius;
    p.connected = m.connected;
    p.min_face_fraction = m.min_face_fraction;
    return p;
}

SingleResult classify_single(const Workspace& ws, const Reference& ref, const ClassifyParams& params) {
    if (!(params.theta_max >= 0.0) || !std::isfinite(params.theta_max))
        throw ValidationError("theta_max must be a non-negative number");
    if (params.radius < 0) throw ValidationError("radius must be non-negative");
    if (!(params.min_face_fraction >= 0.0 && params.min_face_fraction <= 1.0))
        throw ValidationError("min_face_fraction must lie in [0, 1]");

    const std::int32_t w = ws.cube.width(), h = ws.cube.height();
    SingleResult r;
    switch (ref.kind) {
    case Reference::Kind::Uv:
        if (!(ref.uv.u >= 0.0 && ref.uv.u <= 1.0 && ref.uv.v >= 0.0 && ref.uv.v <= 1.0))
            throw ValidationError("uv reference must lie in [0, 1] x [0, 1]");
        r.picked.uv = ref.uv;
        r.picked.texel = geometry::uv_to_texel(ref.uv, w, h, ws.convention);
        break;
    case Reference::Kind::Texel:
        if (!ws.cube.in_bounds(ref.texel)) {
            throw ValidationError("texel (" + std::to_string(ref.texel.col) + "," + std::to_string(ref.texel.row) +
                                  ") is outside the " + std::to_string(w) + "x" + std::to_string(h) + " atlas");
        }
        r.picked.texel = ref.texel;
        r.picked.uv = geometry::texel_center_uv(ref.texel, w, h, ws.convention);
        break;
    case Reference::Kind::Ray: {
        const auto hit = geometry::pick(ws.mesh, ref.origin, ref.direction, w, h, ws.convention);
        if (!hit) throw NoSurfaceHit();
        r.picked.texel = hit->texel;
        r.picked.uv = hit->uv;
        r.picked.face_id = hit->face_id;
        r.picked.point = hit->point;
        break;
    }
    }
    if (!r.picked.face_id && ws.face_ids[r.picked.texel] != geometry::kNoFace)
        r.picked.face_id = ws.face_ids[r.picked.texel];

    r.reference = classify::reference_from_texel(ws.cube, r.picked.texel, params.radius);
    r.sam = classify::sam_map(ws.cube, r.reference, params.workers);
    r.region = classify::threshold_region(r.sam, params.theta_max);
    if (params.connected) r.region = classify::keep_connected(r.region, r.picked.texel);
    r.stats = classify::region_stats(r.sam, r.region);
    r.faces = geometry::mask_to_faces(r.region, ws.face_ids, params.min_face_fraction);
    return r;
}

std::vector<classify::ReferenceSpectrum> parse_reference_file(std::string_view text, std::size_t bands,
                                                              const std::string& origin) {
    std::vector<classify::ReferenceSpectrum> refs;
    std::size_t line_no = 0, pos = 0;
    while (pos < text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        std::vector<std::string_view> tokens;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            const std::size_t start = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i > start) tokens.push_back(line.substr(start, i - start));
        }
        if (tokens.empty()) continue;
        const std::string where = origin + ", line " + std::to_string(line_no) + ": ";
        if (tokens.size() != bands + 1) {
            throw ValidationError(where + "expected a label and " + std::to_string(bands) + " values, got " +
                                  std::to_string(tokens.size() - 1) + " values");
        }
        classify::ReferenceSpectrum ref{std::string(tokens[0]), {}};
        for (std::size_t k = 1; k < tokens.size(); ++k) {
            double v = 0.0;
            const auto [p, ec] = std::from_chars(tokens[k].data(), tokens[k].data() + tokens[k].size(), v);
            if (ec != std::errc{} || p != tokens[k].data() + tokens[k].size() || !std::isfinite(v))
                throw ValidationError(where + "bad number '" + std::string(tokens[k]) + "'");
            ref.values.push_back(v);
        }
        for (const auto& other : refs)
            if (other.label == ref.label) throw ValidationError(where + "duplicate label '" + ref.label + "'");
        refs.push_back(std::move(ref));
    }
    if (refs.empty()) throw ValidationError(origin + ": no reference spectra");
    return refs;
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace

nlohmann::json describe(const SingleResult& result, const ClassifyParams& params) {
    nlohmann::json picked = {
        {"texel", {result.picked.texel.col, result.picked.texel.row}},
        {"uv", {result.picked.uv.u, result.picked.uv.v}},
        {"face_id", result.picked.face_id ? nlohmann::json(*result.picked.face_id) : nlohmann::json(nullptr)},
        {"point", result.picked.point ? nlohmann::json{result.picked.point->x, result.picked.point->y,
                                                       result.picked.point->z}
                                      : nlohmann::json(nullptr)},
    };
    return {
        {"stats",
         {{"count", result.stats.count},
          {"min_angle", optional_number(result.stats.min_angle)},
          {"median_angle", optional_number(result.stats.median_angle)}}},
        {"picked", std::move(picked)},
        {"reference", {{"label", result.reference.label}, {"values", result.reference.values}}},
        {"theta_max", params.theta_max},
        {"radius", params.radius},
        {"connected", params.connected},
        {"min_face_fraction", params.min_face_fraction},
        {"face_count", result.faces.size()},
    };
}

std::string to_text(const nlohmann::json& j) {
    return j.dump(2) + "\n";
}

} // namespace specmap::pipeline
