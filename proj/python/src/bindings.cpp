#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "specmap/calibration/calibration.hpp"
#include "specmap/classify/sam.hpp"
#include "specmap/common/error.hpp"
#include "specmap/geometry/atlas.hpp"
#include "specmap/geometry/mesh.hpp"
#include "specmap/imaging/image_io.hpp"
#include "specmap/imaging/patch.hpp"
#include "specmap/pipeline/commands.hpp"
#include "specmap/pipeline/fixture.hpp"
#include "specmap/service/rle.hpp"

namespace py = pybind11;
using namespace specmap;

namespace {

using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U8 = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

void require_ndim(const py::array& a, py::ssize_t ndim, const char* what) {
    if (a.ndim() != ndim)
        throw ValidationError(std::string(what) + " must have " + std::to_string(ndim) + " dimensions");
}

imaging::Texture to_texture(const F64& a, imaging::Modality modality = imaging::Modality::OTHER) {
    if (a.ndim() != 2 && a.ndim() != 3) throw ValidationError("texture must be HxW or HxWxC");
    const auto h = static_cast<std::int32_t>(a.shape(0)), w = static_cast<std::int32_t>(a.shape(1));
    const auto c = a.ndim() == 3 ? static_cast<std::int32_t>(a.shape(2)) : 1;
    imaging::Texture t(w, h, c, {modality, {}});
    std::copy(a.data(), a.data() + a.size(), t.data.begin());
    return t;
}

F64 from_texture(const imaging::Texture& t) {
    F64 out({static_cast<py::ssize_t>(t.height), static_cast<py::ssize_t>(t.width), static_cast<py::ssize_t>(t.channels)});
    std::copy(t.data.begin(), t.data.end(), out.mutable_data());
    return out;
}

template <class T>
py::array_t<T> from_grid(const Grid<T>& g) {
    py::array_t<T> out({static_cast<py::ssize_t>(g.height), static_cast<py::ssize_t>(g.width)});
    std::copy(g.data.begin(), g.data.end(), out.mutable_data());
    return out;
}

RegionMask to_mask(const U8& a) {
    require_ndim(a, 2, "mask");
    RegionMask m(static_cast<std::int32_t>(a.shape(1)), static_cast<std::int32_t>(a.shape(0)));
    for (py::ssize_t i = 0; i < a.size(); ++i) m.data[static_cast<std::size_t>(i)] = a.data()[i] != 0;
    return m;
}

cube::SpectralCube to_cube(const F64& data, const U8& valid) {
    require_ndim(data, 3, "cube");
    const auto h = static_cast<std::int32_t>(data.shape(0)), w = static_cast<std::int32_t>(data.shape(1));
    const auto b = static_cast<std::size_t>(data.shape(2));
    RegionMask mask = to_mask(valid);
    if (mask.width != w || mask.height != h) throw ValidationError("valid mask shape differs from the cube");
    std::vector<double> values(data.data(), data.data() + data.size());
    std::vector<cube::BandDescriptor> bands(b);
    for (std::size_t k = 0; k < b; ++k) bands[k].channel = "b" + std::to_string(k);
    return cube::SpectralCube(w, h, std::move(bands), std::move(values), std::move(mask));
}

geometry::Mesh mesh_from_uvs(const F64& uvs) {
    require_ndim(uvs, 3, "uvs");
    if (uvs.shape(1) != 3 || uvs.shape(2) != 2) throw ValidationError("uvs must have shape (faces, 3, 2)");
    geometry::Mesh m;
    const double* p = uvs.data();
    for (py::ssize_t f = 0; f < uvs.shape(0); ++f) {
        const auto base = static_cast<std::uint32_t>(m.vertices.size());
        geometry::FaceUV uv;
        for (int k = 0; k < 3; ++k, p += 2) {
            uv[static_cast<std::size_t>(k)] = {p[0], p[1]};
            m.vertices.push_back({p[0], p[1], 0.0});
        }
        m.faces.push_back({base, base + 1, base + 2});
        m.uv_corners.push_back(uv);
    }
    return m;
}

pipeline::CommandOptions options(unsigned workers, std::optional<std::filesystem::path> out) {
    return {workers, std::move(out)};
}

} // namespace

PYBIND11_MODULE(_specmap, m) {
    m.doc() = "Spectral mapping on textured 3D models";
    m.attr("__version__") = SPECMAP_VERSION;
    m.attr("UNDEFINED_ANGLE") = classify::kUndefinedAngle;
    m.attr("UNCLASSIFIED") = classify::kUnclassified;
    m.attr("NO_FACE") = geometry::kNoFace;

    static py::exception<ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            py::set_error(validation_error, e.what());
        } catch (const RuntimeError& e) {
            py::set_error(PyExc_RuntimeError, e.what());
        }
    });

    // ---- classification ----
    m.def(
        "spectral_angle",
        [](const std::vector<double>& u, const std::vector<double>& v) { return classify::spectral_angle(u, v); },
        py::arg("u"), py::arg("v"), "Angle in radians, or None when either vector is zero.");
    m.def(
        "sam_map",
        [](const F64& cube, const U8& valid, const std::vector<double>& reference, unsigned workers) {
            const auto c = to_cube(cube, valid);
            classify::SamMap map;
            {
                py::gil_scoped_release release;
                map = classify::sam_map(c, {"reference", reference}, workers);
            }
            return from_grid(map);
        },
        py::arg("cube"), py::arg("valid"), py::arg("reference"), py::arg("workers") = 1,
        "Per-texel spectral angle; masked or zero texels are UNDEFINED_ANGLE.");
    m.def(
        "threshold_region", [](const F64& sam, double theta_max) {
            require_ndim(sam, 2, "angle map");
            classify::SamMap map(static_cast<std::int32_t>(sam.shape(1)), static_cast<std::int32_t>(sam.shape(0)));
            std::copy(sam.data(), sam.data() + sam.size(), map.data.begin());
            return from_grid(classify::threshold_region(map, theta_max));
        },
        py::arg("sam"), py::arg("theta_max"));
    m.def(
        "classify_multi",
        [](const F64& cube, const U8& valid, const std::vector<std::vector<double>>& references, double theta_max,
           unsigned workers) {
            const auto c = to_cube(cube, valid);
            std::vector<classify::ReferenceSpectrum> refs;
            for (std::size_t j = 0; j < references.size(); ++j) refs.push_back({std::to_string(j), references[j]});
            classify::LabelMap labels;
            {
                py::gil_scoped_release release;
                labels = classify::classify_multi(c, refs, theta_max, workers);
            }
            return from_grid(labels);
        },
        py::arg("cube"), py::arg("valid"), py::arg("references"), py::arg("theta_max"), py::arg("workers") = 1,
        "Index of the nearest reference within theta_max, else UNCLASSIFIED.");

    // ---- calibration ----
    m.def(
        "patch_median",
        [](const F64& texture, std::array<std::int32_t, 4> rect) {
            return imaging::patch_stats(to_texture(texture), {rect[0], rect[1], rect[2], rect[3]}).median;
        },
        py::arg("texture"), py::arg("rect"), "Per-channel median over [col0, row0, col1, row1] inclusive.");
    m.def(
        "calibrate_vis",
        [](const F64& acquired, std::array<std::int32_t, 4> rect, std::vector<double> nominal) {
            const auto tex = to_texture(acquired, imaging::Modality::VIS);
            const auto norm = calibration::compute_norm(
                imaging::patch_stats(tex, {rect[0], rect[1], rect[2], rect[3]}), nominal);
            return py::make_tuple(from_texture(calibration::calibrate_vis(tex, norm)), norm.factor);
        },
        py::arg("acquired"), py::arg("patch"), py::arg("nominal") = std::vector<double>{calibration::kSpectralonNominal},
        "Returns (calibrated, R_norm).");
    m.def(
        "calibrate_uvf",
        [](const F64& fluorescence, std::vector<double> stray, const F64& vis_calibrated) {
            const auto r = calibration::calibrate_uvf(to_texture(fluorescence, imaging::Modality::UVF), {stray},
                                                      to_texture(vis_calibrated, imaging::Modality::VIS));
            return py::make_tuple(from_texture(r.texture), r.clamped);
        },
        py::arg("fluorescence"), py::arg("stray"), py::arg("vis_calibrated"), "Returns (calibrated, clamped_count).");

    // ---- images and meshes ----
    m.def("read_texture", [](const std::filesystem::path& p) { return from_texture(imaging::load_texture(p)); },
          py::arg("path"), "PFM or PNG as an HxWxC float64 array, row 0 on top.");
    m.def("write_pfm", [](const std::filesystem::path& p, const F64& a) { imaging::save_texture(to_texture(a), p); },
          py::arg("path"), py::arg("texture"));
    m.def(
        "load_mesh",
        [](const std::filesystem::path& p) {
            const auto mesh = geometry::load_mesh(p).mesh;
            py::array_t<double> v({static_cast<py::ssize_t>(mesh.vertices.size()), py::ssize_t{3}});
            py::array_t<std::uint32_t> f({static_cast<py::ssize_t>(mesh.faces.size()), py::ssize_t{3}});
            py::array_t<double> uv({static_cast<py::ssize_t>(mesh.faces.size()), py::ssize_t{3}, py::ssize_t{2}});
            auto* vp = v.mutable_data();
            for (const auto& x : mesh.vertices) *vp++ = x.x, *vp++ = x.y, *vp++ = x.z;
            auto* fp = f.mutable_data();
            for (const auto& x : mesh.faces) *fp++ = x[0], *fp++ = x[1], *fp++ = x[2];
            auto* up = uv.mutable_data();
            for (const auto& c : mesh.uv_corners)
                for (const auto& x : c) *up++ = x.u, *up++ = x.v;
            return py::dict(py::arg("vertices") = v, py::arg("faces") = f, py::arg("uvs") = uv);
        },
        py::arg("path"));
    m.def(
        "rasterize_occupancy",
        [](const F64& uvs, std::int32_t width, std::int32_t height, bool v_flip) {
            const auto mesh = mesh_from_uvs(uvs);
            return from_grid(geometry::rasterize_occupancy(mesh, width, height, {v_flip}).face_ids);
        },
        py::arg("uvs"), py::arg("width"), py::arg("height"), py::arg("v_flip") = false,
        "Lowest owning face per texel center, NO_FACE where uncovered.");
    m.def(
        "uv_to_texel",
        [](double u, double v, std::int32_t w, std::int32_t h, bool v_flip) {
            const auto t = geometry::uv_to_texel({u, v}, w, h, {v_flip});
            return std::make_pair(t.col, t.row);
        },
        py::arg("u"), py::arg("v"), py::arg("width"), py::arg("height"), py::arg("v_flip") = false);

    // ---- run-length masks ----
    m.def("encode_rle_rows", [](const U8& mask) { return service::encode_rle_rows(to_mask(mask)); }, py::arg("mask"));
    m.def(
        "decode_rle_rows",
        [](const service::RleRows& rows, std::int32_t w, std::int32_t h) {
            return from_grid(service::decode_rle_rows(rows, w, h));
        },
        py::arg("rows"), py::arg("width"), py::arg("height"));

    // ---- pipeline ----
    m.def(
        "make_fixture",
        [](const std::filesystem::path& dir, std::uint64_t seed) {
            const auto i = pipeline::make_fixture(dir, seed);
            return py::dict(py::arg("manifest") = i.manifest, py::arg("ground_truth") = i.ground_truth,
                            py::arg("pick_uv") = std::make_pair(i.pick_uv.u, i.pick_uv.v),
                            py::arg("pick_texel") = std::make_pair(i.pick_texel.col, i.pick_texel.row),
                            py::arg("material_a") = i.material_a, py::arg("material_b") = i.material_b,
                            py::arg("material_a_texels") = i.material_a_texels,
                            py::arg("valid_texels") = i.valid_texels);
        },
        py::arg("directory"), py::arg("seed") = 20240501);
    m.def(
        "calibrate",
        [](const std::filesystem::path& manifest, unsigned workers, std::optional<std::filesystem::path> out) {
            return pipeline::cmd_calibrate(pipeline::load_manifest(manifest), options(workers, std::move(out)));
        },
        py::arg("manifest"), py::arg("workers") = 0, py::arg("out") = py::none(), "Returns the run directory.");
    m.def(
        "build_cube",
        [](const std::filesystem::path& manifest, unsigned workers, std::optional<std::filesystem::path> out) {
            return pipeline::cmd_build_cube(pipeline::load_manifest(manifest), options(workers, std::move(out)));
        },
        py::arg("manifest"), py::arg("workers") = 0, py::arg("out") = py::none(), "Returns the run directory.");
    m.def(
        "classify",
        [](const std::filesystem::path& manifest, std::optional<std::pair<double, double>> uv,
           std::optional<std::pair<std::int32_t, std::int32_t>> texel, std::optional<std::filesystem::path> refs,
           std::optional<double> theta_max, std::optional<std::int32_t> radius, unsigned workers,
           std::optional<std::filesystem::path> out) {
            const auto mf = pipeline::load_manifest(manifest);
            if (static_cast<int>(uv.has_value()) + static_cast<int>(texel.has_value()) +
                    static_cast<int>(refs.has_value()) != 1)
                throw ValidationError("classify needs exactly one of uv, texel or refs");
            auto params = pipeline::params_from(mf);
            if (theta_max) params.theta_max = *theta_max;
            if (radius) params.radius = *radius;
            params.workers = workers;
            pipeline::ClassifyReference ref;
            if (uv) ref = pipeline::Reference::at_uv({uv->first, uv->second});
            else if (texel) ref = pipeline::Reference::at_texel({texel->first, texel->second});
            else ref = pipeline::ReferenceFile{*refs};
            return pipeline::cmd_classify(mf, ref, params, options(workers, std::move(out)));
        },
        py::arg("manifest"), py::kw_only(), py::arg("uv") = py::none(), py::arg("texel") = py::none(),
        py::arg("refs") = py::none(), py::arg("theta_max") = py::none(), py::arg("radius") = py::none(),
        py::arg("workers") = 0, py::arg("out") = py::none(), "Returns the run directory.");
}
