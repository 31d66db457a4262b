#include "specmap/pipeline/fixture.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "specmap/common/error.hpp"
#include "specmap/common/keyvalue.hpp"
#include "specmap/geometry/atlas.hpp"
#include "specmap/geometry/mesh.hpp"
#include "specmap/geometry/pick.hpp"
#include "specmap/imaging/image_io.hpp"
#include "specmap/pipeline/manifest.hpp"

namespace specmap::pipeline {
namespace {

constexpr double kRadius = 0.3;
constexpr double kHeight = 0.6;
constexpr int kRows = 5;
constexpr int kChart1Segments = 25;  // 250 triangles
constexpr int kChart2Segments = 24;  // 240 triangles
constexpr int kPlateSegments = 5;    // 10 triangles
constexpr std::uint32_t kPlateFirstFace = 2 * kRows * (kChart1Segments + kChart2Segments);

constexpr std::array<double, 3> kIllumination = {0.8, 0.7, 0.6};
constexpr std::array<double, 3> kStray = {0.02, 0.015, 0.01};
constexpr double kNominal = 0.99;
constexpr double kNoise = 0.01;
constexpr double kMaterialAngle = 0.5;

constexpr imaging::PatchRect kPatch = {100, 940, 109, 949};

struct Disc {
    double u, v, r;
};
constexpr std::array<Disc, 3> kDiscs = {{{0.30, 0.76, 0.10}, {0.72, 0.80, 0.07}, {0.50, 0.33, 0.09}}};

using Spectrum = std::array<double, 6>;

Spectrum normalized(Spectrum s) {
    double n = 0.0;
    for (double x : s) n += x * x;
    n = std::sqrt(n);
    for (double& x : s) x /= n;
    return s;
}

/// B = cos(t) A + sin(t) W with W the part of `seed` orthogonal to A, so the
/// angle between A and B is exactly t.
Spectrum rotate_away(const Spectrum& a, Spectrum w, double t) {
    double proj = 0.0;
    for (std::size_t k = 0; k < 6; ++k) proj += w[k] * a[k];
    for (std::size_t k = 0; k < 6; ++k) w[k] -= proj * a[k];
    w = normalized(w);
    Spectrum b{};
    for (std::size_t k = 0; k < 6; ++k) b[k] = std::cos(t) * a[k] + std::sin(t) * w[k];
    return b;
}

class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : gen_(seed) {}
    double operator()() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

/// Strip of quads between two uv rectangles corners, mapped to 3D by `place`.
template <class Place>
void add_grid(geometry::Mesh& mesh, int cols, int rows, UV uv0, UV uv1, Place place) {
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (int j = 0; j <= rows; ++j)
        for (int i = 0; i <= cols; ++i) mesh.vertices.push_back(place(static_cast<double>(i) / cols, static_cast<double>(j) / rows));
    auto uv_at = [&](int i, int j) {
        return UV{uv0.u + (uv1.u - uv0.u) * i / cols, uv0.v + (uv1.v - uv0.v) * j / rows};
    };
    auto vid = [&](int i, int j) { return base + static_cast<std::uint32_t>(j * (cols + 1) + i); };
    for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < cols; ++i) {
            mesh.faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            mesh.uv_corners.push_back({uv_at(i, j), uv_at(i + 1, j), uv_at(i + 1, j + 1)});
            mesh.faces.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
            mesh.uv_corners.push_back({uv_at(i, j), uv_at(i + 1, j + 1), uv_at(i, j + 1)});
        }
    }
}

geometry::Mesh build_mesh() {
    geometry::Mesh mesh;
    auto cylinder = [](double a0, double a1) {
        return [=](double s, double t) {
            const double a = a0 + (a1 - a0) * s;
            return Vec3{kRadius * std::cos(a), kRadius * std::sin(a), kHeight * t};
        };
    };
    add_grid(mesh, kChart1Segments, kRows, {0.03, 0.55}, {0.97, 0.97}, cylinder(0.0, std::numbers::pi));
    add_grid(mesh, kChart2Segments, kRows, {0.03, 0.15}, {0.97, 0.50}, cylinder(std::numbers::pi, 2 * std::numbers::pi));
    add_grid(mesh, kPlateSegments, 1, {0.03, 0.02}, {0.23, 0.12},
             [](double s, double t) { return Vec3{0.4 + 0.2 * s, 0.1 * t, kHeight}; });
    return mesh;
}

double shading(UV uv) {
    return 0.55 + 0.35 * (0.5 + 0.5 * std::sin(6.1 * uv.u + 2.3 * uv.v));
}

bool in_material_a(UV uv) {
    for (const auto& d : kDiscs) {
        const double du = uv.u - d.u, dv = uv.v - d.v;
        if (du * du + dv * dv <= d.r * d.r) return true;
    }
    return false;
}

kv::Value doubles(std::initializer_list<double> xs) {
    std::vector<kv::Value> items;
    for (double x : xs) items.push_back(kv::Value::of(x));
    return kv::Value::array(std::move(items));
}

template <std::size_t N>
kv::Value doubles(const std::array<double, N>& xs) {
    std::vector<kv::Value> items;
    for (double x : xs) items.push_back(kv::Value::of(x));
    return kv::Value::array(std::move(items));
}

std::string readme(const FixtureInfo& info) {
    std::ostringstream os;
    os.precision(17);
    os << "# Synthetic two-material fixture\n\n"
       << "Generated by `specmap make-fixture`. A 500-face mesh (half cylinder charts of 250 and 240\n"
          "triangles plus a 10-triangle flat reflectance target) baked into a 1024x1024 atlas.\n\n"
       << "## Acquisition model\n\n"
       << "Per texel the true reflectance/fluorescence spectrum is T = (T_vis, T_uvf), a shading factor\n"
          "times a unit material spectrum times 1 +/- 1% noise per channel. The acquired textures are\n\n"
          "    V_acq = T_vis * L              with L = (0.8, 0.7, 0.6)\n"
          "    U_acq = T_uvf + S * T_vis      with S = (0.02, 0.015, 0.01)\n\n"
          "The target reads V = 0.99 * L and U = S over its whole surface.\n\n"
       << "## Hand-checked calibration\n\n"
          "    R_target = median of the VIS patch = 0.99 * L = (0.792, 0.693, 0.594)\n"
          "    R_norm   = R_target / 0.99          = (0.8, 0.7, 0.6) = L\n"
          "    S_target = median of the UVF patch = S = (0.02, 0.015, 0.01)\n"
          "    V_calib  = V_acq / R_norm          = T_vis\n"
          "    U_calib  = U_acq - S_target*V_calib = T_uvf\n\n"
          "Textures are stored as float32, so the calibration report matches these values to about 1e-7.\n\n"
       << "## Ground truth\n\n"
       << "`ground_truth.pfm`: -1 background, 0 material A, 1 material B, 2 target.\n"
       << "Material A fills three uv discs; B covers the rest of the cylinder at exactly "
       << kMaterialAngle << " rad from A.\n\n"
       << "    valid texels      " << info.valid_texels << "\n"
       << "    material A texels " << info.material_a_texels << "\n"
       << "    material B texels " << info.material_b_texels << "\n"
       << "    target texels     " << info.target_texels << "\n\n"
       << "## Pick\n\n"
       << "Texel (" << info.pick_texel.col << ", " << info.pick_texel.row << ") at uv (" << info.pick_uv.u << ", "
       << info.pick_uv.v << ") on face " << info.pick_face << ", the centre of the largest A disc.\n"
       << "A ray from (" << info.ray_origin.x << ", " << info.ray_origin.y << ", " << info.ray_origin.z
       << ") along (" << info.ray_direction.x << ", " << info.ray_direction.y << ", " << info.ray_direction.z
       << ") hits the same face.\n\n"
       << "    specmap calibrate  --manifest project.toml\n"
       << "    specmap build-cube --manifest project.toml\n"
       << "    specmap classify   --manifest project.toml --texel " << info.pick_texel.col << " "
       << info.pick_texel.row << "\n";
    return os.str();
}

} // namespace

FixtureInfo make_fixture(const fs::path& dir, std::uint64_t seed) {
    fs::create_directories(dir);
    const std::int32_t W = kFixtureAtlas, H = kFixtureAtlas;

    FixtureInfo info;
    info.illumination = kIllumination;
    info.stray = kStray;
    info.material_a = normalized({0.55, 0.35, 0.20, 0.30, 0.45, 0.25});
    info.material_b = rotate_away(info.material_a, {0.10, 0.30, 0.60, 0.20, 0.10, 0.50}, kMaterialAngle);
    for (double x : info.material_b)
        if (x < 0.0) throw RuntimeError("fixture material B has a negative band");

    const geometry::Mesh mesh = build_mesh();
    const auto occupancy = geometry::rasterize_occupancy(mesh, W, H);

    imaging::Texture vis(W, H, 3, {imaging::Modality::VIS, {}});
    imaging::Texture uvf(W, H, 3, {imaging::Modality::UVF, {}});
    imaging::Texture truth(W, H, 1);
    Uniform rng(seed);
    for (std::int32_t row = 0; row < H; ++row) {
        for (std::int32_t col = 0; col < W; ++col) {
            const Texel t{col, row};
            const UV uv = geometry::texel_center_uv(t, W, H);
            const std::uint32_t face = occupancy.face_ids[t];
            // Noise is drawn for every texel so the stream does not depend on coverage.
            std::array<double, 6> noise{};
            for (double& n : noise) n = 1.0 + kNoise * (2.0 * rng() - 1.0);

            if (face != geometry::kNoFace && face >= kPlateFirstFace) {
                for (int k = 0; k < 3; ++k) {
                    vis.at(t, k) = kNominal * kIllumination[static_cast<std::size_t>(k)];
                    uvf.at(t, k) = kStray[static_cast<std::size_t>(k)];
                }
                truth.at(t, 0) = 2;
                ++info.target_texels;
                continue;
            }
            // Background texels get an A-like spectrum: only the occupancy
            // mask keeps them out of an A selection.
            const bool is_a = face == geometry::kNoFace || in_material_a(uv);
            const Spectrum& m = is_a ? info.material_a : info.material_b;
            const double s = shading(uv);
            for (std::size_t k = 0; k < 3; ++k) {
                const double t_vis = s * m[k] * noise[k];
                const double t_uvf = s * m[k + 3] * noise[k + 3];
                vis.at(t, static_cast<std::int32_t>(k)) = t_vis * kIllumination[k];
                uvf.at(t, static_cast<std::int32_t>(k)) = t_uvf + kStray[k] * t_vis;
            }
            if (face == geometry::kNoFace) {
                truth.at(t, 0) = -1;
            } else {
                truth.at(t, 0) = is_a ? 0 : 1;
                ++(is_a ? info.material_a_texels : info.material_b_texels);
            }
        }
    }
    info.valid_texels = info.material_a_texels + info.material_b_texels + info.target_texels;

    // Pick at the centre of the first disc, through the face that contains it.
    info.pick_uv = {kDiscs[0].u, kDiscs[0].v};
    bool found = false;
    for (std::uint32_t f = 0; f < kPlateFirstFace && !found; ++f) {
        const auto& c = mesh.uv_corners[f];
        const double d = (c[1].v - c[2].v) * (c[0].u - c[2].u) + (c[2].u - c[1].u) * (c[0].v - c[2].v);
        const double w0 = ((c[1].v - c[2].v) * (info.pick_uv.u - c[2].u) + (c[2].u - c[1].u) * (info.pick_uv.v - c[2].v)) / d;
        const double w1 = ((c[2].v - c[0].v) * (info.pick_uv.u - c[2].u) + (c[0].u - c[2].u) * (info.pick_uv.v - c[2].v)) / d;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        const Vec3 p = geometry::point_of(mesh, f, {w0, w1, w2});
        const double r = std::hypot(p.x, p.y);
        const Vec3 radial{p.x / r, p.y / r, 0.0};
        info.ray_origin = p + 0.5 * radial;
        info.ray_direction = -1.0 * radial;
        found = true;
    }
    if (!found) throw RuntimeError("fixture pick uv is not covered by the mesh");
    const auto hit = geometry::pick(mesh, info.ray_origin, info.ray_direction, W, H);
    if (!hit) throw RuntimeError("fixture pick ray misses the mesh");
    info.pick_face = hit->face_id;
    info.pick_texel = hit->texel;
    if (truth.at(info.pick_texel, 0) != 0) throw RuntimeError("fixture pick does not land on material A");

    // Files.
    info.manifest = dir / "project.toml";
    info.ground_truth = dir / "ground_truth.pfm";
    geometry::save_mesh(mesh, dir / "mesh.obj");
    imaging::save_texture(vis, dir / "vis_acquired.pfm");
    imaging::save_texture(uvf, dir / "uvf_acquired.pfm");
    imaging::save_texture(truth, info.ground_truth);

    Manifest m;
    m.file = info.manifest;
    m.name = "two-material fixture";
    m.output_dir = dir / "out";
    m.mesh = dir / "mesh.obj";
    m.atlas_width = W;
    m.atlas_height = H;
    m.textures.push_back({"vis", dir / "vis_acquired.pfm", imaging::Modality::VIS, TextureRole::Acquired, {}});
    m.textures.push_back({"uvf", dir / "uvf_acquired.pfm", imaging::Modality::UVF, TextureRole::Acquired, {}});
    m.nominal_reflectance = {kNominal, kNominal, kNominal};
    m.vis_patch = kPatch;
    m.uvf_patch = kPatch;
    m.provenance.name = "provenance";
    m.provenance.set("source", kv::Value::of("synthetic"));
    m.provenance.set("color_temperature_k", kv::Value::of(5000));
    m.provenance.set("seed", kv::Value::of(static_cast<std::int64_t>(seed & 0x7fffffffffffffffULL)));
    imaging::write_file(info.manifest, to_text(m));

    kv::Document doc;
    auto& pick = doc.section("pick");
    pick.set("uv", doubles({info.pick_uv.u, info.pick_uv.v}));
    pick.set("texel", kv::Value::array({kv::Value::of(info.pick_texel.col), kv::Value::of(info.pick_texel.row)}));
    pick.set("face", kv::Value::of(static_cast<std::int64_t>(info.pick_face)));
    pick.set("ray_origin", doubles({info.ray_origin.x, info.ray_origin.y, info.ray_origin.z}));
    pick.set("ray_direction", doubles({info.ray_direction.x, info.ray_direction.y, info.ray_direction.z}));
    auto& expected = doc.section("expected");
    expected.set("R_norm", doubles(kIllumination));
    expected.set("S_target", doubles(kStray));
    expected.set("material_a", doubles(info.material_a));
    expected.set("material_b", doubles(info.material_b));
    expected.set("valid_texels", kv::Value::of(static_cast<std::int64_t>(info.valid_texels)));
    expected.set("material_a_texels", kv::Value::of(static_cast<std::int64_t>(info.material_a_texels)));
    expected.set("material_b_texels", kv::Value::of(static_cast<std::int64_t>(info.material_b_texels)));
    expected.set("target_texels", kv::Value::of(static_cast<std::int64_t>(info.target_texels)));
    imaging::write_file(dir / "fixture.toml", kv::serialize(doc));
    imaging::write_file(dir / "README.md", readme(info));
    return info;
}

FixtureInfo read_fixture_info(const fs::path& dir) {
    const auto doc = kv::parse_file(dir / "fixture.toml");
    auto get = [&](const char* sec, const char* key) -> const kv::Value& {
        const auto* v = doc.get(sec, key);
        if (!v) throw ValidationError(std::string("fixture.toml: missing [") + sec + "] " + key);
        return *v;
    };
    auto vec = [&](const char* sec, const char* key) { return get(sec, key).as_doubles(key); };
    FixtureInfo info;
    info.manifest = dir / "project.toml";
    info.ground_truth = dir / "ground_truth.pfm";
    const auto uv = vec("pick", "uv");
    const auto texel = vec("pick", "texel");
    const auto o = vec("pick", "ray_origin");
    const auto d = vec("pick", "ray_direction");
    if (uv.size() != 2 || texel.size() != 2 || o.size() != 3 || d.size() != 3)
        throw ValidationError("fixture.toml: malformed [pick]");
    info.pick_uv = {uv[0], uv[1]};
    info.pick_texel = {static_cast<std::int32_t>(texel[0]), static_cast<std::int32_t>(texel[1])};
    info.pick_face = static_cast<std::uint32_t>(get("pick", "face").as_int("face"));
    info.ray_origin = {o[0], o[1], o[2]};
    info.ray_direction = {d[0], d[1], d[2]};
    auto copy = [&](const char* key, auto& out) {
        const auto v = vec("expected", key);
        if (v.size() != out.size()) throw ValidationError(std::string("fixture.toml: malformed ") + key);
        std::copy(v.begin(), v.end(), out.begin());
    };
    copy("R_norm", info.illumination);
    copy("S_target", info.stray);
    copy("material_a", info.material_a);
    copy("material_b", info.material_b);
    info.valid_texels = static_cast<std::size_t>(get("expected", "valid_texels").as_int("valid_texels"));
    info.material_a_texels = static_cast<std::size_t>(get("expected", "material_a_texels").as_int("a"));
    info.material_b_texels = static_cast<std::size_t>(get("expected", "material_b_texels").as_int("b"));
    info.target_texels = static_cast<std::size_t>(get("expected", "target_texels").as_int("t"));
    return info;
}

} // namespace specmap::pipeline
