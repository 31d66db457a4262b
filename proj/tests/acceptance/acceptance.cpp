// Acceptance checks: one PASS/FAIL line per criterion; exit status 0 only when all pass.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "specmap/calibration/calibration.hpp"
#include "specmap/classify/sam.hpp"
#include "specmap/geometry/atlas.hpp"
#include "specmap/imaging/image_io.hpp"
#include "specmap/imaging/patch.hpp"
#include "specmap/pipeline/commands.hpp"
#include "specmap/pipeline/fixture.hpp"
#include "specmap/pipeline/runs.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace specmap;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail << "FAILED: " << what << "; ";
        pass = pass && ok;
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

cube::SpectralCube random_cube(oracle::Rng& rng, int w, int h, std::size_t bands) {
    std::vector<double> data(static_cast<std::size_t>(w) * h * bands);
    for (double& x : data) x = rng.uniform();
    RegionMask valid(w, h, 1);
    for (auto& v : valid.data) v = rng.below(8) != 0;
    for (std::size_t i = 0; i < valid.size(); i += 41)
        std::fill_n(data.begin() + static_cast<std::ptrdiff_t>(i * bands), bands, 0.0);
    std::vector<cube::BandDescriptor> desc(bands);
    for (std::size_t k = 0; k < bands; ++k) desc[k].channel = "b" + std::to_string(k);
    return cube::SpectralCube(w, h, std::move(desc), std::move(data), std::move(valid));
}

std::vector<double> random_vector(oracle::Rng& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

// ---- 1 ---------------------------------------------------------------------

void workflow(Outcome& o) {
    testing::TempDir dir("specmap-accept");
    const auto info = pipeline::make_fixture(dir.path());
    const auto m = pipeline::load_manifest(info.manifest);

    const auto t0 = Clock::now();
    pipeline::cmd_calibrate(m, {});
    pipeline::cmd_build_cube(m, {});
    auto params = pipeline::params_from(m);
    const auto run = pipeline::cmd_classify(m, pipeline::Reference::at_uv(info.pick_uv), params, {});
    const double elapsed = seconds_since(t0);

    o.require(params.theta_max == 0.15, "manifest threshold is 0.15 rad");

    // Ground truth recomputed here from the fixture geometry: brute-force
    // texel ownership, plate faces from 490 on, material A inside three discs.
    const auto mesh = geometry::load_mesh(m.mesh).mesh;
    const int n = pipeline::kFixtureAtlas;
    const auto owner = oracle::occupancy_by_bbox(mesh, n, n);
    const auto region = imaging::load_texture(run / pipeline::files::kRegion);
    std::size_t fp = 0, fn = 0, a_count = 0, b_count = 0;
    for (int row = 0; row < n; ++row)
        for (int col = 0; col < n; ++col) {
            const std::size_t i = static_cast<std::size_t>(row) * n + col;
            const double u = (col + 0.5) / n, v = 1.0 - (row + 0.5) / n;
            bool is_a = false;
            if (owner[i] >= 0 && owner[i] < 490)
                for (auto [cu, cv, r] : {std::array{0.30, 0.76, 0.10}, std::array{0.72, 0.80, 0.07},
                                         std::array{0.50, 0.33, 0.09}})
                    is_a = is_a || (u - cu) * (u - cu) + (v - cv) * (v - cv) <= r * r;
            a_count += is_a;
            b_count += owner[i] >= 0 && owner[i] < 490 && !is_a;
            const bool sel = region.data[i] != 0.0;
            fp += sel && !is_a;
            fn += !sel && is_a;
        }
    o.require(a_count > 0 && b_count > 0, "fixture has both materials");
    o.require(fp == 0, "no false positives");
    o.require(fn == 0, "no false negatives");
    o.require(elapsed < 2.0, "end-to-end under 2 s");
    o.detail << "material A " << a_count << " texels, B " << b_count << "; false positives " << fp
             << ", false negatives " << fn << "; calibrate+build-cube+classify " << elapsed << " s";
}

// ---- 2 ---------------------------------------------------------------------

void sam_properties(Outcome& o) {
    oracle::Rng rng(2);
    double max_asym = 0.0, max_scale = 0.0;
    bool in_range = true;
    for (int i = 0; i < 10000; ++i) {
        const auto u = random_vector(rng, 6, -1.0, 1.0);
        const auto v = random_vector(rng, 6, -1.0, 1.0);
        const double a = *classify::spectral_angle(u, v);
        const double b = *classify::spectral_angle(v, u);
        max_asym = std::max(max_asym, std::abs(a - b));
        in_range = in_range && a >= 0.0 && a <= std::numbers::pi;
        const double s = std::exp(rng.uniform(-7.0, 7.0)), t = std::exp(rng.uniform(-7.0, 7.0));
        std::vector<double> su(u), tv(v);
        for (double& x : su) x *= s;
        for (double& x : tv) x *= t;
        max_scale = std::max(max_scale, std::abs(*classify::spectral_angle(su, tv) - a));
    }
    const std::vector<double> zero(6, 0.0), e1{1, 0, 0, 0, 0, 0}, e2{0, 1, 0, 0, 0, 0}, e12{1, 1, 0, 0, 0, 0};
    const bool undefined = !classify::spectral_angle(zero, e1) && !classify::spectral_angle(e1, zero) &&
                           !classify::spectral_angle(zero, zero);
    const double a0 = *classify::spectral_angle(e12, e12);
    const double a90 = *classify::spectral_angle(e1, e2);
    const double a45 = *classify::spectral_angle(e1, e12);
    const double anchor_err = std::max({std::abs(a0), std::abs(a90 - std::numbers::pi / 2),
                                        std::abs(a45 - std::numbers::pi / 4)});
    o.require(max_asym <= 1e-12, "symmetry within 1e-12");
    o.require(max_scale <= 1e-9, "scale invariance within 1e-9");
    o.require(in_range, "range [0, pi]");
    o.require(undefined, "zero vector is undefined");
    o.require(anchor_err <= 1e-12, "anchors 0, pi/4, pi/2 within 1e-12");
    o.detail << "10000 pairs: max asymmetry " << max_asym << ", max scale drift " << max_scale
             << "; anchor error " << anchor_err;
}

// ---- 3 ---------------------------------------------------------------------

void calibration_consistency(Outcome& o) {
    oracle::Rng rng(3);
    double worst_rel = 0.0, worst_ulps = 0.0;
    std::size_t nonzero = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 40 + static_cast<int>(rng.below(40)), h = 30 + static_cast<int>(rng.below(40));
        imaging::Texture vis(w, h, 3, {imaging::Modality::VIS, {}});
        for (double& x : vis.data) x = rng.uniform(0.01, 1.0);
        const imaging::PatchRect patch{3, 4, 3 + static_cast<int>(rng.below(10)), 4 + static_cast<int>(rng.below(10))};
        const auto norm = calibration::compute_norm(imaging::patch_stats(vis, patch), {0.99});
        const auto cal = calibration::calibrate_vis(vis, norm, 1 + trial % 3);

        const auto stats = imaging::patch_stats(cal, patch);
        for (int c = 0; c < 3; ++c) {
            // Median of the calibrated patch, taken independently.
            std::vector<double> values;
            for (int row = patch.row0; row <= patch.row1; ++row)
                for (int col = patch.col0; col <= patch.col1; ++col) values.push_back(cal.at({col, row}, c));
            const double med = oracle::sorted_median(values);
            worst_rel = std::max(worst_rel, std::abs(med - 0.99) / 0.99);
            worst_rel = std::max(worst_rel, std::abs(stats.median[static_cast<std::size_t>(c)] - 0.99) / 0.99);
        }
        for (std::size_t i = 0; i < vis.data.size(); ++i) {
            const double back = cal.data[i] * norm.factor[i % 3];
            worst_ulps = std::max(worst_ulps, std::abs(back - vis.data[i]) / (std::nextafter(vis.data[i], 2.0) - vis.data[i]));
        }

        // UVF that is pure stray light: exactly zero after calibration.
        calibration::StrayLight stray{random_vector(rng, 3, 0.0, 0.2)};
        imaging::Texture uvf(w, h, 3, {imaging::Modality::UVF, {}});
        for (std::size_t i = 0; i < uvf.data.size(); ++i) uvf.data[i] = stray.level[i % 3] * cal.data[i];
        const auto res = calibration::calibrate_uvf(uvf, stray, cal, 1 + trial % 3);
        for (double x : res.texture.data) nonzero += x != 0.0;
    }
    o.require(worst_rel <= 1e-9, "patch median equals 0.99 within 1e-9 relative");
    o.require(worst_ulps <= 1.0, "round trip within 1 ulp");
    o.require(nonzero == 0, "UVF zero case exact");
    o.detail << "20 textures: worst median error " << worst_rel << " relative, worst round trip " << worst_ulps
             << " ulp, non-zero UVF samples " << nonzero;
}

// ---- 4 ---------------------------------------------------------------------

void rasterization(Outcome& o) {
    oracle::Rng rng(4);
    std::size_t mismatched = 0, edge_centers = 0, edge_gaps = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto mesh = oracle::random_uv_mesh(rng, 50, 128);
        const auto r = geometry::rasterize_occupancy(mesh, 64, 64, {}, 1 + trial % 4);
        const auto expected = oracle::occupancy(mesh, 64, 64);
        for (std::size_t i = 0; i < expected.size(); ++i) mismatched += r.face_ids.data[i] != expected[i];
    }
    // Edge-sharing tilings: every texel center of the tiled square, including
    // those exactly on shared edges, has one owner and is never dropped.
    for (int trial = 0; trial < 100; ++trial) {
        geometry::Mesh m;
        const int q = 5;  // 5x5 quads = 50 triangles
        const double x0 = static_cast<double>(rng.below(16)) / 64, y0 = static_cast<double>(rng.below(16)) / 64;
        const double step = static_cast<double>(4 + rng.below(6)) / 64;
        for (int j = 0; j < q; ++j)
            for (int i = 0; i < q; ++i) {
                const UV a{x0 + i * step, y0 + j * step}, b{x0 + (i + 1) * step, y0 + j * step},
                    c{x0 + (i + 1) * step, y0 + (j + 1) * step}, d{x0 + i * step, y0 + (j + 1) * step};
                const auto base = static_cast<std::uint32_t>(m.vertices.size());
                for (int k = 0; k < 3; ++k) m.vertices.push_back({0, 0, 0});
                m.faces.push_back({base, base + 1, base + 2});
                m.faces.push_back({base, base + 1, base + 2});
                if (rng.below(2)) m.uv_corners.insert(m.uv_corners.end(), {{a, b, c}, {a, c, d}});
                else m.uv_corners.insert(m.uv_corners.end(), {{a, b, d}, {b, c, d}});
            }
        std::vector<int> cover;
        const auto expected = oracle::occupancy(m, 64, 64, &cover);
        const auto r = geometry::rasterize_occupancy(m, 64, 64);
        const double lo_u = x0, hi_u = x0 + q * step, lo_v = y0, hi_v = y0 + q * step;
        for (int row = 0; row < 64; ++row)
            for (int col = 0; col < 64; ++col) {
                const std::size_t i = static_cast<std::size_t>(row) * 64 + col;
                mismatched += r.face_ids.data[i] != expected[i];
                const double u = (col + 0.5) / 64, v = 1.0 - (row + 0.5) / 64;
                if (u > lo_u && u < hi_u && v > lo_v && v < hi_v) {
                    ++edge_centers;
                    edge_gaps += cover[i] != 1 || r.face_ids.data[i] == geometry::kNoFace;
                }
            }
    }
    o.require(mismatched == 0, "equals brute force");
    o.require(edge_gaps == 0, "single ownership on shared edges");
    o.detail << "100 random meshes + 100 tilings at 64x64: " << mismatched << " mismatched texels; " << edge_centers
             << " interior tiling centers, " << edge_gaps << " with zero or multiple owners";
}

// ---- 5 ---------------------------------------------------------------------

void threshold_and_multi(Outcome& o) {
    oracle::Rng rng(5);
    std::size_t monotone_violations = 0, label_mismatches = 0, texels = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto cube = random_cube(rng, 64, 64, 6);
        std::vector<classify::ReferenceSpectrum> refs;
        for (int j = 0; j < 3; ++j) refs.push_back({"r" + std::to_string(j), random_vector(rng, 6)});
        const auto map = classify::sam_map(cube, refs[0]);
        RegionMask prev = classify::threshold_region(map, 0.0);
        for (double t = 0.02; t <= 1.6; t += 0.02) {
            const auto next = classify::threshold_region(map, t);
            for (std::size_t i = 0; i < next.size(); ++i) monotone_violations += next.data[i] < prev.data[i];
            prev = next;
        }
        const double theta = rng.uniform(0.05, 0.6);
        const auto labels = classify::classify_multi(cube, refs, theta, 1 + trial % 4);
        for (int row = 0; row < 64; ++row)
            for (int col = 0; col < 64; ++col) {
                std::int32_t expected = -1;
                if (const auto s = cube.spectrum_at({col, row})) {
                    double best = 10.0;
                    for (int j = 0; j < 3; ++j) {
                        const double a = oracle::angle(s->data(), refs[static_cast<std::size_t>(j)].values.data(), 6);
                        if (a >= 0.0 && a < best) best = a, expected = j;
                    }
                    if (expected >= 0 && best > theta) expected = -1;
                }
                label_mismatches += labels[{col, row}] != expected;
                ++texels;
            }
    }
    o.require(monotone_violations == 0, "regions never shrink as theta grows");
    o.require(label_mismatches == 0, "classify_multi equals exhaustive argmin");
    o.detail << "20 cubes 64x64x6, 3 references: " << monotone_violations << " monotonicity violations over 80 thresholds, "
             << label_mismatches << "/" << texels << " label mismatches";
}

// ---- 6 ---------------------------------------------------------------------

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SPECMAP_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> outputs(const fs::path& out) {
    std::map<std::string, std::string> files;
    for (const char* stage : {pipeline::kCalibrateStage, pipeline::kCubeStage, pipeline::kClassifyStage})
        for (const auto& e : fs::directory_iterator(pipeline::latest_run(out, stage, "")))
            if (e.path().filename() != pipeline::files::kProvenance)
                files[std::string(stage) + "/" + e.path().filename().string()] = imaging::read_file(e.path());
    return files;
}

void determinism(Outcome& o) {
    testing::TempDir dir("specmap-determinism");
    const auto fx1 = dir / "fixture1", fx2 = dir / "fixture2";
    o.require(run_cli("make-fixture --out " + fx1.string()) == 0, "make-fixture");
    o.require(run_cli("make-fixture --out " + fx2.string()) == 0, "make-fixture again");
    std::size_t fixture_diffs = 0;
    for (const auto& e : fs::directory_iterator(fx1))
        fixture_diffs += imaging::read_file(e.path()) != imaging::read_file(fx2 / e.path().filename());

    const unsigned many = std::max(4u, std::thread::hardware_concurrency());
    const std::string m = " --manifest " + (fx1 / "project.toml").string();
    std::vector<std::map<std::string, std::string>> runs;
    for (const auto& [name, workers] : std::vector<std::pair<std::string, unsigned>>{{"a", 1}, {"b", 1}, {"c", many}}) {
        const std::string opt = m + " --out " + (dir / name).string() + " --workers " + std::to_string(workers);
        o.require(run_cli("calibrate" + opt) == 0, "calibrate");
        o.require(run_cli("build-cube" + opt) == 0, "build-cube");
        o.require(run_cli("classify" + opt + " --uv 0.3 0.76 --theta-max 0.15") == 0, "classify");
        if (!o.pass) return;
        runs.push_back(outputs(dir / name));
    }
    const bool same_runs = runs[0] == runs[1];
    const bool same_workers = runs[0] == runs[2];
    o.require(fixture_diffs == 0, "fixture generation is deterministic");
    o.require(same_runs, "identical across runs");
    o.require(same_workers, "identical across worker counts");
    std::size_t bytes = 0;
    for (const auto& [k, v] : runs[0]) bytes += v.size();
    o.detail << runs[0].size() << " output files (" << bytes << " bytes) compared; workers 1 vs " << many
             << "; provenance.toml excluded (records the worker count and time)";
}

// ---- 7 ---------------------------------------------------------------------

void performance(Outcome& o) {
    const int n = 4096;
    const std::size_t bands = 6;
    const std::size_t texels = static_cast<std::size_t>(n) * n;
    const std::uint64_t need = texels * (bands * 8 + 8 + 1) + (256ull << 20);
    const std::uint64_t avail = oracle::available_memory_bytes();
    if (avail != 0 && avail < need) {
        o.require(false, "enough memory for a 4096x4096x6 cube");
        o.detail << "needs about " << (need >> 20) << " MiB, " << (avail >> 20) << " MiB available";
        return;
    }
    oracle::Rng rng(7);
    std::vector<double> data(texels * bands);
    for (double& x : data) x = rng.uniform();
    std::vector<cube::BandDescriptor> desc(bands);
    const cube::SpectralCube cube(n, n, std::move(desc), std::move(data), RegionMask(n, n, 1));
    const classify::ReferenceSpectrum ref{"r", random_vector(rng, bands)};

    const auto t0 = Clock::now();
    const auto map = classify::sam_map(cube, ref, 4);
    const double elapsed = seconds_since(t0);

    // Spot check against the scalar oracle.
    std::size_t bad = 0;
    for (int k = 0; k < 1000; ++k) {
        const Texel t{static_cast<int>(rng.below(n)), static_cast<int>(rng.below(n))};
        bad += map[t] != oracle::angle(cube.spectrum_at(t)->data(), ref.values.data(), bands);
    }
    o.require(bad == 0, "values match the scalar oracle");
    o.require(elapsed < 10.0, "under 10 s");
    o.detail << "sam_map 4096x4096x6 with 4 workers: " << elapsed << " s on " << std::thread::hardware_concurrency()
             << " hardware thread(s)";
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
        {"1 workflow reproduction on the two-material fixture", workflow},
        {"2 spectral angle property suite", sam_properties},
        {"3 calibration self-consistency", calibration_consistency},
        {"4 rasterization oracle", rasterization},
        {"5 threshold monotonicity and multi-reference argmin", threshold_and_multi},
        {"6 deterministic CLI pipeline across runs and worker counts", determinism},
        {"7 sam_map performance budget", performance},
    };
    bool all = true;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            check(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        all = all && o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << " | " << o.detail.str() << std::endl;
    }
    return all ? 0 : 1;
}
