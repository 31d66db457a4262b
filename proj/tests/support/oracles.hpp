// Reference implementations used only by the tests. They are written as
// plain brute-force loops and must not call into the code paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "specmap/geometry/mesh.hpp"

namespace oracle {

// ---- random numbers -------------------------------------------------------

/// Platform-independent uniform doubles from mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return gen_() % n; }

private:
    std::mt19937_64 gen_;
};

// ---- atlas occupancy ------------------------------------------------------

struct FixedVertex {
    long long x, y;
};

/// uv -> 1/256-texel fixed point, y down (v = 0 at the bottom edge).
inline FixedVertex snap(double u, double v, int width, int height) {
    const long long sx = static_cast<long long>(width) * 256;
    const long long sy = static_cast<long long>(height) * 256;
    return {std::llround(u * static_cast<double>(sx)), sy - std::llround(v * static_cast<double>(sy))};
}

/// Inside test with the sample symbolically perturbed by (eps, eps^2): a
/// center exactly on an edge belongs to the triangle the perturbed sample
/// falls into. Works for either winding without reordering vertices.
inline bool covers(const FixedVertex t[3], long long px, long long py) {
    const long long area = (t[1].x - t[0].x) * (t[2].y - t[0].y) - (t[1].y - t[0].y) * (t[2].x - t[0].x);
    if (area == 0) return false;
    const long long sign = area > 0 ? 1 : -1;
    for (int k = 0; k < 3; ++k) {
        const FixedVertex a = t[k], b = t[(k + 1) % 3];
        const long long dx = b.x - a.x, dy = b.y - a.y;
        const long long e = sign * (dx * (py - a.y) - dy * (px - a.x));
        if (e > 0) continue;
        if (e < 0) return false;
        // Derivative of the edge value along the perturbation direction.
        const long long first = sign * (-dy);
        const long long second = sign * dx;
        if (first > 0 || (first == 0 && second > 0)) continue;
        return false;
    }
    return true;
}

inline double uv_area(const specmap::geometry::FaceUV& uv) {
    return 0.5 * std::abs((uv[1].u - uv[0].u) * (uv[2].v - uv[0].v) - (uv[2].u - uv[0].u) * (uv[1].v - uv[0].v));
}

/// Lowest covering face id per texel (UINT32_MAX for none); optionally the
/// number of covering faces per texel.
inline std::vector<std::uint32_t> occupancy(const specmap::geometry::Mesh& mesh, int width, int height,
                                            std::vector<int>* cover_count = nullptr) {
    std::vector<std::uint32_t> out(static_cast<std::size_t>(width) * height, std::numeric_limits<std::uint32_t>::max());
    if (cover_count) cover_count->assign(out.size(), 0);
    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            const long long px = col * 256LL + 128, py = row * 256LL + 128;
            for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
                const auto& uv = mesh.uv_corners[f];
                if (uv_area(uv) < 1e-12) continue;
                const FixedVertex t[3] = {snap(uv[0].u, uv[0].v, width, height), snap(uv[1].u, uv[1].v, width, height),
                                          snap(uv[2].u, uv[2].v, width, height)};
                if (!covers(t, px, py)) continue;
                const std::size_t i = static_cast<std::size_t>(row) * width + col;
                if (cover_count) ++(*cover_count)[i];
                if (out[i] == std::numeric_limits<std::uint32_t>::max()) out[i] = static_cast<std::uint32_t>(f);
            }
        }
    }
    return out;
}

/// Same ownership as occupancy(), visiting only texels near each face's
/// bounding box; -1 for none. Fast enough for full-size atlases.
inline std::vector<std::int64_t> occupancy_by_bbox(const specmap::geometry::Mesh& mesh, int w, int h) {
    std::vector<std::int64_t> owner(static_cast<std::size_t>(w) * h, -1);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& uv = mesh.uv_corners[f];
        if (uv_area(uv) < 1e-12) continue;
        const FixedVertex t[3] = {snap(uv[0].u, uv[0].v, w, h), snap(uv[1].u, uv[1].v, w, h),
                                          snap(uv[2].u, uv[2].v, w, h)};
        long long x0 = t[0].x, x1 = t[0].x, y0 = t[0].y, y1 = t[0].y;
        for (const auto& p : t) {
            x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
        }
        for (long long row = std::max(0LL, y0 / 256 - 1); row <= std::min<long long>(h - 1, y1 / 256 + 1); ++row)
            for (long long col = std::max(0LL, x0 / 256 - 1); col <= std::min<long long>(w - 1, x1 / 256 + 1); ++col) {
                if (!covers(t, col * 256 + 128, row * 256 + 128)) continue;
                auto& o = owner[static_cast<std::size_t>(row * w + col)];
                if (o < 0) o = static_cast<std::int64_t>(f);
            }
    }
    return owner;
}

/// Random meshes: half free-floating triangles, half lattice-aligned strips
/// whose shared edges pass through texel centers.
inline specmap::geometry::Mesh random_uv_mesh(Rng& rng, int max_faces, int lattice) {
    specmap::geometry::Mesh m;
    const int faces = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_faces)));
    auto lattice_uv = [&]() {
        return specmap::UV{static_cast<double>(rng.below(lattice + 1)) / lattice,
                           static_cast<double>(rng.below(lattice + 1)) / lattice};
    };
    while (static_cast<int>(m.faces.size()) < faces) {
        const auto base = static_cast<std::uint32_t>(m.vertices.size());
        if (rng.below(2) == 0) {
            specmap::geometry::FaceUV uv;
            for (auto& c : uv) c = {rng.uniform(), rng.uniform()};
            for (int k = 0; k < 3; ++k) m.vertices.push_back({rng.uniform(), rng.uniform(), 0.0});
            m.faces.push_back({base, base + 1, base + 2});
            m.uv_corners.push_back(uv);
        } else {
            // A quad split along a diagonal: the diagonal is a shared edge.
            const auto p = lattice_uv();
            const double du = static_cast<double>(1 + rng.below(lattice / 4)) / lattice;
            const double dv = static_cast<double>(1 + rng.below(lattice / 4)) / lattice;
            const specmap::UV q{std::min(1.0, p.u + du), p.v};
            const specmap::UV r{std::min(1.0, p.u + du), std::min(1.0, p.v + dv)};
            const specmap::UV s{p.u, std::min(1.0, p.v + dv)};
            for (int k = 0; k < 4; ++k) m.vertices.push_back({rng.uniform(), rng.uniform(), 0.0});
            m.faces.push_back({base, base + 1, base + 2});
            m.uv_corners.push_back({p, q, r});
            if (static_cast<int>(m.faces.size()) < faces) {
                m.faces.push_back({base, base + 2, base + 3});
                if (rng.below(2)) m.uv_corners.push_back({p, r, s});
                else m.uv_corners.push_back({s, r, p});  // opposite winding
            }
        }
    }
    return m;
}

// ---- statistics -----------------------------------------------------------

/// Median by full sort and selection.
inline double sorted_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// ---- spectral angle -------------------------------------------------------

/// Scalar spectral angle; -1 when either vector has zero magnitude.
inline double angle(const double* u, const double* v, std::size_t n) {
    double uv = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        uv += u[k] * v[k];
        uu += u[k] * u[k];
        vv += v[k] * v[k];
    }
    if (uu == 0.0 || vv == 0.0) return -1.0;
    const double c = std::max(-1.0, std::min(1.0, uv / std::sqrt(uu * vv)));
    return std::acos(c);
}

// ---- environment --------------------------------------------------------

/// MemAvailable from /proc/meminfo in bytes (0 when unknown).
inline std::uint64_t available_memory_bytes() {
    std::ifstream in("/proc/meminfo");
    std::string key;
    std::uint64_t kb = 0;
    std::string unit;
    while (in >> key >> kb >> unit)
        if (key == "MemAvailable:") return kb * 1024;
    return 0;
}

// ---- filesystem -----------------------------------------------------------

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("specmap_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace oracle
