#include "specmap/geometry/pick.hpp"

#include <cmath>
#include <string>

#include "specmap/common/error.hpp"

namespace specmap::geometry {
namespace {

double component(const Vec3& v, int axis) { return axis == 0 ? v.x : (axis == 1 ? v.y : v.z); }

void check_face(const Mesh& mesh, std::size_t face_id) {
    if (face_id >= mesh.face_count()) {
        throw ValidationError("face id " + std::to_string(face_id) + " out of range (mesh has " +
                              std::to_string(mesh.face_count()) + " faces)");
    }
}

void check_weights(const Barycentric& w) {
    for (double x : w) {
        if (!(x >= 0.0)) throw ValidationError("barycentric weights must be non-negative");
    }
    if (std::abs(w[0] + w[1] + w[2] - 1.0) > 1e-9) throw ValidationError("barycentric weights must sum to 1");
}

} // namespace

std::optional<RayHit> intersect_triangle(Vec3 origin, Vec3 dir, Vec3 a, Vec3 b, Vec3 c) {
    // Permute axes so the dominant direction component becomes z.
    const double ax_ = std::abs(dir.x), ay_ = std::abs(dir.y), az_ = std::abs(dir.z);
    const int kz = (ax_ >= ay_ && ax_ >= az_) ? 0 : (ay_ >= az_ ? 1 : 2);
    int kx = (kz + 1) % 3;
    int ky = (kx + 1) % 3;
    if (component(dir, kz) < 0.0) std::swap(kx, ky);

    const double dz = component(dir, kz);
    const double sx = component(dir, kx) / dz;
    const double sy = component(dir, ky) / dz;
    const double sz = 1.0 / dz;

    const Vec3 pa = a - origin, pb = b - origin, pc = c - origin;
    const double ax = component(pa, kx) - sx * component(pa, kz);
    const double ay = component(pa, ky) - sy * component(pa, kz);
    const double bx = component(pb, kx) - sx * component(pb, kz);
    const double by = component(pb, ky) - sy * component(pb, kz);
    const double cx = component(pc, kx) - sx * component(pc, kz);
    const double cy = component(pc, ky) - sy * component(pc, kz);

    double u = cx * by - cy * bx;
    double v = ax * cy - ay * cx;
    double w = bx * ay - by * ax;
    if (u == 0.0 || v == 0.0 || w == 0.0) {
        // Re-evaluate edge tests in extended precision on exact zeros.
        using ld = long double;
        u = static_cast<double>(ld(cx) * ld(by) - ld(cy) * ld(bx));
        v = static_cast<double>(ld(ax) * ld(cy) - ld(ay) * ld(cx));
        w = static_cast<double>(ld(bx) * ld(ay) - ld(by) * ld(ax));
    }
    if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return std::nullopt;

    const double det = u + v + w;
    if (det == 0.0) return std::nullopt;

    const double t_scaled =
        u * sz * component(pa, kz) + v * sz * component(pb, kz) + w * sz * component(pc, kz);
    const double t = t_scaled / det;
    if (!(t > 0.0) || !std::isfinite(t)) return std::nullopt;

    return RayHit{0, t, {u / det, v / det, w / det}};
}

std::optional<RayHit> raycast(const Mesh& mesh, Vec3 origin, Vec3 dir) {
    const double len = norm(dir);
    if (!(len > 0.0) || !std::isfinite(len)) throw ValidationError("ray direction must be finite and non-zero");
    dir = (1.0 / len) * dir;

    std::optional<RayHit> best;
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const auto& face = mesh.faces[f];
        auto hit = intersect_triangle(origin, dir, mesh.vertices[face[0]], mesh.vertices[face[1]],
                                      mesh.vertices[face[2]]);
        if (hit && (!best || hit->t < best->t)) {
            hit->face_id = f;
            best = hit;
        }
    }
    return best;
}

UV uv_of(const Mesh& mesh, std::size_t face_id, const Barycentric& weights) {
    check_face(mesh, face_id);
    check_weights(weights);
    const auto& c = mesh.uv_corners[face_id];
    return {weights[0] * c[0].u + weights[1] * c[1].u + weights[2] * c[2].u,
            weights[0] * c[0].v + weights[1] * c[1].v + weights[2] * c[2].v};
}

Vec3 point_of(const Mesh& mesh, std::size_t face_id, const Barycentric& weights) {
    check_face(mesh, face_id);
    const auto& f = mesh.faces[face_id];
    return weights[0] * mesh.vertices[f[0]] + weights[1] * mesh.vertices[f[1]] + weights[2] * mesh.vertices[f[2]];
}

std::optional<PickResult> pick(const Mesh& mesh, Vec3 origin, Vec3 dir, std::int32_t width, std::int32_t height,
                               UvConvention convention) {
    const auto hit = raycast(mesh, origin, dir);
    if (!hit) return std::nullopt;
    PickResult r;
    r.face_id = hit->face_id;
    r.barycentric = hit->barycentric;
    r.distance = hit->t;
    r.point = point_of(mesh, hit->face_id, hit->barycentric);
    // Weights come out of a division by their own sum; renormalize away the
    // last-bit drift before interpolating uv.
    const double sum = r.barycentric[0] + r.barycentric[1] + r.barycentric[2];
    for (double& w : r.barycentric) w /= sum;
    r.uv = uv_of(mesh, hit->face_id, r.barycentric);
    r.texel = uv_to_texel(r.uv, width, height, convention);
    return r;
}

} // namespace specmap::geometry
