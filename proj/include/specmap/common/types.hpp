#pragma once

#include <cmath>
#include <cstdint>

namespace specmap {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

/// Texture-space coordinate. u grows to the right, v grows upward.
struct UV {
    double u = 0.0;
    double v = 0.0;
    friend bool operator==(const UV&, const UV&) = default;
};

/// Integer texel address; row 0 is the top row of the image.
struct Texel {
    std::int32_t col = 0;
    std::int32_t row = 0;
    friend bool operator==(const Texel&, const Texel&) = default;
};

} // namespace specmap
