#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "specmap/common/error.hpp"
#include "specmap/common/types.hpp"

namespace specmap {

/// Row-major width x height raster, row 0 on top.
template <class T>
struct Grid {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(std::int32_t w, std::int32_t h, T fill = T{})
        : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
        if (w < 0 || h < 0) throw ValidationError("grid dimensions must be non-negative");
    }

    std::size_t index(Texel t) const {
        return static_cast<std::size_t>(t.row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(t.col);
    }
    bool contains(Texel t) const { return t.col >= 0 && t.row >= 0 && t.col < width && t.row < height; }
    T& operator[](Texel t) { return data[index(t)]; }
    const T& operator[](Texel t) const { return data[index(t)]; }
    std::size_t size() const { return data.size(); }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Boolean per-texel selection (0 or 1).
using RegionMask = Grid<std::uint8_t>;

template <class A, class B>
bool same_shape(const Grid<A>& a, const Grid<B>& b) {
    return a.width == b.width && a.height == b.height;
}

} // namespace specmap
