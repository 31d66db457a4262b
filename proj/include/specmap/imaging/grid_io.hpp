#pragma once

#include <filesystem>

#include "specmap/common/error.hpp"
#include "specmap/common/grid.hpp"
#include "specmap/imaging/image_io.hpp"
#include "specmap/imaging/texture.hpp"

namespace specmap::imaging {

/// 1-channel texture holding the grid values converted to double.
template <class T>
Texture grid_to_texture(const Grid<T>& grid) {
    Texture tex(grid.width, grid.height, 1);
    for (std::size_t i = 0; i < grid.size(); ++i) tex.data[i] = static_cast<double>(grid.data[i]);
    return tex;
}

template <class T>
Grid<T> texture_to_grid(const Texture& tex) {
    if (tex.channels != 1) throw ValidationError("expected a 1-channel map");
    Grid<T> grid(tex.width, tex.height);
    for (std::size_t i = 0; i < grid.size(); ++i) grid.data[i] = static_cast<T>(tex.data[i]);
    return grid;
}

template <class T>
void save_grid(const Grid<T>& grid, const std::filesystem::path& path) {
    save_texture(grid_to_texture(grid), path);
}

} // namespace specmap::imaging
