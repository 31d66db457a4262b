#pragma once

#include <cstdint>
#include <vector>

#include "specmap/common/grid.hpp"

namespace specmap::service {

/// Per row, alternating run lengths starting with an unselected run (which
/// may be 0). Every row's runs sum to the mask width.
using RleRows = std::vector<std::vector<std::uint32_t>>;

RleRows encode_rle_rows(const RegionMask& mask);

/// Throws ValidationError when the runs do not describe exactly width x height texels.
RegionMask decode_rle_rows(const RleRows& rows, std::int32_t width, std::int32_t height);

} // namespace specmap::service
