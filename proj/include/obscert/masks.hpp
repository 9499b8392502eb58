#pragma once

#include <cstdint>
#include <vector>

#include "obscert/geometry.hpp"

namespace obscert {

/// Name recorded in reports for the mask generator below.
inline constexpr const char* kMaskGenerator = "mt19937_64/v1";

enum class MaskStyle {
  blobs,     ///< sublevel sets of a random low-frequency field
  scatter,   ///< independent uniform priorities per cell
};

/// Priority of every grid cell; a mask of fraction q keeps the floor(q N)
/// interior cells of smallest priority (ties by index), so masks drawn from
/// one field are nested in q.
std::vector<double> priority_field(const Grid& grid, std::uint64_t seed, MaskStyle style);

MeasurableSet mask_from_priority(const Grid& grid, const std::vector<double>& priority,
                                 double fraction);

MeasurableSet random_mask(const Grid& grid, double fraction, std::uint64_t seed,
                          MaskStyle style = MaskStyle::blobs);

}  // namespace obscert
