#include "obscert/masks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "obscert/errors.hpp"

namespace obscert {

namespace {

// Uniform double in [0, 1) from the top 53 bits.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int small_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

}  // namespace

std::vector<double> priority_field(const Grid& grid, std::uint64_t seed, MaskStyle style) {
  std::mt19937_64 rng(seed);
  std::vector<double> out(grid.size(), 0.0);
  if (style == MaskStyle::scatter) {
    for (double& v : out) v = unit(rng);
    return out;
  }
  struct Wave {
    double kx, ky, phase, amplitude;
  };
  const int d = grid.dimension();
  std::vector<Wave> waves;
  for (int i = 0; i < 8; ++i) {
    Wave w{};
    w.kx = small_int(rng, -3, 3) / grid.domain().extent(0);
    w.ky = d == 2 ? small_int(rng, -3, 3) / grid.domain().extent(1) : 0.0;
    if (w.kx == 0.0 && w.ky == 0.0) w.kx = 1.0 / grid.domain().extent(0);
    w.phase = 2.0 * std::numbers::pi * unit(rng);
    w.amplitude = 0.5 + unit(rng);
    waves.push_back(w);
  }
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const Point p = grid.center(idx);
    double v = 0.0;
    for (const Wave& w : waves)
      v += w.amplitude * std::cos(2.0 * std::numbers::pi * (w.kx * p.x + w.ky * p.y) + w.phase);
    out[idx] = v;
  }
  return out;
}

MeasurableSet mask_from_priority(const Grid& grid, const std::vector<double>& priority,
                                 double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw Error(Stage::config, "mask fraction must lie in [0, 1]");
  if (priority.size() != grid.size()) throw Error(Stage::config, "priority field does not match the grid");
  std::vector<std::size_t> order;
  order.reserve(grid.interior_count());
  for (std::size_t idx = 0; idx < grid.size(); ++idx)
    if (grid.interior(idx)) order.push_back(idx);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return priority[a] < priority[b]; });
  const auto keep = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(order.size())));
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (std::size_t i = 0; i < keep; ++i) mask[order[i]] = 1;
  return MeasurableSet(grid, std::move(mask));
}

MeasurableSet random_mask(const Grid& grid, double fraction, std::uint64_t seed, MaskStyle style) {
  return mask_from_priority(grid, priority_field(grid, seed, style), fraction);
}

}  // namespace obscert
