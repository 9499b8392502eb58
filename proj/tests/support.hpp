#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "obscert/functions.hpp"
#include "obscert/geometry.hpp"

namespace testing_support {

struct Rng {
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) {
    return lo + (hi - lo) * static_cast<double>(engine() >> 11) * 0x1.0p-53;
  }
  int integer(int lo, int hi) {
    return lo + static_cast<int>(engine() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  std::mt19937_64 engine;
};

/// Independent per-cell coin flips with probability p.
inline obscert::MeasurableSet coin_mask(const obscert::Grid& grid, double p, Rng& rng) {
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (auto& m : mask) m = rng.uniform() < p ? 1 : 0;
  return obscert::MeasurableSet(grid, std::move(mask));
}

/// Closed-form Gevrey data and a sampled doubling certificate, the way the
/// command-line tool builds them.
struct Hypotheses {
  obscert::GevreyCertificate gevrey;
  obscert::DoublingCertificate doubling;
  double kappa_hat = 0.0;
};

inline Hypotheses hypotheses(const obscert::FunctionModel& f, const obscert::Grid& grid,
                             double r0 = 0.5, int centers = 64) {
  const obscert::SampledField field(f, grid);
  Hypotheses h;
  h.gevrey = obscert::closed_form_gevrey(f, grid.domain(), field.sup().value);
  const auto dr = obscert::estimate_doubling(field, obscert::dyadic_radii(r0, obscert::grid_radius_floor(grid)),
                                             obscert::halton_centers(grid.domain(), centers));
  h.doubling = dr.certificate;
  h.kappa_hat = dr.kappa_hat;
  return h;
}

}  // namespace testing_support
