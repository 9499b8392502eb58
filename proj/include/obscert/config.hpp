#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "obscert/eigensum.hpp"
#include "obscert/functions.hpp"
#include "obscert/geometry.hpp"
#include "obscert/masks.hpp"

namespace obscert {

struct DomainSpec {
  DomainKind kind = DomainKind::torus;
  int dimension = 1;
  std::array<double, 2> extent{1.0, 1.0};
  std::array<int, 2> cells{1024, 1};
};

struct SetSpec {
  enum class Kind { full, mask_file, region, random };
  Kind kind = Kind::random;
  std::string file;
  std::string shape;                 ///< interval | box | ball
  Point lower, upper, center;
  double radius = 0.0;
  double fraction = 0.1;
  MaskStyle style = MaskStyle::blobs;
};

struct GevreySpec {
  bool closed_form = true;
  GevreyCertificate certificate;      ///< used when not closed form
  std::optional<double> sigma;        ///< overrides the closed-form sigma
  int kmax = 12;
  int directions = 16;
};

struct DoublingSpec {
  bool estimate = true;
  DoublingCertificate certificate;    ///< used when not estimated
  double r0 = 0.5;                    ///< largest sampled radius when estimating
  int centers = 64;
};

struct UcpSpec {
  bool present = false;
  bool estimate = false;              ///< a = margin * smallest sampled a
  UcpCertificate certificate;
  double margin = 1.01;
  int centers = 64;
};

struct EigenSpec {
  bool present = false;               ///< function kind eigen_sum
  std::vector<Mode> modes;
  bool allow_constant = false;
  std::optional<double> C_cal;        ///< nullopt: calibrate against the estimated kappa_hat
};

struct SweepSpec {
  std::vector<double> fractions;
  std::optional<std::array<int, 2>> n_range;
  std::vector<int> eigen_k;           ///< family sin(2 pi k x) on the configured domain
  int masks = 5;                      ///< random masks per family member
  double mask_fraction = 0.1;
};

struct RunConfig {
  std::string name = "run";
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string branch = "auto";        ///< auto | sigma1 | sigma-gt1 | ucp
  std::string output_dir = ".";
  bool write_mask = false;
  int search_width = 16;
  int directions = 64;

  DomainSpec domain;
  FunctionModel function = FunctionModel::constant(1.0);
  std::string function_text;
  EigenSpec eigen;
  SetSpec set;
  GevreySpec gevrey;
  DoublingSpec doubling;
  UcpSpec ucp;
  SweepSpec sweep;
  std::string source_dir = ".";        ///< directory of the config file, for relative paths

  [[nodiscard]] Domain make_domain() const;
  [[nodiscard]] Grid make_grid() const;
  /// Resolves the set spec on `grid`; random masks use `seed`.
  [[nodiscard]] MeasurableSet make_set(const Grid& grid) const;
};

/// INI text: [section] headers, key = value lines, lists separated by '|',
/// vectors by ','. Throws `config` on any malformed or missing entry.
RunConfig parse_config(std::istream& in, const std::string& source_dir = ".");
RunConfig load_config(const std::string& path);

}  // namespace obscert
