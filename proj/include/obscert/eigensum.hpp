#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "obscert/certify.hpp"
#include "obscert/functions.hpp"
#include "obscert/geometry.hpp"

namespace obscert {

/// amplitude * cos(2*pi*(k . p) + phase)
struct Mode {
  std::array<int, 2> k{0, 0};
  double amplitude = 1.0;
  double phase = 0.0;
};

/// Sum of Laplace eigenfunctions on a flat torus, grouped by eigenvalue.
class EigenSum {
 public:
  /// Throws `config` for an empty list, duplicate modes, or a zero frequency
  /// when `allow_constant` is false.
  static EigenSum build(int dimension, std::vector<Mode> modes, bool allow_constant = false);

  [[nodiscard]] int dimension() const { return dim_; }
  [[nodiscard]] const std::vector<Mode>& modes() const { return modes_; }
  /// Distinct |k|^2 in increasing order; eigenvalue i is (2 pi)^2 |k|^2.
  [[nodiscard]] const std::vector<int>& shells() const { return shells_; }
  [[nodiscard]] double eigenvalue(std::size_t i) const;
  [[nodiscard]] int m() const { return static_cast<int>(shells_.size()); }
  /// Largest eigenvalue.
  [[nodiscard]] double lambda() const;
  /// h = sum of all modes.
  [[nodiscard]] const FunctionModel& model() const { return model_; }
  /// The eigenfunction phi_i collecting the modes of shell i.
  [[nodiscard]] FunctionModel component(std::size_t i) const;
  /// sum_i lambda_i phi_i(p), from the mode data.
  [[nodiscard]] double eigen_laplacian(Point p) const;

 private:
  int dim_ = 1;
  std::vector<Mode> modes_;
  std::vector<int> shells_;
  FunctionModel model_ = FunctionModel::constant(0.0);
};

struct OrthogonalityReport {
  bool passed = false;
  double max_inner_product = 0.0;              ///< relative to the component norms
  std::vector<double> power_ratio;             ///< ||Lap^n h|| / (lambda^n ||h||), n = 1..4
  bool power_bound_holds = false;
};

/// Periodic trapezoid quadrature on the grid. Throws `config` when the grid
/// has fewer than 4 cells per period of the highest frequency.
OrthogonalityReport orthogonality_check(const EigenSum& es, const Grid& grid);

/// L2 norm over the interior cells by the periodic trapezoid rule.
double l2_norm(const Grid& grid, const std::function<double(Point)>& g);

struct GammaParams {
  double C_cal = 1.0;
  double gamma = 0.0;
};

/// gamma = C_cal (sqrt(lambda) + m^2 log m + 1)
GammaParams gamma_params(const EigenSum& es, double C_cal);

/// One member of a doubling growth study.
struct GrowthMember {
  std::string label;
  double lambda = 0.0;           ///< eigenvalue label of the member
  int m = 1;
  FunctionModel f = FunctionModel::constant(1.0);
};

struct GrowthRow {
  std::string label;
  double lambda = 0.0;
  int m = 1;
  double kappa_hat = 0.0;        ///< unclamped
  double kappa = 0.0;            ///< clamped at 2
  double gamma = 0.0;            ///< with the calibrated constant
};

struct GrowthStudy {
  std::vector<GrowthRow> rows;
  double C_cal = 1.0;            ///< smallest power of two with e^gamma >= kappa_hat for every member
  double slope = 0.0;            ///< least-squares slope of log kappa_hat against sqrt(lambda)
  double loglog_slope = 0.0;     ///< slope of log log kappa_hat against log sqrt(lambda), unclamped rows
  bool superlinear = false;      ///< loglog_slope > 1.25
  bool slope_bounded = false;    ///< slope <= C_cal
};

/// Estimates kappa_hat for every member on `grid` with dyadic radii r0 / 2^j
/// down to the grid floor and `centers` Halton centres, then calibrates C_cal
/// and fits the growth.
GrowthStudy doubling_growth_study(const std::vector<GrowthMember>& family, const Grid& grid,
                                  double r0, int centers = 64);

/// Calibration against a set of (eigen-sum, kappa_hat) pairs.
double calibrate_gamma(const std::vector<std::pair<EigenSum, double>>& members);

struct EigenCertificate {
  ObservabilityCertificate certificate;
  GammaParams gamma;
  double C2 = 1.0;   ///< smallest C2 >= 1 with C <= (C2 / |E|)^(C2 gamma), |E| relative to |Omega|
};

/// kappa = max(e^gamma, 2), closed-form sigma = 1 Gevrey certificate, then
/// certify_sigma1.
EigenCertificate certify_eigensum(const EigenSum& es, const MeasurableSet& set,
                                  const GammaParams& gp, double r0, int search_width = 16);

/// Writes the study as CSV (lambda, m, gamma, kappa_hat, C_certified,
/// ratio_empirical); the last two columns are empty when not supplied.
std::string growth_csv(const GrowthStudy& study, const std::vector<double>& log10_C = {},
                       const std::vector<double>& ratios = {});

}  // namespace obscert
