#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "obscert/geometry.hpp"

namespace obscert {

enum class ModelKind { constant, trig_sum, gaussian, product, polynomial };

const char* to_string(ModelKind kind);

/// amplitude * cos(2*pi*(frequency . p) + phase)
struct TrigTerm {
  std::array<int, 2> frequency{0, 0};
  double amplitude = 1.0;
  double phase = 0.0;
};

/// amplitude * exp(-|p - center|^2 / (2 width^2))
struct GaussianTerm {
  Point center;
  double width = 1.0;
  double amplitude = 1.0;
};

/// coefficient * x^px * y^py
struct Monomial {
  int px = 0;
  int py = 0;
  double coefficient = 1.0;
};

/// A test function with exact derivatives of every order.
class FunctionModel {
 public:
  static FunctionModel constant(double value);
  static FunctionModel trig_sum(std::vector<TrigTerm> terms);
  static FunctionModel gaussian(std::vector<GaussianTerm> terms);
  static FunctionModel polynomial(std::vector<Monomial> terms);
  static FunctionModel product(const FunctionModel& a, const FunctionModel& b);

  [[nodiscard]] ModelKind kind() const { return kind_; }
  [[nodiscard]] double evaluate(Point p) const;
  /// d^k/dt^k f(p + t*dir) at t = 0.
  [[nodiscard]] double directional_derivative(Point p, Point dir, int k) const;
  /// Mixed partial derivative d^ax/dx^ax d^ay/dy^ay f at p.
  [[nodiscard]] double partial(Point p, int ax, int ay) const;
  /// log of a rigorous upper bound for sup over the domain of
  /// |d^k/dt^k f(p + t*dir)| (unit dir). -inf when the derivative vanishes.
  [[nodiscard]] double log_derivative_bound(int k, Point dir, const Domain& domain) const;
  /// True when the model is periodic with the domain's periods.
  [[nodiscard]] bool periodic_on(const Domain& domain) const;
  /// Short human-readable description.
  [[nodiscard]] std::string describe() const;

  [[nodiscard]] const std::vector<TrigTerm>& trig_terms() const { return trig_; }
  [[nodiscard]] const std::vector<GaussianTerm>& gaussian_terms() const { return gauss_; }
  [[nodiscard]] const std::vector<Monomial>& monomials() const { return mono_; }
  [[nodiscard]] double constant_value() const { return value_; }
  [[nodiscard]] const FunctionModel& factor(int i) const { return *factors_[i]; }

 private:
  ModelKind kind_ = ModelKind::constant;
  double value_ = 0.0;
  std::vector<TrigTerm> trig_;
  std::vector<GaussianTerm> gauss_;
  std::vector<Monomial> mono_;
  std::array<std::shared_ptr<const FunctionModel>, 2> factors_;
};

struct GevreyCertificate {
  double M = 1.0;
  double delta = 1.0;  ///< may be +inf for functions with finitely many nonzero derivatives
  double sigma = 1.0;
};

struct DoublingCertificate {
  double kappa = 2.0;
  double r0 = 1.0;
};

struct UcpCertificate {
  double a = 1.0;
  double b = 1.0;
  double r0 = 1.0;
};

void validate(const GevreyCertificate& c);
void validate(const DoublingCertificate& c);
void validate(const UcpCertificate& c);

struct SupResult {
  double value = 0.0;
  std::size_t index = 0;  ///< grid cell of the maximizer
  Point argmax;
};

/// |f| sampled at every interior cell centre of a grid. All sup norms of the
/// certification pipeline are read off one such field so that both sides of
/// every inequality use the same sample points.
class SampledField {
 public:
  SampledField(const FunctionModel& f, const Grid& grid);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] double at(std::size_t idx) const { return values_[idx]; }
  /// Sup over the domain; throws if the grid has no interior cell.
  [[nodiscard]] SupResult sup() const;
  /// Sup over the interior cells in the closed ball; value 0 and no argmax
  /// change when the ball holds no cell (callers treat that as degenerate).
  [[nodiscard]] SupResult sup(const Ball& ball) const;
  [[nodiscard]] SupResult sup(const MeasurableSet& set) const;
  /// Whether the closed ball contains at least one interior cell centre.
  [[nodiscard]] bool ball_has_cells(const Ball& ball) const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

SupResult sup_norm(const FunctionModel& f, const Grid& grid);
SupResult sup_norm(const FunctionModel& f, const Ball& ball, const Grid& grid);
SupResult sup_norm(const FunctionModel& f, const MeasurableSet& set);

struct GevreyReport {
  bool passed = false;
  double max_ratio = 0.0;           ///< max over k of ratio(k)
  int worst_k = 0;
  Point worst_point;
  Point worst_direction;
  std::vector<double> log_ratio;    ///< log ratio(k) for k = 1..kmax
  double domain_sup = 0.0;
};

/// Sampled check of sup |D^k_mu f| * delta^k / (k!^sigma * sup|f|) <= M for
/// k = 1..kmax, over a subsample of grid points and `directions` unit
/// directions (the 1D sections the remainder bound consumes).
GevreyReport verify_gevrey(const FunctionModel& f, const GevreyCertificate& cert,
                           const Grid& grid, int kmax = 12, int directions = 16);

/// Gevrey certificate (sigma = 1) read off the model's closed-form derivative
/// bounds: sup |D^k f| <= A k! / delta^k with M = max(1, A / sup_grid |f|).
GevreyCertificate closed_form_gevrey(const FunctionModel& f, const Domain& domain,
                                     double domain_sup);

/// Low-discrepancy sample of points inside the domain (Halton bases 2 and 3,
/// van der Corput in 1D), skipping points outside a disk.
std::vector<Point> halton_centers(const Domain& domain, int count);

/// r0/8, r0/4, r0/2, r0
std::vector<double> default_radii(double r0);

/// r0 / 2^j for every j with r0 / 2^j >= smallest, at least four levels,
/// increasing.
std::vector<double> dyadic_radii(double r0, double smallest);

/// Twice the largest cell width: the smallest radius worth sampling.
double grid_radius_floor(const Grid& grid);

struct DoublingReport {
  DoublingCertificate certificate;
  double kappa_hat = 0.0;     ///< unclamped estimate (inf if some inner sup vanished)
  bool finite = true;
  Point worst_center;
  double worst_radius = 0.0;
  std::size_t samples = 0;
};

/// kappa_hat = max over samples of sup_{B_2r(x)} |f| / sup_{B_r(x)} |f|,
/// certificate kappa = max(kappa_hat, 2), r0 = max radius.
DoublingReport estimate_doubling(const SampledField& field, const std::vector<double>& radii,
                                 const std::vector<Point>& centers);

struct UcpReport {
  bool passed = false;
  double worst_margin = 0.0;       ///< min over samples of a/r^b - log(sup_Omega / sup_B)
  double required_a = 0.0;         ///< smallest a that passes every sample (may be inf)
  Point worst_center;
  double worst_radius = 0.0;
  std::size_t samples = 0;
};

/// Checks sup_Omega |f| <= exp(a/r^b) sup_{B_r(x)} |f| at every sample.
UcpReport verify_ucp(const SampledField& field, const UcpCertificate& cert,
                     const std::vector<double>& radii, const std::vector<Point>& centers);

}  // namespace obscert
