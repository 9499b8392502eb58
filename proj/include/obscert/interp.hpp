#pragma once

#include <span>
#include <vector>

#include "obscert/functions.hpp"
#include "obscert/geometry.hpp"

namespace obscert {

/// n + 1 increasing parameters with consecutive gaps of at least `gap`.
struct NodeSet {
  int n = 0;
  std::vector<double> nodes;
  double gap = 0.0;
};

/// Greedy separation on a 1D trace: x0 is the essential infimum of the trace
/// and x_i is the essential infimum of the trace beyond x_{i-1} + g, with
/// g = |trace| / (n + 1). Throws `infeasible` when fewer than n+1 nodes fit.
NodeSet separate_points(const IntervalSet& trace, int n);

/// Interpolating polynomial through fixed (nodes, values) in the modified
/// Lagrange form with exponent-scaled products; weights are computed once.
/// Stable when t lies outside the node hull.
class Interpolant {
 public:
  Interpolant(std::span<const double> nodes, std::span<const double> values);

  [[nodiscard]] double operator()(double t) const;
  /// sum_i |l_i(t) values[i]|; scales the rounding error of operator().
  [[nodiscard]] double abs_sum(double t) const;
  /// Lebesgue function sum_i |l_i(t)|.
  [[nodiscard]] double lebesgue(double t) const;

 private:
  bool terms(double t, std::vector<double>& c, std::size_t& hit) const;

  std::vector<double> nodes_;
  std::vector<double> values_;
  std::vector<double> weight_mantissa_;
  std::vector<long> weight_exponent_;
};

/// Interpolating polynomial through (nodes[i], values[i]) evaluated at t.
double lagrange_eval(std::span<const double> nodes, std::span<const double> values, double t);
double lagrange_eval(const NodeSet& nodes, std::span<const double> values, double t);

/// sum_i |l_i(t) values[i]|; scales the rounding error of lagrange_eval.
double lagrange_abs_sum(std::span<const double> nodes, std::span<const double> values, double t);

/// log(i! (n-i)! g^n) for i = 0..n: lower bounds of |prod_{j != i} (x_i - x_j)|
/// for any node set with gap >= g.
std::vector<double> denominator_lower_bound(int n, double g);

struct PolyBound {
  int n = 0;
  double t_max = 0.0;
  double gap = 0.0;
  double data_sup = 0.0;
  double log_bound = 0.0;   ///< log(data_sup * sum_i t_max^n / (i! (n-i)! g^n))
  /// log(sum_i t_max^n / (i! (n-i)! g^n)), the factor multiplying data_sup
  double log_factor = 0.0;
};

PolyBound poly_sup_bound(int n, double t_max, double g, double data_sup);

/// log(t_max^(n+1) M (n+1)!^(sigma-1) delta^-(n+1) domain_sup)
double remainder_bound(int n, double t_max, const GevreyCertificate& cert, double domain_sup);

struct RemainderCheck {
  bool passed = true;
  double max_error = 0.0;
  /// min over probes of log(pointwise bound) - log|f - P|; +inf when every
  /// probe is reproduced exactly
  double min_log_slack = 0.0;
  double worst_probe = 0.0;
  bool within_global = true;   ///< pointwise bounds never exceed the global bound
};

/// Compares |f(w + t mu) - P(t)| with prod|t - x_i| / (n+1)! * sup|f^(n+1)|
/// (the model's rigorous derivative bound along mu) at every probe, and that
/// pointwise bound with exp(log_global_bound). Rounding allowance:
/// (3n + 5) eps (Lebesgue(t) + 1) max(|f(x_i)|, |f(t)|).
RemainderCheck remainder_empirical_check(const FunctionModel& f, const Domain& domain,
                                         const Segment& seg, const NodeSet& nodes,
                                         std::span<const double> probes,
                                         double log_global_bound);

}  // namespace obscert
