#include "obscert/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "obscert/errors.hpp"
#include "obscert/logspace.hpp"

namespace obscert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// k * log(x) with the convention 0 * log(0) = 0.
double k_log(int k, double x) { return k == 0 ? 0.0 : k * std::log(x); }

}  // namespace

NodeSet separate_points(const IntervalSet& trace, int n) {
  if (n < 0) throw Error(Stage::config, "separate_points: n must be nonnegative");
  const double total = trace.total_length();
  if (!(total > 0.0)) throw Error(Stage::infeasible, "separate_points: the trace has zero length");
  NodeSet out;
  out.n = n;
  out.gap = total / (n + 1);
  double x = trace.essential_infimum_from(-kInf);
  out.nodes.push_back(x);
  for (int i = 1; i <= n; ++i) {
    double a = x + out.gap;
    while (a - x < out.gap) a = std::nextafter(a, kInf);
    x = trace.essential_infimum_from(a);
    if (std::isnan(x))
      throw Error(Stage::infeasible, "separate_points: only " + std::to_string(i) + " of " +
                                         std::to_string(n + 1) + " nodes fit in the trace");
    out.nodes.push_back(x);
  }
  return out;
}

namespace {

// Product kept as mantissa * 2^exponent so long products neither overflow nor
// lose relative accuracy.
struct ScaledProduct {
  double mantissa = 1.0;
  long exponent = 0;
  void times(double v) {
    int e = 0;
    mantissa = std::frexp(mantissa * v, &e);
    exponent += e;
  }
  [[nodiscard]] double value() const {
    return std::ldexp(mantissa, static_cast<int>(std::clamp(exponent, -100000L, 100000L)));
  }
};

}  // namespace

Interpolant::Interpolant(std::span<const double> nodes, std::span<const double> values)
    : nodes_(nodes.begin(), nodes.end()), values_(values.begin(), values.end()) {
  if (nodes.size() != values.size() || nodes.empty())
    throw Error(Stage::config, "interpolation needs one value per node");
  const std::size_t m = nodes_.size();
  weight_mantissa_.resize(m);
  weight_exponent_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    ScaledProduct p;
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const double d = nodes_[i] - nodes_[j];
      if (d == 0.0) throw Error(Stage::internal, "interpolation nodes coincide");
      p.times(d);
    }
    int e = 0;
    weight_mantissa_[i] = std::frexp(1.0 / p.mantissa, &e);
    weight_exponent_[i] = e - p.exponent;
  }
}

// Lagrange basis values l_i(t) = w_i prod_{j != i} (t - x_j); false when t is
// a node (index in `hit`).
bool Interpolant::terms(double t, std::vector<double>& c, std::size_t& hit) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (t == nodes_[i]) {
      hit = i;
      return false;
    }
  }
  const std::size_t m = nodes_.size();
  c.assign(m, 0.0);
  // prefix and suffix products of (t - x_j)
  std::vector<ScaledProduct> left(m + 1);
  std::vector<ScaledProduct> right(m + 1);
  for (std::size_t j = 0; j < m; ++j) {
    left[j + 1] = left[j];
    left[j + 1].times(t - nodes_[j]);
  }
  for (std::size_t j = m; j-- > 0;) {
    right[j] = right[j + 1];
    right[j].times(t - nodes_[j]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    ScaledProduct p = left[i];
    p.times(right[i + 1].mantissa);
    p.exponent += right[i + 1].exponent;
    p.times(weight_mantissa_[i]);
    p.exponent += weight_exponent_[i];
    c[i] = p.value();
  }
  return true;
}

double Interpolant::operator()(double t) const {
  std::vector<double> c;
  std::size_t hit = 0;
  if (!terms(t, c, hit)) return values_[hit];
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) sum += c[i] * values_[i];
  return sum;
}

double Interpolant::abs_sum(double t) const {
  std::vector<double> c;
  std::size_t hit = 0;
  if (!terms(t, c, hit)) return std::abs(values_[hit]);
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) sum += std::abs(c[i] * values_[i]);
  return sum;
}

double Interpolant::lebesgue(double t) const {
  std::vector<double> c;
  std::size_t hit = 0;
  if (!terms(t, c, hit)) return 1.0;
  double sum = 0.0;
  for (double v : c) sum += std::abs(v);
  return sum;
}

double lagrange_eval(std::span<const double> nodes, std::span<const double> values, double t) {
  return Interpolant(nodes, values)(t);
}

double lagrange_eval(const NodeSet& nodes, std::span<const double> values, double t) {
  return lagrange_eval(std::span<const double>(nodes.nodes), values, t);
}

double lagrange_abs_sum(std::span<const double> nodes, std::span<const double> values, double t) {
  return Interpolant(nodes, values).abs_sum(t);
}

std::vector<double> denominator_lower_bound(int n, double g) {
  if (n < 0 || !(g > 0.0)) throw Error(Stage::config, "denominator_lower_bound: need n >= 0, g > 0");
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) out[i] = log_factorial(i) + log_factorial(n - i) + k_log(n, g);
  return out;
}

PolyBound poly_sup_bound(int n, double t_max, double g, double data_sup) {
  if (n < 0 || !(g > 0.0) || t_max < 0.0 || data_sup < 0.0)
    throw Error(Stage::config, "poly_sup_bound: invalid arguments");
  PolyBound b{n, t_max, g, data_sup, 0.0, 0.0};
  std::vector<double> logs(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i)
    logs[i] = k_log(n, t_max) - log_factorial(i) - log_factorial(n - i) - k_log(n, g);
  b.log_factor = log_sum_exp(logs);
  b.log_bound = LogValue::from_value(data_sup).log() + b.log_factor;
  if (data_sup == 0.0) b.log_bound = -kInf;
  return b;
}

double remainder_bound(int n, double t_max, const GevreyCertificate& cert, double domain_sup) {
  if (n < 0 || t_max < 0.0) throw Error(Stage::config, "remainder_bound: invalid arguments");
  if (t_max == 0.0 || domain_sup == 0.0 || std::isinf(cert.delta)) return -kInf;
  return (n + 1) * std::log(t_max) + std::log(cert.M) + (cert.sigma - 1.0) * log_factorial(n + 1) -
         (n + 1) * std::log(cert.delta) + std::log(domain_sup);
}

RemainderCheck remainder_empirical_check(const FunctionModel& f, const Domain& domain,
                                         const Segment& seg, const NodeSet& nodes,
                                         std::span<const double> probes,
                                         double log_global_bound) {
  const int n = nodes.n;
  std::vector<double> values;
  values.reserve(nodes.nodes.size());
  for (double x : nodes.nodes) values.push_back(f.evaluate(seg.at(x)));
  const double log_deriv = f.log_derivative_bound(n + 1, seg.direction, domain);

  const Interpolant interp(nodes.nodes, values);
  double data_scale = 0.0;
  for (double v : values) data_scale = std::max(data_scale, std::abs(v));
  RemainderCheck report;
  report.min_log_slack = kInf;
  for (double t : probes) {
    const double p = interp(t);
    const double fv = f.evaluate(seg.at(t));
    const double err = std::abs(fv - p);
    double log_point = log_deriv - log_factorial(n + 1);
    for (double x : nodes.nodes) log_point += std::log(std::abs(t - x));
    const double bound = std::exp(log_point);
    const double tol = (3.0 * n + 5.0) * kEps * (interp.lebesgue(t) + 1.0) *
                       std::max(data_scale, std::abs(fv));
    if (err > bound + tol) report.passed = false;
    if (log_point > log_global_bound + 1e-12 * std::max(1.0, std::abs(log_global_bound)))
      report.within_global = false;
    if (err > 0.0) {
      const double slack = log_point - std::log(err);
      if (slack < report.min_log_slack) {
        report.min_log_slack = slack;
        report.worst_probe = t;
      }
    }
    report.max_error = std::max(report.max_error, err);
  }
  if (!report.within_global) report.passed = false;
  return report;
}

}  // namespace obscert
