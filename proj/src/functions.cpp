#include "obscert/functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "obscert/errors.hpp"
#include "obscert/logspace.hpp"
#include "obscert/parallel.hpp"

namespace obscert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Cramer's bound |He_k(x)| exp(-x^2/4) <= K sqrt(k!), K = 1.086435...
constexpr double kCramer = 1.0865;

double binomial(int n, int k) {
  return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

// n (n-1) ... (n-k+1); zero when k > n.
double falling(int n, int k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= n - i;
  return r;
}

// Probabilists' Hermite polynomial He_k(x).
double hermite(int k, double x) {
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int i = 1; i < k; ++i) {
    const double next = x * cur - i * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// d^k/du^k exp(-u^2 / (2 w^2))
double gaussian_derivative_1d(double u, double w, int k) {
  return std::pow(-1.0 / w, k) * hermite(k, u / w) * std::exp(-0.5 * (u / w) * (u / w));
}

// cos(theta + k pi / 2)
double shifted_cos(double theta, int k) {
  switch (k % 4) {
    case 0: return std::cos(theta);
    case 1: return -std::sin(theta);
    case 2: return -std::cos(theta);
    default: return std::sin(theta);
  }
}

double polynomial_radius(const Domain& domain) {
  return std::max(domain.extent(0), domain.dimension() == 2 ? domain.extent(1) : 0.0);
}

bool is_integer(double v) { return std::abs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::abs(v)); }

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::constant: return "constant";
    case ModelKind::trig_sum: return "trig_sum";
    case ModelKind::gaussian: return "gaussian";
    case ModelKind::product: return "product";
    case ModelKind::polynomial: return "polynomial";
  }
  return "unknown";
}

// ------------------------------------------------------------ construction

FunctionModel FunctionModel::constant(double value) {
  if (!std::isfinite(value)) throw Error(Stage::config, "constant model must be finite");
  FunctionModel f;
  f.kind_ = ModelKind::constant;
  f.value_ = value;
  return f;
}

FunctionModel FunctionModel::trig_sum(std::vector<TrigTerm> terms) {
  if (terms.empty()) throw Error(Stage::config, "trig_sum needs at least one term");
  for (const TrigTerm& t : terms)
    if (!std::isfinite(t.amplitude) || !std::isfinite(t.phase))
      throw Error(Stage::config, "trig_sum amplitudes and phases must be finite");
  FunctionModel f;
  f.kind_ = ModelKind::trig_sum;
  f.trig_ = std::move(terms);
  return f;
}

FunctionModel FunctionModel::gaussian(std::vector<GaussianTerm> terms) {
  if (terms.empty()) throw Error(Stage::config, "gaussian needs at least one term");
  for (const GaussianTerm& t : terms)
    if (!(t.width > 0.0) || !std::isfinite(t.width) || !std::isfinite(t.amplitude))
      throw Error(Stage::config, "gaussian widths must be positive and amplitudes finite");
  FunctionModel f;
  f.kind_ = ModelKind::gaussian;
  f.gauss_ = std::move(terms);
  return f;
}

FunctionModel FunctionModel::polynomial(std::vector<Monomial> terms) {
  if (terms.empty()) throw Error(Stage::config, "polynomial needs at least one monomial");
  for (const Monomial& m : terms)
    if (m.px < 0 || m.py < 0 || !std::isfinite(m.coefficient))
      throw Error(Stage::config, "polynomial exponents must be nonnegative");
  FunctionModel f;
  f.kind_ = ModelKind::polynomial;
  f.mono_ = std::move(terms);
  return f;
}

FunctionModel FunctionModel::product(const FunctionModel& a, const FunctionModel& b) {
  FunctionModel f;
  f.kind_ = ModelKind::product;
  f.factors_ = {std::make_shared<const FunctionModel>(a), std::make_shared<const FunctionModel>(b)};
  return f;
}

// -------------------------------------------------------------- evaluation

double FunctionModel::evaluate(Point p) const { return directional_derivative(p, {1.0, 0.0}, 0); }

double FunctionModel::directional_derivative(Point p, Point dir, int k) const {
  if (k < 0) throw Error(Stage::config, "derivative order must be nonnegative");
  switch (kind_) {
    case ModelKind::constant:
      return k == 0 ? value_ : 0.0;
    case ModelKind::trig_sum: {
      double sum = 0.0;
      for (const TrigTerm& t : trig_) {
        const Point nu{static_cast<double>(t.frequency[0]), static_cast<double>(t.frequency[1])};
        const double theta = kTwoPi * dot(nu, p) + t.phase;
        const double s = kTwoPi * dot(nu, dir);
        sum += t.amplitude * std::pow(s, k) * shifted_cos(theta, k);
      }
      return sum;
    }
    case ModelKind::gaussian: {
      double sum = 0.0;
      for (const GaussianTerm& g : gauss_) {
        const Point q = p - g.center;
        const double s = dot(q, dir);
        const double perp2 = std::max(dot(q, q) - s * s, 0.0);
        sum += g.amplitude * std::exp(-0.5 * perp2 / (g.width * g.width)) *
               gaussian_derivative_1d(s, g.width, k);
      }
      return sum;
    }
    case ModelKind::polynomial: {
      double sum = 0.0;
      for (int j = 0; j <= k; ++j) {
        const double weight = binomial(k, j) * std::pow(dir.x, j) * std::pow(dir.y, k - j);
        if (weight != 0.0) sum += weight * partial(p, j, k - j);
      }
      return sum;
    }
    case ModelKind::product: {
      double sum = 0.0;
      for (int j = 0; j <= k; ++j)
        sum += binomial(k, j) * factors_[0]->directional_derivative(p, dir, j) *
               factors_[1]->directional_derivative(p, dir, k - j);
      return sum;
    }
  }
  return 0.0;
}

double FunctionModel::partial(Point p, int ax, int ay) const {
  if (ax < 0 || ay < 0) throw Error(Stage::config, "derivative order must be nonnegative");
  switch (kind_) {
    case ModelKind::constant:
      return ax == 0 && ay == 0 ? value_ : 0.0;
    case ModelKind::trig_sum: {
      double sum = 0.0;
      for (const TrigTerm& t : trig_) {
        const double theta = kTwoPi * (t.frequency[0] * p.x + t.frequency[1] * p.y) + t.phase;
        sum += t.amplitude * std::pow(kTwoPi * t.frequency[0], ax) *
               std::pow(kTwoPi * t.frequency[1], ay) * shifted_cos(theta, ax + ay);
      }
      return sum;
    }
    case ModelKind::gaussian: {
      double sum = 0.0;
      for (const GaussianTerm& g : gauss_)
        sum += g.amplitude * gaussian_derivative_1d(p.x - g.center.x, g.width, ax) *
               gaussian_derivative_1d(p.y - g.center.y, g.width, ay);
      return sum;
    }
    case ModelKind::polynomial: {
      double sum = 0.0;
      for (const Monomial& m : mono_) {
        const double cx = falling(m.px, ax);
        const double cy = falling(m.py, ay);
        if (cx == 0.0 || cy == 0.0) continue;
        sum += m.coefficient * cx * std::pow(p.x, m.px - ax) * cy * std::pow(p.y, m.py - ay);
      }
      return sum;
    }
    case ModelKind::product: {
      double sum = 0.0;
      for (int i = 0; i <= ax; ++i)
        for (int j = 0; j <= ay; ++j)
          sum += binomial(ax, i) * binomial(ay, j) * factors_[0]->partial(p, i, j) *
                 factors_[1]->partial(p, ax - i, ay - j);
      return sum;
    }
  }
  return 0.0;
}

double FunctionModel::log_derivative_bound(int k, Point dir, const Domain& domain) const {
  switch (kind_) {
    case ModelKind::constant:
      return k == 0 ? LogValue::from_value(std::abs(value_)).log() : -kInf;
    case ModelKind::trig_sum: {
      std::vector<double> logs;
      for (const TrigTerm& t : trig_) {
        const Point nu{static_cast<double>(t.frequency[0]), static_cast<double>(t.frequency[1])};
        const double s = std::abs(kTwoPi * dot(nu, dir));
        if (t.amplitude == 0.0 || (k > 0 && s == 0.0)) continue;
        logs.push_back(std::log(std::abs(t.amplitude)) + (k > 0 ? k * std::log(s) : 0.0));
      }
      return logs.empty() ? -kInf : log_sum_exp(logs);
    }
    case ModelKind::gaussian: {
      std::vector<double> logs;
      for (const GaussianTerm& g : gauss_) {
        if (g.amplitude == 0.0) continue;
        double v = std::log(std::abs(g.amplitude));
        if (k > 0) v += std::log(kCramer) + 0.5 * log_factorial(k) - k * std::log(g.width);
        logs.push_back(v);
      }
      return logs.empty() ? -kInf : log_sum_exp(logs);
    }
    case ModelKind::polynomial: {
      // Along a line each monomial is a product of linear factors; bound
      // every mixed partial by its value at the far corner of the box.
      const double R = polynomial_radius(domain);
      std::vector<double> logs;
      for (const Monomial& m : mono_) {
        if (m.coefficient == 0.0) continue;
        for (int j = 0; j <= k; ++j) {
          const double cx = falling(m.px, j);
          const double cy = falling(m.py, k - j);
          const double w = std::pow(std::abs(dir.x), j) * std::pow(std::abs(dir.y), k - j);
          if (cx == 0.0 || cy == 0.0 || w == 0.0) continue;
          const int rest = m.px + m.py - k;
          if (R == 0.0 && rest > 0) continue;
          logs.push_back(std::log(std::abs(m.coefficient)) + std::log(binomial(k, j)) +
                         std::log(w) + std::log(cx) + std::log(cy) +
                         (rest > 0 ? rest * std::log(R) : 0.0));
        }
      }
      return logs.empty() ? -kInf : log_sum_exp(logs);
    }
    case ModelKind::product: {
      std::vector<double> logs;
      for (int j = 0; j <= k; ++j) {
        const double a = factors_[0]->log_derivative_bound(j, dir, domain);
        const double b = factors_[1]->log_derivative_bound(k - j, dir, domain);
        if (std::isinf(a) && a < 0) continue;
        if (std::isinf(b) && b < 0) continue;
        logs.push_back(std::log(binomial(k, j)) + a + b);
      }
      return logs.empty() ? -kInf : log_sum_exp(logs);
    }
  }
  return kInf;
}

bool FunctionModel::periodic_on(const Domain& domain) const {
  if (!domain.periodic()) return true;
  switch (kind_) {
    case ModelKind::constant:
      return true;
    case ModelKind::trig_sum:
      for (const TrigTerm& t : trig_) {
        if (!is_integer(t.frequency[0] * domain.extent(0))) return false;
        if (domain.dimension() == 2 && !is_integer(t.frequency[1] * domain.extent(1))) return false;
        if (domain.dimension() == 1 && t.frequency[1] != 0) return false;
      }
      return true;
    case ModelKind::gaussian:
      return false;
    case ModelKind::polynomial:
      return std::all_of(mono_.begin(), mono_.end(), [](const Monomial& m) {
        return (m.px == 0 && m.py == 0) || m.coefficient == 0.0;
      });
    case ModelKind::product:
      return factors_[0]->periodic_on(domain) && factors_[1]->periodic_on(domain);
  }
  return false;
}

std::string FunctionModel::describe() const {
  std::ostringstream out;
  out.precision(6);
  switch (kind_) {
    case ModelKind::constant:
      out << "constant(" << value_ << ")";
      break;
    case ModelKind::trig_sum:
      out << "trig_sum[" << trig_.size() << " terms]";
      break;
    case ModelKind::gaussian:
      out << "gaussian[" << gauss_.size() << " terms]";
      break;
    case ModelKind::polynomial:
      out << "polynomial[" << mono_.size() << " monomials]";
      break;
    case ModelKind::product:
      out << "product(" << factors_[0]->describe() << ", " << factors_[1]->describe() << ")";
      break;
  }
  return out.str();
}

// ----------------------------------------------------------- certificates

void validate(const GevreyCertificate& c) {
  if (!(c.M >= 1.0) || !std::isfinite(c.M)) throw Error(Stage::config, "Gevrey M must be >= 1");
  if (!(c.delta > 0.0)) throw Error(Stage::config, "Gevrey delta must be positive");
  if (!(c.sigma >= 1.0) || !std::isfinite(c.sigma))
    throw Error(Stage::config, "Gevrey sigma must be >= 1");
}

void validate(const DoublingCertificate& c) {
  if (!(c.kappa >= 2.0) || !std::isfinite(c.kappa))
    throw Error(Stage::config, "doubling kappa must be finite and >= 2");
  if (!(c.r0 > 0.0) || c.r0 > 1.0) throw Error(Stage::config, "doubling r0 must lie in (0, 1]");
}

void validate(const UcpCertificate& c) {
  if (!(c.a > 0.0) || !(c.b > 0.0) || !(c.r0 > 0.0) || !std::isfinite(c.a) ||
      !std::isfinite(c.b) || !std::isfinite(c.r0))
    throw Error(Stage::config, "unique-continuation constants a, b, r0 must be positive");
}

// ------------------------------------------------------------ sampled sups

SampledField::SampledField(const FunctionModel& f, const Grid& grid)
    : grid_(grid), values_(grid.size(), 0.0) {
  const int rows = grid_.cells(1);
  parallel_for(static_cast<std::size_t>(rows), [&](std::size_t j) {
    for (int i = 0; i < grid_.cells(0); ++i) {
      const std::size_t idx = grid_.index(i, static_cast<int>(j));
      if (grid_.interior(idx)) values_[idx] = std::abs(f.evaluate(grid_.center(idx)));
    }
  });
}

SupResult SampledField::sup() const {
  SupResult best;
  bool any = false;
  for (std::size_t idx = 0; idx < values_.size(); ++idx) {
    if (!grid_.interior(idx)) continue;
    if (!any || values_[idx] > best.value) {
      best.value = values_[idx];
      best.index = idx;
      any = true;
    }
  }
  if (!any) throw Error(Stage::resolution, "sup_norm: the grid has no interior cell");
  best.argmax = grid_.center(best.index);
  return best;
}

SupResult SampledField::sup(const Ball& ball) const {
  SupResult best;
  bool any = false;
  grid_.for_each_cell_in_ball(ball.center, ball.radius, [&](std::size_t idx) {
    if (!any || values_[idx] > best.value) {
      best.value = values_[idx];
      best.index = idx;
      any = true;
    }
  });
  if (any) best.argmax = grid_.center(best.index);
  return best;
}

SupResult SampledField::sup(const MeasurableSet& set) const {
  SupResult best;
  bool any = false;
  for (std::size_t idx = 0; idx < values_.size(); ++idx) {
    if (!set.contains_cell(idx)) continue;
    if (!any || values_[idx] > best.value) {
      best.value = values_[idx];
      best.index = idx;
      any = true;
    }
  }
  if (!any) throw Error(Stage::infeasible, "sup_norm: the set is empty on the grid");
  best.argmax = grid_.center(best.index);
  return best;
}

bool SampledField::ball_has_cells(const Ball& ball) const {
  bool any = false;
  grid_.for_each_cell_in_ball(ball.center, ball.radius, [&](std::size_t) { any = true; });
  return any;
}

SupResult sup_norm(const FunctionModel& f, const Grid& grid) { return SampledField(f, grid).sup(); }

SupResult sup_norm(const FunctionModel& f, const Ball& ball, const Grid& grid) {
  SupResult best;
  bool any = false;
  grid.for_each_cell_in_ball(ball.center, ball.radius, [&](std::size_t idx) {
    const double v = std::abs(f.evaluate(grid.center(idx)));
    if (!any || v > best.value) {
      best = SupResult{v, idx, grid.center(idx)};
      any = true;
    }
  });
  if (!any) throw Error(Stage::resolution, "sup_norm: the ball holds no grid cell");
  return best;
}

SupResult sup_norm(const FunctionModel& f, const MeasurableSet& set) {
  const Grid& grid = set.grid();
  SupResult best;
  bool any = false;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (!set.contains_cell(idx)) continue;
    const double v = std::abs(f.evaluate(grid.center(idx)));
    if (!any || v > best.value) {
      best = SupResult{v, idx, grid.center(idx)};
      any = true;
    }
  }
  if (!any) throw Error(Stage::infeasible, "sup_norm: the set is empty on the grid");
  return best;
}

// ------------------------------------------------------------------ Gevrey

GevreyReport verify_gevrey(const FunctionModel& f, const GevreyCertificate& cert,
                           const Grid& grid, int kmax, int directions) {
  validate(cert);
  if (kmax < 1) throw Error(Stage::config, "verify_gevrey: kmax must be >= 1");
  GevreyReport report;
  report.domain_sup = SampledField(f, grid).sup().value;
  if (report.domain_sup == 0.0)
    throw Error(Stage::hypothesis, "verify_gevrey: f vanishes on the grid, no certificate applies");

  std::vector<std::size_t> points;
  const std::size_t stride = std::max<std::size_t>(1, grid.interior_count() / 2048);
  std::size_t seen = 0;
  for (std::size_t idx = 0; idx < grid.size(); ++idx)
    if (grid.interior(idx) && seen++ % stride == 0) points.push_back(idx);

  std::vector<Point> dirs;
  if (grid.dimension() == 1) {
    dirs = {Point{1.0, 0.0}};
  } else {
    for (int q = 0; q < directions; ++q) {
      const double a = std::numbers::pi * q / directions;
      dirs.push_back({std::cos(a), std::sin(a)});
    }
  }

  struct Worst {
    double value = 0.0;
    std::size_t point = 0;
    std::size_t dir = 0;
  };
  std::vector<Worst> per_k(static_cast<std::size_t>(kmax));
  parallel_for(static_cast<std::size_t>(kmax), [&](std::size_t kk) {
    const int k = static_cast<int>(kk) + 1;
    Worst w;
    for (std::size_t p = 0; p < points.size(); ++p) {
      const Point x = grid.center(points[p]);
      for (std::size_t d = 0; d < dirs.size(); ++d) {
        const double v = std::abs(f.directional_derivative(x, dirs[d], k));
        if (v > w.value) w = {v, p, d};
      }
    }
    per_k[kk] = w;
  });

  const double log_sup = std::log(report.domain_sup);
  double worst = -kInf;
  for (int k = 1; k <= kmax; ++k) {
    const Worst& w = per_k[static_cast<std::size_t>(k - 1)];
    double lr = -kInf;
    if (w.value > 0.0)
      lr = std::log(w.value) + k * std::log(cert.delta) - cert.sigma * log_factorial(k) - log_sup;
    report.log_ratio.push_back(lr);
    if (k == 1 || lr > worst) {
      worst = lr;
      report.worst_k = k;
      report.worst_point = grid.center(points[w.point]);
      report.worst_direction = dirs[w.dir];
    }
  }
  report.max_ratio = std::exp(worst);
  report.passed = worst <= std::log(cert.M) + 1e-12;
  return report;
}

namespace {

struct ClosedForm {
  double log_A = -kInf;
  double delta = kInf;
};

ClosedForm closed_form(const FunctionModel& f, const Domain& domain) {
  switch (f.kind()) {
    case ModelKind::constant:
      return {LogValue::from_value(std::abs(f.constant_value())).log(), kInf};
    case ModelKind::trig_sum: {
      std::vector<double> logs;
      double max_freq = 0.0;
      for (const TrigTerm& t : f.trig_terms()) {
        if (t.amplitude == 0.0) continue;
        logs.push_back(std::log(std::abs(t.amplitude)));
        max_freq = std::max(max_freq, std::hypot(t.frequency[0], t.frequency[1]));
      }
      return {logs.empty() ? -kInf : log_sum_exp(logs),
              max_freq > 0 ? 1.0 / (kTwoPi * max_freq) : kInf};
    }
    case ModelKind::gaussian: {
      std::vector<double> logs;
      double w = kInf;
      for (const GaussianTerm& g : f.gaussian_terms()) {
        if (g.amplitude == 0.0) continue;
        logs.push_back(std::log(std::abs(g.amplitude)));
        w = std::min(w, g.width);
      }
      return {logs.empty() ? -kInf : std::log(kCramer) + log_sum_exp(logs), w};
    }
    case ModelKind::polynomial: {
      // k-th derivative of a product of deg linear factors along a unit
      // direction: <= k! C(deg, k) R^(deg-k) <= k! (2 max(R,1))^deg.
      const double R = std::max(1.0, polynomial_radius(domain));
      std::vector<double> logs;
      bool nonconstant = false;
      for (const Monomial& m : f.monomials()) {
        if (m.coefficient == 0.0) continue;
        const int deg = m.px + m.py;
        nonconstant = nonconstant || deg > 0;
        logs.push_back(std::log(std::abs(m.coefficient)) + deg * std::log(2.0 * R));
      }
      return {logs.empty() ? -kInf : log_sum_exp(logs), nonconstant ? 1.0 : kInf};
    }
    case ModelKind::product: {
      // Leibniz: sum_j C(k,j) j! (k-j)! d1^-j d2^-(k-j) <= k! (k+1) dmin^-k <= k! (2/dmin)^k
      const ClosedForm a = closed_form(f.factor(0), domain);
      const ClosedForm b = closed_form(f.factor(1), domain);
      ClosedForm out{a.log_A + b.log_A, kInf};
      if (std::isinf(a.delta)) out.delta = b.delta;
      else if (std::isinf(b.delta)) out.delta = a.delta;
      else out.delta = 0.5 * std::min(a.delta, b.delta);
      return out;
    }
  }
  return {};
}

}  // namespace

GevreyCertificate closed_form_gevrey(const FunctionModel& f, const Domain& domain,
                                     double domain_sup) {
  if (!(domain_sup > 0.0))
    throw Error(Stage::hypothesis, "closed_form_gevrey: f vanishes on the grid");
  const ClosedForm cf = closed_form(f, domain);
  GevreyCertificate cert;
  cert.sigma = 1.0;
  cert.delta = cf.delta;
  cert.M = std::max(1.0, std::exp(cf.log_A - std::log(domain_sup)));
  if (!std::isfinite(cert.M))
    throw Error(Stage::infeasible, "closed_form_gevrey: derivative bound overflows");
  return cert;
}

// ------------------------------------------------------ doubling / UCP

namespace {

double radical_inverse(unsigned i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * (i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

std::vector<Point> halton_centers(const Domain& domain, int count) {
  std::vector<Point> out;
  for (unsigned i = 1; out.size() < static_cast<std::size_t>(count) && i < 1000000u; ++i) {
    Point p{radical_inverse(i, 2) * domain.extent(0),
            domain.dimension() == 2 ? radical_inverse(i, 3) * domain.extent(1) : 0.0};
    if (domain.contains(p)) out.push_back(p);
  }
  return out;
}

std::vector<double> default_radii(double r0) { return {r0 / 8, r0 / 4, r0 / 2, r0}; }

std::vector<double> dyadic_radii(double r0, double smallest) {
  std::vector<double> out{r0};
  for (double r = r0 / 2; r >= smallest || out.size() < 4; r /= 2) out.push_back(r);
  std::reverse(out.begin(), out.end());
  return out;
}

double grid_radius_floor(const Grid& grid) {
  double h = grid.h(0);
  if (grid.domain().dimension() == 2) h = std::max(h, grid.h(1));
  return 2.0 * h;
}

DoublingReport estimate_doubling(const SampledField& field, const std::vector<double>& radii,
                                 const std::vector<Point>& centers) {
  if (radii.empty() || centers.empty())
    throw Error(Stage::config, "estimate_doubling: need radii and centres");
  for (double r : radii)
    if (!(r > 0.0)) throw Error(Stage::config, "estimate_doubling: radii must be positive");

  struct Sample {
    double log_ratio = -kInf;
    bool used = false;
  };
  const std::size_t nr = radii.size();
  std::vector<Sample> samples(centers.size() * nr);
  parallel_for(centers.size(), [&](std::size_t c) {
    for (std::size_t k = 0; k < nr; ++k) {
      const Ball inner{centers[c], radii[k]};
      if (!field.ball_has_cells(inner)) continue;
      const double in = field.sup(inner).value;
      const double out = field.sup(Ball{centers[c], 2.0 * radii[k]}).value;
      Sample& s = samples[c * nr + k];
      s.used = true;
      s.log_ratio = in > 0.0 ? std::log(out) - std::log(in) : kInf;
    }
  });

  DoublingReport report;
  double worst = -kInf;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].used) continue;
    ++report.samples;
    if (report.samples == 1 || samples[i].log_ratio > worst) {
      worst = samples[i].log_ratio;
      report.worst_center = centers[i / nr];
      report.worst_radius = radii[i % nr];
    }
  }
  if (report.samples == 0)
    throw Error(Stage::resolution, "estimate_doubling: no sample ball holds a grid cell");
  report.kappa_hat = std::exp(worst);
  report.finite = std::isfinite(report.kappa_hat);
  report.certificate.kappa = std::max(report.kappa_hat, 2.0);
  report.certificate.r0 = *std::max_element(radii.begin(), radii.end());
  return report;
}

UcpReport verify_ucp(const SampledField& field, const UcpCertificate& cert,
                     const std::vector<double>& radii, const std::vector<Point>& centers) {
  validate(cert);
  if (radii.empty() || centers.empty())
    throw Error(Stage::config, "verify_ucp: need radii and centres");
  const double log_sup = std::log(field.sup().value);

  const std::size_t nr = radii.size();
  std::vector<double> gap(centers.size() * nr, -kInf);  // log(sup_Omega / sup_B)
  std::vector<std::uint8_t> used(gap.size(), 0);
  parallel_for(centers.size(), [&](std::size_t c) {
    for (std::size_t k = 0; k < nr; ++k) {
      const Ball ball{centers[c], radii[k]};
      if (!field.ball_has_cells(ball)) continue;
      const double in = field.sup(ball).value;
      gap[c * nr + k] = in > 0.0 ? log_sup - std::log(in) : kInf;
      used[c * nr + k] = 1;
    }
  });

  UcpReport report;
  report.worst_margin = kInf;
  for (std::size_t i = 0; i < gap.size(); ++i) {
    if (!used[i]) continue;
    ++report.samples;
    const double r = radii[i % nr];
    const double margin = cert.a / std::pow(r, cert.b) - gap[i];
    report.required_a = std::max(report.required_a, std::pow(r, cert.b) * gap[i]);
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      report.worst_center = centers[i / nr];
      report.worst_radius = r;
    }
  }
  if (report.samples == 0)
    throw Error(Stage::resolution, "verify_ucp: no sample ball holds a grid cell");
  report.passed = report.worst_margin >= 0.0;
  return report;
}

}  // namespace obscert
