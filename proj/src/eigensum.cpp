#include "obscert/eigensum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "obscert/csv.hpp"
#include "obscert/errors.hpp"
#include "obscert/logspace.hpp"
#include "obscert/parallel.hpp"

namespace obscert {

namespace {

constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

int shell_of(const Mode& m) { return m.k[0] * m.k[0] + m.k[1] * m.k[1]; }

TrigTerm as_term(const Mode& m) { return TrigTerm{m.k, m.amplitude, m.phase}; }

double gamma_base(double lambda, int m) {
  return std::sqrt(lambda) + (m > 1 ? m * m * std::log(static_cast<double>(m)) : 0.0) + 1.0;
}

double slope_of(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

double smallest_power_of_two_covering(const std::vector<double>& base,
                                      const std::vector<double>& log_kappa) {
  double C = 1.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (!std::isfinite(log_kappa[i]))
      throw Error(Stage::hypothesis, "calibration: a member has an infinite doubling ratio");
    while (C * base[i] < log_kappa[i]) C *= 2.0;
  }
  return C;
}

}  // namespace

EigenSum EigenSum::build(int dimension, std::vector<Mode> modes, bool allow_constant) {
  if (dimension != 1 && dimension != 2) throw Error(Stage::config, "eigen-sum dimension must be 1 or 2");
  if (modes.empty()) throw Error(Stage::config, "eigen-sum needs at least one mode");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const Mode& a = modes[i];
    if (dimension == 1 && a.k[1] != 0) throw Error(Stage::config, "1D modes have a single frequency");
    if (shell_of(a) == 0 && !allow_constant)
      throw Error(Stage::config, "zero frequency mode needs allow_constant");
    if (!std::isfinite(a.amplitude) || !std::isfinite(a.phase))
      throw Error(Stage::config, "mode amplitude and phase must be finite");
    for (std::size_t j = 0; j < i; ++j)
      if (modes[j].k == a.k) throw Error(Stage::config, "duplicate mode in eigen-sum");
  }
  EigenSum es;
  es.dim_ = dimension;
  es.modes_ = std::move(modes);
  for (const Mode& m : es.modes_) es.shells_.push_back(shell_of(m));
  std::sort(es.shells_.begin(), es.shells_.end());
  es.shells_.erase(std::unique(es.shells_.begin(), es.shells_.end()), es.shells_.end());
  std::vector<TrigTerm> terms;
  for (const Mode& m : es.modes_) terms.push_back(as_term(m));
  es.model_ = FunctionModel::trig_sum(std::move(terms));
  return es;
}

double EigenSum::eigenvalue(std::size_t i) const { return kFourPiSq * shells_.at(i); }

double EigenSum::lambda() const { return eigenvalue(shells_.size() - 1); }

FunctionModel EigenSum::component(std::size_t i) const {
  std::vector<TrigTerm> terms;
  for (const Mode& m : modes_)
    if (shell_of(m) == shells_.at(i)) terms.push_back(as_term(m));
  return FunctionModel::trig_sum(std::move(terms));
}

double EigenSum::eigen_laplacian(Point p) const {
  double sum = 0.0;
  for (const Mode& m : modes_)
    sum += kFourPiSq * shell_of(m) * m.amplitude *
           std::cos(2.0 * std::numbers::pi * (m.k[0] * p.x + m.k[1] * p.y) + m.phase);
  return sum;
}

double l2_norm(const Grid& grid, const std::function<double(Point)>& g) {
  double sum = 0.0;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (!grid.interior(idx)) continue;
    const double v = g(grid.center(idx));
    sum += v * v;
  }
  return std::sqrt(sum * grid.cell_volume());
}

OrthogonalityReport orthogonality_check(const EigenSum& es, const Grid& grid) {
  const Domain& dom = grid.domain();
  if (!dom.periodic() || dom.dimension() != es.dimension())
    throw Error(Stage::config, "orthogonality_check needs a torus grid of the eigen-sum's dimension");
  for (int a = 0; a < es.dimension(); ++a) {
    int top = 0;
    for (const Mode& m : es.modes()) top = std::max(top, std::abs(m.k[a]));
    if (grid.cells(a) < 4.0 * top * dom.extent(a))
      throw Error(Stage::config, "grid aliases the eigen-sum: need 4 cells per period");
  }

  OrthogonalityReport report;
  const std::size_t m = static_cast<std::size_t>(es.m());
  std::vector<std::vector<double>> values(m, std::vector<double>(grid.size(), 0.0));
  std::vector<double> norms(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const FunctionModel phi = es.component(i);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) values[i][idx] = phi.evaluate(grid.center(idx));
    double s = 0.0;
    for (double v : values[i]) s += v * v;
    norms[i] = std::sqrt(s * grid.cell_volume());
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      double s = 0.0;
      for (std::size_t idx = 0; idx < grid.size(); ++idx) s += values[i][idx] * values[j][idx];
      s *= grid.cell_volume();
      const double scale = std::max(1.0, norms[i] * norms[j]);
      report.max_inner_product = std::max(report.max_inner_product, std::abs(s) / scale);
    }
  }

  // Lap^n h from the model's partial derivatives, independent of the mode data.
  const FunctionModel& h = es.model();
  const double h_norm = l2_norm(grid, [&](Point p) { return h.evaluate(p); });
  const double lambda = es.lambda();
  report.power_bound_holds = true;
  for (int n = 1; n <= 4; ++n) {
    const double lap_norm = l2_norm(grid, [&](Point p) {
      if (es.dimension() == 1) return h.partial(p, 2 * n, 0);
      double s = 0.0;
      for (int j = 0; j <= n; ++j)
        s += std::exp(log_factorial(n) - log_factorial(j) - log_factorial(n - j)) *
             h.partial(p, 2 * j, 2 * (n - j));
      return s;
    });
    const double ratio = h_norm > 0.0 ? lap_norm / (std::pow(lambda, n) * h_norm) : 0.0;
    report.power_ratio.push_back(ratio);
    if (ratio > 1.0 + 1e-9) report.power_bound_holds = false;
  }
  report.passed = report.max_inner_product <= 1e-10 && report.power_bound_holds;
  return report;
}

GammaParams gamma_params(const EigenSum& es, double C_cal) {
  if (!(C_cal >= 1.0)) throw Error(Stage::config, "calibration constant must be >= 1");
  return GammaParams{C_cal, C_cal * gamma_base(es.lambda(), es.m())};
}

double calibrate_gamma(const std::vector<std::pair<EigenSum, double>>& members) {
  std::vector<double> base;
  std::vector<double> logk;
  for (const auto& [es, kappa_hat] : members) {
    base.push_back(gamma_base(es.lambda(), es.m()));
    logk.push_back(std::log(std::max(kappa_hat, 2.0)));
  }
  return smallest_power_of_two_covering(base, logk);
}

GrowthStudy doubling_growth_study(const std::vector<GrowthMember>& family, const Grid& grid,
                                  double r0, int centers) {
  if (family.empty()) throw Error(Stage::config, "growth study needs at least one member");
  GrowthStudy study;
  const std::vector<Point> pts = halton_centers(grid.domain(), centers);
  const std::vector<double> radii = dyadic_radii(r0, grid_radius_floor(grid));
  study.rows.resize(family.size());
  parallel_for(family.size(), [&](std::size_t i) {
    const SampledField field(family[i].f, grid);
    const DoublingReport d = estimate_doubling(field, radii, pts);
    GrowthRow& row = study.rows[i];
    row.label = family[i].label;
    row.lambda = family[i].lambda;
    row.m = family[i].m;
    row.kappa_hat = d.kappa_hat;
    row.kappa = d.certificate.kappa;
  });

  std::vector<double> base;
  std::vector<double> logk;
  for (const GrowthRow& row : study.rows) {
    base.push_back(gamma_base(row.lambda, row.m));
    logk.push_back(std::log(row.kappa));
  }
  study.C_cal = smallest_power_of_two_covering(base, logk);
  for (GrowthRow& row : study.rows) row.gamma = study.C_cal * gamma_base(row.lambda, row.m);

  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lx;
  std::vector<double> ly;
  for (const GrowthRow& row : study.rows) {
    x.push_back(std::sqrt(row.lambda));
    y.push_back(std::log(row.kappa_hat));
    if (row.kappa_hat > 2.0 && row.lambda > 0.0) {
      lx.push_back(std::log(std::sqrt(row.lambda)));
      ly.push_back(std::log(std::log(row.kappa_hat)));
    }
  }
  study.slope = slope_of(x, y);
  study.loglog_slope = slope_of(lx, ly);
  study.superlinear = lx.size() >= 2 && study.loglog_slope > 1.25;
  study.slope_bounded = study.slope <= study.C_cal;
  return study;
}

EigenCertificate certify_eigensum(const EigenSum& es, const MeasurableSet& set,
                                  const GammaParams& gp, double r0, int search_width) {
  const Domain& dom = set.grid().domain();
  if (!dom.periodic() || dom.dimension() != es.dimension())
    throw Error(Stage::config, "certify_eigensum needs a torus of the eigen-sum's dimension");
  EigenCertificate out;
  out.gamma = gp;
  const CertificationContext ctx(es.model(), set);
  DoublingCertificate dc{std::max(std::exp(gp.gamma), 2.0), r0};
  validate(dc);
  const GevreyCertificate gc = closed_form_gevrey(es.model(), dom, ctx.sup_domain().value);
  out.certificate = certify_sigma1(ctx, dc, gc, search_width);

  // Smallest C2 >= 1 with log C <= C2 gamma (log C2 - log |E|).
  const double log_rel = std::log(ctx.set_measure() / ctx.domain_measure());
  const double target = out.certificate.C.log();
  auto shape = [&](double c2) { return c2 * gp.gamma * (std::log(c2) - log_rel); };
  if (shape(1.0) >= target) {
    out.C2 = 1.0;
  } else {
    double lo = 1.0;
    double hi = 2.0;
    while (shape(hi) < target) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (shape(mid) >= target ? hi : lo) = mid;
    }
    out.C2 = hi;
  }
  out.certificate.notes.push_back("eigen-sum shape constant C2 = " + format_number(out.C2));
  return out;
}

std::string growth_csv(const GrowthStudy& study, const std::vector<double>& log10_C,
                       const std::vector<double>& ratios) {
  std::string out = csv_row({"lambda", "m", "gamma", "kappa_hat", "log10_C_certified",
                             "ratio_empirical"});
  for (std::size_t i = 0; i < study.rows.size(); ++i) {
    const GrowthRow& r = study.rows[i];
    out += csv_row({format_number(r.lambda), std::to_string(r.m), format_number(r.gamma),
                    format_number(r.kappa_hat),
                    i < log10_C.size() ? format_number(log10_C[i]) : "",
                    i < ratios.size() ? format_number(ratios[i]) : ""});
  }
  return out;
}

}  // namespace obscert
