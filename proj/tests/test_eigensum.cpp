#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "obscert/certify.hpp"
#include "obscert/eigensum.hpp"
#include "obscert/errors.hpp"
#include "support.hpp"

using namespace obscert;
using testing_support::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

Mode sine(int k, double amp = 1.0) { return Mode{{k, 0}, amp, -kPi / 2}; }

EigenSum random_sum(Rng& rng, int dim) {
  std::vector<Mode> modes;
  const int count = rng.integer(1, 5);
  while (static_cast<int>(modes.size()) < count) {
    Mode m{{rng.integer(-4, 4), dim == 2 ? rng.integer(-4, 4) : 0}, rng.uniform(-1, 1), rng.uniform(0, 6.28)};
    if (m.k[0] == 0 && m.k[1] == 0) continue;
    bool dup = false;
    for (const Mode& o : modes) dup = dup || o.k == m.k;
    if (!dup) modes.push_back(m);
  }
  return EigenSum::build(dim, modes);
}

MeasurableSet prefix(const Grid& g, double frac) {
  return MeasurableSet::from_predicate(g, [=](Point p) { return p.x < frac; });
}

}  // namespace

TEST_CASE("eigen-sum construction examples") {
  const auto one = EigenSum::build(1, {sine(1)});
  CHECK(one.m() == 1);
  CHECK(one.lambda() == doctest::Approx(4 * kPi * kPi).epsilon(1e-15));

  const auto two = EigenSum::build(1, {sine(1), sine(2)});
  CHECK(two.m() == 2);
  CHECK(two.lambda() == doctest::Approx(16 * kPi * kPi).epsilon(1e-15));
  CHECK(two.eigenvalue(0) == doctest::Approx(4 * kPi * kPi).epsilon(1e-15));

  const auto grouped = EigenSum::build(2, {Mode{{1, 0}, 1.0, 0.0}, Mode{{0, 1}, 0.5, 0.3}});
  CHECK(grouped.m() == 1);
  CHECK(grouped.lambda() >= 1.0);
}

TEST_CASE("eigen-sum construction errors") {
  CHECK_THROWS_AS((void)EigenSum::build(1, {}), Error);
  CHECK_THROWS_AS((void)EigenSum::build(1, {sine(2), sine(2, 0.5)}), Error);
  CHECK_THROWS_AS((void)EigenSum::build(1, {Mode{{0, 0}, 1.0, 0.0}}), Error);
  CHECK_NOTHROW((void)EigenSum::build(1, {Mode{{0, 0}, 1.0, 0.0}, sine(1)}, true));
  CHECK_THROWS_AS((void)EigenSum::build(1, {Mode{{1, 1}, 1.0, 0.0}}), Error);
  CHECK_THROWS_AS((void)EigenSum::build(3, {sine(1)}), Error);
}

TEST_CASE("minus the Laplacian of h equals sum lambda_i phi_i") {
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 1 + trial % 2;
    const EigenSum es = random_sum(rng, dim);
    const FunctionModel& h = es.model();
    for (int s = 0; s < 1000; ++s) {
      const Point p{rng.uniform(), dim == 2 ? rng.uniform() : 0.0};
      const double lap = h.partial(p, 2, 0) + (dim == 2 ? h.partial(p, 0, 2) : 0.0);
      double from_components = 0.0;
      for (int i = 0; i < es.m(); ++i) from_components += es.eigenvalue(i) * es.component(i).evaluate(p);
      const double scale = std::max(1.0, std::abs(es.eigen_laplacian(p)));
      CHECK(std::abs(-lap - es.eigen_laplacian(p)) <= 1e-8 * scale);
      CHECK(std::abs(from_components - es.eigen_laplacian(p)) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("orthogonality and the power bound") {
  const Grid g(Domain::circle(1.0), 64);
  const auto es = EigenSum::build(1, {sine(1), sine(2)});
  const OrthogonalityReport r = orthogonality_check(es, g);
  CHECK(r.passed);
  CHECK(r.max_inner_product <= 1e-10);
  REQUIRE(r.power_ratio.size() == 4);
  for (double q : r.power_ratio) CHECK(q <= 1.0);
  // ||Lap h|| / (lambda ||h||) = sqrt(1 + 16^2) / (4 sqrt(2)) / 4 for two unit modes
  CHECK(r.power_ratio[0] == doctest::Approx(std::sqrt(1.0 + 16.0) / (4.0 * std::sqrt(2.0))).epsilon(1e-10));
}

TEST_CASE("a single mode attains the power bound with equality") {
  const Grid g(Domain::torus(1.0, 1.0), 32);
  const auto es = EigenSum::build(2, {Mode{{2, 1}, 0.7, 0.4}});
  const OrthogonalityReport r = orthogonality_check(es, g);
  CHECK(r.passed);
  for (double q : r.power_ratio) CHECK(q == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("random eigen-sums pass the orthogonality check") {
  Rng rng(63);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 1 + trial % 2;
    const EigenSum es = random_sum(rng, dim);
    const Grid g(dim == 1 ? Domain::circle(1.0) : Domain::torus(1.0, 1.0), dim == 1 ? 64 : 32);
    const auto r = orthogonality_check(es, g);
    CHECK(r.passed);
  }
}

TEST_CASE("an aliased grid is rejected") {
  const auto es = EigenSum::build(1, {sine(1), sine(9)});
  CHECK_THROWS_AS((void)orthogonality_check(es, Grid(Domain::circle(1.0), 32)), Error);
  CHECK_NOTHROW((void)orthogonality_check(es, Grid(Domain::circle(1.0), 36)));
  CHECK_THROWS_AS((void)orthogonality_check(es, Grid(Domain::interval(1.0), 64)), Error);
}

TEST_CASE("gamma examples, linearity and monotonicity") {
  const auto one = EigenSum::build(1, {sine(1)});
  const auto two = EigenSum::build(1, {sine(1), sine(2)});
  CHECK(gamma_params(one, 1.0).gamma == doctest::Approx(2 * kPi + 1).epsilon(1e-15));
  CHECK(gamma_params(one, 1.0).gamma == doctest::Approx(7.283).epsilon(1e-4));
  CHECK(gamma_params(two, 1.0).gamma == doctest::Approx(4 * kPi + 4 * std::log(2.0) + 1).epsilon(1e-15));
  CHECK(gamma_params(two, 1.0).gamma == doctest::Approx(16.34).epsilon(1e-3));
  CHECK(gamma_params(two, 2.0).gamma == doctest::Approx(2 * gamma_params(two, 1.0).gamma).epsilon(1e-15));
  CHECK_THROWS_AS((void)gamma_params(one, 0.5), Error);
  for (int k = 1; k < 10; ++k) {
    CHECK(gamma_params(EigenSum::build(1, {sine(k + 1)}), 1.0).gamma >
          gamma_params(EigenSum::build(1, {sine(k)}), 1.0).gamma);
    std::vector<Mode> a;
    std::vector<Mode> b;
    for (int j = 1; j <= k; ++j) a.push_back(sine(j));
    b = a;
    b.insert(b.begin(), Mode{{0, 0}, 1.0, 0.0});
    // same lambda, one more distinct eigenvalue
    CHECK(gamma_params(EigenSum::build(1, b, true), 1.0).gamma > gamma_params(EigenSum::build(1, a), 1.0).gamma);
  }
}

TEST_CASE("growth study: constants stay at 2") {
  const Grid g(Domain::circle(1.0), 1024);
  std::vector<GrowthMember> fam;
  for (int k = 1; k <= 4; ++k)
    fam.push_back({"c" + std::to_string(k), 4 * kPi * kPi * k * k, 1, FunctionModel::constant(k)});
  const GrowthStudy s = doubling_growth_study(fam, g, 0.25);
  for (const GrowthRow& r : s.rows) {
    CHECK(r.kappa_hat == 1.0);
    CHECK(r.kappa == 2.0);
  }
  CHECK(s.C_cal == 1.0);
  CHECK(s.slope == doctest::Approx(0.0));
  CHECK_FALSE(s.superlinear);
}

TEST_CASE("growth study: sin(2 pi k x) grows at most linearly in sqrt(lambda)") {
  const Grid g(Domain::circle(1.0), 1024);
  std::vector<GrowthMember> fam;
  for (int k = 1; k <= 8; ++k) {
    const auto es = EigenSum::build(1, {sine(k)});
    fam.push_back({"k" + std::to_string(k), es.lambda(), es.m(), es.model()});
  }
  const GrowthStudy s = doubling_growth_study(fam, g, 0.0625);
  CHECK(s.slope_bounded);
  CHECK_FALSE(s.superlinear);
  CHECK(s.C_cal >= 1.0);
  for (const GrowthRow& r : s.rows) {
    CHECK(std::exp(r.gamma) >= r.kappa_hat);
    CHECK(r.kappa_hat < 20.0);
  }
  const std::string csv = growth_csv(s);
  CHECK(csv.rfind("lambda,m,gamma,kappa_hat,log10_C_certified,ratio_empirical\r\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
}

TEST_CASE("growth study flags a sharpening Gaussian family as superlinear") {
  const Grid g(Domain::interval(1.0), 2048);
  std::vector<GrowthMember> fam;
  for (int k = 1; k <= 8; ++k) {
    const double lambda = 4 * kPi * kPi * k * k;
    fam.push_back({"g" + std::to_string(k), lambda, 1,
                   FunctionModel::gaussian({GaussianTerm{{0.5, 0.0}, 0.4 / k, 1.0}})});
  }
  const GrowthStudy s = doubling_growth_study(fam, g, 0.25);
  CAPTURE(s.loglog_slope);
  CHECK(s.superlinear);
}

TEST_CASE("calibration picks the smallest power of two covering kappa_hat") {
  const auto es = EigenSum::build(1, {sine(1)});
  const double base = 2 * kPi + 1;
  CHECK(calibrate_gamma({{es, 3.0}}) == 1.0);
  CHECK(calibrate_gamma({{es, std::exp(base * 1.5)}}) == 2.0);
  CHECK(calibrate_gamma({{es, std::exp(base * 3.5)}}) == 4.0);
  CHECK_THROWS_AS((void)calibrate_gamma({{es, std::numeric_limits<double>::infinity()}}), Error);
}

TEST_CASE("eigen-sum certificates on half and full tori") {
  const Grid g(Domain::circle(1.0), 1024);
  const auto es = EigenSum::build(1, {sine(1)});
  const GammaParams gp = gamma_params(es, 1.0);

  const EigenCertificate half = certify_eigensum(es, prefix(g, 0.5), gp, 0.0625, 4);
  CHECK(half.certificate.doubling->kappa == doctest::Approx(std::exp(gp.gamma)));
  CHECK(std::isfinite(half.certificate.C.log()));
  const CertificationContext hctx(es.model(), prefix(g, 0.5));
  CHECK(soundness_check(half.certificate, empirical_ratio(hctx)).passed);
  CHECK(audit_trace(half.certificate).empty());
  CHECK(half.C2 >= 1.0);
  CHECK(half.certificate.C.log() <= half.C2 * gp.gamma * (std::log(half.C2) - std::log(0.5)) + 1e-9);

  const EigenCertificate full = certify_eigensum(es, MeasurableSet::full(g), gp, 0.0625, 4);
  const CertificationContext fctx(es.model(), MeasurableSet::full(g));
  CHECK(empirical_ratio(fctx).ratio == 1.0);
  CHECK(soundness_check(full.certificate, empirical_ratio(fctx)).passed);
}

TEST_CASE("eigen-sum certificates require a torus") {
  const auto es = EigenSum::build(1, {sine(1)});
  const Grid box(Domain::interval(1.0), 256);
  CHECK_THROWS_AS((void)certify_eigensum(es, MeasurableSet::full(box), gamma_params(es, 1.0), 0.25), Error);
}

TEST_CASE("log C grows by at most C2 gamma log 2 per halving of E") {
  const Grid g(Domain::circle(1.0), 1024);
  const auto es = EigenSum::build(1, {sine(1), sine(2, 0.5)});
  const GammaParams gp = gamma_params(es, 1.0);
  std::vector<double> x;
  std::vector<double> y;
  double c2 = 1.0;
  for (int j = 1; j <= 5; ++j) {
    const EigenCertificate ec = certify_eigensum(es, prefix(g, std::ldexp(1.0, -j)), gp, 0.0625, 4);
    x.push_back(j);
    y.push_back(ec.certificate.C.log());
    c2 = std::max(c2, ec.C2);
    CHECK(ec.certificate.C.log() <= ec.C2 * gp.gamma * (std::log(ec.C2) + j * std::log(2.0)) + 1e-9);
  }
  const double mx = 3.0;
  double my = 0.0;
  for (double v : y) my += v / 5;
  double sxy = 0.0;
  double sxx = 0.0;
  for (int i = 0; i < 5; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  CHECK(sxy / sxx <= c2 * gp.gamma * std::log(2.0));
}

TEST_CASE("eigen-sum certificates dominate brute-force ratios") {
  Rng rng(65);
  for (int trial = 0; trial < 8; ++trial) {
    const EigenSum es = random_sum(rng, 1);
    const Grid g(Domain::circle(1.0), 1024);
    const auto E = testing_support::coin_mask(g, rng.uniform(0.05, 0.5), rng);
    const CertificationContext ctx(es.model(), E);
    const auto h = testing_support::hypotheses(es.model(), g, 0.0625);
    const GammaParams gp = gamma_params(es, calibrate_gamma({{es, h.kappa_hat}}));
    const EigenCertificate ec = certify_eigensum(es, E, gp, 0.0625, 2);
    CHECK(soundness_check(ec.certificate, empirical_ratio(ctx)).passed);
  }
}
