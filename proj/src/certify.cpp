#include "obscert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <sstream>

#include "obscert/errors.hpp"
#include "obscert/parallel.hpp"

namespace obscert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog2 = std::log(2.0);
const double kLog4 = std::log(4.0);

double log_or_neg_inf(double v) { return v > 0.0 ? std::log(v) : -kInf; }

double log_add(double a, double b) {
  if (std::isinf(a) && a < 0) return b;
  if (std::isinf(b) && b < 0) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

bool log_leq(double lhs, double rhs) {
  if (std::isinf(lhs) && lhs < 0) return true;
  return lhs <= rhs + 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

// Largest j with rho 2^j <= r0, and the number of halvings rounded up.
std::pair<int, int> concentric_counts(double rho, double r0) {
  int floor_steps = 0;
  double radius = rho;
  while (radius * 2.0 <= r0) {
    radius *= 2.0;
    ++floor_steps;
  }
  return {floor_steps, radius == r0 ? floor_steps : floor_steps + 1};
}

TraceStep step(std::string name, std::string anchor, double lhs, double rhs, bool chain,
               std::string detail = {}) {
  TraceStep s;
  s.name = std::move(name);
  s.anchor = std::move(anchor);
  s.lhs_log = lhs;
  s.rhs_log = rhs;
  s.chain = chain;
  s.holds = log_leq(lhs, rhs);
  s.detail = std::move(detail);
  return s;
}

GevreyCertificate finite_delta(const GevreyCertificate& gc, double r_tilde0,
                               std::vector<std::string>& notes) {
  GevreyCertificate out = gc;
  if (std::isinf(gc.delta)) {
    out.delta = r_tilde0;
    notes.push_back("delta is infinite (finitely many nonzero derivatives); using delta = r_tilde0 = " +
                    fmt(r_tilde0));
  }
  return out;
}

// Steps shared by all branches that only concern the geometric construction.
void geometry_steps(const CertificationContext& ctx, const GevreyCertificate& gc,
                    const PipelineGeometry& g, double r_tilde0, std::vector<TraceStep>& trace) {
  const double set_measure = ctx.set_measure();
  trace.push_back(step("cover_count", "finite lattice cover by radius-r balls",
                       std::log(static_cast<double>(g.cover_count)),
                       std::log(static_cast<double>(g.cover_bound)), false,
                       "r = " + fmt(g.r) + ", " + std::to_string(g.cover_count) + " balls"));
  trace.push_back(step("pigeonhole", "densest ball of the cover",
                       std::log(set_measure / static_cast<double>(g.cover_count)),
                       log_or_neg_inf(g.densest.measure), false,
                       std::to_string(g.densest.cells) + " cells of E in ball " +
                           std::to_string(g.densest.index)));
  trace.push_back(step("radius_admissible", "radius choice stays below r_tilde0", std::log(g.r),
                       std::log(r_tilde0), false));
  trace.push_back(step("ray_trace", "one-dimensional trace on the best ray",
                       std::log(g.ray.measure()), std::log(g.ray.segment.t_max), false,
                       "direction " + std::to_string(g.ray.direction_index) + " of " +
                           std::to_string(g.ray.direction_count)));
  double min_gap = kInf;
  for (std::size_t i = 1; i < g.nodes.nodes.size(); ++i)
    min_gap = std::min(min_gap, g.nodes.nodes[i] - g.nodes.nodes[i - 1]);
  if (g.nodes.nodes.size() > 1)
    trace.push_back(step("node_separation", "separated nodes in the trace", std::log(g.nodes.gap),
                         std::log(min_gap), false, "g = |L cap E| / (n+1)"));
  // Worst index of the denominator bound against the actual node products.
  const std::vector<double> lower = denominator_lower_bound(g.n, g.nodes.gap);
  double worst = kInf;
  double worst_lhs = 0.0;
  double worst_rhs = 0.0;
  for (int i = 0; i <= g.n; ++i) {
    double actual = 0.0;
    for (int j = 0; j <= g.n; ++j)
      if (j != i) actual += std::log(std::abs(g.nodes.nodes[i] - g.nodes.nodes[j]));
    if (actual - lower[i] < worst) {
      worst = actual - lower[i];
      worst_lhs = lower[i];
      worst_rhs = actual;
    }
  }
  trace.push_back(step("denominator_bound", "node product lower bound i!(n-i)!g^n", worst_lhs,
                       worst_rhs, false));
  trace.push_back(step("node_data", "node values against sup over E", log_or_neg_inf(g.node_sup),
                       std::log(g.nu) + std::log(ctx.sup_set().value), false,
                       "nu = " + fmt(g.nu)));
  const int k = g.n + 1;
  const double model = ctx.f().log_derivative_bound(k, g.ray.segment.direction, ctx.domain());
  const double cert = std::isinf(gc.delta)
                          ? -kInf
                          : std::log(gc.M) + gc.sigma * log_factorial(k) - k * std::log(gc.delta) +
                                std::log(ctx.sup_domain().value);
  trace.push_back(step("gevrey_order", "Gevrey bound at the order used by the remainder", model,
                       cert, false, "k = " + std::to_string(k)));
}

struct DoublingAttempt {
  PipelineGeometry geometry;
  Propagation propagation;
  std::vector<ExponentTerm> terms;
  double gamma = 0.0;
  double rho0 = 0.0;
  double log_pc = 0.0;
  double log_A = 0.0;
  double log_C = 0.0;
};

// Resolves sup_Omega <= P r^-beta [poly + rem] with r = rho0 (S_E/S)^(1/(n+1)).
DoublingAttempt doubling_attempt(const CertificationContext& ctx, const DoublingCertificate& dc,
                                 const GevreyCertificate& gc, int n, double rho0, bool sigma1,
                                 double r_tilde0) {
  const double S = ctx.sup_domain().value;
  const double SE = ctx.sup_set().value;
  DoublingAttempt a;
  a.rho0 = rho0;
  const double r = rho0 * std::pow(SE / S, 1.0 / (n + 1));
  if (r > r_tilde0 * (1.0 + 1e-12))
    throw Error(Stage::internal, "radius choice exceeds r_tilde0");
  a.geometry = compute_geometry(ctx, n, r, gc);
  a.propagation = compute_propagation(ctx, dc, a.geometry);

  const double beta = std::log2(dc.kappa);
  const double log_kappa = std::log(dc.kappa);
  a.gamma = beta / (n + 1);
  a.log_pc = kLog4 + (a.propagation.chain_steps + 1) * log_kappa + beta * std::log(10.0 * dc.r0);
  const PipelineGeometry& g = a.geometry;
  const double rem_term =
      std::isinf(gc.delta)
          ? -kInf
          : std::log(gc.M) + (n + 1) * std::log(g.tau * rho0 / gc.delta) +
                (gc.sigma - 1.0) * log_factorial(n + 1);
  const double bracket = log_add(std::log(g.nu) + g.poly.log_factor, rem_term);
  a.terms.push_back({"log_pc", a.log_pc});
  if (sigma1) {
    a.terms.push_back({"-beta*log(r_tilde0)", -beta * std::log(r_tilde0)});
  } else {
    a.terms.push_back({"-beta*log(delta)", -beta * std::log(gc.delta)});
    a.terms.push_back({"(sigma-1)*beta*log(n+1)", (gc.sigma - 1.0) * beta * std::log(n + 1.0)});
  }
  a.terms.push_back({"gamma*log(M)", a.gamma * std::log(gc.M)});
  a.terms.push_back({"log_bracket", bracket});
  a.log_A = 0.0;
  for (const ExponentTerm& t : a.terms) a.log_A += t.value;
  a.log_C = std::max(0.0, a.log_A / (1.0 - a.gamma));
  return a;
}

void doubling_trace(const CertificationContext& ctx, const DoublingCertificate& dc,
                    const DoublingAttempt& a, ObservabilityCertificate& cert) {
  const PipelineGeometry& g = a.geometry;
  const Propagation& p = a.propagation;
  const double lk = std::log(dc.kappa);
  const double S = std::log(ctx.sup_domain().value);
  const double SE = std::log(ctx.sup_set().value);
  const double pr = log_add(g.poly.log_bound, g.log_remainder);
  const int K = p.chain_steps;
  const int J = p.concentric_steps;
  auto& t = cert.trace;

  double prev = S;
  auto chain = [&](std::string name, std::string anchor, double rhs, std::string detail = {}) {
    t.push_back(step(std::move(name), std::move(anchor), prev, rhs, true, std::move(detail)));
    prev = rhs;
  };
  chain("near_maximizer", "|f(x_bar)| >= sup|f| / 2 at the grid maximizer",
        kLog2 + std::log(ctx.sup_domain().value));
  chain("doubling_chain", "overlapping chain of balls from x_bar to x",
        kLog2 + K * lk + p.log_sup_target,
        "K = " + std::to_string(K) + ", r_hat = " + fmt(p.r_hat));
  chain("concentric_doubling", "concentric halvings from r_hat down to r/10",
        kLog2 + (K + J) * lk + std::log(g.sup_inner), "steps = " + std::to_string(J));
  chain("inner_maximizer", "|f(w)| >= sup over B_{r/10}(x) / 2",
        kLog4 + (K + J) * lk + std::log(g.f_w));
  chain("hermite_split", "|f(w)| <= sup_L |P| + sup_L |f - P|", kLog4 + (K + J) * lk + pr,
        "poly = " + fmt(g.poly.log_bound) + ", remainder = " + fmt(g.log_remainder) + " (logs)");
  chain("propagation_bound", "propagation factor 2 kappa^(K + ceil(log2(r0/rho)))",
        kLog2 + p.log_factor + pr);
  chain("exponent_resolution", "r substituted: A sup_Omega^gamma sup_E^(1-gamma)",
        a.log_A + a.gamma * S + (1.0 - a.gamma) * SE,
        "gamma = " + fmt(a.gamma));
  chain("observability", "sup_Omega <= A^(1/(1-gamma)) sup_E", a.log_C + SE);
  geometry_steps(ctx, cert.gevrey, g, cert.r_tilde0, t);
  t.push_back(step("gamma_below_one", "interpolation exponent gamma < 1", a.gamma, 1.0, false));
}

void fill_common(const CertificationContext& ctx, ObservabilityCertificate& cert) {
  cert.domain_measure = ctx.domain_measure();
  cert.set_measure = ctx.set_measure();
  cert.sup_domain = ctx.sup_domain().value;
  cert.sup_set = ctx.sup_set().value;
}

struct AttemptSlot {
  std::optional<DoublingAttempt> attempt;
  std::string failure;
  std::exception_ptr fatal;
};

ObservabilityCertificate run_doubling_branch(const CertificationContext& ctx,
                                             const DoublingCertificate& dc,
                                             const GevreyCertificate& gc, Branch branch,
                                             int n_start, int search_width, double r_tilde0,
                                             ObservabilityCertificate cert,
                                             const std::function<double(int)>& rho0_of) {
  std::vector<AttemptSlot> slots(static_cast<std::size_t>(search_width) + 1);
  parallel_for(slots.size(), [&](std::size_t i) {
    const int n = n_start + static_cast<int>(i);
    try {
      slots[i].attempt = doubling_attempt(ctx, dc, gc, n, rho0_of(n), branch == Branch::sigma1,
                                          r_tilde0);
    } catch (const Error& e) {
      if (e.stage() == Stage::resolution || e.stage() == Stage::infeasible)
        slots[i].failure = std::string(to_string(e.stage())) + ": " + e.what();
      else
        slots[i].fatal = std::current_exception();
    } catch (...) {
      slots[i].fatal = std::current_exception();
    }
  });
  for (const AttemptSlot& s : slots)
    if (s.fatal) std::rethrow_exception(s.fatal);

  const DoublingAttempt* best = nullptr;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    SearchRow row;
    row.n = n_start + static_cast<int>(i);
    if (slots[i].attempt) {
      row.feasible = true;
      row.r = slots[i].attempt->geometry.r;
      row.log_C = slots[i].attempt->log_C;
      if (!best || row.log_C < best->log_C) best = &*slots[i].attempt;
    } else {
      row.failure = slots[i].failure;
    }
    cert.search.push_back(row);
  }
  if (!best) {
    std::string why = "no degree in [" + std::to_string(n_start) + ", " +
                      std::to_string(n_start + search_width) + "] is feasible";
    if (!slots.front().failure.empty()) why += "; at n = " + std::to_string(n_start) + ": " + slots.front().failure;
    throw Error(Stage::infeasible, why);
  }
  if (slots.front().attempt) cert.log_C_prescribed = slots.front().attempt->log_C;

  cert.branch = branch;
  cert.doubling = dc;
  cert.C = LogValue::from_log(best->log_C);
  cert.n = best->geometry.n;
  cert.r = best->geometry.r;
  cert.gamma = best->gamma;
  cert.beta = std::log2(dc.kappa);
  cert.rho0 = best->rho0;
  cert.log_pc = best->log_pc;
  cert.propagation = best->propagation;
  cert.geometry = best->geometry;
  cert.exponent_terms = best->terms;
  doubling_trace(ctx, dc, *best, cert);
  return cert;
}

}  // namespace

const char* to_string(Branch branch) {
  switch (branch) {
    case Branch::sigma1: return "sigma1";
    case Branch::sigma_gt1: return "sigma-gt1";
    case Branch::ucp: return "ucp";
  }
  return "unknown";
}

// ------------------------------------------------------------------ context

CertificationContext::CertificationContext(FunctionModel f, MeasurableSet set, int directions)
    : f_(std::move(f)), set_(std::move(set)), field_(f_, set_.grid()), directions_(directions) {
  if (!f_.periodic_on(domain()))
    throw Error(Stage::config, "the function is not periodic on the torus domain");
  if (set_.count() == 0) throw Error(Stage::infeasible, "E has zero measure on the grid");
  sup_domain_ = field_.sup();
  if (sup_domain_.value == 0.0)
    throw Error(Stage::hypothesis, "f vanishes on the grid, no certificate applies");
  sup_set_ = field_.sup(set_);
  if (sup_set_.value == 0.0)
    throw Error(Stage::infeasible, "f vanishes on E: observability from null data is vacuous");
}

EmpiricalRatio empirical_ratio(const CertificationContext& ctx) {
  EmpiricalRatio r;
  r.sup_domain = ctx.sup_domain().value;
  r.sup_set = ctx.sup_set().value;
  r.ratio = r.sup_domain / r.sup_set;
  r.argmax_domain = ctx.sup_domain().argmax;
  r.argmax_set = ctx.sup_set().argmax;
  return r;
}

SoundnessVerdict soundness_check(const ObservabilityCertificate& cert, const EmpiricalRatio& ratio) {
  SoundnessVerdict v;
  v.slack = cert.C.log() - std::log(ratio.ratio);
  v.passed = v.slack >= 0.0;
  return v;
}

// ----------------------------------------------------------------- formulas

double propagate_doubling(const DoublingCertificate& dc, double r, int chain_steps) {
  if (!(r > 0.0) || r > dc.r0)
    throw Error(Stage::config, "propagate_doubling: need 0 < r <= r0");
  const int up = concentric_counts(r, dc.r0).second;
  return kLog2 + (chain_steps + up) * std::log(dc.kappa);
}

double choose_r_sigma1(int n, double sup_set, double sup_domain, double M, double r_tilde0) {
  if (!(sup_set > 0.0)) throw Error(Stage::infeasible, "choose_r: sup over E is zero");
  return r_tilde0 * std::exp((std::log(sup_set) - std::log(M) - std::log(sup_domain)) / (n + 1));
}

double choose_r_sigma_gt1(int n, double sup_set, double sup_domain, const GevreyCertificate& gc) {
  if (!(sup_set > 0.0)) throw Error(Stage::infeasible, "choose_r: sup over E is zero");
  const double log_r = std::log(gc.delta) +
                       (std::log(sup_set) - std::log(gc.M) - std::log(sup_domain)) / (n + 1) -
                       (gc.sigma - 1.0) * std::log(n + 1.0);
  return std::exp(log_r);
}

double choose_r_ucp(int n, double b) { return 10.0 * std::pow(b / (n + 1.0), 1.0 / b); }

int prescribed_degree_sigma1(double kappa) {
  return 2 * static_cast<int>(std::floor(std::log2(kappa))) + 2;
}

int prescribed_degree_sigma_gt1(double kappa, double B) {
  const double m = std::max(std::log2(kappa), B);
  if (m > 1e6) throw Error(Stage::infeasible, "prescribed degree is astronomically large");
  return 2 * static_cast<int>(std::floor(m)) + 1;
}

// ----------------------------------------------------------------- pipeline

PipelineGeometry compute_geometry(const CertificationContext& ctx, int n, double r,
                                  const GevreyCertificate& gc) {
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(Stage::config, "radius must be positive");
  const MeasurableSet& E = ctx.set();
  PipelineGeometry g;
  g.n = n;
  g.r = r;
  g.rho = r / 10.0;

  const std::vector<Ball> cover = cover_domain(ctx.domain(), r);
  g.cover_count = cover.size();
  g.cover_bound = cover_count_bound(ctx.domain(), r);
  g.densest = densest_ball(E, cover);
  if (g.densest.cells * cover.size() < E.count())
    throw Error(Stage::internal, "pigeonhole bound violated by densest_ball");

  const Ball inner{g.densest.ball.center, g.rho};
  if (!ctx.field().ball_has_cells(inner))
    throw Error(Stage::resolution, "r/10 = " + fmt(g.rho) + " holds no grid cell");
  const SupResult in = ctx.field().sup(inner);
  g.sup_inner = in.value;
  g.w = in.argmax;
  g.f_w = ctx.field().at(in.index);
  if (g.f_w == 0.0) throw Error(Stage::infeasible, "f vanishes on B_{r/10}(x)");

  g.ray = best_ray_interval(g.densest.ball, E, g.w, ctx.directions());
  g.nodes = separate_points(g.ray.trace, n);
  for (double x : g.nodes.nodes)
    g.node_sup = std::max(g.node_sup, std::abs(ctx.f().evaluate(g.ray.segment.at(x))));
  const double SE = ctx.sup_set().value;
  g.nu = std::max(1.0, g.node_sup / SE);
  const double t_max = g.ray.segment.t_max;
  g.poly = poly_sup_bound(n, t_max, g.nodes.gap, g.nu * SE);
  g.log_remainder = remainder_bound(n, t_max, gc, ctx.sup_domain().value);
  g.tau = t_max / r;
  return g;
}

Propagation compute_propagation(const CertificationContext& ctx, const DoublingCertificate& dc,
                                const PipelineGeometry& g) {
  if (g.rho > dc.r0) throw Error(Stage::internal, "r/10 exceeds the doubling radius");
  Propagation p;
  const auto [down, up] = concentric_counts(g.rho, dc.r0);
  p.concentric_steps = down;
  p.concentric_bound = up;
  p.r_hat = g.rho * std::pow(2.0, down);
  const Point x_bar = ctx.sup_domain().argmax;
  const Point x = g.densest.ball.center;
  const BallChain chain = chain_of_balls(ctx.grid(), x_bar, x, p.r_hat);
  p.chain_steps = chain.steps();
  p.chain_length = chain.path_length;
  p.log_factor = propagate_doubling(dc, g.rho, p.chain_steps);

  const double lk = std::log(dc.kappa);
  const SampledField& field = ctx.field();
  auto log_sup = [&](Point c, double radius) {
    return log_or_neg_inf(field.sup(Ball{c, radius}).value);
  };
  std::vector<double> links(chain.centers.size());
  parallel_for(links.size(), [&](std::size_t k) { links[k] = log_sup(chain.centers[k], p.r_hat); });
  p.worst_link = -kInf;
  for (std::size_t k = 0; k + 1 < links.size(); ++k) {
    const double excess = links[k] - links[k + 1] - lk;
    p.worst_link = std::max(p.worst_link, std::isnan(excess) ? kInf : excess);
    if (!log_leq(links[k], links[k + 1] + lk)) {
      const Point c = chain.centers[k + 1];
      throw Error(Stage::hypothesis, "doubling certificate fails along the chain near (" + fmt(c.x) +
                                         ", " + fmt(c.y) + ") at radius " + fmt(p.r_hat));
    }
  }
  p.log_sup_start = links.front();
  p.log_sup_target = links.back();
  double outer = p.log_sup_target;
  double radius = p.r_hat;
  for (int j = 0; j < down; ++j) {
    radius *= 0.5;
    const double inner = log_sup(x, radius);
    p.worst_link = std::max(p.worst_link, outer - inner - lk);
    if (!log_leq(outer, inner + lk))
      throw Error(Stage::hypothesis, "doubling certificate fails at (" + fmt(x.x) + ", " + fmt(x.y) +
                                         ") between radii " + fmt(radius) + " and " + fmt(2 * radius));
    outer = inner;
  }
  return p;
}

double master_bound(const Propagation& prop, const PipelineGeometry& g) {
  return kLog2 + prop.log_factor + log_add(g.poly.log_bound, g.log_remainder);
}

// ------------------------------------------------------------------ branches

ObservabilityCertificate certify_sigma1(const CertificationContext& ctx,
                                        const DoublingCertificate& dc,
                                        const GevreyCertificate& gc, int search_width) {
  validate(dc);
  validate(gc);
  if (gc.sigma != 1.0) throw Error(Stage::config, "certify_sigma1 needs sigma = 1");
  ObservabilityCertificate cert;
  fill_common(ctx, cert);
  cert.gevrey = gc;
  cert.r_tilde0 = std::min(dc.r0, 1.0);
  cert.n_prescribed = prescribed_degree_sigma1(dc.kappa);
  const double r_tilde0 = cert.r_tilde0;
  return run_doubling_branch(ctx, dc, gc, Branch::sigma1, cert.n_prescribed, search_width,
                             r_tilde0, std::move(cert), [&](int n) {
                               return r_tilde0 * std::pow(gc.M, -1.0 / (n + 1));
                             });
}

ObservabilityCertificate certify_sigma_gt1(const CertificationContext& ctx,
                                           const DoublingCertificate& dc,
                                           const GevreyCertificate& gc_in, int search_width) {
  validate(dc);
  validate(gc_in);
  if (!(gc_in.sigma > 1.0)) throw Error(Stage::config, "certify_sigma_gt1 needs sigma > 1");
  ObservabilityCertificate cert;
  fill_common(ctx, cert);
  cert.r_tilde0 = std::min(dc.r0, 1.0);
  const GevreyCertificate gc = finite_delta(gc_in, cert.r_tilde0, cert.notes);
  cert.gevrey = gc;
  const double B = std::pow(gc.delta / cert.r_tilde0, 1.0 / (gc.sigma - 1.0));
  cert.B = B;
  cert.n_prescribed = prescribed_degree_sigma_gt1(dc.kappa, B);
  cert.eta = std::log2(dc.kappa) / (cert.n_prescribed + 1);
  return run_doubling_branch(ctx, dc, gc, Branch::sigma_gt1, cert.n_prescribed, search_width,
                             cert.r_tilde0, std::move(cert), [&](int n) {
                               return gc.delta * std::pow(gc.M, -1.0 / (n + 1)) /
                                      std::pow(n + 1.0, gc.sigma - 1.0);
                             });
}

ObservabilityCertificate certify_ucp(const CertificationContext& ctx, const UcpCertificate& uc,
                                     const GevreyCertificate& gc_in) {
  validate(uc);
  validate(gc_in);
  if (gc_in.sigma >= 1.0 + 1.0 / uc.b)
    throw Error(Stage::hypothesis, "sigma = " + fmt(gc_in.sigma) + " >= 1 + 1/b = " +
                                       fmt(1.0 + 1.0 / uc.b) +
                                       ": the unique-continuation observability theorem needs "
                                       "1 <= sigma < 1 + 1/b");
  ObservabilityCertificate cert;
  fill_common(ctx, cert);
  cert.branch = Branch::ucp;
  cert.ucp = uc;
  cert.r_tilde0 = std::min(uc.r0, 1.0);
  const GevreyCertificate gc = finite_delta(gc_in, cert.r_tilde0, cert.notes);
  cert.gevrey = gc;

  const double a = uc.a;
  const double b = uc.b;
  const double ab = a / b;
  const double e = 1.0 / b - gc.sigma + 1.0;
  const double logS = std::log(ctx.sup_domain().value);
  const double logSE = std::log(ctx.sup_set().value);
  const double logM = std::log(gc.M);
  const double logQ = std::log(ctx.domain_measure() / ctx.set_measure());
  const double log_delta = std::log(gc.delta);
  const double threshold_radius = std::pow(10.0, b) * b / std::pow(cert.r_tilde0, b);

  double logC0 = 0.0;
  PipelineGeometry g;
  double logLambda = 0.0;
  double xi = 0.0;
  double X = 0.0;
  double log_q = 0.0;
  double a_rho = 0.0;
  int n0 = 0;
  bool settled = false;
  for (int iter = 1; iter <= 100 && !settled; ++iter) {
    cert.c0_iterations = iter;
    logLambda = logC0 + ab + logQ;
    const double log_contract = (kLog2 + logC0 + ab + std::log(b) / b - log_delta) / e;
    if (log_contract > std::log(1e6))
      throw Error(Stage::infeasible, "unique-continuation degree exceeds 10^6");
    X = std::max(threshold_radius, std::exp(log_contract));
    xi = (logM + logS - logSE) / (kLog2 + logLambda) + X;
    n0 = static_cast<int>(std::floor(xi));
    log_q = logC0 + ab + std::log(b) / b - log_delta - e * std::log(n0 + 1.0);
    if (log_q > -kLog2 + 1e-12)
      throw Error(Stage::internal, "contraction factor exceeds 1/2 at the computed degree");
    const double r = choose_r_ucp(n0, b);
    if (r > cert.r_tilde0 * (1.0 + 1e-12))
      throw Error(Stage::internal, "unique-continuation radius exceeds r_tilde0");
    g = compute_geometry(ctx, n0, r, gc);
    a_rho = a / std::pow(g.rho, b);
    // Measured constants must fit the assembled two-term form with this C0.
    const int n = n0;
    const double need_poly =
        (kLog2 + a_rho + g.poly.log_bound - ab - n * (ab + logQ) - logSE) / (n + 1);
    double need_rem = -kInf;
    if (!std::isinf(g.log_remainder))
      need_rem = (kLog2 + a_rho + g.log_remainder - ab - logM -
                  (n + 1) * (ab + std::log(b) / b - log_delta - e * std::log(n + 1.0)) - logS) /
                 (n + 2);
    const double need = std::max({0.0, need_poly, need_rem});
    if (logC0 >= need) {
      settled = true;
    } else {
      logC0 = need + 1e-9;
    }
  }
  if (!settled) throw Error(Stage::infeasible, "C0 did not settle within 100 iterations");

  // The consulted unique-continuation ball.
  if (!log_leq(logS, a_rho + std::log(g.sup_inner)))
    throw Error(Stage::hypothesis, "unique-continuation certificate fails at B_{r/10}(x) with r/10 = " +
                                       fmt(g.rho));

  cert.C0 = std::exp(logC0);
  cert.xi = xi;
  cert.xi_threshold = X;
  cert.n = n0;
  cert.n_prescribed = n0;
  cert.r = g.r;
  cert.contraction = std::exp(log_q);
  cert.log_lambda = logLambda;
  cert.gamma = logLambda / (kLog2 + logLambda);
  cert.log_C1 = logC0 + ab + cert.gamma * logM + log_add(X * logLambda, -X * kLog2);
  const double logC = std::max(0.0, cert.log_C1 / (1.0 - cert.gamma));
  cert.C = LogValue::from_log(logC);
  cert.log_C_prescribed = logC;
  cert.geometry = g;
  cert.exponent_terms = {{"log_C0", logC0},
                         {"a/b", ab},
                         {"gamma*log(M)", cert.gamma * logM},
                         {"log(Lambda^X + 2^-X)", log_add(X * logLambda, -X * kLog2)}};
  cert.search.push_back(SearchRow{n0, g.r, true, logC, {}});

  const double pr = log_add(g.poly.log_bound, g.log_remainder);
  auto& t = cert.trace;
  double prev = logS;
  auto chain = [&](std::string name, std::string anchor, double rhs, std::string detail = {}) {
    t.push_back(step(std::move(name), std::move(anchor), prev, rhs, true, std::move(detail)));
    prev = rhs;
  };
  chain("unique_continuation", "sup_Omega <= exp(a/(r/10)^b) sup over B_{r/10}(x)",
        a_rho + std::log(g.sup_inner), "r/10 = " + fmt(g.rho));
  chain("inner_maximizer", "|f(w)| >= sup over B_{r/10}(x) / 2", kLog2 + a_rho + std::log(g.f_w));
  chain("hermite_split", "|f(w)| <= sup_L |P| + sup_L |f - P|", kLog2 + a_rho + pr);
  chain("radius_substitution", "r = 10 (b/(n+1))^(1/b) with measured C0",
        logC0 + ab + log_add(n0 * logLambda + logSE, logM + (n0 + 1) * log_q + logS),
        "C0 = " + fmt(cert.C0));
  chain("contraction", "contraction factor <= 1/2 at n0",
        logC0 + ab + log_add(n0 * logLambda + logSE, logM - (n0 + 1) * kLog2 + logS));
  chain("threshold", "n0 <= xi < n0 + 1",
        logC0 + ab + log_add(xi * logLambda + logSE, logM - xi * kLog2 + logS),
        "xi = " + fmt(xi));
  chain("interpolation_exponent", "C1 sup_Omega^gamma sup_E^(1-gamma)",
        cert.log_C1 + cert.gamma * logS + (1.0 - cert.gamma) * logSE, "gamma = " + fmt(cert.gamma));
  chain("observability", "sup_Omega <= C1^(1/(1-gamma)) sup_E", logC + logSE);
  geometry_steps(ctx, gc, g, cert.r_tilde0, t);
  t.push_back(step("contraction_factor", "C0 e^(a/b) b^(1/b) / (delta (n+1)^(1/b-sigma+1)) <= 1/2",
                   log_q, -kLog2, false));
  t.push_back(step("sigma_range", "1 <= sigma < 1 + 1/b", gc.sigma, 1.0 + 1.0 / b, false));
  return cert;
}

std::vector<std::string> audit_trace(const ObservabilityCertificate& cert) {
  std::vector<std::string> failures;
  const TraceStep* last = nullptr;
  for (const TraceStep& s : cert.trace) {
    if (!log_leq(s.lhs_log, s.rhs_log)) failures.push_back(s.name);
    if (s.chain) {
      if (last && !log_leq(s.lhs_log, last->rhs_log)) failures.push_back(s.name + ":composition");
      if (!last && !log_leq(std::log(cert.sup_domain), s.lhs_log))
        failures.push_back(s.name + ":start");
      last = &s;
    }
  }
  if (!last) {
    failures.push_back("empty_chain");
  } else if (!log_leq(last->rhs_log, cert.C.log() + std::log(cert.sup_set))) {
    failures.push_back(last->name + ":end");
  }
  return failures;
}

}  // namespace obscert
