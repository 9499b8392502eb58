#pragma once

#include <optional>
#include <string>
#include <vector>

#include "obscert/functions.hpp"
#include "obscert/geometry.hpp"
#include "obscert/interp.hpp"
#include "obscert/logspace.hpp"

namespace obscert {

enum class Branch { sigma1, sigma_gt1, ucp };

const char* to_string(Branch branch);

/// One inequality lhs <= rhs of a certificate, both sides as natural logs.
/// Chain steps compose: each chain step's lhs equals the previous rhs.
struct TraceStep {
  std::string name;
  std::string anchor;   ///< the argument step this inequality instantiates
  double lhs_log = 0.0;
  double rhs_log = 0.0;
  bool chain = false;
  bool holds = false;
  std::string detail;
};

/// A named summand of log A, where sup_Omega <= A sup_Omega^gamma sup_E^(1-gamma)
/// and C = A^(1/(1-gamma)).
struct ExponentTerm {
  std::string name;
  double value = 0.0;
};

/// Everything measured by one run of the geometric pipeline at (n, r).
struct PipelineGeometry {
  int n = 0;
  double r = 0.0;
  double rho = 0.0;                ///< r / 10, radius of the ball holding w
  std::size_t cover_count = 0;
  std::size_t cover_bound = 0;
  DensestBall densest;
  Point w;
  double sup_inner = 0.0;          ///< grid sup over B_rho(x)
  RayChoice ray;
  NodeSet nodes;
  double node_sup = 0.0;           ///< max |f(x_i)|
  double nu = 1.0;                 ///< max(1, node_sup / sup_E)
  PolyBound poly;                  ///< data sup = nu * sup_E
  double log_remainder = 0.0;
  double tau = 0.0;                ///< t_max / r
  double f_w = 0.0;                ///< |f(w)|
};

/// Propagation from the near-maximizer to B_rho(x) by doubling.
struct Propagation {
  double r_hat = 0.0;              ///< rho * 2^floor(log2(r0/rho))
  int chain_steps = 0;             ///< K
  double chain_length = 0.0;
  int concentric_steps = 0;        ///< floor(log2(r0/rho))
  int concentric_bound = 0;        ///< ceil(log2(r0/rho))
  double log_factor = 0.0;         ///< log(2 kappa^(K + ceil(log2(r0/rho))))
  double log_sup_start = 0.0;      ///< log sup_{B_r_hat(x_bar)}
  double log_sup_target = 0.0;     ///< log sup_{B_r_hat(x)}
  double worst_link = 0.0;         ///< max over links of log(lhs / (kappa rhs))
};

struct SearchRow {
  int n = 0;
  double r = 0.0;
  bool feasible = false;
  double log_C = 0.0;
  std::string failure;
};

struct ObservabilityCertificate {
  Branch branch = Branch::sigma1;
  LogValue C = LogValue::one();
  int n = 0;
  double r = 0.0;
  double gamma = 0.0;

  GevreyCertificate gevrey;
  std::optional<DoublingCertificate> doubling;
  std::optional<UcpCertificate> ucp;

  double domain_measure = 0.0;
  double set_measure = 0.0;
  double sup_domain = 0.0;
  double sup_set = 0.0;
  double r_tilde0 = 0.0;

  // doubling branches
  double beta = 0.0;               ///< log2 kappa
  int n_prescribed = 0;            ///< n0 (sigma = 1) or n1 (sigma > 1)
  std::optional<double> log_C_prescribed;
  double rho0 = 0.0;               ///< r = rho0 (sup_E / sup_Omega)^(1/(n+1))
  double log_pc = 0.0;             ///< log(4 kappa^(K+1) (10 r0)^beta)
  std::optional<double> B;         ///< (delta / r_tilde0)^(1/(sigma-1))
  std::optional<double> eta;       ///< log2 kappa / (n1 + 1)
  Propagation propagation;

  // unique-continuation branch
  double C0 = 0.0;
  double log_C1 = 0.0;
  double xi = 0.0;
  double xi_threshold = 0.0;       ///< the max{...} part of xi
  double contraction = 0.0;
  double log_lambda = 0.0;         ///< log(C0 e^(a/b) |Omega|/|E|)
  int c0_iterations = 0;

  PipelineGeometry geometry;
  std::vector<ExponentTerm> exponent_terms;
  std::vector<TraceStep> trace;
  std::vector<SearchRow> search;
  std::vector<std::string> notes;
};

/// The inputs shared by every branch: f sampled on E's grid.
class CertificationContext {
 public:
  CertificationContext(FunctionModel f, MeasurableSet set, int directions = 64);

  [[nodiscard]] const FunctionModel& f() const { return f_; }
  [[nodiscard]] const MeasurableSet& set() const { return set_; }
  [[nodiscard]] const Grid& grid() const { return set_.grid(); }
  [[nodiscard]] const Domain& domain() const { return set_.grid().domain(); }
  [[nodiscard]] const SampledField& field() const { return field_; }
  [[nodiscard]] const SupResult& sup_domain() const { return sup_domain_; }
  [[nodiscard]] const SupResult& sup_set() const { return sup_set_; }
  [[nodiscard]] double domain_measure() const { return set_.grid().domain_measure(); }
  [[nodiscard]] double set_measure() const { return measure(set_); }
  [[nodiscard]] int directions() const { return directions_; }

 private:
  FunctionModel f_;
  MeasurableSet set_;
  SampledField field_;
  SupResult sup_domain_;
  SupResult sup_set_;
  int directions_;
};

struct EmpiricalRatio {
  double sup_domain = 0.0;
  double sup_set = 0.0;
  double ratio = 0.0;
  Point argmax_domain;
  Point argmax_set;
};

EmpiricalRatio empirical_ratio(const CertificationContext& ctx);

struct SoundnessVerdict {
  bool passed = false;
  double slack = 0.0;   ///< log C - log ratio
};

SoundnessVerdict soundness_check(const ObservabilityCertificate& cert, const EmpiricalRatio& ratio);

/// log(2 kappa^(K + ceil(log2(r0 / r)))); throws when r > r0.
double propagate_doubling(const DoublingCertificate& dc, double r, int chain_steps);

/// r_tilde0 (sup_E / (M sup_Omega))^(1/(n+1))
double choose_r_sigma1(int n, double sup_set, double sup_domain, double M, double r_tilde0);
/// (delta^(n+1) sup_E / (M (n+1)^((n+1)(sigma-1)) sup_Omega))^(1/(n+1))
double choose_r_sigma_gt1(int n, double sup_set, double sup_domain, const GevreyCertificate& gc);
/// 10 (b / (n+1))^(1/b)
double choose_r_ucp(int n, double b);

/// 2 floor(log2 kappa) + 2
int prescribed_degree_sigma1(double kappa);
/// 2 floor(max(log2 kappa, B)) + 1
int prescribed_degree_sigma_gt1(double kappa, double B);

/// Runs cover, densest ball, inner maximizer, best ray, node separation and
/// the polynomial / remainder bounds at (n, r).
PipelineGeometry compute_geometry(const CertificationContext& ctx, int n, double r,
                                  const GevreyCertificate& gc);

/// Propagation from the domain maximizer to B_rho(x); checks every doubling
/// link it consults and throws `hypothesis` if one fails.
Propagation compute_propagation(const CertificationContext& ctx, const DoublingCertificate& dc,
                                const PipelineGeometry& g);

/// log of the master right-hand side 2 * propagation * (poly + remainder).
double master_bound(const Propagation& prop, const PipelineGeometry& g);

ObservabilityCertificate certify_sigma1(const CertificationContext& ctx,
                                        const DoublingCertificate& dc,
                                        const GevreyCertificate& gc, int search_width = 16);
ObservabilityCertificate certify_sigma_gt1(const CertificationContext& ctx,
                                           const DoublingCertificate& dc,
                                           const GevreyCertificate& gc, int search_width = 16);
ObservabilityCertificate certify_ucp(const CertificationContext& ctx, const UcpCertificate& uc,
                                     const GevreyCertificate& gc);

/// Re-evaluates every trace step and the chain composition; returns the
/// names of steps that fail (empty when the certificate is consistent).
std::vector<std::string> audit_trace(const ObservabilityCertificate& cert);

}  // namespace obscert
