#include "obscert/report.hpp"

#include <cmath>
#include <numbers>

namespace obscert {

namespace {

Json point_json(Point p) { return Json::array({p.x, p.y}); }

Json geometry_json(const PipelineGeometry& g) {
  Json nodes = Json::array();
  for (double x : g.nodes.nodes) nodes.push_back(x);
  Json trace = Json::array();
  for (const Interval& iv : g.ray.trace.intervals()) trace.push_back(Json::array({iv.lo, iv.hi}));
  return Json{
      {"n", g.n},
      {"r", g.r},
      {"rho", g.rho},
      {"cover_count", g.cover_count},
      {"cover_bound", g.cover_bound},
      {"densest_ball",
       {{"center", point_json(g.densest.ball.center)},
        {"radius", g.densest.ball.radius},
        {"cover_index", g.densest.index},
        {"cells", g.densest.cells},
        {"measure", g.densest.measure}}},
      {"w", point_json(g.w)},
      {"f_w", g.f_w},
      {"sup_inner", g.sup_inner},
      {"ray",
       {{"origin", point_json(g.ray.segment.origin)},
        {"direction", point_json(g.ray.segment.direction)},
        {"t_max", g.ray.segment.t_max},
        {"direction_index", g.ray.direction_index},
        {"direction_count", g.ray.direction_count},
        {"trace_measure", g.ray.measure()},
        {"trace", trace}}},
      {"nodes", {{"gap", g.nodes.gap}, {"x", nodes}}},
      {"node_sup", g.node_sup},
      {"nu", g.nu},
      {"log_poly_bound", g.poly.log_bound},
      {"log_poly_factor", g.poly.log_factor},
      {"log_remainder", g.log_remainder},
      {"tau", g.tau},
  };
}

Json propagation_json(const Propagation& p) {
  return Json{{"r_hat", p.r_hat},
              {"chain_steps", p.chain_steps},
              {"chain_length", p.chain_length},
              {"concentric_steps", p.concentric_steps},
              {"concentric_bound", p.concentric_bound},
              {"log_factor", p.log_factor},
              {"log_sup_start", p.log_sup_start},
              {"log_sup_target", p.log_sup_target},
              {"worst_link", p.worst_link}};
}

}  // namespace

Json constant_json(LogValue c) {
  Json j{{"log10", c.log10()}};
  if (c.representable())
    j["decimal"] = c.value();
  else
    j["decimal"] = nullptr;
  return j;
}

Json to_json(const GevreyCertificate& c) {
  return Json{{"M", c.M}, {"delta", c.delta}, {"sigma", c.sigma}};
}

Json to_json(const DoublingCertificate& c) { return Json{{"kappa", c.kappa}, {"r0", c.r0}}; }

Json to_json(const UcpCertificate& c) { return Json{{"a", c.a}, {"b", c.b}, {"r0", c.r0}}; }

Json to_json(const GevreyReport& r) {
  Json ratios = Json::array();
  for (double v : r.log_ratio) ratios.push_back(v);
  return Json{{"passed", r.passed},
              {"max_ratio", r.max_ratio},
              {"worst_k", r.worst_k},
              {"worst_point", point_json(r.worst_point)},
              {"worst_direction", point_json(r.worst_direction)},
              {"domain_sup", r.domain_sup},
              {"log_ratio", ratios}};
}

Json to_json(const DoublingReport& r) {
  return Json{{"certificate", to_json(r.certificate)},
              {"kappa_hat", r.kappa_hat},
              {"worst_center", point_json(r.worst_center)},
              {"worst_radius", r.worst_radius},
              {"finite", r.finite},
              {"samples", r.samples}};
}

Json to_json(const UcpReport& r) {
  return Json{{"passed", r.passed},
              {"worst_margin", r.worst_margin},
              {"required_a", r.required_a},
              {"worst_center", point_json(r.worst_center)},
              {"worst_radius", r.worst_radius},
              {"samples", r.samples}};
}

Json to_json(const EmpiricalRatio& r) {
  return Json{{"sup_domain", r.sup_domain},
              {"sup_set", r.sup_set},
              {"ratio", r.ratio},
              {"argmax_domain", point_json(r.argmax_domain)},
              {"argmax_set", point_json(r.argmax_set)}};
}

Json to_json(const SoundnessVerdict& v) {
  return Json{{"passed", v.passed}, {"slack", v.slack}};
}

Json to_json(const ObservabilityCertificate& cert) {
  Json j;
  j["branch"] = to_string(cert.branch);
  j["C"] = constant_json(cert.C);
  j["n"] = cert.n;
  j["r"] = cert.r;
  j["gamma"] = cert.gamma;
  Json hyp{{"gevrey", to_json(cert.gevrey)}};
  if (cert.doubling) hyp["doubling"] = to_json(*cert.doubling);
  if (cert.ucp) hyp["ucp"] = to_json(*cert.ucp);
  j["hypotheses"] = hyp;
  j["measures"] = {{"domain", cert.domain_measure},
                   {"set", cert.set_measure},
                   {"relative", cert.set_measure / cert.domain_measure}};
  j["sups"] = {{"domain", cert.sup_domain}, {"set", cert.sup_set}};
  j["r_tilde0"] = cert.r_tilde0;

  if (cert.branch == Branch::ucp) {
    j["ucp"] = {{"C0", cert.C0},
                {"log_C1", cert.log_C1},
                {"xi", cert.xi},
                {"xi_threshold", cert.xi_threshold},
                {"n0", cert.n},
                {"contraction", cert.contraction},
                {"log_lambda", cert.log_lambda},
                {"c0_iterations", cert.c0_iterations}};
  } else {
    Json d{{"beta", cert.beta}, {"n_prescribed", cert.n_prescribed}};
    if (cert.log_C_prescribed)
      d["C_prescribed"] = constant_json(LogValue::from_log(*cert.log_C_prescribed));
    else
      d["C_prescribed"] = nullptr;
    d["rho0"] = cert.rho0;
    d["log_pc"] = cert.log_pc;
    if (cert.B) d["B"] = *cert.B;
    if (cert.eta) d["eta"] = *cert.eta;
    d["propagation"] = propagation_json(cert.propagation);
    j["doubling"] = d;
  }

  j["geometry"] = geometry_json(cert.geometry);
  Json terms = Json::array();
  for (const ExponentTerm& t : cert.exponent_terms) terms.push_back({{"name", t.name}, {"value", t.value}});
  j["exponent_terms"] = terms;
  Json trace = Json::array();
  for (const TraceStep& s : cert.trace)
    trace.push_back({{"name", s.name},
                     {"anchor", s.anchor},
                     {"lhs_log", s.lhs_log},
                     {"rhs_log", s.rhs_log},
                     {"chain", s.chain},
                     {"holds", s.holds},
                     {"detail", s.detail}});
  j["trace"] = trace;
  Json search = Json::array();
  for (const SearchRow& row : cert.search) {
    Json r{{"n", row.n}, {"feasible", row.feasible}};
    if (row.feasible) {
      r["r"] = row.r;
      r["log10_C"] = row.log_C / std::numbers::ln10;
    } else {
      r["failure"] = row.failure;
    }
    search.push_back(r);
  }
  j["search"] = search;
  j["notes"] = cert.notes;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace obscert
