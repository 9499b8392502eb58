#include "obscert/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>

#include "obscert/certify.hpp"
#include "obscert/csv.hpp"
#include "obscert/eigensum.hpp"
#include "obscert/parallel.hpp"
#include "obscert/report.hpp"

namespace obscert {

namespace {

struct Hypotheses {
  Branch branch = Branch::sigma1;
  bool eigen = false;
  GevreyCertificate gevrey;
  std::optional<DoublingCertificate> doubling;
  std::optional<UcpCertificate> ucp;
  std::optional<EigenSum> es;
  GammaParams gp;
  double eigen_r0 = 0.5;
};

struct Outcome {
  ObservabilityCertificate cert;
  EmpiricalRatio ratio;
  SoundnessVerdict verdict;
  std::optional<double> C2;
};

Branch resolve_branch(const RunConfig& cfg, double sigma) {
  if (cfg.branch == "sigma1") return Branch::sigma1;
  if (cfg.branch == "sigma-gt1") return Branch::sigma_gt1;
  if (cfg.branch == "ucp") return Branch::ucp;
  if (cfg.ucp.present) return Branch::ucp;
  return sigma > 1.0 ? Branch::sigma_gt1 : Branch::sigma1;
}

Json domain_json(const RunConfig& cfg) {
  return Json{{"kind", to_string(cfg.domain.kind)},
              {"dimension", cfg.domain.dimension},
              {"extent", cfg.domain.dimension == 1 ? Json::array({cfg.domain.extent[0]})
                                                   : Json::array({cfg.domain.extent[0], cfg.domain.extent[1]})},
              {"cells", cfg.domain.dimension == 1 ? Json::array({cfg.domain.cells[0]})
                                                  : Json::array({cfg.domain.cells[0], cfg.domain.cells[1]})}};
}

const char* set_kind(const SetSpec& s) {
  switch (s.kind) {
    case SetSpec::Kind::full: return "full";
    case SetSpec::Kind::mask_file: return "mask";
    case SetSpec::Kind::region: return "region";
    case SetSpec::Kind::random: return "random";
  }
  return "unknown";
}

Json set_json(const RunConfig& cfg, const MeasurableSet& set) {
  Json j{{"kind", set_kind(cfg.set)}};
  if (cfg.set.kind == SetSpec::Kind::random) {
    j["generator"] = kMaskGenerator;
    j["style"] = cfg.set.style == MaskStyle::blobs ? "blobs" : "scatter";
    j["fraction"] = cfg.set.fraction;
  }
  if (cfg.set.kind == SetSpec::Kind::mask_file) j["file"] = cfg.set.file;
  if (cfg.set.kind == SetSpec::Kind::region) j["shape"] = cfg.set.shape;
  j["cells"] = set.count();
  j["measure"] = measure(set);
  j["relative"] = measure(set) / set.grid().domain_measure();
  return j;
}

Json header(const RunConfig& cfg, const char* command) {
  return Json{{"command", command},
              {"name", cfg.name},
              {"seed", cfg.seed},
              {"mask_generator", kMaskGenerator},
              {"domain", domain_json(cfg)},
              {"function", cfg.function_text}};
}

// Builds and checks every hypothesis certificate the chosen branch consumes,
// recording each verification in `out`. Throws `hypothesis` on a failed check.
Hypotheses prepare(const RunConfig& cfg, const Grid& grid, Json& out) {
  Hypotheses h;
  const SampledField field(cfg.function, grid);
  const SupResult sup = field.sup();
  if (!(sup.value > 0.0)) throw Error(Stage::hypothesis, "f vanishes on the grid");
  const Domain& dom = grid.domain();

  if (cfg.gevrey.closed_form) {
    h.gevrey = closed_form_gevrey(cfg.function, dom, sup.value);
    if (cfg.gevrey.sigma) {
      if (!(*cfg.gevrey.sigma >= 1.0)) throw Error(Stage::config, "[gevrey] sigma must be >= 1");
      h.gevrey.sigma = *cfg.gevrey.sigma;
    }
  } else {
    h.gevrey = cfg.gevrey.certificate;
  }
  const GevreyReport gr = verify_gevrey(cfg.function, h.gevrey, grid, cfg.gevrey.kmax, cfg.gevrey.directions);
  out["gevrey"] = {{"source", cfg.gevrey.closed_form ? "closed_form" : "explicit"},
                   {"certificate", to_json(h.gevrey)},
                   {"verification", to_json(gr)}};
  if (!gr.passed)
    throw Error(Stage::hypothesis, "Gevrey bound fails at k = " + std::to_string(gr.worst_k) +
                                       ": ratio " + format_number(gr.max_ratio) + " > M");

  h.branch = resolve_branch(cfg, h.gevrey.sigma);
  h.eigen = cfg.eigen.present && h.branch == Branch::sigma1;
  if (cfg.eigen.present && !h.eigen)
    throw Error(Stage::config, "an eigen_sum function certifies through the sigma1 branch only");
  const std::vector<Point> centers_d = halton_centers(dom, cfg.doubling.centers);

  if (h.branch == Branch::ucp) {
    if (!cfg.ucp.present) throw Error(Stage::config, "branch ucp needs a [ucp] section");
    UcpCertificate uc = cfg.ucp.certificate;
    const std::vector<double> radii = default_radii(std::min(uc.r0, 1.0));
    const std::vector<Point> centers = halton_centers(dom, cfg.ucp.centers);
    UcpReport ur = verify_ucp(field, uc, radii, centers);
    if (cfg.ucp.estimate) {
      if (!std::isfinite(ur.required_a))
        throw Error(Stage::hypothesis, "unique continuation fails: f vanishes on a sampled ball");
      uc.a = std::max(ur.required_a * cfg.ucp.margin, 1e-6);
      ur = verify_ucp(field, uc, radii, centers);
    }
    out["ucp"] = {{"source", cfg.ucp.estimate ? "estimate" : "explicit"},
                  {"certificate", to_json(uc)},
                  {"verification", to_json(ur)}};
    if (!ur.passed)
      throw Error(Stage::hypothesis, "unique-continuation bound fails: required a = " +
                                         format_number(ur.required_a));
    h.ucp = uc;
    return h;
  }

  if (h.eigen) {
    h.es = EigenSum::build(cfg.domain.dimension, cfg.eigen.modes, cfg.eigen.allow_constant);
    h.eigen_r0 = cfg.doubling.estimate ? cfg.doubling.r0 : cfg.doubling.certificate.r0;
    const DoublingReport dr = estimate_doubling(field, dyadic_radii(h.eigen_r0, grid_radius_floor(grid)), centers_d);
    if (!dr.finite) throw Error(Stage::hypothesis, "doubling fails: f vanishes on a sampled ball");
    const double C_cal = cfg.eigen.C_cal ? *cfg.eigen.C_cal : calibrate_gamma({{*h.es, dr.kappa_hat}});
    h.gp = gamma_params(*h.es, C_cal);
    const DoublingCertificate dc{std::max(std::exp(h.gp.gamma), 2.0), h.eigen_r0};
    out["doubling"] = {{"source", "eigen_gamma"},
                       {"certificate", to_json(dc)},
                       {"verification", to_json(dr)}};
    out["eigen"] = {{"m", h.es->m()},
                    {"lambda", h.es->lambda()},
                    {"C_cal", h.gp.C_cal},
                    {"C_cal_source", cfg.eigen.C_cal ? "config" : "calibrated"},
                    {"gamma", h.gp.gamma}};
    if (std::log(dc.kappa) < std::log(dr.kappa_hat))
      throw Error(Stage::hypothesis, "e^gamma = " + format_number(dc.kappa) +
                                         " is below the sampled doubling ratio " +
                                         format_number(dr.kappa_hat));
    h.doubling = dc;
    return h;
  }

  const double r0 = cfg.doubling.estimate ? cfg.doubling.r0 : cfg.doubling.certificate.r0;
  const DoublingReport dr = estimate_doubling(field, dyadic_radii(r0, grid_radius_floor(grid)), centers_d);
  const DoublingCertificate dc = cfg.doubling.estimate ? dr.certificate : cfg.doubling.certificate;
  out["doubling"] = {{"source", cfg.doubling.estimate ? "estimate" : "explicit"},
                     {"certificate", to_json(dc)},
                     {"verification", to_json(dr)}};
  if (!dr.finite) throw Error(Stage::hypothesis, "doubling fails: f vanishes on a sampled ball");
  if (dr.kappa_hat > dc.kappa)
    throw Error(Stage::hypothesis, "doubling ratio " + format_number(dr.kappa_hat) +
                                       " exceeds kappa = " + format_number(dc.kappa));
  h.doubling = dc;
  return h;
}

Outcome run_one(const RunConfig& cfg, const Hypotheses& h, const MeasurableSet& set, int width) {
  Outcome o;
  const CertificationContext ctx(cfg.function, set, cfg.directions);
  if (h.eigen) {
    const EigenCertificate ec = certify_eigensum(*h.es, set, h.gp, h.eigen_r0, width);
    o.cert = ec.certificate;
    o.C2 = ec.C2;
  } else if (h.branch == Branch::ucp) {
    o.cert = certify_ucp(ctx, *h.ucp, h.gevrey);
  } else if (h.branch == Branch::sigma_gt1) {
    o.cert = certify_sigma_gt1(ctx, *h.doubling, h.gevrey, width);
  } else {
    o.cert = certify_sigma1(ctx, *h.doubling, h.gevrey, width);
  }
  o.ratio = empirical_ratio(ctx);
  o.verdict = soundness_check(o.cert, o.ratio);
  return o;
}

Json outcome_json(const Outcome& o) {
  Json j{{"certificate", to_json(o.cert)}};
  if (o.C2) j["eigen_C2"] = *o.C2;
  const std::vector<std::string> audit = audit_trace(o.cert);
  j["audit"] = {{"passed", audit.empty()}, {"failures", audit}};
  j["empirical"] = to_json(o.ratio);
  j["soundness"] = to_json(o.verdict);
  return j;
}

Json error_json(const Error& e) { return Json{{"stage", to_string(e.stage())}, {"message", e.what()}}; }

std::filesystem::path output_path(const RunConfig& cfg, const std::string& suffix) {
  std::filesystem::path dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Stage::config, "cannot create output directory " + dir.string());
  return dir / (cfg.name + suffix);
}

void write_file(const std::filesystem::path& path, const std::string& text, CommandResult& res) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Stage::config, "cannot write " + path.string());
  out << text;
  res.files.push_back(path.string());
}

void finish_report(const RunConfig& cfg, Json& report, CommandResult& res) {
  report["exit_code"] = res.exit_code;
  write_file(output_path(cfg, ".report.json"), dump(report), res);
}

template <class Body>
CommandResult guarded(const RunConfig& cfg, Json& report, Body&& body) {
  CommandResult res;
  unsigned saved = worker_count();
  worker_count() = cfg.workers;
  try {
    body(res);
  } catch (const Error& e) {
    res.exit_code = exit_code(e.stage());
    report["status"] = "error";
    report["error"] = error_json(e);
    res.summary = std::string(to_string(e.stage())) + " error: " + e.what();
  } catch (const std::exception& e) {
    res.exit_code = exit_internal;
    report["status"] = "error";
    report["error"] = {{"stage", "internal"}, {"message", e.what()}};
    res.summary = std::string("internal error: ") + e.what();
  }
  worker_count() = saved;
  finish_report(cfg, report, res);
  return res;
}

std::string log10_text(double log_C) { return format_number(log_C / std::numbers::ln10); }

std::string decimal_text(double log_C) {
  const LogValue c = LogValue::from_log(log_C);
  return c.representable() ? format_number(c.value()) : std::string();
}

struct SweepRow {
  std::string axis;
  double value = 0.0;
  bool ok = false;
  double log_C = 0.0;
  double ratio = 0.0;
  double slack = 0.0;
  bool sound = false;
  int n = 0;
  double r = 0.0;
  std::string status;
  Json detail;
};

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = csv_row({"axis", "value", "log10_C", "C", "ratio", "slack", "n", "r", "sound", "status"});
  for (const SweepRow& r : rows) {
    if (r.ok)
      out += csv_row({r.axis, format_number(r.value), log10_text(r.log_C), decimal_text(r.log_C),
                      format_number(r.ratio), format_number(r.slack), std::to_string(r.n),
                      format_number(r.r), r.sound ? "true" : "false", r.status});
    else
      out += csv_row({r.axis, format_number(r.value), "", "", r.ratio > 0 ? format_number(r.ratio) : "",
                      "", "", "", "", r.status});
  }
  return out;
}

}  // namespace

int exit_code(Stage stage) {
  switch (stage) {
    case Stage::config: return exit_config;
    case Stage::hypothesis: return exit_hypothesis;
    case Stage::infeasible:
    case Stage::resolution: return exit_infeasible;
    case Stage::internal: return exit_internal;
  }
  return exit_internal;
}

CommandResult cmd_certify(const RunConfig& cfg) {
  Json report = header(cfg, "certify");
  return guarded(cfg, report, [&](CommandResult& res) {
    const Grid grid = cfg.make_grid();
    const MeasurableSet set = cfg.make_set(grid);
    report["set"] = set_json(cfg, set);
    if (cfg.write_mask) {
      std::ostringstream mask;
      write_mask(mask, set);
      write_file(output_path(cfg, ".mask.pbm"), mask.str(), res);
    }
    Json hyp = Json::object();
    try {
      const Hypotheses h = prepare(cfg, grid, hyp);
      report["hypotheses"] = hyp;
      const Outcome o = run_one(cfg, h, set, cfg.search_width);
      const Json result = outcome_json(o);
      for (const auto& [key, value] : result.items()) report[key] = value;
      report["status"] = o.verdict.passed ? "sound" : "unsound";
      res.exit_code = o.verdict.passed ? exit_ok : exit_unsound;
      res.summary = std::string(to_string(o.cert.branch)) + ": log10 C = " +
                    format_number(o.cert.C.log10()) + ", ratio = " + format_number(o.ratio.ratio) +
                    (o.verdict.passed ? ", sound" : ", UNSOUND");
    } catch (...) {
      report["hypotheses"] = hyp;
      throw;
    }
  });
}

CommandResult cmd_sweep(const RunConfig& cfg) {
  Json report = header(cfg, "sweep");
  return guarded(cfg, report, [&](CommandResult& res) {
    const bool has_fractions = !cfg.sweep.fractions.empty();
    const bool has_n = cfg.sweep.n_range.has_value();
    const bool has_family = !cfg.sweep.eigen_k.empty();
    if (!has_fractions && !has_n && !has_family)
      throw Error(Stage::config, "sweep needs at least one axis in [sweep]: fractions, n or eigen_k");
    const Grid grid = cfg.make_grid();
    std::vector<SweepRow> rows;
    Json axes = Json::object();

    if (has_fractions || has_n) {
      Json hyp = Json::object();
      Hypotheses h;
      try {
        h = prepare(cfg, grid, hyp);
      } catch (...) {
        report["hypotheses"] = hyp;
        throw;
      }
      report["hypotheses"] = hyp;

      if (has_fractions) {
        if (cfg.set.kind != SetSpec::Kind::random)
          throw Error(Stage::config, "a fraction sweep needs [set] kind = random");
        const std::vector<double> priority = priority_field(grid, cfg.seed, cfg.set.style);
        std::vector<SweepRow> part(cfg.sweep.fractions.size());
        parallel_for(part.size(), [&](std::size_t i) {
          SweepRow& row = part[i];
          row.axis = "fraction";
          row.value = cfg.sweep.fractions[i];
          try {
            const MeasurableSet set = mask_from_priority(grid, priority, row.value);
            const Outcome o = run_one(cfg, h, set, cfg.search_width);
            row.ok = true;
            row.log_C = o.cert.C.log();
            row.ratio = o.ratio.ratio;
            row.slack = o.verdict.slack;
            row.sound = o.verdict.passed;
            row.n = o.cert.n;
            row.r = o.cert.r;
            row.status = o.verdict.passed ? "sound" : "unsound";
            row.detail = outcome_json(o);
            row.detail["measure"] = measure(set);
          } catch (const Error& e) {
            row.status = std::string(to_string(e.stage())) + ": " + e.what();
            row.detail = {{"error", error_json(e)}};
          }
        });
        Json list = Json::array();
        for (SweepRow& row : part) {
          list.push_back({{"fraction", row.value}, {"result", row.detail}});
          rows.push_back(std::move(row));
        }
        axes["fraction"] = list;
      }

      if (has_n) {
        if (h.branch == Branch::ucp) throw Error(Stage::config, "the n axis applies to the doubling branches");
        const MeasurableSet set = cfg.make_set(grid);
        report["set"] = set_json(cfg, set);
        const auto [lo, hi] = *cfg.sweep.n_range;
        const CertificationContext ctx(cfg.function, set, cfg.directions);
        const EmpiricalRatio ratio = empirical_ratio(ctx);
        Json list = Json::array();
        try {
          const Outcome o = run_one(cfg, h, set, hi);
          const int n_start = o.cert.n_prescribed;
          for (int n = lo; n <= hi; ++n) {
            SweepRow row;
            row.axis = "n";
            row.value = n;
            row.ratio = ratio.ratio;
            const SearchRow* found = nullptr;
            for (const SearchRow& s : o.cert.search)
              if (s.n == n) found = &s;
            if (n < n_start) {
              row.status = "below the prescribed degree " + std::to_string(n_start);
            } else if (!found || !found->feasible) {
              row.status = found ? found->failure : "not searched";
            } else {
              row.ok = true;
              row.log_C = found->log_C;
              row.slack = found->log_C - std::log(ratio.ratio);
              row.sound = row.slack >= 0.0;
              row.n = n;
              row.r = found->r;
              row.status = row.sound ? "sound" : "unsound";
            }
            list.push_back({{"n", n}, {"status", row.status}});
            rows.push_back(std::move(row));
          }
          axes["n"] = {{"certificate", outcome_json(o)}, {"rows", list}};
        } catch (const Error& e) {
          for (int n = lo; n <= hi; ++n) {
            SweepRow row;
            row.axis = "n";
            row.value = n;
            row.status = std::string(to_string(e.stage())) + ": " + e.what();
            rows.push_back(std::move(row));
          }
          axes["n"] = {{"error", error_json(e)}};
        }
      }
    }

    if (has_family) {
      if (cfg.make_domain().kind() != DomainKind::torus)
        throw Error(Stage::config, "the eigenfunction family lives on a torus");
      const double r0 = cfg.doubling.estimate ? cfg.doubling.r0 : cfg.doubling.certificate.r0;
      std::vector<GrowthMember> family;
      std::vector<EigenSum> sums;
      for (int k : cfg.sweep.eigen_k) {
        sums.push_back(EigenSum::build(cfg.domain.dimension, {Mode{{k, 0}, 1.0, -std::numbers::pi / 2}}));
        family.push_back(GrowthMember{"sin(2 pi " + std::to_string(k) + " x)", sums.back().lambda(), 1,
                                      sums.back().model()});
      }
      const GrowthStudy study = doubling_growth_study(family, grid, r0, cfg.doubling.centers);
      const int masks = cfg.sweep.masks;
      std::vector<SweepRow> part(family.size() * static_cast<std::size_t>(masks));
      parallel_for(part.size(), [&](std::size_t idx) {
        const std::size_t i = idx / static_cast<std::size_t>(masks);
        const int j = static_cast<int>(idx % static_cast<std::size_t>(masks));
        SweepRow& row = part[idx];
        row.axis = "lambda";
        row.value = family[i].lambda;
        try {
          const MeasurableSet set = random_mask(grid, cfg.sweep.mask_fraction, cfg.seed + j, cfg.set.style);
          const GammaParams gp = gamma_params(sums[i], study.C_cal);
          const EigenCertificate ec = certify_eigensum(sums[i], set, gp, r0, cfg.search_width);
          const CertificationContext ctx(family[i].f, set, cfg.directions);
          const EmpiricalRatio ratio = empirical_ratio(ctx);
          const SoundnessVerdict v = soundness_check(ec.certificate, ratio);
          row.ok = true;
          row.log_C = ec.certificate.C.log();
          row.ratio = ratio.ratio;
          row.slack = v.slack;
          row.sound = v.passed;
          row.n = ec.certificate.n;
          row.r = ec.certificate.r;
          row.status = v.passed ? "sound" : "unsound";
          row.detail = {{"member", family[i].label}, {"mask_seed", cfg.seed + j},
                        {"gamma", gp.gamma}, {"C2", ec.C2},
                        {"C", constant_json(ec.certificate.C)}, {"ratio", ratio.ratio},
                        {"slack", v.slack}, {"n", row.n}, {"r", row.r}};
        } catch (const Error& e) {
          row.status = std::string(to_string(e.stage())) + ": " + e.what();
          row.detail = {{"member", family[i].label}, {"error", error_json(e)}};
        }
      });
      // Per member, the mask with the smallest slack goes into the growth CSV.
      std::vector<double> worst_log10_C(family.size(), std::nan(""));
      std::vector<double> worst_ratio(family.size(), std::nan(""));
      std::vector<double> worst_slack(family.size(), std::numeric_limits<double>::infinity());
      Json list = Json::array();
      for (std::size_t idx = 0; idx < part.size(); ++idx) {
        const std::size_t i = idx / static_cast<std::size_t>(masks);
        if (part[idx].ok && part[idx].slack < worst_slack[i]) {
          worst_slack[i] = part[idx].slack;
          worst_log10_C[i] = part[idx].log_C / std::numbers::ln10;
          worst_ratio[i] = part[idx].ratio;
        }
        list.push_back(part[idx].detail);
        rows.push_back(std::move(part[idx]));
      }
      Json members = Json::array();
      for (const GrowthRow& g : study.rows)
        members.push_back({{"label", g.label}, {"lambda", g.lambda}, {"kappa_hat", g.kappa_hat},
                           {"gamma", g.gamma}});
      axes["eigen_family"] = {{"C_cal", study.C_cal},
                              {"slope", study.slope},
                              {"loglog_slope", study.loglog_slope},
                              {"superlinear", study.superlinear},
                              {"slope_bounded", study.slope_bounded},
                              {"members", members},
                              {"rows", list}};
      write_file(output_path(cfg, ".growth.csv"), growth_csv(study, worst_log10_C, worst_ratio), res);
    }

    report["axes"] = axes;
    write_file(output_path(cfg, ".sweep.csv"), sweep_csv(rows), res);
    std::size_t ok = 0;
    std::size_t unsound = 0;
    for (const SweepRow& r : rows) {
      ok += r.ok;
      unsound += r.ok && !r.sound;
    }
    report["rows"] = {{"total", rows.size()}, {"certified", ok}, {"unsound", unsound}};
    report["status"] = unsound ? "unsound" : (ok ? "sound" : "no_feasible_rows");
    res.exit_code = unsound ? exit_unsound : (ok ? exit_ok : exit_infeasible);
    res.summary = std::to_string(rows.size()) + " rows, " + std::to_string(ok) + " certified, " +
                  std::to_string(unsound) + " unsound";
  });
}

CommandResult cmd_verify(const RunConfig& cfg) {
  Json report = header(cfg, "verify");
  return guarded(cfg, report, [&](CommandResult& res) {
    if (cfg.gevrey.closed_form)
      throw Error(Stage::config, "verify needs [gevrey] mode = explicit");
    const Grid grid = cfg.make_grid();
    const SampledField field(cfg.function, grid);
    const Domain& dom = grid.domain();
    Json checks = Json::object();
    std::vector<std::string> failed;

    const GevreyReport gr = verify_gevrey(cfg.function, cfg.gevrey.certificate, grid, cfg.gevrey.kmax,
                                          cfg.gevrey.directions);
    checks["gevrey"] = {{"certificate", to_json(cfg.gevrey.certificate)}, {"verification", to_json(gr)}};
    if (!gr.passed)
      failed.push_back("Gevrey: sup|D^k f| delta^k / (k!^sigma sup|f|) = " + format_number(gr.max_ratio) +
                       " > M at k = " + std::to_string(gr.worst_k));

    if (!cfg.doubling.estimate) {
      const DoublingCertificate& dc = cfg.doubling.certificate;
      const DoublingReport dr = estimate_doubling(field, dyadic_radii(dc.r0, grid_radius_floor(grid)),
                                                  halton_centers(dom, cfg.doubling.centers));
      const bool pass = dr.finite && dr.kappa_hat <= dc.kappa;
      checks["doubling"] = {{"certificate", to_json(dc)}, {"verification", to_json(dr)}, {"passed", pass}};
      if (!pass)
        failed.push_back("doubling: sup_{B_2r} / sup_{B_r} = " + format_number(dr.kappa_hat) +
                         " > kappa at r = " + format_number(dr.worst_radius));
    }
    if (cfg.ucp.present && !cfg.ucp.estimate) {
      const UcpCertificate& uc = cfg.ucp.certificate;
      const UcpReport ur = verify_ucp(field, uc, default_radii(std::min(uc.r0, 1.0)),
                                      halton_centers(dom, cfg.ucp.centers));
      checks["ucp"] = {{"certificate", to_json(uc)}, {"verification", to_json(ur)}};
      if (!ur.passed)
        failed.push_back("unique continuation: needs a >= " + format_number(ur.required_a) +
                         " at r = " + format_number(ur.worst_radius));
    }
    report["checks"] = checks;
    report["violations"] = failed;
    report["status"] = failed.empty() ? "verified" : "violated";
    res.exit_code = failed.empty() ? exit_ok : exit_hypothesis;
    res.summary = failed.empty() ? "all certificates verified" : failed.front();
  });
}

}  // namespace obscert
