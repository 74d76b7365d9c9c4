#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "wplab/config.hpp"
#include "wplab/parallel.hpp"
#include "wplab/report.hpp"

using namespace wplab;
namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Context {
  RunConfig config;
  fs::path out;
  int threads = 1;
  int orders = 1;
};

Json header(const std::string& command, const Context& ctx) {
  Json j;
  j["command"] = command;
  j["schema"] = ctx.config.schema;
  j["config_hash"] = config_hash(ctx.config);
  j["seed"] = ctx.config.seed;
  return j;
}

SurfacePtr configured_surface(const RunConfig& c) {
  return construct_model(c.surface.kind, c.surface.params, c.surface.resolution, c.validation.truncation);
}

// Chart point of the configured family; missing coordinates are zero.
ChartPoint chart_point(const RunConfig& c, int dimension) {
  ChartPoint t = ChartPoint::Zero(dimension);
  for (int j = 0; j < dimension && j < static_cast<int>(c.point.size()); ++j) t[j] = c.point[static_cast<std::size_t>(j)];
  if (static_cast<int>(c.point.size()) > dimension)
    throw DomainError("point.t has " + std::to_string(c.point.size()) + " coordinates, the family has " +
                      std::to_string(dimension));
  return t;
}

Json complex_json(cplx z) { return Json::array({z.real(), z.imag()}); }

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_json(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

std::string section_csv(const Section& s) {
  std::ostringstream os;
  write_csv(os, s);
  return os.str();
}

PipelineOptions pipeline_options(const RunConfig& c) {
  PipelineOptions o;
  o.curvature.tol = c.curvature_tol;
  o.frame_tol = c.frame_tol;
  return o;
}

// ---- subcommands ----

int run_validate(const Context& ctx) {
  const ValidationSettings v = ctx.config.validation_settings();
  Json report = header("validate", ctx);
  Json checks = Json::array();
  bool all = true;
  for (int id : ctx.config.checks) {
    auto t0 = std::chrono::steady_clock::now();
    CheckResult r = run_check(id, v);
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  (%.1f s)\n", r.summary().c_str(), sec);
    std::fflush(stdout);
    for (const auto& t : r.tables) write_artifact(ctx.out, "check" + std::to_string(id) + "_" + t.name + ".csv", csv_text(t));
    for (const auto& t : r.tables) {
      if (t.name == "norm_ratio") {
        std::vector<double> x, y;
        for (const auto& row : t.rows) {
          x.push_back(row[0]);
          y.push_back(row[1] / row[2]);
        }
        write_artifact(ctx.out, "check6_norm_ratio.svg", loglog_svg("sup / L2 norm on collars", "ell", "ratio", x, y));
      }
      if (t.name == "pinching") {
        std::vector<double> x, y;
        for (const auto& row : t.rows) {
          x.push_back(row[1]);
          y.push_back(std::abs(row[2]));
        }
        write_artifact(ctx.out, "check8_pinching.svg", loglog_svg("WP curvature under pinching", "systole", "|R|", x, y));
      }
    }
    checks.push_back(to_json(r));
    all = all && r.passed();
  }
  report["checks"] = checks;
  report["pass"] = all;
  write_artifact(ctx.out, "report.json", report);
  return all ? 0 : kExitFailure;
}

int run_solve_metric(const Context& ctx) {
  SurfacePtr s = configured_surface(ctx.config);
  Json report = header("solve-metric", ctx);
  report["surface"] = surface_json(*s);
  report["hyperbolic_area"] = hyperbolic_area(*s);
  RField k = gauss_curvature(*s);
  report["curvature_residual"] = (s->valid() > 0).select((k + 1.0).abs(), 0.0).maxCoeff();
  if (s->torus_metric()) {
    report["base_metric"] = to_json(s->torus_metric()->report);
    report["cusp_scale"] = s->torus_metric()->reference.scale;
  }
  write_artifact(ctx.out, "lambda.csv", section_csv(Section(s, 0, s->lambda().cast<cplx>())));
  if (!ctx.config.point.empty()) {
    DeformationFamily fam(s, pipeline_options(ctx.config));
    Section mu = fam.beltrami(chart_point(ctx.config, fam.dimension()));
    Deformation d = deform(mu, true, pipeline_options(ctx.config).curvature);
    report["prescribed_curvature"] = to_json(d.curvature_report);
    RField b = brioschi_curvature(mu, d.h);
    report["brioschi_residual"] = (s->valid() > 0).select((b + 1.0).abs(), 0.0).maxCoeff();
    write_artifact(ctx.out, "h.csv", section_csv(d.h));
  }
  write_artifact(ctx.out, "report.json", report);
  return 0;
}

int run_frame(const Context& ctx) {
  DeformationFamily fam(configured_surface(ctx.config), pipeline_options(ctx.config));
  ChartPoint t = chart_point(ctx.config, fam.dimension());
  auto st = fam.evaluate(t);
  Json report = header("frame", ctx);
  report["surface"] = surface_json(*fam.base());
  Json tj = Json::array();
  for (Eigen::Index j = 0; j < t.size(); ++j) tj.push_back(complex_json(t[j]));
  report["t"] = tj;
  report["orthogonality_residual"] = st->frame.orthogonality_residual;
  report["harmonicity_residual"] = st->frame.harmonicity_residual;
  report["frame"] = to_json(st->frame.report);
  report["prescribed_curvature"] = to_json(st->deformation.curvature_report);
  for (std::size_t j = 0; j < st->frame.omega.size(); ++j)
    write_artifact(ctx.out, "omega_" + std::to_string(j + 1) + ".csv", section_csv(st->frame.omega[j]));
  write_artifact(ctx.out, "report.json", report);
  return 0;
}

int run_wp(const Context& ctx) {
  DeformationFamily fam(configured_surface(ctx.config), pipeline_options(ctx.config));
  const int n = fam.dimension();
  ChartPoint t = chart_point(ctx.config, n);
  MetricDerivatives md = metric_derivatives(fam, t, FiniteDifferenceOptions{ctx.config.fd_step, ctx.threads});
  std::vector<MultiIndex> idx;
  for (int j = 0; j < n; ++j) {
    idx.push_back(multi_index(n, {j}, {}));
    if (ctx.orders < 2) continue;
    for (int k = 0; k < n; ++k) {
      if (k >= j) idx.push_back(multi_index(n, {j, k}, {}));
      idx.push_back(multi_index(n, {j}, {k}));
    }
  }
  md.prepare(idx);
  Json report = header("wp", ctx);
  report["surface"] = surface_json(*fam.base());
  report["metric"] = matrix_json(md.metric());
  // CSV rows refer to derivatives by position; report.json maps positions to multi-index labels
  Table tab{"wp_derivatives", {"derivative", "order", "row", "col", "re", "im", "noise"}, {}};
  Json ders = Json::array();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    DerivativeValue d = md.derivative(idx[i]);
    ders.push_back({{"derivative", i}, {"index", idx[i].label()}, {"value", matrix_json(d.value)}, {"noise", d.noise}});
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        tab.rows.push_back({double(i), double(idx[i].order()), double(a), double(b), d.value(a, b).real(),
                            d.value(a, b).imag(), d.noise});
  }
  report["derivatives"] = ders;
  write_artifact(ctx.out, "wp_derivatives.csv", csv_text(tab));
  write_artifact(ctx.out, "report.json", report);
  return 0;
}

int run_curvature(const Context& ctx) {
  Calibration cal = calibrate_curvature_sign({ChartPoint::Zero(1), ChartPoint::Constant(1, cplx(0.3, 0.0))}, ctx.config.fd_step);
  DeformationFamily fam(configured_surface(ctx.config), pipeline_options(ctx.config));
  const int n = fam.dimension();
  MetricDerivatives md = metric_derivatives(fam, chart_point(ctx.config, n), FiniteDifferenceOptions{ctx.config.fd_step, ctx.threads});
  md.prepare(curvature_indices(n, 0));
  CurvatureTensor ct = christoffel_and_curvature(md);
  Json report = header("curvature", ctx);
  report["surface"] = surface_json(*fam.base());
  report["calibration"] = {{"sign", cal.sign}, {"disk_curvature", cal.curvature}, {"spread", cal.spread}};
  report["metric"] = matrix_json(ct.metric);
  report["riemann_noise"] = ct.riemann_noise;
  report["gamma_noise"] = ct.gamma_noise;
  report["symmetry_residual"] = ct.symmetry_residual;
  Json hsc = Json::array();
  for (int j = 0; j < n; ++j) {
    ChartPoint v = ChartPoint::Zero(n);
    v[j] = 1.0;
    hsc.push_back(ct.holomorphic_sectional(v, cal.sign));
  }
  report["holomorphic_sectional"] = hsc;
  Table tab{"riemann", {"a", "b", "c", "d", "re", "im", "noise"}, {}};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          tab.rows.push_back({double(a), double(b), double(c), double(d), ct.R(a, b, c, d).real(), ct.R(a, b, c, d).imag(),
                              ct.riemann_noise});
  write_artifact(ctx.out, "riemann.csv", csv_text(tab));
  write_artifact(ctx.out, "report.json", report);
  return 0;
}

int run_scaling(const Context& ctx) {
  const ScalingSpec& sc = ctx.config.scaling;
  Json report = header("scaling", ctx);
  report["family"] = sc.family;
  PowerFit fit;
  if (sc.family == "collar") {
    NormRatioStudy st = norm_ratio_study(sc.values, sc.resolution, ctx.config.validation.truncation, ctx.threads);
    Table t{"scaling", {"ell", "sup_norm", "l2_norm", "comp", "ratio", "holder0", "holder1", "holder2", "fitted_slope"}, {}};
    std::vector<double> x, y;
    for (const auto& r : st.rows) {
      std::vector<double> row{r.ell, r.sup_norm, r.l2_norm, r.comp, r.ratio};
      row.insert(row.end(), r.holder_ratio.begin(), r.holder_ratio.end());
      row.push_back(st.fit.slope);
      t.rows.push_back(std::move(row));
      x.push_back(r.ell);
      y.push_back(r.sup_norm / r.l2_norm);
    }
    fit = st.fit;
    report["ratio_over_comp"] = {st.c_low, st.c_high};
    report["holder_spread"] = st.holder_spread;
    write_artifact(ctx.out, "scaling.csv", csv_text(t));
    write_artifact(ctx.out, "scaling.svg", loglog_svg("sup / L2 norm on collars", "ell", "ratio", x, y));
  } else {
    ValidationSettings v = ctx.config.validation_settings();
    Calibration cal = calibrate_curvature_sign({ChartPoint::Zero(1), ChartPoint::Constant(1, cplx(0.3, 0.0))}, v.fd_step);
    const int outer = std::min<int>(ctx.threads, static_cast<int>(sc.values.size()));
    const int inner = std::max(1, ctx.threads / std::max(1, outer));
    auto pts = parallel_map<PinchPoint>(sc.values.size(), outer, [&](std::size_t i) {
      return torus_curvature(sc.values[i], sc.resolution, v, cal.sign, inner);
    });
    std::vector<double> x, y;
    for (const auto& p : pts) {
      x.push_back(p.systole);
      y.push_back(std::abs(p.curvature));
    }
    fit = fit_power(x, y);
    Table t{"scaling", {"height", "systole", "holomorphic_sectional", "riemann_noise", "fitted_slope"}, {}};
    for (const auto& p : pts) t.rows.push_back({p.height, p.systole, p.curvature, p.noise, fit.slope});
    write_artifact(ctx.out, "scaling.csv", csv_text(t));
    write_artifact(ctx.out, "scaling.svg", loglog_svg("WP curvature under pinching", "systole", "|R|", x, y));
  }
  report["fit"] = {{"slope", fit.slope},       {"intercept", fit.intercept}, {"stderr_slope", fit.stderr_slope},
                   {"ci_low", fit.ci_low},     {"ci_high", fit.ci_high}};
  write_artifact(ctx.out, "report.json", report);
  std::printf("fitted slope %.6f  95%% [%.6f, %.6f]\n", fit.slope, fit.ci_low, fit.ci_high);
  return 0;
}

int run_rauch(const Context& ctx) {
  SurfacePtr s = configured_surface(ctx.config);
  if (s->kind() != SurfaceKind::PuncturedTorus) throw PreconditionError("rauch needs surface.kind = \"punctured_torus\"");
  const HarmonicBasis hb = harmonic_basis(s);
  const cplx k(0.05, -0.02);
  Section constant(s, -2, Field::Constant(s->size(), k));
  Json report = header("rauch", ctx);
  report["surface"] = surface_json(*s);
  Table t{"rauch", {"case", "integral_re", "integral_im", "derivative_re", "derivative_im", "kappa_re", "kappa_im"}, {}};
  int id = 0;
  for (const Section* mu : {&hb.basis.front(), static_cast<const Section*>(&constant)}) {
    RauchResult r = rauch_derivative(*mu);
    t.rows.push_back({double(id++), r.integral.real(), r.integral.imag(), r.derivative.real(), r.derivative.imag(),
                      r.kappa.real(), r.kappa.imag()});
  }
  const cplx tau = s->params().tau;
  report["affine_closed_form"] = complex_json(k * (std::conj(tau) - tau));
  write_artifact(ctx.out, "rauch.csv", csv_text(t));
  write_artifact(ctx.out, "report.json", report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wplab: Weil-Petersson geometry experiments on model hyperbolic surfaces"};
  app.require_subcommand(1);
  std::string config_path;
  Overrides ov;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0, resolution = 0;
  double mu_scale = 0.0;
  int orders = 1;

  const std::map<std::string, std::pair<std::string, std::function<int(const Context&)>>> commands{
      {"validate", {"run the acceptance suite", run_validate}},
      {"solve-metric", {"base metric and prescribed-curvature solve", run_solve_metric}},
      {"frame", {"harmonic frame at the configured chart point", run_frame}},
      {"wp", {"WP metric and its derivatives", run_wp}},
      {"curvature", {"WP curvature tensor", run_curvature}},
      {"scaling", {"scaling law over a surface family", run_scaling}},
      {"rauch", {"period variation against the Rauch integral", run_rauch}},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "TOML configuration")->check(CLI::ExistingFile);
    if (name == "scaling" || name == "wp" || name == "curvature")
      sub->add_option("--family", config_path, "family configuration (same as --config)")->check(CLI::ExistingFile);
    if (name == "solve-metric" || name == "frame" || name == "rauch")
      sub->add_option("--surface", config_path, "surface configuration (same as --config)")->check(CLI::ExistingFile);
    if (name == "frame") sub->add_option("--mu-scale", mu_scale, "chart point t along the first basis direction");
    if (name == "wp") sub->add_option("--orders", orders, "highest derivative order")->check(CLI::Range(1, 2));
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker budget (overrides WPLAB_THREADS)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--resolution", resolution, "grid resolution of the configured surface");
    subs[name] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }
  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  Context ctx;
  try {
    ctx.config = config_path.empty() ? RunConfig{} : load_config(config_path);
    auto given = [&](const char* flag) {
      const CLI::Option* o = subs[command]->get_option_no_throw(flag);
      return o && o->count() > 0;
    };
    if (given("--seed")) ov.seed = seed;
    if (threads > 0) ov.threads = threads;
    if (given("--resolution")) ov.resolution = resolution;
    if (!out.empty()) ov.out = out;
    if (given("--mu-scale")) ctx.config.point = {cplx(mu_scale, 0.0)};
    apply_overrides(ctx.config, ov);
  } catch (const ConfigError& e) {
    std::cerr << "wplab: " << e.what() << "\n";
    return kExitUsage;
  }
  ctx.out = ctx.config.out;
  ctx.threads = resolve_threads(ctx.config.threads);
  ctx.orders = orders;
  try {
    return commands.at(command).second(ctx);
  } catch (const std::exception& e) {
    Json diag = header(command, ctx);
    if (const auto* se = dynamic_cast<const SolverError*>(&e)) {
      diag["stage"] = se->stage();
      diag["residuals"] = se->residuals();
    } else {
      diag["stage"] = "setup";
    }
    diag["error"] = e.what();
    std::cerr << "wplab: " << e.what() << "\n";
    try {
      write_artifact(ctx.out, "error.json", diag);
    } catch (const std::exception&) {
    }
    return kExitFailure;
  }
}
