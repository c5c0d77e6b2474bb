#include "commands.hpp"

#include "svg.hpp"
#include "suites.hpp"

#include "nosc/errors.hpp"
#include "nosc/random.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

namespace nosc::cli {

namespace {

std::ofstream open_csv(RunContext& ctx, const std::string& name) {
  const std::string path = ctx.output(name);
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  return f;
}

void save_artifact(RunContext& ctx, const std::string& name, json j, int indent = -1) {
  j["provenance"] = ctx.provenance();
  save_json(ctx.output(name), j, indent);
}

void save_csv_signal(RunContext& ctx, const std::string& name, const Signal& s) {
  write_signal_csv(ctx.output(name), s);
}

void require_finite(const Signal& s, const std::string& what) {
  for (int k = 0; k < s.size(); ++k)
    if (!s.values().row(k).allFinite()) throw InstabilityError(what + ": non-finite state", k);
}

std::vector<double> grid_times(const TimeGrid& g) {
  std::vector<double> t(g.size());
  for (int k = 0; k < g.size(); ++k) t[k] = g.time(k);
  return t;
}

Series column(const Signal& s, int i, const std::string& name) {
  Series out{name, grid_times(s.grid()), {}};
  out.y.assign(s.values().col(i).data(), s.values().col(i).data() + s.size());
  return out;
}

void maybe_svg(RunContext& ctx, const std::string& name, const std::string& title, const std::string& xl,
               const std::string& yl, const std::vector<Series>& series) {
  if (ctx.svg) write_line_chart(ctx.output(name), title, xl, yl, series);
}

Signal stack_columns(const std::vector<Signal>& parts) {
  int dim = 0;
  for (const auto& s : parts) dim += s.dim();
  Signal out(parts.front().grid(), dim);
  int c = 0;
  for (const auto& s : parts) {
    out.values().middleCols(c, s.dim()) = s.values();
    c += s.dim();
  }
  return out;
}

json stage_summary(const CompiledOscillator& co) {
  json stages = json::array();
  json failing = json::array();
  for (const auto& s : co.stages) {
    stages.push_back({{"name", s.name},
                      {"budget", s.budget},
                      {"achieved", s.achieved},
                      {"met", s.met()},
                      {"detail", s.detail}});
    if (!s.met()) failing.push_back(s.name);
  }
  if (!co.budget_met()) failing.push_back("end_to_end");
  json widths = json::array();
  for (const auto& l : co.net.layers) widths.push_back(l.width());
  return {{"operator", co.operator_name},
          {"eps_total", co.eps_total},
          {"e2e", co.e2e},
          {"stage_sum", co.stage_sum()},
          {"ledger_consistent", co.ledger_consistent()},
          {"budget_met", co.budget_met()},
          {"stages", stages},
          {"failing_stages", failing},
          {"layer_widths", widths}};
}

void print_stages(const json& summary) {
  for (const auto& s : summary["stages"])
    std::cout << "stage " << s["name"].get<std::string>() << ": achieved " << s["achieved"].get<double>()
              << " budget " << s["budget"].get<double>() << (s["met"].get<bool>() ? "" : "  MISSED") << '\n';
  std::cout << "end-to-end " << summary["e2e"].get<double>() << " of " << summary["eps_total"].get<double>()
            << (summary["budget_met"].get<bool>() ? "" : "  MISSED") << '\n';
}

int budget_miss(RunContext& ctx, const BudgetError& e, const std::string& summary_name) {
  json summary = {{"budget_met", false}, {"failing_stages", json::array({e.stage})}, {"message", e.what()}};
  save_artifact(ctx, summary_name, summary, 2);
  write_manifest(ctx, {{"status", "budget_miss"}});
  std::cerr << "budget miss in stage " << e.stage << ": " << e.what() << '\n';
  return 4;
}

}  // namespace

// ---------------------------------------------------------------- simulate

int cmd_simulate(RunContext& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"seed", "network", "input", "ensemble", "integrator"}, "config");
  const auto nit = c.find("network");
  if (nit == c.end()) throw ConfigError("config.network: missing (inline network object or path to a JSON file)");
  const json nj = nit->is_string() ? load_json(nit->get<std::string>()) : *nit;
  const std::string kind = get_string(nj, "kind", "", "config.network");

  GeneralOscillator gen;
  MultiLayerOscillator ml;
  std::optional<TimeGrid> native_grid;
  int p = 1;
  IntegratorConfig fallback;
  if (kind == "general") {
    gen = general_from_json(nj);
    p = gen.p();
  } else if (kind == "multilayer") {
    ml = multilayer_from_json(nj);
    p = ml.p;
  } else if (kind == "compiled_oscillator") {
    const CompiledOscillator co = compiled_from_json(nj);
    ml = co.net;
    p = co.p;
    native_grid = co.grid;
    fallback = compiled_integrator();
  } else {
    throw ConfigError("config.network.kind: expected general, multilayer or compiled_oscillator");
  }
  const IntegratorConfig cfg = integrator_from(c, fallback);

  const json& in = section(c, "input");
  check_keys(in, {"kind", "count", "file"}, "config.input");
  const std::string in_kind = get_string(in, "kind", "zero", "config.input");
  const int count = get_int(in, "count", 1, "config.input");
  if (count < 1) throw ConfigError("config.input.count: must be at least 1");
  std::vector<Signal> inputs;
  if (in_kind == "zero" || in_kind == "ensemble") {
    if (native_grid && c.contains("ensemble") && in_kind == "zero")
      throw ConfigError("config.ensemble: a compiled network runs on its own grid");
    InputEnsemble ens = ensemble_from(c, ctx.seed);
    if (ens.p != p)
      throw ConfigError("config.ensemble.p: network expects " + std::to_string(p) + " input channels");
    if (in_kind == "zero") {
      inputs.assign(count, Signal(native_grid ? *native_grid : ens.grid(), p));
    } else {
      if (native_grid && !(ens.grid() == *native_grid))
        throw ConfigError("config.ensemble: grid differs from the compiled network's grid");
      inputs = ens.sample(count, stream::validation);
    }
  } else if (in_kind == "csv") {
    const std::string file = get_string(in, "file", "", "config.input");
    if (file.empty()) throw ConfigError("config.input.file: missing");
    inputs.push_back(read_signal_csv(file));
    if (inputs.back().dim() != p)
      throw ConfigError("config.input.file: network expects " + std::to_string(p) + " input channels");
  } else {
    throw ConfigError("config.input.kind: expected zero, ensemble or csv");
  }

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Signal& u = inputs[i];
    Signal hidden, output;
    if (kind == "general") {
      auto r = simulate_general(gen, u, cfg);
      hidden = r.hidden.position;
      output = r.output;
    } else {
      auto r = native_grid ? simulate_layerwise(ml, u, cfg, true) : simulate_multilayer(ml, u, cfg);
      std::vector<Signal> parts;
      for (const auto& l : r.layers) parts.push_back(l.position);
      hidden = stack_columns(parts);
      output = r.output;
    }
    require_finite(hidden, "simulate");
    require_finite(output, "simulate");
    const std::string id = std::to_string(i);
    save_csv_signal(ctx, "input_" + id + ".csv", u);
    save_csv_signal(ctx, "hidden_" + id + ".csv", hidden);
    save_csv_signal(ctx, "output_" + id + ".csv", output);
    if (ctx.svg) {
      std::vector<Series> s;
      for (int j = 0; j < output.dim(); ++j) s.push_back(column(output, j, "z" + std::to_string(j)));
      maybe_svg(ctx, "output_" + id + ".svg", "output, input " + id, "t", "z", s);
    }
  }
  write_manifest(ctx, {{"status", "ok"}, {"network_kind", kind}, {"inputs", inputs.size()}});
  std::cout << "simulated " << inputs.size() << " input(s) through a " << kind << " network\n";
  return 0;
}

// ---------------------------------------------------------------- transform

int cmd_transform(RunContext& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"seed", "ensemble", "integrator", "transform"}, "config");
  const json& tr = section(c, "transform");
  const std::string w = "config.transform";
  check_keys(tr, {"omegas", "samples", "stride"}, w);
  const auto om = get_doubles(tr, "omegas", {1.0, 3.0, 10.0}, w);
  const int samples = get_int(tr, "samples", 4, w);
  const int stride = get_int(tr, "stride", 1, w);
  if (om.empty()) throw ConfigError(w + ".omegas: need at least one frequency");
  for (double o : om)
    if (!(o != 0.0) || !std::isfinite(o)) throw ConfigError(w + ".omegas: frequencies must be finite and nonzero");
  if (samples < 1 || stride < 1) throw ConfigError(w + ": samples and stride must be positive");
  const InputEnsemble ens = ensemble_from(c, ctx.seed);
  const IntegratorConfig cfg = integrator_from(c, IntegratorConfig{});
  const Eigen::VectorXd omegas = Eigen::Map<const Eigen::VectorXd>(om.data(), om.size());
  const auto us = ens.sample(samples, stream::validation);
  const int N = static_cast<int>(om.size());

  auto f = open_csv(ctx, "transform.csv");
  f << "input_id,component,omega,t,exact,oscillator,abs_err\n";
  json max_err = json::array();
  std::vector<double> worst(N, 0.0);
  std::vector<Series> plot;
  for (int i = 0; i < samples; ++i) {
    const Signal& u = us[i];
    const Eigen::MatrixXd exact = sine_transform_trajectory(u, omegas);
    for (int j = 0; j < N; ++j) {
      Signal y = harmonic_response(u, om[j], cfg);
      require_finite(y, "transform");
      for (int comp = 0; comp < ens.p; ++comp) {
        for (int k = 0; k < u.size(); k += stride) {
          const double ex = exact(k, comp * N + j);
          const double osc = om[j] * y(k, comp);
          worst[j] = std::max(worst[j], std::abs(osc - ex));
          f << i << ',' << comp << ',' << format_double(om[j]) << ',' << format_double(u.grid().time(k)) << ','
            << format_double(ex) << ',' << format_double(osc) << ',' << format_double(std::abs(osc - ex)) << '\n';
        }
        if (ctx.svg && i == 0 && comp == 0) {
          Series e{"exact w=" + format_double(om[j]), grid_times(u.grid()), {}};
          Series o{"oscillator w=" + format_double(om[j]), e.x, {}};
          for (int k = 0; k < u.size(); ++k) {
            e.y.push_back(exact(k, j));
            o.y.push_back(om[j] * y(k, 0));
          }
          plot.push_back(std::move(e));
          plot.push_back(std::move(o));
        }
      }
    }
  }
  f.close();
  for (int j = 0; j < N; ++j) max_err.push_back({{"omega", om[j]}, {"max_abs_err", worst[j]}});
  save_artifact(ctx, "transform_summary.json", {{"samples", samples}, {"errors", max_err}}, 2);
  maybe_svg(ctx, "transform.svg", "windowed sine transform, input 0", "t", "L_t u(omega)", plot);
  write_manifest(ctx, {{"status", "ok"}});
  for (int j = 0; j < N; ++j) std::cout << "omega " << om[j] << ": max |oscillator - exact| = " << worst[j] << '\n';
  return 0;
}

// ---------------------------------------------------------------- reconstruct

int cmd_reconstruct(RunContext& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"seed", "ensemble", "reconstruct"}, "config");
  const json& rc = section(c, "reconstruct");
  const std::string w = "config.reconstruct";
  check_keys(rc, {"target_fraction", "target_err", "window", "max_N", "samples", "t_eval"}, w);
  const InputEnsemble ens = ensemble_from(c, ctx.seed);
  if (rc.contains("target_fraction") && rc.contains("target_err"))
    throw ConfigError(w + ": give either target_fraction or target_err");
  const double target = rc.contains("target_err") ? get_double(rc, "target_err", 0.0, w)
                                                  : get_double(rc, "target_fraction", 0.05, w) * ens.sup_bound();
  const double window = get_double(rc, "window", ens.T, w);
  PlanOptions po;
  po.max_N = get_int(rc, "max_N", po.max_N, w);
  const int samples = get_int(rc, "samples", 4, w);
  const double t_eval = get_double(rc, "t_eval", ens.T, w);
  if (!(target > 0.0)) throw ConfigError(w + ": target error must be positive");
  if (samples < 1) throw ConfigError(w + ".samples: must be at least 1");
  if (!(t_eval > 0.0 && t_eval <= ens.T)) throw ConfigError(w + ".t_eval: must lie in (0, T]");

  ReconstructionPlan plan;
  try {
    plan = build_plan(ens, window, target, po);
  } catch (const BudgetError& e) {
    return budget_miss(ctx, e, "reconstruct_summary.json");
  }
  save_artifact(ctx, "plan.json", {{"plan", plan_to_json(plan)}});
  {
    auto f = open_csv(ctx, "plan_history.csv");
    write_plan_history_csv(f, plan);
  }

  const TimeGrid g = ens.grid();
  const int k = static_cast<int>(std::lround(t_eval / g.h()));
  const double t = g.time(k);
  const auto us = ens.sample(samples, stream::validation);
  double worst = 0.0;
  std::vector<Series> plot;
  auto f = open_csv(ctx, "reconstruction.csv");
  f << "input_id,component,tau,true,reconstructed,abs_err\n";
  for (int i = 0; i < samples; ++i) {
    const Eigen::MatrixXd beta = plan_transform(plan, us[i], k);
    Series truth{"u(tau)", {}, {}}, rec{"reconstruction", {}, {}};
    for (int j = k; j >= 0 && t - g.time(j) <= window * (1 + 1e-12); --j) {
      const double tau = g.time(j);
      const Eigen::VectorXd r = reconstruct(plan, beta, t, tau);
      for (int comp = 0; comp < ens.p; ++comp) {
        const double u = us[i](j, comp);
        worst = std::max(worst, std::abs(r(comp) - u));
        f << i << ',' << comp << ',' << format_double(tau) << ',' << format_double(u) << ','
          << format_double(r(comp)) << ',' << format_double(std::abs(r(comp) - u)) << '\n';
      }
      truth.x.push_back(tau);
      truth.y.push_back(us[i](j, 0));
      rec.x.push_back(tau);
      rec.y.push_back(r(0));
    }
    if (i == 0) plot = {truth, rec};
  }
  f.close();
  save_artifact(ctx, "reconstruct_summary.json",
                {{"N", plan.N},
                 {"terms", plan.terms()},
                 {"target_err", target},
                 {"validated_err", plan.achieved_err},
                 {"t_eval", t},
                 {"max_abs_err_at_t_eval", worst}},
                2);
  maybe_svg(ctx, "reconstruction.svg", "reconstruction of the past at t = " + format_double(t), "tau", "u", plot);
  write_manifest(ctx, {{"status", "ok"}});
  std::cout << "plan N = " << plan.N << ", validated error " << plan.achieved_err << " (target " << target
            << "), error at t = " << t << ": " << worst << '\n';
  return 0;
}

// ---------------------------------------------------------------- compile

int cmd_compile(RunContext& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"seed", "ensemble", "family", "offset", "operator", "eps_total", "eps_fraction", "integrator",
                 "compile", "validation_stride"},
             "config");
  const auto fam = family_from(c, ctx.seed);
  const InputEnsemble ens = ensemble_from(c, ctx.seed);
  const TargetOperator phi = operator_from(c, ens.p);
  if (c.contains("eps_total") && c.contains("eps_fraction"))
    throw ConfigError("config: give either eps_total or eps_fraction");
  const double eps = c.contains("eps_total") ? get_double(c, "eps_total", 0.0, "config")
                                             : get_double(c, "eps_fraction", 0.1, "config") * ens.sup_bound();
  if (!(eps > 0.0)) throw ConfigError("config.eps_total: must be positive");
  const int stride = get_int(c, "validation_stride", 1, "config");
  if (stride < 1) throw ConfigError("config.validation_stride: must be at least 1");
  CompileOptions opts = compile_options_from(c);
  opts.enforce_budget = false;

  CompiledOscillator co;
  try {
    co = compile_operator(phi, *fam, eps, opts);
  } catch (const BudgetError& e) {
    return budget_miss(ctx, e, "summary.json");
  }
  save_artifact(ctx, "compiled.json", compiled_to_json(co));
  const auto val = fam->sample(opts.validation_samples, stream::heldout);
  const ValidationReport rep = validate_compiled(co, phi, val, co.validate_from, stride, opts.cfg);
  {
    auto f = open_csv(ctx, "validation.csv");
    write_validation_csv(f, rep);
  }
  json summary = stage_summary(co);
  summary["validation_max_err"] = rep.max_err;
  summary["validation_samples"] = val.size();
  save_artifact(ctx, "summary.json", summary, 2);
  if (ctx.svg) {
    Series target{"target", {}, {}}, predicted{"network", {}, {}};
    for (const auto& r : rep.rows)
      if (r.input_id == 0 && r.component == 0) {
        target.x.push_back(r.t);
        target.y.push_back(r.target);
        predicted.x.push_back(r.t);
        predicted.y.push_back(r.predicted);
      }
    maybe_svg(ctx, "validation.svg", co.operator_name + ", held-out input 0", "t", "output", {target, predicted});
  }
  const bool ok = summary["failing_stages"].empty();
  write_manifest(ctx, {{"status", ok ? "ok" : "budget_miss"}});
  print_stages(summary);
  return ok ? 0 : 4;
}

// ---------------------------------------------------------------- approx-fn

int cmd_approx_fn(RunContext& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"seed", "function", "integrator", "compile"}, "config");
  const json& fn = section(c, "function");
  const std::string w = "config.function";
  check_keys(fn, {"name", "p", "lo", "hi", "eps", "probes"}, w);
  const std::string name = get_string(fn, "name", "", w);
  const int p = get_int(fn, "p", name == "product" ? 2 : 1, w);
  const double lo = get_double(fn, "lo", -1.0, w), hi = get_double(fn, "hi", 1.0, w);
  const double eps = get_double(fn, "eps", 0.1, w);
  const int probes = get_int(fn, "probes", 16, w);
  if (p < 1) throw ConfigError(w + ".p: must be positive");
  if (probes < 1) throw ConfigError(w + ".probes: must be at least 1");
  PointFunction F;
  int q = p;
  if (name == "identity") {
    F = [](const Eigen::VectorXd& x) { return x; };
  } else if (name == "square") {
    F = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x.array().square(); };
  } else if (name == "sin") {
    F = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x.array().sin(); };
  } else if (name == "product") {
    q = 1;
    F = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x.prod()); };
  } else if (name == "sum") {
    q = 1;
    F = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x.sum()); };
  } else {
    throw ConfigError(w + ".name: expected identity, square, sin, product or sum");
  }
  CompileOptions opts = compile_options_from(c);
  opts.enforce_budget = false;

  FunctionApproximator fa;
  try {
    fa = approximate_function(F, p, q, lo, hi, eps, opts, ctx.seed);
  } catch (const BudgetError& e) {
    return budget_miss(ctx, e, "summary.json");
  }
  save_artifact(ctx, "compiled.json", compiled_to_json(fa.compiled));

  auto f = open_csv(ctx, "probe.csv");
  f << "input_id";
  for (int i = 0; i < p; ++i) f << ",xi" << i;
  f << ",target,predicted,abs_err\n";
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const Eigen::VectorXd xi = fa.family.xi(stream::validation, i);
    const Eigen::VectorXd target = F(xi), pred = fa(xi);
    if (!pred.allFinite()) throw InstabilityError("approx-fn: non-finite network output", i);
    for (int comp = 0; comp < q; ++comp) {
      const double err = std::abs(pred(comp) - target(comp));
      worst = std::max(worst, err);
      f << i;
      if (q > 1) f << '_' << comp;
      for (int j = 0; j < p; ++j) f << ',' << format_double(xi(j));
      f << ',' << format_double(target(comp)) << ',' << format_double(pred(comp)) << ',' << format_double(err)
        << '\n';
    }
  }
  f.close();
  json summary = stage_summary(fa.compiled);
  summary["function"] = name;
  summary["probe_max_err"] = worst;
  summary["probe_met"] = worst <= eps;
  if (worst > eps) summary["failing_stages"].push_back("probe");
  save_artifact(ctx, "summary.json", summary, 2);
  const bool ok = summary["failing_stages"].empty();
  write_manifest(ctx, {{"status", ok ? "ok" : "budget_miss"}});
  print_stages(summary);
  std::cout << "probe error " << worst << " over " << probes << " points (eps " << eps << ")\n";
  return ok ? 0 : 4;
}

// ---------------------------------------------------------------- fk-sweep

int cmd_fk_sweep(RunContext& ctx) {
  const json& c = ctx.config;
  check_keys(c, {"seed", "fk", "integrator"}, "config");
  const json& s = section(c, "fk");
  const std::string w = "config.fk";
  check_keys(s, {"L", "widths", "mu_base", "c_base", "g", "length", "max_condition", "eps_orders", "T", "n_steps",
                 "amplitude", "freq"},
             w);
  OrderedCouplingSpec spec;
  spec.L = get_int(s, "L", spec.L, w);
  std::vector<double> wd = get_doubles(s, "widths", std::vector<double>(spec.L, 2.0), w);
  spec.widths.clear();
  for (double v : wd) {
    if (v != std::floor(v) || v < 1) throw ConfigError(w + ".widths: expected positive integers");
    spec.widths.push_back(static_cast<int>(v));
  }
  spec.mu_base = get_double(s, "mu_base", spec.mu_base, w);
  spec.c_base = get_double(s, "c_base", spec.c_base, w);
  spec.g = get_double(s, "g", spec.g, w);
  spec.length = get_double(s, "length", spec.length, w);
  spec.max_condition = get_double(s, "max_condition", spec.max_condition, w);
  spec.seed = ctx.seed;
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(w + ": " + e.what());
  }
  const auto eps_orders = get_doubles(s, "eps_orders", {0.2, 0.1, 0.05}, w);
  if (eps_orders.empty()) throw ConfigError(w + ".eps_orders: need at least one value");
  const TimeGrid grid(0.0, get_double(s, "T", 10.0, w), get_int(s, "n_steps", 2000, w));
  const Signal f1 = default_fk_forcing(grid, spec.widths.front(), get_double(s, "amplitude", 0.5, w),
                                       get_double(s, "freq", 1.3, w));
  const IntegratorConfig cfg = integrator_from(c, IntegratorConfig{});

  const auto rows = fk_sweep(spec, eps_orders, f1, cfg);
  for (const auto& r : rows) {
    require_finite(r.full.position, "fk-sweep");
    require_finite(r.truncated, "fk-sweep");
  }
  {
    auto f = open_csv(ctx, "fk_sweep.csv");
    write_fk_sweep_csv(f, rows);
  }
  json systems = json::array();
  json table = json::array();
  double max_row_sum = 0.0;
  for (const auto& r : rows) {
    OrderedCouplingSpec sp = spec;
    sp.eps_order = r.eps_order;
    OrderedCoupling oc = build_ordered_coupling(sp);
    with_bottom_forcing(oc, f1);
    max_row_sum = std::max(max_row_sum, oc.sys.max_row_sum());
    systems.push_back({{"eps_order", r.eps_order}, {"system", fk_to_json(oc.sys)}});
    table.push_back({{"eps_order", r.eps_order}, {"D", r.D}, {"max_offdiag_ratio", r.max_offdiag_ratio},
                     {"min_eigenvalue", oc.min_eigenvalue}, {"condition", oc.condition}});
  }
  save_artifact(ctx, "fk_systems.json", {{"systems", systems}});
  json ratios = json::array();
  for (std::size_t i = 1; i < rows.size(); ++i)
    ratios.push_back({{"from", rows[i - 1].eps_order}, {"to", rows[i].eps_order}, {"D_ratio", rows[i].D / rows[i - 1].D}});
  save_artifact(ctx, "fk_summary.json", {{"rows", table}, {"D_ratios", ratios}, {"max_row_sum", max_row_sum}}, 2);
  if (ctx.svg) {
    Series d{"D", {}, {}};
    for (const auto& r : rows) {
      d.x.push_back(r.eps_order);
      d.y.push_back(r.D);
    }
    maybe_svg(ctx, "fk_sweep.svg", "reduction error vs mass ordering", "eps_order", "D", {d});
  }
  write_manifest(ctx, {{"status", "ok"}});
  for (const auto& r : rows) std::cout << "eps_order " << r.eps_order << ": D = " << r.D << '\n';
  return 0;
}

// ---------------------------------------------------------------- verify

int cmd_verify(RunContext& ctx, const std::string& suite) {
  check_keys(ctx.config, {"seed"}, "config");
  const std::vector<Assertion> results = run_suite(suite, ctx.seed);
  json arr = json::array();
  int failed = 0;
  for (const auto& a : results) {
    arr.push_back({{"suite", a.suite},
                   {"name", a.name},
                   {"value", a.value},
                   {"threshold", a.threshold},
                   {"relation", a.relation},
                   {"passed", a.passed}});
    failed += a.passed ? 0 : 1;
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.suite << '/' << a.name << ": " << a.value << ' ' << a.relation
              << ' ' << a.threshold << '\n';
  }
  save_artifact(ctx, "verify.json",
                {{"suite", suite}, {"assertions", arr}, {"passed", failed == 0}, {"failed", failed}}, 2);
  write_manifest(ctx, {{"status", failed == 0 ? "ok" : "failed"}});
  std::cout << results.size() - failed << '/' << results.size() << " assertions passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace nosc::cli
