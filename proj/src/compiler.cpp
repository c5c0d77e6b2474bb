#include "nosc/compiler.hpp"

#include "nosc/errors.hpp"
#include "nosc/random.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <sstream>

namespace nosc {

namespace {

std::shared_ptr<const InputFamily> borrow(const InputFamily& fam) {
  return std::shared_ptr<const InputFamily>(&fam, [](const InputFamily*) {});
}

int index_from(const TimeGrid& g, double from) {
  if (std::isnan(from)) return 0;
  const double x = (from - g.t_start) / g.h();
  return std::clamp(static_cast<int>(std::ceil(x - 1e-9)), 0, g.n_steps);
}

// Max |a - b| over rows k0.. of two (grid x q) matrices.
double tail_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int k0) {
  const int n = static_cast<int>(a.rows()) - k0;
  if (n <= 0) return 0.0;
  return (a.bottomRows(n) - b.bottomRows(n)).cwiseAbs().maxCoeff();
}

// Sigma sigma(Lambda x(t) + gamma) on every grid point (grid x q).
Eigen::MatrixXd readout_on_grid(const ReadoutNet& net, const Signal& x) {
  return net.eval(x.values().transpose()).transpose();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

}  // namespace

IntegratorConfig compiled_integrator() {
  IntegratorConfig cfg;
  cfg.method = Method::rk4;
  cfg.substeps = 1;
  cfg.max_h_omega = 0.25;
  return cfg;
}

OscillatorLayer bank_layer(const FrequencyBank& bank, bool time_channel) {
  bank.validate();
  const int N = bank.size(), p = bank.p;
  const int m = p * N + (time_channel ? 1 : 0);
  OscillatorLayer L;
  L.w = Eigen::VectorXd::Zero(m);
  L.V = Eigen::MatrixXd::Zero(m, p);
  L.b = Eigen::VectorXd::Zero(m);
  for (int c = 0; c < p; ++c)
    for (int j = 0; j < N; ++j) {
      const auto& ch = bank.channels[j];
      L.w(c * N + j) = -ch.omega * ch.omega;
      L.V(c * N + j, c) = ch.s;
    }
  // y'' = sigma(b) = 1/2 from rest: y = t^2/4
  if (time_channel) L.b(m - 1) = bank.act.inverse(0.5);
  return L;
}

// ---------------------------------------------------------------- delay

MultiLayerOscillator DelayNetwork::network() const {
  MultiLayerOscillator net;
  net.p = bank.p;
  net.act = bank.act;
  net.layers.push_back(bank_layer(bank, false));
  net.A = A;
  net.c = Eigen::VectorXd::Zero(A.rows());
  return net;
}

Signal DelayNetwork::run(const Signal& u, const IntegratorConfig& cfg) const {
  return simulate_layerwise(network(), u, cfg, false).output;
}

double delay_network_error(const DelayNetwork& net, const std::vector<Signal>& us, const IntegratorConfig& cfg) {
  const TargetOperator ref = delay_operator(net.delay, net.bank.p);
  double err = 0.0;
  for (const auto& u : us) err = std::max(err, sup_distance(net.run(u, cfg), ref(u)));
  return err;
}

DelayNetwork build_delay_network(const InputFamily& fam, double delay, double tol, const IntegratorConfig& cfg,
                                 const DelayOptions& opts) {
  const TimeGrid g = fam.grid();
  const double T = g.length();
  if (!(delay >= 0.0) || delay > T) throw ConfigError("build_delay_network: delay must lie in [0, T]");
  if (!(tol > 0.0)) throw ConfigError("build_delay_network: tol must be positive");
  if (!(opts.plan_share > 0.0 && opts.plan_share < 1.0)) throw ConfigError("build_delay_network: plan_share in (0,1)");

  DelayNetwork dn;
  dn.delay = delay;
  dn.tol = tol;
  const double window = std::min(T, std::max(delay, 0.01 * T));
  dn.plan = build_plan(fam, window, opts.plan_share * tol, opts.plan).fold();
  const int N = dn.plan.terms(), p = fam.dim();

  Eigen::VectorXd a(N);
  for (int j = 0; j < N; ++j) a(j) = dn.plan.alpha(j) * std::sin(dn.plan.omega(j) * delay - dn.plan.theta(j));
  const double weight = a.cwiseAbs().sum();
  const double bank_tol = weight > 0.0 ? (1.0 - opts.plan_share) * tol / weight : tol;
  dn.bank = calibrate_bank(dn.plan.omega, fam, Activation(), bank_tol, cfg, opts.bank);

  dn.A = Eigen::MatrixXd::Zero(p, p * N);
  for (int c = 0; c < p; ++c)
    for (int j = 0; j < N; ++j) dn.A(c, c * N + j) = a(j) * dn.bank.channels[j].readout();

  dn.achieved_err = delay_network_error(dn, fam.sample(opts.validation_samples, stream::heldout), cfg);
  if (dn.achieved_err > tol)
    throw BudgetError("delay_network", "validated error " + fmt(dn.achieved_err) + " exceeds tol " + fmt(tol));
  return dn;
}

// ---------------------------------------------------------------- NN emulation

OscillatorLayer NNEmulator::nonlinear_layer(const Eigen::VectorXd& in_scale) const {
  const int H = net.H();
  OscillatorLayer L;
  L.w = Eigen::VectorXd::Zero(2 * H);
  L.b.resize(2 * H);
  L.b << net.gamma, net.gamma;
  L.V_left = Eigen::MatrixXd::Zero(2 * H, H);
  L.V_left.topRows(H).setIdentity();
  L.V_right = in_scale.size() ? Eigen::MatrixXd(net.Lambda * in_scale.asDiagonal()) : net.Lambda;
  L.V = L.V_left * L.V_right;
  return L;
}

OscillatorLayer NNEmulator::delay_layer() const {
  const int N = bank.size(), q = net.q(), H = net.H();
  OscillatorLayer L;
  L.w.resize(q * N);
  L.b = Eigen::VectorXd::Zero(q * N);
  L.V_left = Eigen::MatrixXd::Zero(q * N, q);
  for (int r = 0; r < q; ++r)
    for (int j = 0; j < N; ++j) {
      L.w(r * N + j) = -bank.channels[j].omega * bank.channels[j].omega;
      L.V_left(r * N + j, r) = bank.channels[j].s;
    }
  // zeta = Sigma (y1 - y2)
  L.V_right.resize(q, 2 * H);
  L.V_right << net.Sigma, -net.Sigma;
  L.V = L.V_left * L.V_right;
  return L;
}

MultiLayerOscillator NNEmulator::network() const {
  MultiLayerOscillator m;
  m.p = net.in_dim();
  m.act = net.act;
  m.layers = {nonlinear_layer(), delay_layer()};
  m.A = A;
  m.c = c;
  return m;
}

Eigen::MatrixXd second_difference_readout(const ReconstructionPlan& plan, const FrequencyBank& bank, double dt, int q) {
  if (!(dt > 0.0)) throw ConfigError("second_difference_readout: spacing must be positive");
  const int N = plan.terms();
  if (bank.size() != N) throw ConfigError("second_difference_readout: bank does not match the plan");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(q, q * N);
  for (int j = 0; j < N; ++j) {
    const double w = plan.omega(j), th = plan.theta(j);
    const double d2 = std::sin(-th) - 2.0 * std::sin(w * dt - th) + std::sin(2.0 * w * dt - th);
    const double v = plan.alpha(j) * bank.channels[j].readout() * d2 / (dt * dt);
    for (int r = 0; r < q; ++r) A(r, r * N + j) = v;
  }
  return A;
}

NNEmulator build_nn_emulator(const ReadoutNet& net, const InputFamily& fam, double tol, const IntegratorConfig& cfg,
                             const EmulatorOptions& opts) {
  net.validate();
  if (!(tol > 0.0)) throw ConfigError("build_nn_emulator: tol must be positive");
  if (fam.dim() != net.in_dim()) throw ConfigError("build_nn_emulator: input dimension does not match Lambda");
  if (opts.fd_fractions.empty()) throw ConfigError("build_nn_emulator: empty finite-difference sweep");
  for (double f : opts.fd_fractions)
    if (!(f > 0.0 && f <= 0.25)) throw ConfigError("build_nn_emulator: fd fractions must lie in (0, 1/4]");
  if (!(opts.eps_min > 0.0 && opts.eps_min <= opts.eps_max)) throw ConfigError("build_nn_emulator: bad eps bounds");

  const TimeGrid g = fam.grid();
  const double T = g.length();
  const int q = net.q(), H = net.H();
  const int k0 = index_from(g, opts.validate_from);

  NNEmulator em;
  em.net = net;
  em.tol = tol;
  em.c = net.Sigma * net.gamma.unaryExpr([&](double x) { return net.act(x); });

  // zeta = Sigma (y1 - y2) from the nonlinear layer alone
  MultiLayerOscillator first;
  first.p = net.in_dim();
  first.act = net.act;
  first.layers = {em.nonlinear_layer()};
  first.A.resize(q, 2 * H);
  first.A << net.Sigma, -net.Sigma;
  first.c = Eigen::VectorXd::Zero(q);

  auto zfam = std::make_shared<MappedFamily>();
  zfam->base = borrow(fam);
  zfam->map = [first, cfg](const Signal& x) { return simulate_layerwise(first, x, cfg, false).output; };
  zfam->out_dim = q;
  zfam->cache = std::make_shared<MappedFamily::Cache>();

  // target second derivative g = zeta'' = Sigma sigma(Lambda x + gamma) - c
  const auto probe = fam.sample(opts.probe_samples, stream::probe);
  std::vector<Signal> gs;
  for (const auto& x : probe) {
    Eigen::MatrixXd v = readout_on_grid(net, x);
    v.rowwise() -= em.c.transpose();
    gs.emplace_back(g, std::move(v));
  }
  zfam->bound = max_abs(zfam->sample(opts.probe_samples, stream::probe));
  const double slope = max_slope(gs);

  // mollified delay-bank plan for zeta: the second difference sees the
  // smoothing as an extra delay eps/2, so eps follows tol / |g'|
  const double eps = std::clamp(slope > 0.0 ? tol / (4.0 * slope) : opts.eps_max * T, opts.eps_min * T,
                                opts.eps_max * T);
  const double L = opts.tail_cut / eps;
  const double max_dt = *std::max_element(opts.fd_fractions.begin(), opts.fd_fractions.end()) * T;
  const double window = std::min(T, 2.0 * max_dt);
  const long N = alias_free_size(L, T, window, eps, opts.alias_margin);
  em.plan = make_plan(eps, L, static_cast<int>(N), window, T, q).fold();
  em.bank = calibrate_bank(em.plan.omega, *zfam, net.act, opts.bank_tol, cfg, opts.bank);

  // all spacings at once: stacked readouts on one simulation per probe
  const int nd = static_cast<int>(opts.fd_fractions.size());
  Eigen::MatrixXd A_all(nd * q, q * em.bank.size());
  for (int i = 0; i < nd; ++i)
    A_all.middleRows(i * q, q) = second_difference_readout(em.plan, em.bank, opts.fd_fractions[i] * T, q);
  em.A = A_all;
  em.c = em.c.replicate(nd, 1).eval();
  Eigen::VectorXd c1 = em.c.head(q);
  const MultiLayerOscillator sweep_net = em.network();
  Eigen::VectorXd errs = Eigen::VectorXd::Zero(nd);
  for (std::size_t s = 0; s < probe.size(); ++s) {
    const Eigen::MatrixXd out = simulate_layerwise(sweep_net, probe[s], cfg, false).output.values();
    const Eigen::MatrixXd ref = readout_on_grid(net, probe[s]);
    for (int i = 0; i < nd; ++i) errs(i) = std::max(errs(i), tail_err(out.middleCols(i * q, q), ref, k0));
  }
  int best = 0;
  for (int i = 0; i < nd; ++i) {
    em.sweep.emplace_back(opts.fd_fractions[i] * T, errs(i));
    if (errs(i) < errs(best)) best = i;
  }
  em.fd_dt = opts.fd_fractions[best] * T;
  em.A = A_all.middleRows(best * q, q);
  em.c = c1;
  em.achieved_err = errs(best);

  if (opts.validation_samples > 0) {
    const MultiLayerOscillator m = em.network();
    double err = 0.0;
    for (const auto& x : fam.sample(opts.validation_samples, stream::heldout))
      err = std::max(err, tail_err(simulate_layerwise(m, x, cfg, false).output.values(), readout_on_grid(net, x), k0));
    em.achieved_err = err;
  }
  return em;
}

// ---------------------------------------------------------------- compiler

std::vector<OscillatorLayer> compiled_layers(const FrequencyBank& bank, const ReadoutNet& readout,
                                             const FrequencyBank& bank3) {
  const int N = bank.size(), p = bank.p;
  if (readout.in_dim() != p * N + 1) throw ConfigError("compiled_layers: readout does not match the bank");
  Eigen::VectorXd in_scale(p * N + 1);
  for (int c = 0; c < p; ++c)
    for (int j = 0; j < N; ++j) in_scale(c * N + j) = bank.channels[j].readout();
  in_scale(p * N) = 1.0;
  NNEmulator em;
  em.net = readout;
  em.bank = bank3;
  return {bank_layer(bank, true), em.nonlinear_layer(in_scale), em.delay_layer()};
}


double CompiledOscillator::stage_sum() const {
  double s = 0.0;
  for (const auto& st : stages) s += st.achieved;
  return s;
}

Signal CompiledOscillator::run(const Signal& u, const IntegratorConfig& cfg) const {
  return simulate_layerwise(net, u, cfg, false).output;
}

TargetOperator as_operator(const CompiledOscillator& co, const IntegratorConfig& cfg) {
  TargetOperator op;
  op.name = "compiled:" + co.operator_name;
  op.p = co.p;
  op.q = co.q;
  op.fn = [co, cfg](const Signal& u) { return co.run(u, cfg); };
  return op;
}

CompiledOscillator compile_operator(const TargetOperator& phi, const InputFamily& fam, double eps_total,
                                    const CompileOptions& opts) {
  if (!(eps_total > 0.0)) throw ConfigError("compile_operator: eps_total must be positive");
  if (phi.p != fam.dim()) throw ConfigError("compile_operator: operator and family dimensions differ");
  double share = 0.0;
  for (double s : opts.split) {
    if (!(s >= 0.0)) throw ConfigError("compile_operator: negative budget share");
    share += s;
  }
  if (share > 1.0 + 1e-12) throw ConfigError("compile_operator: budget shares exceed 1");
  if (opts.validation_samples < 1) throw ConfigError("compile_operator: need held-out inputs");

  const CausalityReport caus = check_causality(phi, fam, opts.causality_probes);
  if (!caus.passed)
    throw ConfigError("compile_operator: operator '" + phi.name + "' failed the causality check (violation " +
                      fmt(caus.max_violation) + ")");

  const TimeGrid g = fam.grid();
  const double T = g.length();
  const int n = g.n_steps;
  const int k0 = index_from(g, opts.validate_from);
  const Activation& act = opts.act;
  const IntegratorConfig& cfg = opts.cfg;

  CompiledOscillator co;
  co.operator_name = phi.name;
  co.p = phi.p;
  co.q = phi.q;
  co.grid = g;
  co.eps_total = eps_total;
  co.validate_from = g.time(k0);

  const auto val = fam.sample(opts.validation_samples, stream::heldout);
  std::vector<Eigen::MatrixXd> refs;
  for (const auto& u : val) refs.push_back(phi(u).values());
  std::vector<int> times;
  for (int k = k0; k <= n; ++k) times.push_back(k);

  double avail = 0.0;
  auto open_stage = [&](const std::string& name, double share_i) {
    avail += share_i * eps_total;
    co.stages.push_back({name, avail, 0.0, {}});
  };
  auto close_stage = [&](double achieved, const std::string& detail) {
    auto& st = co.stages.back();
    st.achieved = achieved;
    st.detail = detail;
    avail -= achieved;
    if (opts.enforce_budget && !st.met())
      throw BudgetError(st.name, "achieved " + fmt(achieved) + " > budget " + fmt(st.budget) + " (" + detail + ")");
  };

  // -- stage A: reconstruction plan at the operator's Lipschitz-scaled budget
  open_stage("reconstruction", opts.split[0]);
  co.operator_lipschitz = estimate_lipschitz(phi, fam, opts.lipschitz_probes);
  const double kappa = std::max(co.operator_lipschitz, opts.lipschitz_floor);
  double plan_target = opts.split[0] * eps_total / kappa;
  if (fam.sup_bound() > 0.0) plan_target = std::min(plan_target, fam.sup_bound());
  ReconstructionPlan plan;
  try {
    plan = build_plan(fam, T, plan_target, opts.plan);
  } catch (const BudgetError& e) {
    throw BudgetError("reconstruction", e.what());
  }
  const PsiOracle po(std::move(plan), phi, g);
  co.plan = po.plan;
  const int Nf = po.plan.terms();

  // Psi at exact transforms on the held-out inputs; exact features alongside
  Eigen::MatrixXd psi_exact(phi.q, val.size() * times.size());
  Eigen::MatrixXd x_exact(phi.p * Nf + 1, val.size() * times.size());
  double e_A = 0.0;
  {
    constexpr std::size_t kChunk = 128;
    for (std::size_t c0 = 0; c0 < times.size(); c0 += kChunk) {
      const std::vector<int> chunk(times.begin() + c0, times.begin() + std::min(times.size(), c0 + kChunk));
      std::vector<Eigen::MatrixXd> betas;
      std::vector<int> ks;
      for (std::size_t i = 0; i < val.size(); ++i) {
        const Eigen::MatrixXd rows = sine_transform_rows(val[i], po.plan.omega, chunk);
        for (std::size_t m = 0; m < chunk.size(); ++m) {
          const std::size_t col = i * times.size() + c0 + m;
          const double t = chunk[m] * g.h();
          x_exact.col(col).head(phi.p * Nf) = rows.row(m).transpose();
          x_exact(phi.p * Nf, col) = 0.25 * t * t;
          betas.push_back(Eigen::Map<const Eigen::MatrixXd>(rows.row(m).eval().data(), Nf, phi.p));
          ks.push_back(chunk[m]);
        }
      }
      const Eigen::MatrixXd out = psi_eval_batch(po, betas, ks);
      for (std::size_t i = 0; i < val.size(); ++i)
        for (std::size_t m = 0; m < chunk.size(); ++m) {
          const std::size_t col = i * times.size() + c0 + m;
          psi_exact.col(col) = out.row(i * chunk.size() + m).transpose();
          e_A = std::max(e_A, (psi_exact.col(col) - refs[i].row(chunk[m]).transpose()).cwiseAbs().maxCoeff());
        }
    }
  }
  close_stage(e_A, "N=" + std::to_string(po.plan.N) + " eps=" + fmt(po.plan.eps_moll) + " L=" + fmt(po.plan.L_cut) +
                       " Lip(Phi)=" + fmt(co.operator_lipschitz));

  // -- stage B (bank) is opened before the readout fit; its gate needs the readout
  open_stage("bank", opts.split[1]);
  // the bank tolerances are targets; the stage gate is the measured e_B
  BankOptions bo = opts.bank;
  bo.best_effort = true;
  co.bank = calibrate_bank(po.plan.omega, fam, act, opts.bank_tol, cfg, bo);
  auto feat = std::make_shared<MappedFamily>();
  feat->base = borrow(fam);
  feat->out_dim = phi.p * Nf + 1;
  feat->bound = fam.sup_bound();
  feat->cache = std::make_shared<MappedFamily::Cache>();
  auto set_bank = [&](const FrequencyBank& bank) {
    feat->map = [bank, cfg](const Signal& u) { return eval_bank(bank, u, cfg); };
    feat->cache->streams.clear();
  };
  set_bank(co.bank);
  auto deployed_features = [&] {
    const auto fs = feat->sample(opts.validation_samples, stream::heldout);
    Eigen::MatrixXd X(phi.p * Nf + 1, val.size() * times.size());
    for (std::size_t i = 0; i < val.size(); ++i)
      for (std::size_t m = 0; m < times.size(); ++m) X.col(i * times.size() + m) = fs[i].at(times[m]);
    return X;
  };

  // -- stage C: readout fit on deployed features against Psi targets
  ReadoutOptions ro = opts.readout;
  const double readout_budget = (opts.split[0] + opts.split[1] + opts.split[2]) * eps_total - e_A;
  ro.target = opts.readout_target_fraction * std::max(readout_budget, 0.0);
  if (ro.target <= 0.0) ro.target = 1e-12;
  const FeatureMap fmap = [&](const Signal& u) { return eval_bank(co.bank, u, cfg); };
  const ReadoutFit fit = fit_readout(po, fam, fmap, ro, act);
  co.readout = fit.net;
  co.readout_sweep = fit.sweep;
  co.readout_lipschitz = fit.net.lipschitz();

  const Eigen::MatrixXd nn_exact = fit.net.eval(x_exact);
  Eigen::MatrixXd x_dep = deployed_features();
  Eigen::MatrixXd nn_dep = fit.net.eval(x_dep);
  double e_B = (nn_exact - nn_dep).cwiseAbs().maxCoeff();
  const double e_C = (psi_exact - nn_exact).cwiseAbs().maxCoeff();

  std::string bank_detail = "s=" + fmt(co.bank.channels.front().s) + " bank_err=" + fmt(co.bank.achieved_err) +
                            " Lip(readout)=" + fmt(co.readout_lipschitz);
  const double bank_budget = co.stages.back().budget;
  if (e_B > bank_budget) {
    // tighten the bank to the Lipschitz-propagated tolerance once
    const double tol_req = bank_budget / co.readout_lipschitz;
    if (tol_req >= opts.bank_tol_floor && tol_req < co.bank.achieved_err) {
      co.bank = calibrate_bank(po.plan.omega, fam, act, tol_req, cfg, bo);
      set_bank(co.bank);
      x_dep = deployed_features();
      nn_dep = fit.net.eval(x_dep);
      e_B = (nn_exact - nn_dep).cwiseAbs().maxCoeff();
      bank_detail += " recalibrated to " + fmt(tol_req);
    } else {
      bank_detail += " required tol " + fmt(tol_req) + " not reachable";
    }
  }
  close_stage(e_B, bank_detail);

  open_stage("readout", opts.split[2]);
  close_stage(e_C, "H=" + std::to_string(fit.net.H()) + " fit_err=" + fmt(fit.fit_err));

  // -- stage D: emulate the readout with two oscillator layers
  open_stage("emulator", opts.split[3]);
  EmulatorOptions eo = opts.emulator;
  eo.validate_from = co.validate_from;
  eo.validation_samples = 0;  // measured on the deployed network below
  const NNEmulator em = build_nn_emulator(fit.net, *feat, std::max(avail, 1e-12), cfg, eo);
  co.fd_dt = em.fd_dt;
  co.fd_sweep = em.sweep;
  co.plan3 = em.plan;
  co.bank3 = em.bank;

  co.net.p = phi.p;
  co.net.act = act;
  co.net.layers = compiled_layers(co.bank, fit.net, em.bank);
  co.net.A = em.A;
  co.net.c = em.c;
  co.net.validate();

  double e_D = 0.0, e2e = 0.0;
  const auto fs = feat->sample(opts.validation_samples, stream::heldout);
  for (std::size_t i = 0; i < val.size(); ++i) {
    const Eigen::MatrixXd z = co.run(val[i], cfg).values();
    e_D = std::max(e_D, tail_err(z, readout_on_grid(fit.net, fs[i]), k0));
    e2e = std::max(e2e, tail_err(z, refs[i], k0));
  }
  co.e2e = e2e;
  close_stage(e_D, "fd_dt=" + fmt(em.fd_dt) + " N3=" + std::to_string(em.plan.N) +
                       " eps3=" + fmt(em.plan.eps_moll) + " bank3_err=" + fmt(em.bank.achieved_err));

  if (opts.enforce_budget && !co.budget_met())
    throw BudgetError("end_to_end", "held-out error " + fmt(e2e) + " exceeds eps_total " + fmt(eps_total));
  return co;
}

ValidationReport validate_compiled(const CompiledOscillator& co, const TargetOperator& phi,
                                   const std::vector<Signal>& us, double from, int stride,
                                   const IntegratorConfig& cfg) {
  if (stride < 1) throw ConfigError("validate_compiled: stride must be positive");
  ValidationReport rep;
  for (std::size_t i = 0; i < us.size(); ++i) {
    const Signal z = co.run(us[i], cfg);
    const Signal ref = phi(us[i]);
    const int k0 = index_from(us[i].grid(), from);
    for (int k = k0; k < z.size(); ++k) {
      for (int r = 0; r < co.q; ++r) {
        const double e = std::abs(z(k, r) - ref(k, r));
        rep.max_err = std::max(rep.max_err, e);
        if ((k - k0) % stride == 0 || k + 1 == z.size())
          rep.rows.push_back({static_cast<int>(i), z.grid().time(k), r, ref(k, r), z(k, r)});
      }
    }
  }
  return rep;
}

void write_validation_csv(std::ostream& os, const ValidationReport& rep) {
  bool multi = false;
  for (const auto& r : rep.rows) multi = multi || r.component > 0;
  os << "input_id,t,target,predicted,abs_err\n";
  for (const auto& r : rep.rows) {
    os << r.input_id;
    if (multi) os << '_' << r.component;
    os << ',' << format_double(r.t) << ',' << format_double(r.target) << ',' << format_double(r.predicted) << ','
       << format_double(std::abs(r.predicted - r.target)) << '\n';
  }
}

// ---------------------------------------------------------------- functions

Eigen::VectorXd FunctionApproximator::operator()(const Eigen::VectorXd& xi) const {
  if (xi.size() != family.p) throw ConfigError("function approximator: argument dimension mismatch");
  const Signal z = compiled.run(family.from_xi(xi), cfg);
  return z.at(z.size() - 1);
}

FunctionApproximator approximate_function(const PointFunction& F, int p, int q, double lo, double hi, double eps,
                                          CompileOptions opts, std::uint64_t seed) {
  if (!(eps > 0.0)) throw ConfigError("approximate_function: eps must be positive");
  if (!(lo < hi)) throw ConfigError("approximate_function: empty box");
  if (p < 1 || q < 1) throw ConfigError("approximate_function: dimensions must be positive");
  FunctionApproximator fa;
  fa.family.p = p;
  fa.family.T = 2.0;
  fa.family.lo = lo;
  fa.family.hi = hi;
  fa.family.seed = seed;
  fa.cfg = opts.cfg;
  const TargetOperator phi = function_readout_operator(F, p, q, 1.0);
  fa.compiled = compile_operator(phi, fa.family, eps, opts);
  return fa;
}

}  // namespace nosc
