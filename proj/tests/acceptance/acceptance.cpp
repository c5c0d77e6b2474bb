// Acceptance criteria 1-10. Usage: acceptance [criterion ...] (default: all).
// Prints one PASS/FAIL line per criterion; exit status 0 iff all requested pass.

#include "nosc/compiler.hpp"
#include "nosc/errors.hpp"
#include "nosc/pnn_fk.hpp"
#include "nosc/random.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

using namespace nosc;

namespace {

constexpr std::uint64_t kSeed = 2024;

InputEnsemble default_ensemble() { return InputEnsemble(1, 1.0, 8, 1.0, kSeed, 1000); }

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) passed = false;
    detail << (ok ? "" : "[miss] ") << what << "; ";
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

Eigen::MatrixXd rand_mat(Rng& rng, int r, int c, double s) {
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-s, s);
  return m;
}

MultiLayerOscillator random_multilayer(std::uint64_t seed, const std::vector<int>& widths, int p, int q) {
  Rng rng(seed);
  MultiLayerOscillator osc;
  osc.p = p;
  int prev = p;
  for (int w : widths) {
    OscillatorLayer l;
    l.w = -rand_mat(rng, w, 1, 1.0).col(0).cwiseAbs() - Eigen::VectorXd::Constant(w, 0.5);
    l.V = rand_mat(rng, w, prev, 1.0);
    l.b = rand_mat(rng, w, 1, 0.3).col(0);
    osc.layers.push_back(l);
    prev = w;
  }
  osc.A = rand_mat(rng, q, prev, 1.0);
  osc.c = rand_mat(rng, q, 1, 0.5).col(0);
  return osc;
}

// 1. oscillator realization of the windowed sine transform
void harmonic_transform(Outcome& o) {
  const auto us = default_ensemble().sample(20, stream::validation);
  for (double omega : {1.0, 3.0, 10.0}) {
    double err = 0.0;
    for (const auto& u : us) {
      const Signal y = harmonic_response(u, omega, {});
      for (int k = 0; k < u.size(); ++k)
        err = std::max(err, std::abs(omega * y(k, 0) - windowed_sine_transform(u, omega, u.grid().time(k))(0)));
    }
    o.require(err <= 1e-5, "omega " + num(omega) + ": sup err " + num(err) + " <= 1e-5");
  }
}

// 2. scale calibration
void calibration(Outcome& o) {
  const InputEnsemble ens = default_ensemble();
  for (auto kind : {ActivationKind::tanh, ActivationKind::sine})
    for (double omega : {1.0, 3.0, 10.0}) {
      const Activation act(kind);
      const SineLayerParams par = calibrate_scale(omega, ens, act, 1e-3, {});
      bool monotone = true;
      for (std::size_t i = 1; i < par.sweep.size(); ++i) monotone = monotone && par.sweep[i].second <= par.sweep[i - 1].second;
      o.require(par.achieved_err <= 1e-3 && monotone, act.name() + " omega " + num(omega) + ": err " +
                                                           num(par.achieved_err) + (monotone ? " monotone" : " NOT monotone"));
    }
}

// 3. reconstruction plan and its tightening
void reconstruction(Outcome& o) {
  const InputEnsemble ens = default_ensemble();
  const double target = 0.05 * ens.sup_bound();
  PlanOptions opts;
  opts.max_N = 32768;
  const auto fresh = ens.sample(32, stream::heldout);
  const ReconstructionPlan loose = build_plan(ens, ens.T, target, opts);
  const double e_loose = reconstruction_errors(loose, fresh, 10).maxCoeff();
  o.require(e_loose <= target, "N " + std::to_string(loose.N) + ": fresh err " + num(e_loose) + " <= " + num(target));
  const ReconstructionPlan tight = build_plan(ens, ens.T, 0.1 * target, opts);
  const double e_tight = reconstruction_errors(tight, fresh, 10).maxCoeff();
  o.require(tight.N > loose.N, "tightened N " + std::to_string(tight.N) + " > " + std::to_string(loose.N));
  o.require(e_tight < e_loose, "tightened fresh err " + num(e_tight) + " < " + num(e_loose));
}

// 4. delay network
void delay(Outcome& o) {
  const InputEnsemble ens = default_ensemble();
  const double tol = 0.05 * ens.sup_bound();
  const DelayNetwork dn = build_delay_network(ens, 0.2, tol);
  const double err = delay_network_error(dn, ens.sample(16, stream::heldout), compiled_integrator());
  o.require(err <= tol, "held-out err " + num(err) + " <= " + num(tol) + " (N " + std::to_string(dn.plan.N) + ")");
  Signal u(ens.grid(), 1);
  for (int k = 0; k < u.size(); ++k) u(k, 0) = std::sin(3.0 * std::numbers::pi * u.grid().time(k)) / 9.0;
  const double e_sine = delay_network_error(dn, {u}, compiled_integrator());
  o.require(e_sine <= tol, "single sine err " + num(e_sine) + " <= " + num(tol));
}

// 5. shallow network emulation
void emulation(Outcome& o) {
  const InputEnsemble ens = default_ensemble();
  ReadoutNet net;
  Rng rng(derive_seed(kSeed, stream::features));
  net.Sigma = rand_mat(rng, 1, 4, 0.5);
  net.Lambda = rand_mat(rng, 4, 1, 0.5);
  net.gamma = rand_mat(rng, 4, 1, 0.5).col(0);
  EmulatorOptions eo;
  eo.validation_samples = 16;
  const NNEmulator em = build_nn_emulator(net, ens, 0.05, compiled_integrator(), eo);
  o.require(em.achieved_err <= 0.05, "held-out err " + num(em.achieved_err) + " <= 0.05 (fd_dt " + num(em.fd_dt) + ")");
}

void compile_check(Outcome& o, const std::string& label, const TargetOperator& phi, const InputFamily& fam, double eps,
                   CompileOptions opts) {
  opts.enforce_budget = false;
  opts.validation_samples = 16;
  const CompiledOscillator co = compile_operator(phi, fam, eps, opts);
  o.require(co.budget_met() && co.ledger_consistent(),
            label + ": e2e " + num(co.e2e) + " <= " + num(eps) + ", stage sum " + num(co.stage_sum()) +
                (co.ledger_consistent() ? " (ledger consistent)" : " (ledger INCONSISTENT)"));
}

// 6. end-to-end compilation of three operators
void end_to_end(Outcome& o) {
  const InputEnsemble ens = default_ensemble();
  const double eps = 0.1 * ens.sup_bound();
  compile_check(o, "delay 0.2", delay_operator(0.2), ens, eps, {});
  compile_check(o, "integral", running_integral_operator(), ens, eps, {});
  compile_check(o, "damped ode", damped_ode_operator(1.0), ens, eps, {});
}

// 7. continuous functions on a box
void functions(Outcome& o) {
  const std::vector<std::pair<std::string, PointFunction>> cases = {
      {"xi", [](const Eigen::VectorXd& x) { return x; }},
      {"xi1*xi2", [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, x(0) * x(1)); }}};
  for (int p = 1; p <= 2; ++p) {
    const auto& [label, F] = cases[p - 1];
    CompileOptions opts;
    opts.enforce_budget = false;
    const FunctionApproximator fa = approximate_function(F, p, 1, -1.0, 1.0, 0.1, opts, kSeed);
    double worst = 0.0;
    for (int i = 0; i < 16; ++i) {
      const Eigen::VectorXd xi = fa.family.xi(stream::validation, i);
      worst = std::max(worst, (fa(xi) - F(xi)).cwiseAbs().maxCoeff());
    }
    o.require(worst <= 0.1, label + ": 16-point probe err " + num(worst) + " <= 0.1");
  }
}

// 8. structural identities
void structure(Outcome& o) {
  const Signal u1 = InputEnsemble(1, 1.0, 8, 1.0, 17, 400).sample(1, 0)[0];
  const Signal u2 = InputEnsemble(2, 1.0, 8, 1.0, 17, 400).sample(1, 0)[0];
  double embed = 0.0;
  for (int L = 1; L <= 3; ++L) {
    std::vector<int> widths = {3, 2, 4};
    widths.resize(L);
    const auto osc = random_multilayer(100 + L, widths, 2, 2);
    const auto g = embed_multilayer_to_general(osc);
    for (Method m : {Method::rk4, Method::velocity_verlet}) {
      const IntegratorConfig cfg{m, 2, 0.1};
      const auto rm = simulate_multilayer(osc, u2, cfg);
      const auto rg = simulate_general(g, u2, cfg);
      embed = std::max(embed, sup_distance(rm.output, rg.output));
      int off = g.m();
      for (int l = 0; l < L; ++l) {
        off -= widths[l];
        const Signal part(u2.grid(), rg.hidden.position.values().middleCols(off, widths[l]));
        embed = std::max(embed, sup_distance(part, rm.layers[l].position));
      }
    }
  }
  o.require(embed <= 1e-9, "embedding " + num(embed) + " <= 1e-9");

  const double rev = reverse_check(random_multilayer(44, {3, 2, 2}, 1, 1), u1, {Method::velocity_verlet, 2, 0.1});
  o.require(rev <= 1e-10, "reversibility " + num(rev) + " <= 1e-10");

  const auto two = random_multilayer(21, {4, 3}, 2, 1);
  Rng rng(8);
  double grad = 0.0;
  for (int layer = 1; layer <= 2; ++layer) {
    const int m = two.layers[layer - 1].width();
    const int px = layer == 1 ? 2 : 4;
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd y = rand_mat(rng, m, 1, 1.0).col(0), yd = rand_mat(rng, m, 1, 1.0).col(0),
                            x = rand_mat(rng, px, 1, 1.0).col(0);
      const Eigen::VectorXd acc = layer_acceleration(two, layer, y, x);
      const double d = 1e-5;
      for (int i = 0; i < m; ++i) {
        const Eigen::VectorXd e = Eigen::VectorXd::Unit(m, i) * d;
        const double dHdyd = (hamiltonian(two, layer, y, yd + e, x) - hamiltonian(two, layer, y, yd - e, x)) / (2 * d);
        const double dHdy = (hamiltonian(two, layer, y + e, yd, x) - hamiltonian(two, layer, y - e, yd, x)) / (2 * d);
        grad = std::max({grad, std::abs(dHdyd - yd(i)), std::abs(-dHdy - acc(i))});
      }
    }
  }
  o.require(grad <= 1e-6, "Hamiltonian gradient " + num(grad) + " <= 1e-6");

  const auto g = embed_multilayer_to_general(random_multilayer(9, {3, 3}, 1, 1));
  const CoRNNSystem c{g.W, Eigen::MatrixXd::Zero(g.m(), g.m()), g.V, g.b, 0.0, 0.0, g.act};
  double cornn = 0.0;
  for (Method m : {Method::rk4, Method::velocity_verlet}) {
    const IntegratorConfig cfg{m, 1, 0.1};
    cornn = std::max(cornn, sup_distance(simulate_cornn(c, u1, cfg).position, simulate_general(g, u1, cfg).hidden.position));
  }
  o.require(cornn <= 1e-9, "CoRNN reduction " + num(cornn) + " <= 1e-9");
}

// 9. pendulum network reduction
void fk(Outcome& o) {
  const OrderedCouplingSpec spec;
  const TimeGrid grid(0.0, 10.0, 2000);
  const Signal f1 = default_fk_forcing(grid, spec.widths.front());
  const auto rows = fk_sweep(spec, {0.1, 0.05}, f1, {});
  const double ratio = rows[1].D / rows[0].D;
  o.require(ratio <= 0.7, "D(0.05)/D(0.1) = " + num(rows[1].D) + "/" + num(rows[0].D) + " = " + num(ratio) + " <= 0.7");
  OrderedCoupling oc = build_ordered_coupling(spec);
  o.require(oc.sys.max_row_sum() <= 1e-12, "row sums " + num(oc.sys.max_row_sum()) + " <= 1e-12");
  oc.sys.F = Signal(TimeGrid(0.0, 10.0, 1000), oc.sys.n());
  Eigen::VectorXd th0(oc.sys.n());
  th0 << 0.3, -0.2, 0.1, 0.4, -0.3, 0.2;
  const Eigen::VectorXd v0 = Eigen::VectorXd::Zero(oc.sys.n());
  const IntegratorConfig ref{Method::rk4, 16, 0.0};
  const double d1 = fk_energy_deviation(oc.sys, th0, v0, {Method::velocity_verlet, 1, 0.0}, ref);
  const double d2 = fk_energy_deviation(oc.sys, th0, v0, {Method::velocity_verlet, 2, 0.0}, ref);
  o.require(d1 / d2 >= 3.5, "energy drift halving ratio " + num(d1 / d2) + " >= 3.5");
}

// 10. warm-up for inputs with u(0) != 0
void warm_up(Outcome& o) {
  OffsetFamily fam;
  fam.base = default_ensemble();
  fam.c_max = 0.25;
  fam.t0 = 0.1 * fam.base.T;
  CompileOptions opts;
  opts.validate_from = 0.0;
  compile_check(o, "delay 0.2 from -0.1T", delay_operator(0.2), fam, 0.1 * fam.base.sup_bound(), opts);
}

struct Criterion {
  const char* title;
  double runtime_limit;  // seconds
  std::function<void(Outcome&)> run;
};

const std::map<int, Criterion>& criteria() {
  static const std::map<int, Criterion> c = {
      {1, {"sine transform realized by harmonic oscillators", 10, harmonic_transform}},
      {2, {"scale calibration", 60, calibration}},
      {3, {"reconstruction plan", 120, reconstruction}},
      {4, {"delay network", 120, delay}},
      {5, {"shallow network emulation", 180, emulation}},
      {6, {"end-to-end compilation", 900, end_to_end}},
      {7, {"function approximation", 600, functions}},
      {8, {"structure checks", 30, structure}},
      {9, {"pendulum network reduction", 120, fk}},
      {10, {"warm-up phase", 300, warm_up}},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (!criteria().count(k)) {
      std::cerr << "unknown criterion '" << argv[i] << "' (expected 1-10)\n";
      return 2;
    }
    which.push_back(k);
  }
  if (which.empty())
    for (const auto& [k, c] : criteria()) which.push_back(k);

  int failed = 0;
  for (int k : which) {
    const Criterion& c = criteria().at(k);
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs < c.runtime_limit, "runtime " + num(secs) + " s < " + num(c.runtime_limit) + " s");
    failed += o.passed ? 0 : 1;
    std::cout << "criterion " << k << " [" << c.title << "]: " << (o.passed ? "PASS" : "FAIL") << " -- "
              << o.detail.str() << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
