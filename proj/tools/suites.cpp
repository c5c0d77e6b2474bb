#include "suites.hpp"

#include "nosc/compiler.hpp"
#include "nosc/errors.hpp"
#include "nosc/pnn_fk.hpp"
#include "nosc/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace nosc::cli {

namespace {

class Recorder {
 public:
  Recorder(std::string suite, std::vector<Assertion>& out) : suite_(std::move(suite)), out_(out) {}
  void at_most(const std::string& name, double value, double threshold) {
    out_.push_back({suite_, name, value, threshold, "<=", value <= threshold});
  }
  void at_least(const std::string& name, double value, double threshold) {
    out_.push_back({suite_, name, value, threshold, ">=", value >= threshold});
  }

 private:
  std::string suite_;
  std::vector<Assertion>& out_;
};

InputEnsemble default_ensemble(std::uint64_t seed) { return InputEnsemble(1, 1.0, 8, 1.0, seed, 1000); }

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

void suite_signals(std::uint64_t seed, std::vector<Assertion>& out) {
  Recorder r("signals", out);
  const InputEnsemble ens = default_ensemble(seed);
  const auto a = ens.sample(32, stream::validation), b = ens.sample(32, stream::validation);
  double diff = 0.0, start = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, sup_distance(a[i], b[i]));
    start = std::max(start, a[i].at(0).cwiseAbs().maxCoeff());
  }
  r.at_most("resampling is bit-identical", diff, 0.0);
  r.at_most("inputs start at zero", start, 0.0);
  r.at_most("sup bound holds (max|u| / bound)", max_abs(a) / ens.sup_bound(), 1.0);
  const Signal ext = ramp_extend(a[0], 0.1);
  const int shift = ext.size() - a[0].size();
  r.at_most("ramp extension keeps samples", (ext.values().bottomRows(a[0].size()) - a[0].values()).cwiseAbs().maxCoeff(),
            0.0);
  r.at_most("ramp extension starts at zero", std::abs(ext(0, 0)), 0.0);
  r.at_least("ramp extension adds warm-up points", shift, 1);
}

void suite_harmonic(std::uint64_t seed, std::vector<Assertion>& out) {
  Recorder r("harmonic", out);
  const InputEnsemble ens = default_ensemble(seed);
  const auto us = ens.sample(20, stream::validation);
  for (double omega : {1.0, 3.0, 10.0}) {
    double osc_err = 0.0, exact_err = 0.0;
    const Eigen::VectorXd om = Eigen::VectorXd::Constant(1, omega);
    for (const auto& u : us) {
      const Signal y = harmonic_response(u, omega, {});
      const Eigen::MatrixXd ex = sine_transform_trajectory(u, om);
      for (int k = 0; k < u.size(); ++k) {
        const double quad = windowed_sine_transform(u, omega, u.grid().time(k))(0);
        osc_err = std::max(osc_err, std::abs(omega * y(k, 0) - quad));
        exact_err = std::max(exact_err, std::abs(ex(k, 0) - quad));
      }
    }
    const std::string tag = " (omega " + format_double(omega) + ")";
    r.at_most("oscillator realizes the windowed transform" + tag, osc_err, 1e-5);
    r.at_most("closed-form transform matches quadrature" + tag, exact_err, 1e-6);
  }
}

void suite_calibration(std::uint64_t seed, std::vector<Assertion>& out) {
  Recorder r("calibration", out);
  const InputEnsemble ens = default_ensemble(seed);
  for (auto kind : {ActivationKind::tanh, ActivationKind::sine})
    for (double omega : {1.0, 3.0, 10.0}) {
      const Activation act(kind);
      const SineLayerParams par = calibrate_scale(omega, ens, act, 1e-3, {});
      double rise = 0.0;
      for (std::size_t i = 1; i < par.sweep.size(); ++i)
        rise = std::max(rise, par.sweep[i].second - par.sweep[i - 1].second);
      const std::string tag = " (" + act.name() + ", omega " + format_double(omega) + ")";
      r.at_most("calibrated error" + tag, par.achieved_err, 1e-3);
      r.at_most("error sweep is nonincreasing" + tag, rise, 0.0);
    }
}

void suite_structure(std::uint64_t seed, std::vector<Assertion>& out) {
  Recorder r("structure", out);
  const Signal u1 = InputEnsemble(1, 1.0, 8, 1.0, seed, 400).sample(1, stream::validation)[0];
  const Signal u2 = InputEnsemble(2, 1.0, 8, 1.0, seed, 400).sample(1, stream::validation)[0];
  double embed = 0.0;
  for (int L = 1; L <= 3; ++L) {
    std::vector<int> widths = {3, 2, 4};
    widths.resize(L);
    const auto osc = random_multilayer(derive_seed(seed, 100, L), widths, 2, 2);
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
  r.at_most("multi-layer embedding reproduces trajectories", embed, 1e-9);

  const auto deep = random_multilayer(derive_seed(seed, 101), {3, 2, 2}, 1, 1);
  r.at_most("Verlet reversibility residual", reverse_check(deep, u1, {Method::velocity_verlet, 2, 0.1}), 1e-10);

  const auto two = random_multilayer(derive_seed(seed, 102), {4, 3}, 2, 1);
  Rng rng(derive_seed(seed, 103));
  double grad = 0.0;
  for (int layer = 1; layer <= 2; ++layer) {
    const int m = two.layers[layer - 1].width();
    const int px = layer == 1 ? 2 : 4;
    for (int trial = 0; trial < 50; ++trial) {
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
  r.at_most("Hamiltonian gradient identity", grad, 1e-6);

  const auto g = embed_multilayer_to_general(random_multilayer(derive_seed(seed, 104), {3, 3}, 1, 1));
  const CoRNNSystem c{g.W, Eigen::MatrixXd::Zero(g.m(), g.m()), g.V, g.b, 0.0, 0.0, g.act};
  double cornn = 0.0;
  for (Method m : {Method::rk4, Method::velocity_verlet}) {
    const IntegratorConfig cfg{m, 1, 0.1};
    cornn = std::max(cornn, sup_distance(simulate_cornn(c, u1, cfg).position, simulate_general(g, u1, cfg).hidden.position));
  }
  r.at_most("undamped CoRNN equals the oscillator", cornn, 1e-9);
}

void suite_reconstruction(std::uint64_t seed, std::vector<Assertion>& out) {
  Recorder r("reconstruction", out);
  const InputEnsemble ens = default_ensemble(seed);
  const double target = 0.1 * ens.sup_bound();
  const ReconstructionPlan plan = build_plan(ens, ens.T, target);
  const auto fresh = ens.sample(16, stream::heldout);
  const double err = reconstruction_errors(plan, fresh, 10).maxCoeff();
  r.at_most("fresh-sample reconstruction error / target", err / target, 1.0);
  const ReconstructionPlan folded = plan.fold();
  double fold_diff = 0.0;
  const int k = ens.n_steps;
  const Eigen::MatrixXd b_full = plan_transform(plan, fresh[0], k), b_fold = plan_transform(folded, fresh[0], k);
  for (int j = 0; j <= k; j += 10) {
    const double tau = ens.grid().time(j);
    fold_diff = std::max(fold_diff, std::abs(reconstruct(plan, b_full, ens.T, tau)(0) -
                                             reconstruct(folded, b_fold, ens.T, tau)(0)));
  }
  r.at_most("folded plan equals the full plan", fold_diff, 1e-9);
}

void suite_compiler(std::uint64_t seed, std::vector<Assertion>& out) {
  Recorder r("compiler", out);
  const InputEnsemble ens = default_ensemble(seed);
  const double tol = 0.05 * ens.sup_bound();
  const DelayNetwork dn = build_delay_network(ens, 0.2, tol);
  const double derr = delay_network_error(dn, ens.sample(16, stream::heldout), compiled_integrator());
  r.at_most("delay network held-out error / tol", derr / tol, 1.0);

  ReadoutNet net;
  Rng rng(derive_seed(seed, stream::features));
  net.Sigma = rand_mat(rng, 1, 4, 0.5);
  net.Lambda = rand_mat(rng, 4, 1, 0.5);
  net.gamma = rand_mat(rng, 4, 1, 0.5).col(0);
  const NNEmulator em = build_nn_emulator(net, ens, 0.05);
  r.at_most("shallow network emulation error", em.achieved_err, 0.05);
}

void suite_fk(std::uint64_t seed, std::vector<Assertion>& out) {
  Recorder r("fk", out);
  OrderedCouplingSpec spec;
  spec.seed = seed;
  const TimeGrid g(0.0, 10.0, 2000);
  const Signal f1 = default_fk_forcing(g, spec.widths.front());
  const auto rows = fk_sweep(spec, {0.1, 0.05}, f1, {});
  r.at_most("reduction error ratio D(0.05)/D(0.1)", rows[1].D / rows[0].D, 0.7);
  OrderedCoupling oc = build_ordered_coupling(spec);
  r.at_most("coupling row sums", oc.sys.max_row_sum(), 1e-12);
  r.at_least("K + C positive (min eigenvalue)", oc.min_eigenvalue, 1e-300);

  oc.sys.F = Signal(TimeGrid(0.0, 10.0, 1000), oc.sys.n());
  Eigen::VectorXd th0(oc.sys.n());
  Rng rng(derive_seed(seed, 200));
  for (int i = 0; i < th0.size(); ++i) th0(i) = rng.uniform(-0.4, 0.4);
  const Eigen::VectorXd v0 = Eigen::VectorXd::Zero(oc.sys.n());
  const IntegratorConfig ref{Method::rk4, 16, 0.0};
  const double d1 = fk_energy_deviation(oc.sys, th0, v0, {Method::velocity_verlet, 1, 0.0}, ref);
  const double d2 = fk_energy_deviation(oc.sys, th0, v0, {Method::velocity_verlet, 2, 0.0}, ref);
  r.at_least("energy deviation halving ratio", d1 / d2, 3.5);

  const FKTransformed tr = change_variables(oc.sys);
  const Trajectory a = simulate_fk(oc.sys, th0, v0, {});
  const Trajectory b = tr.simulate(tr.to_y(th0), tr.W.partialPivLu().solve(v0), {});
  r.at_most("angle and y coordinates agree", sup_distance(a.position, tr.to_angles(b.position)), 1e-7);
}

const std::map<std::string, std::function<void(std::uint64_t, std::vector<Assertion>&)>>& registry() {
  static const std::map<std::string, std::function<void(std::uint64_t, std::vector<Assertion>&)>> r = {
      {"signals", suite_signals},         {"harmonic", suite_harmonic},     {"calibration", suite_calibration},
      {"structure", suite_structure},     {"reconstruction", suite_reconstruction},
      {"compiler", suite_compiler},       {"fk", suite_fk}};
  return r;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> n = {"signals", "harmonic", "calibration", "structure", "reconstruction", "compiler", "fk"};
  n.push_back("all");
  return n;
}

std::vector<Assertion> run_suite(const std::string& name, std::uint64_t seed) {
  if (name.empty()) throw ConfigError("verify: empty suite name (expected one of signals, harmonic, calibration, "
                                      "structure, reconstruction, compiler, fk, all)");
  std::vector<Assertion> out;
  if (name == "all") {
    for (const auto& n : suite_names())
      if (n != "all") registry().at(n)(seed, out);
    return out;
  }
  const auto it = registry().find(name);
  if (it == registry().end()) throw ConfigError("verify: unknown suite '" + name + "'");
  it->second(seed, out);
  return out;
}

}  // namespace nosc::cli
