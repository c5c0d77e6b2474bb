#include "doctest.h"

#include "nosc/errors.hpp"
#include "nosc/oscillator.hpp"
#include "nosc/random.hpp"

#include <cmath>

using namespace nosc;

namespace {

Eigen::MatrixXd rand_mat(Rng& rng, int r, int c, double s) {
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-s, s);
  return m;
}

Eigen::VectorXd rand_vec(Rng& rng, int n, double s) { return rand_mat(rng, n, 1, s).col(0); }

MultiLayerOscillator random_multilayer(std::uint64_t seed, const std::vector<int>& widths, int p, int q,
                                       ActivationKind kind = ActivationKind::tanh) {
  Rng rng(seed);
  MultiLayerOscillator osc;
  osc.p = p;
  osc.act = Activation(kind);
  int prev = p;
  for (int w : widths) {
    OscillatorLayer l;
    l.w = -rand_vec(rng, w, 1.0).cwiseAbs() - Eigen::VectorXd::Constant(w, 0.5);
    l.V = rand_mat(rng, w, prev, 1.0);
    l.b = rand_vec(rng, w, 0.3);
    osc.layers.push_back(l);
    prev = w;
  }
  osc.A = rand_mat(rng, q, prev, 1.0);
  osc.c = rand_vec(rng, q, 0.5);
  return osc;
}

Signal test_input(int p, int n = 400, double T = 1.0) {
  InputEnsemble ens(p, T, 8, 1.0, 17, n);
  return ens.sample(1, 0)[0];
}

IntegratorConfig fixed(Method m, int sub) { return {m, sub, 0.0}; }

}  // namespace

TEST_CASE("activations satisfy the normalization and antiderivative identities") {
  for (auto k : {ActivationKind::tanh, ActivationKind::sine, ActivationKind::identity}) {
    Activation a(k);
    CHECK(a(0.0) == 0.0);
    CHECK(a.antiderivative(0.0) == 0.0);
    for (double x : {-2.0, -0.3, -0.005, 0.0001, 0.007, 0.4, 1.7}) {
      const double d = 1e-5;
      CHECK((a.antiderivative(x + d) - a.antiderivative(x - d)) / (2 * d) == doctest::Approx(a(x)).epsilon(1e-8));
      CHECK(a(a.inverse(0.5 * a(x))) == doctest::Approx(0.5 * a(x)));
    }
    // fast path agrees with libm near the switch point
    if (k == ActivationKind::tanh) CHECK(std::abs(a(0.0078) - std::tanh(0.0078)) < 1e-18);
    if (k == ActivationKind::sine) CHECK(std::abs(a(0.0078) - std::sin(0.0078)) < 1e-18);
  }
  CHECK(Activation::from_name("sine").kind() == ActivationKind::sine);
  CHECK_THROWS_AS(Activation::from_name("relu"), ConfigError);
}

TEST_CASE("rest state is a fixed point") {
  Signal zero(TimeGrid(0, 1, 100), 2);
  auto osc = random_multilayer(1, {3, 2}, 2, 1);
  for (auto& l : osc.layers) l.b.setZero();
  auto r = simulate_multilayer(osc, zero, {});
  for (const auto& l : r.layers) CHECK(sup_norm(l.position) == 0.0);
  CHECK(r.output.values().row(50).transpose().isApprox(osc.c));

  auto g = embed_multilayer_to_general(osc);
  auto rg = simulate_general(g, zero, {});
  CHECK(sup_norm(rg.hidden.position) == 0.0);

  CoRNNSystem c{g.W, g.W, g.V, g.b, 0.5, 0.5, g.act};
  CHECK(sup_norm(simulate_cornn(c, zero, {}).position) == 0.0);
}

TEST_CASE("harmonic oscillator matches the closed form") {
  const double omega = 3.0, nu = 1.7;
  TimeGrid grid(0, 2, 4000);
  Signal u(grid, 1);
  for (int k = 0; k < grid.size(); ++k) u(k, 0) = std::sin(nu * grid.time(k));
  GeneralOscillator osc{Eigen::MatrixXd::Constant(1, 1, -omega * omega), Eigen::MatrixXd::Ones(1, 1),
                        Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1),
                        Activation(ActivationKind::identity)};
  auto r = simulate_general(osc, u, {Method::rk4, 4, 0.0});
  double err = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    const double t = grid.time(k);
    const double exact = (std::sin(nu * t) - nu / omega * std::sin(omega * t)) / (omega * omega - nu * nu);
    err = std::max(err, std::abs(r.output(k, 0) - exact));
  }
  CHECK(err < 1e-7);  // dominated by the piecewise-linear input
}

TEST_CASE("self-convergence orders of rk4 and velocity Verlet") {
  auto osc = random_multilayer(5, {4}, 1, 1);
  auto g = embed_multilayer_to_general(osc);
  Signal u = test_input(1, 50, 2.0);
  auto ref = simulate_general(g, u, fixed(Method::rk4, 256)).hidden.position;
  auto err = [&](Method m, int s) { return sup_distance(simulate_general(g, u, fixed(m, s)).hidden.position, ref); };
  const double r4 = err(Method::rk4, 2) / err(Method::rk4, 4);
  const double r4b = err(Method::rk4, 4) / err(Method::rk4, 8);
  CHECK(r4 >= 14.0);
  CHECK(r4b >= 14.0);
  const double rv = err(Method::velocity_verlet, 4) / err(Method::velocity_verlet, 8);
  CHECK(rv >= 3.8);
  // the two schemes converge to each other
  const double d1 = sup_distance(simulate_general(g, u, fixed(Method::velocity_verlet, 8)).hidden.position,
                                 simulate_general(g, u, fixed(Method::rk4, 8)).hidden.position);
  const double d2 = sup_distance(simulate_general(g, u, fixed(Method::velocity_verlet, 16)).hidden.position,
                                 simulate_general(g, u, fixed(Method::rk4, 16)).hidden.position);
  CHECK(d2 < d1 / 3.0);
}

TEST_CASE("embedding has the block pattern and reproduces the layered system") {
  for (int L = 1; L <= 3; ++L) {
    std::vector<int> widths = {3, 2, 4};
    widths.resize(L);
    auto osc = random_multilayer(100 + L, widths, 2, 2);
    auto g = embed_multilayer_to_general(osc);
    // pattern: nonzero only in diagonal blocks (diagonal entries) and superdiagonal V blocks
    std::vector<int> off(L);
    int acc = 0;
    for (int l = L - 1; l >= 0; --l) {
      off[l] = acc;
      acc += widths[l];
    }
    Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(acc, acc);
    for (int l = 0; l < L; ++l) {
      for (int i = 0; i < widths[l]; ++i) mask(off[l] + i, off[l] + i) = 1;
      if (l > 0) mask.block(off[l], off[l - 1], widths[l], widths[l - 1]).setOnes();
    }
    CHECK((g.W.array() * (1.0 - mask.array())).cwiseAbs().maxCoeff() == 0.0);
    if (L > 1) CHECK(g.V.topRows(acc - widths[0]).cwiseAbs().maxCoeff() == 0.0);
    if (L == 1) {
      CHECK(g.W == Eigen::MatrixXd(osc.layers[0].w.asDiagonal()));
      CHECK(g.V == osc.layers[0].V);
    }

    Signal u = test_input(2);
    for (Method m : {Method::rk4, Method::velocity_verlet}) {
      IntegratorConfig cfg{m, 2, 0.1};
      auto rm = simulate_multilayer(osc, u, cfg);
      auto rg = simulate_general(g, u, cfg);
      double d = sup_distance(rm.output, rg.output);
      for (int l = 0; l < L; ++l) {
        Signal part(u.grid(), rg.hidden.position.values().middleCols(off[l], widths[l]));
        d = std::max(d, sup_distance(part, rm.layers[l].position));
      }
      CHECK(d <= 1e-9);
    }
  }
  auto osc = random_multilayer(3, {2}, 1, 1);
  osc.layers[0].force_outside = true;
  CHECK_THROWS_AS(embed_multilayer_to_general(osc), ConfigError);
}

TEST_CASE("CoRNN without damping or velocity coupling is the general oscillator") {
  auto osc = random_multilayer(9, {3, 3}, 1, 1);
  auto g = embed_multilayer_to_general(osc);
  Signal u = test_input(1);
  CoRNNSystem c{g.W, Eigen::MatrixXd::Zero(6, 6), g.V, g.b, 0.0, 0.0, g.act};
  for (Method m : {Method::rk4, Method::velocity_verlet}) {
    IntegratorConfig cfg{m, 1, 0.1};
    CHECK(sup_distance(simulate_cornn(c, u, cfg).position, simulate_general(g, u, cfg).hidden.position) <= 1e-9);
  }
}

TEST_CASE("damped CoRNN decays") {
  Rng rng(4);
  CoRNNSystem c{rand_mat(rng, 3, 3, 0.5), rand_mat(rng, 3, 3, 0.2), rand_mat(rng, 3, 1, 1), Eigen::VectorXd::Zero(3),
                2.0, 1.0, Activation(ActivationKind::tanh)};
  // kick the system with a short bias pulse through the input, then let it ring down
  TimeGrid grid(0, 20, 4000);
  Signal u(grid, 1);
  for (int k = 0; k < 100; ++k) u(k, 0) = 1.0;
  auto tr = simulate_cornn(c, u, {Method::rk4, 1, 0.1});
  auto energy = [&](int k) { return tr.position.at(k).squaredNorm() + tr.velocity.at(k).squaredNorm(); };
  CHECK(energy(200) > 1e-6);
  CHECK(energy(4000) < 1e-3 * energy(200));
}

TEST_CASE("Hamiltonian generates the layer dynamics") {
  auto osc = random_multilayer(21, {4, 3}, 2, 1);
  Rng rng(8);
  for (int layer = 1; layer <= 2; ++layer) {
    const int m = osc.layers[layer - 1].width();
    const int px = layer == 1 ? 2 : 4;
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
    auto rest = osc;
    for (auto& l : rest.layers) l.b.setZero();
    CHECK(hamiltonian(rest, layer, zero, zero, Eigen::VectorXd::Zero(px)) == 0.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd y = rand_vec(rng, m, 1.0), yd = rand_vec(rng, m, 1.0), x = rand_vec(rng, px, 1.0);
      const double d = 1e-5;
      Eigen::VectorXd acc = layer_acceleration(osc, layer, y, x);
      for (int i = 0; i < m; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(m, i) * d;
        const double dHdyd = (hamiltonian(osc, layer, y, yd + e, x) - hamiltonian(osc, layer, y, yd - e, x)) / (2 * d);
        const double dHdy = (hamiltonian(osc, layer, y + e, yd, x) - hamiltonian(osc, layer, y - e, yd, x)) / (2 * d);
        worst = std::max({worst, std::abs(dHdyd - yd(i)), std::abs(-dHdy - acc(i))});
      }
    }
    CHECK(worst <= 1e-6);
  }
  auto bad = osc;
  bad.layers[0].w(0) = 0.0;
  CHECK_THROWS_AS(hamiltonian(bad, 1, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(2)),
                  ConfigError);
}

TEST_CASE("frozen-forcing energy drift is second order under Verlet") {
  auto osc = random_multilayer(33, {3}, 1, 1);
  // constant input -> autonomous single layer
  TimeGrid grid(0, 10, 200);
  Signal u(grid, 1);
  u.values().setConstant(0.4);
  auto drift = [&](int sub) {
    auto r = simulate_multilayer(osc, u, fixed(Method::velocity_verlet, sub));
    const Eigen::VectorXd x = u.at(0);
    const double H0 = hamiltonian(osc, 1, r.layers[0].position.at(0), r.layers[0].velocity.at(0), x);
    double worst = 0.0;
    for (int k = 0; k < grid.size(); ++k)
      worst = std::max(worst, std::abs(hamiltonian(osc, 1, r.layers[0].position.at(k), r.layers[0].velocity.at(k), x) - H0));
    return worst;
  };
  const double ratio = drift(1) / drift(2);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("Verlet is reversible to roundoff") {
  auto osc = random_multilayer(44, {3, 2, 2}, 1, 1);
  Signal u = test_input(1, 500);
  IntegratorConfig cfg{Method::velocity_verlet, 2, 0.1};
  CHECK(reverse_check(osc, u, cfg) <= 1e-10);
  CHECK(reverse_check(osc, u, cfg, 0) == 0.0);
  auto longer = test_input(1, 500, 4.0);
  CHECK(reverse_check(osc, longer, cfg) <= 1e-10);
  CHECK_THROWS_AS(reverse_check(osc, u, {Method::rk4, 1, 0.1}), ConfigError);
}

TEST_CASE("layer-wise channel evaluation agrees with the joint integration") {
  auto osc = random_multilayer(55, {3, 4, 2}, 1, 2);
  osc.layers[0].w << -400.0, -100.0, -2.0;  // mixed stiffness
  Signal u = test_input(1, 400);
  auto joint = simulate_multilayer(osc, u, {Method::rk4, 1, 0.05});
  auto lw = simulate_layerwise(osc, u, {Method::rk4, 1, 0.05});
  CHECK(sup_distance(joint.output, lw.output) < 1e-7);
  for (int l = 0; l < 3; ++l) CHECK(sup_distance(joint.layers[l].position, lw.layers[l].position) < 1e-7);

  auto lv = simulate_layerwise(osc, u, {Method::velocity_verlet, 1, 0.02});
  CHECK(sup_distance(joint.output, lv.output) < 1e-4);

  // factored coupling gives the same forcing
  auto f = osc;
  Eigen::MatrixXd Vl = Eigen::MatrixXd::Ones(2, 1);
  Eigen::MatrixXd Vr = Eigen::MatrixXd::Random(1, 4);
  f.layers[2].V = Vl * Vr;
  f.layers[2].V_left = Vl;
  f.layers[2].V_right = Vr;
  auto dense = f;
  dense.layers[2].V_left.resize(0, 0);
  dense.layers[2].V_right.resize(0, 0);
  CHECK(sup_distance(simulate_layerwise(f, u, {}).output, simulate_layerwise(dense, u, {}).output) < 1e-12);
}

TEST_CASE("instability is reported with the step index") {
  GeneralOscillator osc{Eigen::MatrixXd::Constant(1, 1, 1e3), Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1),
                        Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1), Activation(ActivationKind::identity)};
  TimeGrid grid(0, 100, 100);
  Signal u(grid, 1);
  u.values().setOnes();
  CHECK_THROWS_AS(simulate_general(osc, u, fixed(Method::rk4, 1)), InstabilityError);
}

TEST_CASE("stiffness bound ignores feed-forward couplings") {
  GeneralOscillator g;
  g.W = Eigen::MatrixXd::Zero(3, 3);
  g.W(0, 0) = -4.0;
  g.W(1, 1) = -9.0;
  g.W(1, 0) = 1e6;  // node 0 drives node 1 only
  g.W(2, 2) = -1.0;
  g.V = Eigen::MatrixXd::Zero(3, 1);
  g.b = Eigen::VectorXd::Zero(3);
  g.A = Eigen::MatrixXd::Zero(1, 3);
  g.c = Eigen::VectorXd::Zero(1);
  CHECK(stiffness_frequency(g) == doctest::Approx(3.0));
  // closing the loop makes nodes 0 and 1 one block
  g.W(0, 1) = 2.0;
  CHECK(stiffness_frequency(g) == doctest::Approx(std::sqrt(9.0 + 1e6)));

  MultiLayerOscillator net;
  net.p = 1;
  OscillatorLayer a, b;
  a.w = Eigen::VectorXd::Constant(2, -16.0);
  a.V = Eigen::MatrixXd::Ones(2, 1);
  a.b = Eigen::VectorXd::Zero(2);
  b.w = Eigen::VectorXd::Constant(1, -25.0);
  b.V = Eigen::MatrixXd::Constant(1, 2, 1e8);
  b.b = Eigen::VectorXd::Zero(1);
  net.layers = {a, b};
  net.A = Eigen::MatrixXd::Ones(1, 1);
  net.c = Eigen::VectorXd::Zero(1);
  CHECK(stiffness_frequency(net) == doctest::Approx(5.0));
}
