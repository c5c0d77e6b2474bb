#include "doctest.h"

#include "nosc/errors.hpp"
#include "nosc/random.hpp"
#include "nosc/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

using namespace nosc;

namespace {

Eigen::MatrixXd rand_mat(Rng& rng, int r, int c) {
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1) * std::pow(10.0, rng.uniform(-8, 8));
  return m;
}

bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

// through text, as a file would
json reparse(const json& j) { return json::parse(j.dump()); }

}  // namespace

TEST_CASE("matrices and vectors round-trip bit-exactly") {
  Rng rng(1);
  const Eigen::MatrixXd dense = rand_mat(rng, 4, 7);
  CHECK(same(matrix_from_json(reparse(matrix_to_json(dense))), dense));
  CHECK(matrix_to_json(dense).contains("data"));

  Eigen::MatrixXd sp = Eigen::MatrixXd::Zero(50, 40);
  sp(3, 7) = 1.0 / 3.0;
  sp(49, 0) = -2e-300;
  CHECK(matrix_to_json(sp).contains("sparse"));
  CHECK(same(matrix_from_json(reparse(matrix_to_json(sp))), sp));
  CHECK(same(matrix_from_json(reparse(matrix_to_json(Eigen::MatrixXd(0, 3)))), Eigen::MatrixXd(0, 3)));

  Eigen::VectorXd v(4);
  v << std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(), -0.1,
      std::numeric_limits<double>::denorm_min();
  const Eigen::VectorXd w = vector_from_json(reparse(vector_to_json(v)));
  CHECK(std::isnan(w(0)));
  CHECK(w(1) == v(1));
  CHECK(w(2) == v(2));
  CHECK(w(3) == v(3));
}

TEST_CASE("general and multi-layer networks round-trip") {
  Rng rng(2);
  GeneralOscillator g;
  g.W = rand_mat(rng, 5, 5);
  g.V = rand_mat(rng, 5, 2);
  g.b = rand_mat(rng, 5, 1).col(0);
  g.A = rand_mat(rng, 3, 5);
  g.c = rand_mat(rng, 3, 1).col(0);
  g.act = Activation(ActivationKind::sine);
  const GeneralOscillator g2 = general_from_json(reparse(network_to_json(g)));
  CHECK(same(g2.W, g.W));
  CHECK(same(g2.V, g.V));
  CHECK(same(g2.b, g.b));
  CHECK(same(g2.A, g.A));
  CHECK(same(g2.c, g.c));
  CHECK(g2.act.kind() == ActivationKind::sine);

  MultiLayerOscillator m;
  m.p = 2;
  OscillatorLayer a, b;
  a.w = rand_mat(rng, 3, 1).col(0);
  a.V = rand_mat(rng, 3, 2);
  a.b = rand_mat(rng, 3, 1).col(0);
  a.force_outside = true;
  b.w = rand_mat(rng, 4, 1).col(0);
  b.b = rand_mat(rng, 4, 1).col(0);
  b.V_left = rand_mat(rng, 4, 1);
  b.V_right = rand_mat(rng, 1, 3);
  b.V = b.V_left * b.V_right;
  m.layers = {a, b};
  m.A = rand_mat(rng, 1, 4);
  m.c = Eigen::VectorXd::Constant(1, 0.25);
  const MultiLayerOscillator m2 = multilayer_from_json(reparse(network_to_json(m)));
  REQUIRE(m2.depth() == 2);
  CHECK(m2.layers[0].force_outside);
  CHECK(same(m2.layers[0].V, a.V));
  CHECK(m2.layers[1].factored());
  CHECK(same(m2.layers[1].V, b.V));
  CHECK(same(m2.A, m.A));

  // a missing right factor is only allowed where the caller rebuilds it
  CHECK_THROWS_AS(multilayer_from_json(network_to_json(m, false)), ConfigError);
}

TEST_CASE("plans, banks and readouts round-trip") {
  ReconstructionPlan plan = make_plan(0.05, 400.0, 64, 1.0, 1.0).fold();
  plan.achieved_err = 0.0125;
  plan.history.push_back({64, 0.05, 400.0, 0.0125});
  const ReconstructionPlan p2 = plan_from_json(reparse(plan_to_json(plan)));
  CHECK(p2.N == plan.N);
  CHECK(p2.folded);
  CHECK(same(p2.omega, plan.omega));
  CHECK(same(p2.alpha, plan.alpha));
  CHECK(same(p2.theta, plan.theta));
  CHECK(p2.achieved_err == plan.achieved_err);
  REQUIRE(p2.history.size() == 1);
  CHECK(p2.history[0].L_cut == 400.0);

  FrequencyBank bank;
  bank.p = 2;
  bank.channels = {{1.5, 0.125, 1e-7, {{0.25, 3e-7}, {0.125, 1e-7}}}, {3.0, 0.125, 2e-7, {}}};
  const FrequencyBank b2 = bank_from_json(reparse(bank_to_json(bank)));
  CHECK(b2.p == 2);
  REQUIRE(b2.size() == 2);
  CHECK(b2.channels[0].sweep.size() == 2);
  CHECK(b2.channels[1].omega == 3.0);

  Rng rng(4);
  ReadoutNet net;
  net.Sigma = rand_mat(rng, 2, 6);
  net.Lambda = rand_mat(rng, 6, 3);
  net.gamma = rand_mat(rng, 6, 1).col(0);
  const ReadoutNet n2 = readout_from_json(reparse(readout_to_json(net)));
  CHECK(same(n2.Sigma, net.Sigma));
  CHECK(same(n2.Lambda, net.Lambda));
  CHECK(same(n2.gamma, net.gamma));
}

TEST_CASE("compiled oscillator round-trips and reproduces its outputs") {
  InputEnsemble ens(1, 1.0, 2, 1.0, 8, 100);
  CompileOptions o;
  o.readout.samples = 40;
  o.readout.times = 24;
  o.readout.H = 16;
  o.readout.max_H = 16;
  o.validation_samples = 6;
  o.emulator.probe_samples = 4;
  o.emulator.tail_cut = 20.0;
  o.emulator.eps_min = 0.02;
  o.emulator.fd_fractions = {0.05};
  o.enforce_budget = false;
  const CompiledOscillator co = compile_operator(running_integral_operator(), ens, 0.5 * ens.sup_bound(), o);

  const json j = reparse(compiled_to_json(co));
  CHECK(j["stages"].size() == 4);
  CHECK_FALSE(j["network"]["layers"][1].contains("V_right"));
  const CompiledOscillator c2 = compiled_from_json(j);
  CHECK(c2.operator_name == co.operator_name);
  CHECK(c2.e2e == co.e2e);
  CHECK(c2.stages[2].achieved == co.stages[2].achieved);
  REQUIRE(c2.net.depth() == 3);
  for (int l = 0; l < 3; ++l) CHECK(same(c2.net.layers[l].V, co.net.layers[l].V));
  CHECK(same(c2.net.A, co.net.A));
  const Signal u = ens.sample(1, 5)[0];
  CHECK(same(c2.run(u).values(), co.run(u).values()));

  // a tampered network no longer matches its provenance
  json bad = j;
  bad["network"]["layers"][2]["w"][0] = 1.0;
  CHECK_THROWS_AS(compiled_from_json(bad), ConfigError);
  bad = j;
  bad.erase("bank3");
  CHECK_THROWS_WITH_AS(compiled_from_json(bad), doctest::Contains("bank3"), ConfigError);
}

TEST_CASE("pendulum systems round-trip") {
  OrderedCoupling oc = build_ordered_coupling(OrderedCouplingSpec());
  with_bottom_forcing(oc, default_fk_forcing(TimeGrid(0, 1, 20), 2));
  const FKSystem s = fk_from_json(reparse(fk_to_json(oc.sys)));
  CHECK(same(s.C, oc.sys.C));
  CHECK(same(s.mu, oc.sys.mu));
  CHECK(same(s.F.values(), oc.sys.F.values()));
  CHECK(s.F.grid() == oc.sys.F.grid());
}

TEST_CASE("malformed documents are configuration errors") {
  CHECK_THROWS_WITH_AS(matrix_from_json(json{{"rows", 2}, {"cols", 2}, {"data", {1.0, 2.0}}}),
                       doctest::Contains("expected 4 entries"), ConfigError);
  CHECK_THROWS_AS(matrix_from_json(json{{"rows", 2}, {"cols", 2}, {"sparse", {{5, 0, 1.0}}}}), ConfigError);
  CHECK_THROWS_AS(vector_from_json(json{1.0, "x"}), ConfigError);
  CHECK_THROWS_AS(general_from_json(json{{"kind", "multilayer"}}), ConfigError);
  CHECK_THROWS_AS(integrator_from_json(json{{"method", "euler"}, {"substeps", 1}, {"max_h_omega", 0.1}}),
                  ConfigError);
  const std::string path = "serialization_test_bad.json";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("{\"rows\": 1,", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_json(path), ConfigError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_json("does/not/exist.json"), ConfigError);
}
