#include "doctest.h"

#include "nosc/errors.hpp"
#include "nosc/pnn_fk.hpp"
#include "nosc/random.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace nosc;

namespace {

FKSystem free_pendula(int n, const TimeGrid& g) {
  FKSystem s;
  s.mu = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
  s.k = pendulum_springs(s.mu);
  s.C = Eigen::MatrixXd::Zero(n, n);
  s.F = Signal(g, n);
  return s;
}

FKSystem random_coupled(int n, std::uint64_t seed, const TimeGrid& g) {
  Rng rng(seed);
  FKSystem s = free_pendula(n, g);
  for (int i = 0; i < n; ++i) s.mu(i) = rng.uniform(0.5, 2.0);
  s.k = pendulum_springs(s.mu);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) s.C(i, j) = s.C(j, i) = rng.uniform(-1.0, 1.0);
  enforce_zero_row_sums(s.C);
  for (int k = 0; k < s.F.size(); ++k)
    for (int i = 0; i < n; ++i) s.F(k, i) = 0.3 * std::sin(2.0 * g.time(k) + i);
  return s;
}

const TimeGrid grid10(0.0, 10.0, 2000);

}  // namespace

TEST_CASE("pendula at rest stay at rest") {
  const FKSystem s = free_pendula(3, grid10);
  const Trajectory tr = simulate_fk(s, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), IntegratorConfig());
  CHECK(tr.position.values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("small-amplitude period of a single pendulum") {
  const TimeGrid g(0.0, 10.0, 10000);
  const FKSystem s = free_pendula(1, g);
  const Trajectory tr = simulate_fk(s, Eigen::VectorXd::Constant(1, 0.01), Eigen::VectorXd::Zero(1), IntegratorConfig());
  // downward zero crossings, linearly interpolated
  std::vector<double> cross;
  for (int k = 0; k < g.n_steps; ++k) {
    const double a = tr.position(k, 0), b = tr.position(k + 1, 0);
    if (a > 0.0 && b <= 0.0) cross.push_back(g.time(k) + g.h() * a / (a - b));
  }
  REQUIRE(cross.size() >= 3);
  const double period = (cross.back() - cross.front()) / (cross.size() - 1);
  const double ref = 2 * std::numbers::pi * std::sqrt(1.0 / 9.81);
  CHECK(std::abs(period - ref) <= 0.01 * ref);
}

TEST_CASE("antisymmetric start of two identical coupled pendula stays antisymmetric") {
  FKSystem s = free_pendula(2, grid10);
  s.mu.setConstant(1.3);
  s.k = pendulum_springs(s.mu);
  s.C << 0.7, -0.7, -0.7, 0.7;
  Eigen::VectorXd th(2), v(2);
  th << 0.4, -0.4;
  v << -0.1, 0.1;
  const Trajectory tr = simulate_fk(s, th, v, IntegratorConfig());
  CHECK((tr.position.values().col(0) + tr.position.values().col(1)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(tr.position.values().cwiseAbs().maxCoeff() > 0.1);
}

TEST_CASE("Verlet energy deviation is second order without forcing") {
  FKSystem s = random_coupled(4, 3, TimeGrid(0.0, 10.0, 1000));
  s.F = Signal(s.F.grid(), 4);
  Eigen::VectorXd th(4);
  th << 0.3, -0.2, 0.1, 0.4;
  const Eigen::VectorXd v = Eigen::VectorXd::Zero(4);
  const IntegratorConfig ref{Method::rk4, 16, 0.0};
  const double d1 = fk_energy_deviation(s, th, v, {Method::velocity_verlet, 1, 0.0}, ref);
  const double d2 = fk_energy_deviation(s, th, v, {Method::velocity_verlet, 2, 0.0}, ref);
  CHECK(d1 / d2 >= 3.5);

  // uncoupled pendula are conservative: the energy itself is nearly constant
  FKSystem free = free_pendula(2, s.F.grid());
  const Trajectory tr = simulate_fk(free, th.head(2), v.head(2), {Method::velocity_verlet, 2, 0.0});
  const double e0 = fk_energy(free, tr.position.at(0), tr.velocity.at(0));
  double drift = 0.0;
  for (int k = 0; k < tr.position.size(); ++k)
    drift = std::max(drift, std::abs(fk_energy(free, tr.position.at(k), tr.velocity.at(k)) - e0));
  CHECK(drift <= 1e-3 * e0);
}

TEST_CASE("system validation") {
  FKSystem s = random_coupled(3, 1, grid10);
  CHECK_NOTHROW(s.validate());
  CHECK(s.max_row_sum() <= 1e-12);
  FKSystem bad = s;
  bad.C(0, 1) += 0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.C(0, 0) += 0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = s;
  bad.mu(1) = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(simulate_fk(s, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3), IntegratorConfig()),
                  ConfigError);
}

TEST_CASE("change of variables") {
  SUBCASE("uncoupled: W = M^-1 K is diagonal") {
    const FKSystem s = free_pendula(3, grid10);
    const FKTransformed t = change_variables(s);
    CHECK((t.W - Eigen::MatrixXd(Eigen::VectorXd::Constant(3, 9.81).asDiagonal())).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("theta = P y reproduces the angle dynamics") {
    const FKSystem s = random_coupled(5, 7, grid10);
    const FKTransformed t = change_variables(s);
    CHECK(t.W.allFinite());
    Eigen::VectorXd th(5), v(5);
    th << 0.2, -0.1, 0.3, 0.0, -0.25;
    v << 0.1, 0.0, -0.2, 0.05, 0.0;
    const IntegratorConfig cfg;
    const Trajectory a = simulate_fk(s, th, v, cfg);
    const Trajectory b = t.simulate(t.to_y(th), t.to_y(v), cfg);
    CHECK(sup_distance(a.position, t.to_angles(b.position)) <= 1e-7);
  }
  SUBCASE("singular K + C is rejected") {
    FKSystem s = random_coupled(3, 2, grid10);
    s.k.setConstant(1e-12);
    CHECK_THROWS_AS(change_variables(s), ConfigError);
  }
}

TEST_CASE("ordered coupling construction") {
  OrderedCouplingSpec spec;
  const OrderedCoupling oc = build_ordered_coupling(spec);
  const FKSystem& s = oc.sys;
  CHECK(s.n() == 6);
  CHECK(s.max_row_sum() <= 1e-12);
  CHECK((s.C - s.C.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(oc.positive());
  // masses ordered eps^l, layer L first
  CHECK(s.mu(0) == doctest::Approx(1e-3));
  CHECK(s.mu(5) == doctest::Approx(0.1));
  // M^-1 C vanishes beyond the neighbouring blocks: layer 3 (rows 0-1) and layer 1 (cols 4-5)
  const Eigen::MatrixXd MC = s.mu.cwiseInverse().asDiagonal() * s.C;
  CHECK(MC.block(0, 4, 2, 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(MC.block(4, 0, 2, 2).cwiseAbs().maxCoeff() == 0.0);
  // forward couplings O(1), feedback O(eps)
  for (int l = 1; l < 3; ++l) {
    CHECK(oc.forward[l] > 0.1);
    CHECK(oc.forward[l] <= 1.0);
    CHECK(oc.feedback[l] == doctest::Approx(spec.eps_order * oc.forward[l]));
  }
  spec.eps_order = 0.05;
  const OrderedCoupling half = build_ordered_coupling(spec);
  CHECK(half.max_offdiag_ratio() == doctest::Approx(0.5 * oc.max_offdiag_ratio()));

  OrderedCouplingSpec one;
  one.L = 1;
  one.widths = {3};
  const OrderedCoupling single = build_ordered_coupling(one);
  CHECK(single.sys.C.cwiseAbs().maxCoeff() == 0.0);

  OrderedCouplingSpec bad;
  bad.eps_order = 1.0;
  CHECK_THROWS_AS(build_ordered_coupling(bad), ConfigError);
  bad = OrderedCouplingSpec();
  bad.widths = {2, 0, 2};
  CHECK_THROWS_AS(build_ordered_coupling(bad), ConfigError);
  bad = OrderedCouplingSpec();
  bad.widths = {2, 2};
  CHECK_THROWS_AS(build_ordered_coupling(bad), ConfigError);
}

TEST_CASE("feed-forward reduction of the ordered system") {
  OrderedCouplingSpec spec;
  const Signal f1 = default_fk_forcing(grid10, 2);
  const IntegratorConfig cfg;

  SUBCASE("no coupling: the truncation is exact") {
    spec.c_base = 0.0;
    const ReductionReport r = compare_reduction(spec, f1, cfg);
    CHECK(r.D <= 1e-12);
  }
  SUBCASE("deviation shrinks with the ordering parameter") {
    const auto rows = fk_sweep(spec, {0.2, 0.1, 0.05, 0.025}, f1, cfg);
    for (const auto& r : rows) CHECK(r.deviation_t0 == 0.0);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].D <= rows[i - 1].D);
    CHECK(rows[2].D / rows[1].D <= 0.7);
    CHECK(rows[1].D > 0.0);
    std::ostringstream os;
    write_fk_sweep_csv(os, rows);
    CHECK(os.str().rfind("eps_order,D,max_offdiag_ratio\n", 0) == 0);
  }
  SUBCASE("truncated network shape") {
    OrderedCoupling oc = build_ordered_coupling(spec);
    const MultiLayerOscillator net = truncated_network(oc);
    CHECK(net.depth() == 3);
    CHECK(net.layers[0].force_outside);
    CHECK_FALSE(net.layers[1].force_outside);
    CHECK(net.act.kind() == ActivationKind::sine);
    CHECK_THROWS_AS(with_bottom_forcing(oc, default_fk_forcing(grid10, 3)), ConfigError);
  }
}
