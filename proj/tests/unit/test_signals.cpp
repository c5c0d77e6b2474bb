#include "doctest.h"

#include "nosc/errors.hpp"
#include "nosc/random.hpp"
#include "nosc/signals.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

using namespace nosc;

TEST_CASE("time grid spacing and points") {
  TimeGrid g(-0.5, 1.5, 8);
  CHECK(g.h() == doctest::Approx(0.25));
  CHECK(g.time(0) == -0.5);
  CHECK(g.time(8) == doctest::Approx(1.5));
  CHECK(g.size() == 9);
  CHECK_THROWS_AS(TimeGrid(0, 1, 1), ConfigError);
  CHECK_THROWS_AS(TimeGrid(1, 1, 4), ConfigError);
}

TEST_CASE("zero amplitude ensemble is identically zero") {
  InputEnsemble ens(2, 1.0, 5, 0.0, 3, 100);
  for (const auto& u : ens.sample(4, 0)) CHECK(sup_norm(u) == 0.0);
}

TEST_CASE("ensemble sampling is deterministic and anchored at zero") {
  InputEnsemble ens(2, 1.0, 8, 1.0, 42, 200);
  auto a = ens.sample(5, 1);
  auto b = ens.sample(5, 1);
  auto c = ens.sample(5, 2);
  for (int i = 0; i < 5; ++i) {
    CHECK((a[i].values().array() == b[i].values().array()).all());
    CHECK(a[i].at(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sup_norm(a[i]) <= ens.sup_bound());
  }
  CHECK(sup_distance(a[0], c[0]) > 0.0);
  // sample i does not depend on how many were drawn
  auto d = ens.sample(2, 1);
  CHECK(sup_distance(a[1], d[1]) == 0.0);
}

TEST_CASE("single mode sup norm sits at T/2") {
  InputEnsemble ens(1, 2.0, 1, 1.0, 0, 1000);
  Eigen::MatrixXd a(1, 1);
  a(0, 0) = -0.7;
  Signal u = ens.from_coefficients(a);
  CHECK(sup_norm(u) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(u(500, 0) == doctest::Approx(-0.7).epsilon(1e-12));  // t = 1 = T/2
}

TEST_CASE("zero extension and interpolation") {
  TimeGrid g(0.0, 1.0, 10);
  Signal u(g, 1);
  for (int k = 0; k < g.size(); ++k) u(k, 0) = g.time(k);
  CHECK(zero_extend(u, -1.0)(0) == 0.0);
  CHECK(zero_extend(u, 0.3)(0) == u(3, 0));
  CHECK(zero_extend(u, 0.35)(0) == doctest::Approx(0.35).epsilon(1e-14));
  CHECK_THROWS_AS(zero_extend(u, 1.5), std::out_of_range);
}

TEST_CASE("ramp extension") {
  TimeGrid g(0.0, 1.0, 100);
  Signal u(g, 2);
  u.values().col(0).setConstant(3.0);
  for (int k = 0; k < g.size(); ++k) u(k, 1) = std::sin(g.time(k));
  Signal e = ramp_extend(u, 0.1);
  CHECK(e.grid().t_start == doctest::Approx(-0.1));
  CHECK(e.size() == 111);
  CHECK(e(0, 0) == 0.0);
  CHECK(e(5, 0) == doctest::Approx(1.5));
  // restriction to [0,T] is bitwise the input
  CHECK((e.values().bottomRows(101).array() == u.values().array()).all());
  // u(0) = 0 channel stays zero on the ramp
  CHECK(e.values().col(1).head(10).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(ramp_extend(u, 0.0), ConfigError);
  CHECK_THROWS_AS(ramp_extend(u, 0.105), ConfigError);
}

TEST_CASE("sup distance is a metric and matches brute force") {
  InputEnsemble ens(3, 1.0, 6, 1.0, 7, 50);
  auto s = ens.sample(3, 0);
  double brute = 0.0;
  for (int k = 0; k < s[0].size(); ++k)
    for (int i = 0; i < 3; ++i) brute = std::max(brute, std::abs(s[0](k, i) - s[1](k, i)));
  CHECK(sup_distance(s[0], s[1]) == brute);
  CHECK(sup_distance(s[0], s[0]) == 0.0);
  CHECK(sup_distance(s[0], s[1]) == sup_distance(s[1], s[0]));
  CHECK(sup_distance(s[0], s[2]) <= sup_distance(s[0], s[1]) + sup_distance(s[1], s[2]) + 1e-15);
  Signal shifted = s[0];
  shifted.values().col(1).array() += 0.25;
  CHECK(sup_distance(s[0], shifted) == doctest::Approx(0.25));
  Signal other(TimeGrid(0, 2, 50), 3);
  CHECK_THROWS(sup_distance(s[0], other));
}

TEST_CASE("empirical modulus grows with the lag") {
  InputEnsemble ens(1, 1.0, 8, 1.0, 11, 400);
  auto s = ens.sample(16, 0);
  double prev = 0.0;
  for (double d : {0.0025, 0.005, 0.01, 0.02, 0.05, 0.1}) {
    const double m = empirical_modulus(s, d);
    CHECK(m >= prev);
    prev = m;
  }
  CHECK(empirical_modulus(s, 0.01) <= max_slope(s) * 0.01 + 1e-12);
}

TEST_CASE("offset family starts from rest and keeps its offset") {
  OffsetFamily fam;
  fam.base = InputEnsemble(1, 1.0, 8, 1.0, 5, 100);
  fam.c_max = 0.5;
  fam.t0 = 0.1;
  auto s = fam.sample(3, 0);
  CHECK(s[0].grid().t_start == doctest::Approx(-0.1));
  CHECK(s[0](0, 0) == 0.0);
  CHECK(std::abs(s[0](10, 0)) > 0.0);
  CHECK(sup_norm(s[0]) <= fam.sup_bound());
}

TEST_CASE("csv round trip keeps full precision") {
  InputEnsemble ens(2, 1.0, 8, 1.0, 9, 20);
  Signal u = ens.sample(1, 0)[0];
  const std::string path = "test_signal_roundtrip.csv";
  write_signal_csv(path, u);
  Signal r = read_signal_csv(path);
  std::remove(path.c_str());
  CHECK(r.grid().n_steps == 20);
  CHECK(sup_distance(u, r) == 0.0);
  std::ostringstream os;
  write_signal_csv(os, u);
  CHECK(os.str().rfind("t,x0,x1\n", 0) == 0);
}

TEST_CASE("seed derivation separates streams") {
  CHECK(derive_seed(1, 1, 0) != derive_seed(1, 2, 0));
  CHECK(derive_seed(1, 1, 0) != derive_seed(1, 1, 1));
  Rng a(5), b(5);
  for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
}
