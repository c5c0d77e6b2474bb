#include "doctest.h"

#include "nosc/errors.hpp"
#include "nosc/random.hpp"
#include "nosc/sine_transform.hpp"

#include <cmath>
#include <numbers>

using namespace nosc;

namespace {

InputEnsemble default_ens(int n = 1000) { return InputEnsemble(1, 1.0, 8, 1.0, 2024, n); }

}  // namespace

TEST_CASE("transform of trivial inputs") {
  Signal zero(TimeGrid(0, 1, 100), 2);
  CHECK(windowed_sine_transform(zero, 3.0, 0.7).cwiseAbs().maxCoeff() == 0.0);
  auto u = default_ens().sample(1, 0)[0];
  CHECK(windowed_sine_transform(u, 3.0, 0.0)(0) == 0.0);
  CHECK_THROWS_AS(windowed_sine_transform(u, 3.0, 1.5), std::out_of_range);
}

TEST_CASE("transform of the ramp u(t)=t at omega=pi is 1/pi") {
  TimeGrid g(0, 1, 1000);
  Signal u(g, 1);
  for (int k = 0; k < g.size(); ++k) u(k, 0) = g.time(k);
  CHECK(windowed_sine_transform(u, std::numbers::pi, 1.0)(0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
  Eigen::MatrixXd tr = sine_transform_trajectory(u, Eigen::VectorXd::Constant(1, std::numbers::pi));
  CHECK(tr(1000, 0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("closed form for a sine input") {
  // L_t sin(nu .)(omega) = [omega sin(nu t) - nu sin(omega t)] / (omega^2 - nu^2)
  const double nu = 2.0;
  TimeGrid g(0, 1, 4000);
  Signal u(g, 1);
  for (int k = 0; k < g.size(); ++k) u(k, 0) = std::sin(nu * g.time(k));
  for (double omega : {0.5, 5.0, 300.0}) {
    Eigen::MatrixXd tr = sine_transform_trajectory(u, Eigen::VectorXd::Constant(1, omega));
    double err = 0.0;
    for (int k = 0; k < g.size(); k += 7) {
      const double t = g.time(k);
      const double exact = (omega * std::sin(nu * t) - nu * std::sin(omega * t)) / (omega * omega - nu * nu);
      err = std::max(err, std::abs(tr(k, 0) - exact));
    }
    CHECK(err < 2e-8);  // linear interpolation of the input
  }
}

TEST_CASE("Simpson oracle and the exact piecewise-linear route agree") {
  auto us = InputEnsemble(2, 1.0, 8, 1.0, 5, 200).sample(3, 0);
  Eigen::VectorXd om(4);
  om << -7.0, 1.0, 3.0, 10.0;
  for (const auto& u : us) {
    Eigen::MatrixXd tr = sine_transform_trajectory(u, om);
    for (int k = 0; k <= 200; k += 13)
      for (int j = 0; j < 4; ++j) {
        Eigen::VectorXd s = windowed_sine_transform(u, om(j), u.grid().time(k));
        for (int c = 0; c < 2; ++c) CHECK(std::abs(s(c) - tr(k, c * 4 + j)) < 1e-9);
      }
  }
}

TEST_CASE("transform is linear and bounded") {
  auto us = default_ens(300).sample(2, 0);
  Signal mix(us[0].grid(), 1);
  mix.values() = 0.3 * us[0].values() - 1.7 * us[1].values();
  Eigen::VectorXd om = Eigen::VectorXd::LinSpaced(5, 0.5, 40.0);
  Eigen::MatrixXd a = sine_transform_trajectory(us[0], om), b = sine_transform_trajectory(us[1], om),
                  m = sine_transform_trajectory(mix, om);
  CHECK((m - (0.3 * a - 1.7 * b)).cwiseAbs().maxCoeff() < 1e-13);
  for (int i = 0; i < 2; ++i) {
    Eigen::MatrixXd t = sine_transform_trajectory(us[i], om);
    CHECK(t.cwiseAbs().maxCoeff() <= 1.0 * sup_norm(us[i]) + 1e-12);
  }
}

TEST_CASE("harmonic response realizes the windowed transform") {
  auto ens = default_ens();
  for (const auto& u : ens.sample(5, 0))
    for (double omega : {1.0, 3.0, 10.0}) {
      Signal y = harmonic_response(u, omega, {});
      double err = 0.0;
      for (int k = 0; k < u.size(); k += 10)
        err = std::max(err, std::abs(omega * y(k, 0) - windowed_sine_transform(u, omega, u.grid().time(k))(0)));
      CHECK(err <= 1e-5);
    }
  CHECK_THROWS_AS(harmonic_response(ens.sample(1, 0)[0], 0.0, {}), ConfigError);
}

TEST_CASE("scale calibration improves monotonically and meets tolerance") {
  auto ens = default_ens();
  for (auto kind : {ActivationKind::tanh, ActivationKind::sine})
    for (double omega : {1.0, 3.0, 10.0}) {
      auto par = calibrate_scale(omega, ens, Activation(kind), 1e-3, {});
      CHECK(par.achieved_err <= 1e-3);
      REQUIRE(par.sweep.size() >= 1);
      for (std::size_t i = 1; i < par.sweep.size(); ++i) CHECK(par.sweep[i].second <= par.sweep[i - 1].second);
      CHECK(par.readout() == doctest::Approx(omega / par.s));
    }
  auto lin = calibrate_scale(3.0, ens, Activation(ActivationKind::identity), 1e-6, {});
  CHECK(lin.s == 1.0);
  CHECK_THROWS_AS(calibrate_scale(3.0, ens, Activation(ActivationKind::identity), 1e-18, {}), BudgetError);
}

TEST_CASE("bank evaluation and the exact time channel") {
  auto ens = default_ens(400);
  Eigen::VectorXd om(3);
  om << 2.0, 9.0, 40.0;
  auto bank = calibrate_bank(om, ens, Activation(ActivationKind::tanh), 1e-4, {});
  CHECK(bank.achieved_err <= 1e-4);
  auto u = ens.sample(1, stream::heldout)[0];
  Signal out = eval_bank(bank, u, {});
  CHECK(out.dim() == 4);
  CHECK(out(400, 3) == 0.25);  // T^2/4 with T = 1
  Signal ex = exact_bank(bank, u);
  double worst = 0.0;
  for (int j = 0; j < 3; ++j)
    worst = std::max(worst, (out.values().col(j) - ex.values().col(j)).cwiseAbs().maxCoeff());
  CHECK(worst <= 2e-4);

  // singleton bank is the calibrated single oscillator
  auto single = calibrate_bank(Eigen::VectorXd::Constant(1, 9.0), ens, Activation(ActivationKind::tanh), 1e-4, {});
  auto par = calibrate_scale(9.0, ens, Activation(ActivationKind::tanh), 1e-4, {});
  CHECK(single.channels[0].s == par.s);

  FrequencyBank dup = bank;
  dup.channels[1].omega = 2.0;
  CHECK_THROWS_AS(dup.validate(), ConfigError);
}
