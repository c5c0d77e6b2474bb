#pragma once

#include "nosc/errors.hpp"
#include "nosc/signals.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace nosc {

enum class Method { velocity_verlet, rk4 };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct IntegratorConfig {
  Method method = Method::rk4;
  int substeps = 1;
  // Stiff systems: substeps are raised until h_sub * omega_max <= max_h_omega.
  // 0 disables the automatic raise (exact control for convergence studies).
  double max_h_omega = 0.1;
};

// Substeps per grid interval for a system whose fastest frequency is omega_max.
int effective_substeps(const TimeGrid& grid, double omega_max, const IntegratorConfig& cfg);

struct Trajectory {
  Signal position;
  Signal velocity;
};

// Integrates y'' = a(t, y, y') from (y0, v0) at grid.t_start and records the
// state at every grid point. Accel: void(double t, const VectorXd& y,
// const VectorXd& v, VectorXd& a). For velocity Verlet a velocity-dependent
// right-hand side sees the predictor v + h a.
template <class Accel>
Trajectory integrate_second_order(const TimeGrid& grid, const Eigen::VectorXd& y0, const Eigen::VectorXd& v0,
                                  Accel&& accel, Method method, int substeps) {
  const int m = static_cast<int>(y0.size());
  Trajectory tr{Signal(grid, m), Signal(grid, m)};
  Eigen::VectorXd y = y0, v = v0, a(m), a_new(m);
  tr.position.values().row(0) = y.transpose();
  tr.velocity.values().row(0) = v.transpose();
  const double h = grid.h() / substeps;

  if (method == Method::velocity_verlet) {
    accel(grid.t_start, y, v, a);
    Eigen::VectorXd vp(m);
    for (int k = 0; k < grid.n_steps; ++k) {
      const double tk = grid.time(k);
      for (int s = 0; s < substeps; ++s) {
        const double t1 = (s + 1 == substeps) ? grid.time(k + 1) : tk + (s + 1) * h;
        y += h * v + (0.5 * h * h) * a;
        vp = v + h * a;
        accel(t1, y, vp, a_new);
        v += (0.5 * h) * (a + a_new);
        a.swap(a_new);
      }
      if (!y.allFinite() || !v.allFinite()) throw InstabilityError("non-finite oscillator state", k + 1);
      tr.position.values().row(k + 1) = y.transpose();
      tr.velocity.values().row(k + 1) = v.transpose();
    }
    return tr;
  }

  Eigen::VectorXd k1v(m), k2v(m), k3v(m), k4v(m), yt(m), vt(m);
  for (int k = 0; k < grid.n_steps; ++k) {
    const double tk = grid.time(k);
    for (int s = 0; s < substeps; ++s) {
      const double t0 = tk + s * h;
      const double t1 = (s + 1 == substeps) ? grid.time(k + 1) : tk + (s + 1) * h;
      const double tm = 0.5 * (t0 + t1);
      accel(t0, y, v, k1v);
      yt = y + (0.5 * h) * v;
      vt = v + (0.5 * h) * k1v;
      const Eigen::VectorXd k2y = vt;
      accel(tm, yt, vt, k2v);
      yt = y + (0.5 * h) * k2y;
      vt = v + (0.5 * h) * k2v;
      const Eigen::VectorXd k3y = vt;
      accel(tm, yt, vt, k3v);
      yt = y + h * k3y;
      vt = v + h * k3v;
      accel(t1, yt, vt, k4v);
      y += (h / 6.0) * (v + 2.0 * k2y + 2.0 * k3y + vt);
      v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    if (!y.allFinite() || !v.allFinite()) throw InstabilityError("non-finite oscillator state", k + 1);
    tr.position.values().row(k + 1) = y.transpose();
    tr.velocity.values().row(k + 1) = v.transpose();
  }
  return tr;
}

// Velocity Verlet forward over the grid, then backward with negated step
// replaying the same forcing; returns max-norm of the recovered initial state.
// steps < 0 runs the whole grid, otherwise only the first `steps` substeps.
template <class Accel>
double verlet_roundtrip(const TimeGrid& grid, int m, Accel&& accel, int substeps, long steps = -1) {
  if (m == 0 || steps == 0) return 0.0;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m), v = Eigen::VectorXd::Zero(m), a(m), a_new(m);
  const double h = grid.h() / substeps;
  long total = static_cast<long>(grid.n_steps) * substeps;
  if (steps > 0) total = std::min(total, steps);
  auto time_of = [&](long i) { return grid.t_start + static_cast<double>(i) * h; };
  accel(time_of(0), y, v, a);
  for (long i = 0; i < total; ++i) {
    y += h * v + (0.5 * h * h) * a;
    accel(time_of(i + 1), y, v, a_new);
    v += (0.5 * h) * (a + a_new);
    a.swap(a_new);
    if (!y.allFinite() || !v.allFinite()) throw InstabilityError("non-finite oscillator state", i + 1);
  }
  const double hb = -h;
  for (long i = total; i > 0; --i) {
    y += hb * v + (0.5 * hb * hb) * a;
    accel(time_of(i - 1), y, v, a_new);
    v += (0.5 * hb) * (a + a_new);
    a.swap(a_new);
  }
  return std::max(y.cwiseAbs().maxCoeff(), v.cwiseAbs().maxCoeff());
}

}  // namespace nosc
