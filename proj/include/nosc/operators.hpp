#pragma once

#include "nosc/signals.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace nosc {

// Operator on signals over a window; output lives on the input's grid.
struct TargetOperator {
  std::string name;
  int p = 1;
  int q = 1;
  std::function<Signal(const Signal&)> fn;
  bool declared_causal = true;

  Signal operator()(const Signal& u) const;
};

TargetOperator zero_operator(int p = 1, int q = 1);
TargetOperator identity_operator(int p = 1);
// u(t - d), zero before the window start.
TargetOperator delay_operator(double d, int p = 1);
// Delay with the value at t_hold held: u(t) for t < t_hold, u(t_hold) on
// [t_hold, t_hold + d], u(t - d) afterwards. With t_hold at the window start
// and u(start) = 0 it coincides with delay_operator.
TargetOperator hold_delay_operator(double d, double t_hold, int p = 1);
// int_start^t u, exact for the piecewise-linear input.
TargetOperator running_integral_operator(int p = 1);
// z' = -rate z + u, z(start) = 0; exact exponential integrator for piecewise-linear u.
TargetOperator damped_ode_operator(double rate = 1.0, int p = 1);
// u(min(t + d, end)): not causal.
TargetOperator anticausal_operator(double d, int p = 1);
// 0 for t < t_read, (t - t_read) F(u(t_read)) afterwards.
TargetOperator function_readout_operator(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> F, int p, int q,
                                         double t_read);

// Builds an operator by name: zero, identity, delay, hold_delay, integral,
// damped_ode, anticausal. `param` is the delay or rate where relevant.
TargetOperator operator_from_name(const std::string& name, double param, int p, double t_hold = 0.0);

struct CausalityReport {
  double max_violation = 0.0;
  int probes = 0;
  bool passed = true;
};

// Perturbs inputs only after a random cut t* and compares outputs up to t*.
CausalityReport check_causality(const TargetOperator& op, const InputFamily& fam, int probes, double tol = 1e-9);

// Largest observed ratio sup|Phi(u + d) - Phi(u)| / sup|d| over small perturbations
// d drawn from the family itself.
double estimate_lipschitz(const TargetOperator& op, const InputFamily& fam, int probes, double rel_size = 0.05);

}  // namespace nosc
