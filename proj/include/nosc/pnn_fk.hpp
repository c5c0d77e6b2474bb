#pragma once

#include "nosc/integrator.hpp"
#include "nosc/oscillator.hpp"
#include "nosc/signals.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace nosc {

// Coupled pendula M theta'' = -(K + C) sin(theta) + F.
struct FKSystem {
  Eigen::VectorXd mu;  // masses (diagonal of M)
  Eigen::VectorXd k;   // spring constants (diagonal of K)
  Eigen::MatrixXd C;   // symmetric, zero row sums
  Signal F;            // forcing; its grid is the simulation grid

  int n() const { return static_cast<int>(mu.size()); }
  Eigen::MatrixXd stiffness() const;  // K + C
  double max_row_sum() const;
  void validate() const;
};

// k_i = mu_i g / length.
Eigen::VectorXd pendulum_springs(const Eigen::VectorXd& mu, double g = 9.81, double length = 1.0);
// Diagonal of C replaced so that every row sums to zero.
void enforce_zero_row_sums(Eigen::MatrixXd& C);

// Angles and angular velocities on F's grid.
Trajectory simulate_fk(const FKSystem& sys, const Eigen::VectorXd& theta0, const Eigen::VectorXd& thetadot0,
                       const IntegratorConfig& cfg);
// 1/2 theta'^T M theta' + sum k (1 - cos theta) + 1/2 sin(theta)^T C sin(theta).
double fk_energy(const FKSystem& sys, const Eigen::VectorXd& theta, const Eigen::VectorXd& thetadot);
// The sin-coupled system is not conservative, so the drift of a scheme is the
// largest deviation of fk_energy along its trajectory from the energy along a
// reference trajectory (same grid, typically fine RK4).
double fk_energy_deviation(const FKSystem& sys, const Eigen::VectorXd& theta0, const Eigen::VectorXd& thetadot0,
                           const IntegratorConfig& cfg, const IntegratorConfig& reference);

// theta = P y with P = W = M^-1 (K + C): y'' = -sin(W y) + (K + C)^-1 F.
struct FKTransformed {
  Eigen::MatrixXd W;
  Eigen::MatrixXd KC;  // K + C
  double condition = 0.0;
  Signal f;  // (K + C)^-1 F

  Trajectory simulate(const Eigen::VectorXd& y0, const Eigen::VectorXd& ydot0, const IntegratorConfig& cfg) const;
  Eigen::VectorXd to_y(const Eigen::VectorXd& theta) const;
  Signal to_angles(const Signal& y) const;
};

// Throws ConfigError when K + C is singular (condition number above max_condition).
FKTransformed change_variables(const FKSystem& sys, double max_condition = 1e8);

struct OrderedCouplingSpec {
  int L = 3;
  std::vector<int> widths{2, 2, 2};  // layer 1 (input side) first
  double eps_order = 0.1;
  double mu_base = 1.0;  // mu^l = mu_base eps^l
  double c_base = 1.0;   // C^l = c_base eps^l R^l, R^l uniform in [-1, 1]
  double g = 9.81, length = 1.0;
  std::uint64_t seed = 1;
  double max_condition = 1e8;

  void validate() const;
  int total_width() const;
};

struct OrderedCoupling {
  FKSystem sys;  // state ordered [layer L; ...; layer 1]
  std::vector<int> offset;  // offset[l] of layer l+1 in the stacked state
  // measured magnitudes per layer (index l for layer l+1; coupling entries are
  // zero for layer 1)
  std::vector<double> rho;       // max |C_ii / mu_i|
  std::vector<double> forward;   // max |C^l / mu^l|, drive from layer l-1
  std::vector<double> feedback;  // max |C^l / mu^(l-1)|, back-coupling into layer l-1
  double min_eigenvalue = 0.0;   // of K + C
  double condition = 0.0;        // of K + C

  bool positive() const { return min_eigenvalue > 0.0; }
  double max_offdiag_ratio() const;  // largest feedback
};

// F is left empty (set it with with_bottom_forcing).
OrderedCoupling build_ordered_coupling(const OrderedCouplingSpec& spec);

// Physical forcing F = (K + C) [0; ...; f1] that acts as f1 on the bottom layer
// in y coordinates.
void with_bottom_forcing(OrderedCoupling& oc, const Signal& f1);

// Feed-forward truncation: sub-blocks W(l-1, l) dropped, layer 1 forced
// outside sigma = sin with negated weights.
MultiLayerOscillator truncated_network(const OrderedCoupling& oc);

struct ReductionReport {
  double eps_order = 0.0;
  double D = 0.0;            // sup |y_full - y_truncated|
  double deviation_t0 = 0.0;
  double max_offdiag_ratio = 0.0;
  Trajectory full;           // y, stacked [L; ...; 1]
  Signal truncated;          // y, same ordering
};

ReductionReport compare_reduction(const OrderedCouplingSpec& spec, const Signal& f1, const IntegratorConfig& cfg);

std::vector<ReductionReport> fk_sweep(const OrderedCouplingSpec& spec, const std::vector<double>& eps_orders,
                                      const Signal& f1, const IntegratorConfig& cfg);
// Columns eps_order,D,max_offdiag_ratio.
void write_fk_sweep_csv(std::ostream& os, const std::vector<ReductionReport>& rows);

// Smooth bottom-layer forcing amplitude * sin(freq t + phase_i) on the grid.
Signal default_fk_forcing(const TimeGrid& grid, int width, double amplitude = 0.5, double freq = 1.3);

}  // namespace nosc
