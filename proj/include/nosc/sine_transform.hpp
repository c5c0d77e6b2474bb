#pragma once

#include "nosc/activation.hpp"
#include "nosc/integrator.hpp"
#include "nosc/signals.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace nosc {

// L_t u(omega) = int_0^t u(t - tau) sin(omega tau) dtau, window measured from
// the grid start. Composite Simpson on the grid refined 4x.
Eigen::VectorXd windowed_sine_transform(const Signal& u, double omega, double t);

// Same transform at every grid time and for many frequencies, computed exactly
// for the piecewise-linear signal (running complex integral, closed form per
// interval). Result: grid points x (p * omegas), column c * omegas.size() + j.
Eigen::MatrixXd sine_transform_trajectory(const Signal& u, const Eigen::VectorXd& omegas);
// Only the requested grid indices (one output row each, in the given order).
Eigen::MatrixXd sine_transform_rows(const Signal& u, const Eigen::VectorXd& omegas, const std::vector<int>& rows);

// y'' = -omega^2 y + u from rest, componentwise; omega * y approximates L_t u.
Signal harmonic_response(const Signal& u, double omega, const IntegratorConfig& cfg);

// Scalar oscillator y'' = sigma(-omega^2 y + s u); (omega / s) * y approximates
// L_t u(omega) for small s.
struct SineLayerParams {
  double omega = 1.0;
  double s = 1.0;
  double achieved_err = 0.0;
  std::vector<std::pair<double, double>> sweep;  // (s, error) in the order tried

  double readout() const { return omega / s; }
};

SineLayerParams calibrate_scale(double omega, const InputFamily& fam, const Activation& act, double tol,
                                const IntegratorConfig& cfg, int samples = 8);

struct FrequencyBank {
  std::vector<SineLayerParams> channels;
  Activation act;
  int p = 1;
  double achieved_err = 0.0;  // max channel error on the calibration sample

  int size() const { return static_cast<int>(channels.size()); }
  Eigen::VectorXd omegas() const;
  // Output channel count p * N + 1 (last channel is t^2/4).
  int output_dim() const { return p * size() + 1; }
  void validate() const;
};

struct BankOptions {
  int samples = 8;      // calibration inputs
  int probes = 8;       // frequencies calibrated individually (spread over the band)
  int max_extra_halvings = 6;
  bool best_effort = false;  // return the most accurate bank found instead of throwing
};

// Calibrates a bank sharing one scale s: s is calibrated at a spread of probe
// frequencies, the smallest is adopted, and the whole bank is then verified on
// the calibration sample (s halves again if some channel misses tol).
FrequencyBank calibrate_bank(const Eigen::VectorXd& omegas, const InputFamily& fam, const Activation& act, double tol,
                             const IntegratorConfig& cfg, const BankOptions& opts = {});

// Raw oscillator states of the bank (grid points x p*N), channel c*N + j.
Trajectory bank_states(const FrequencyBank& bank, const Signal& u, const IntegratorConfig& cfg);
// Readout-scaled bank output plus the exact t^2/4 channel (local time).
Signal eval_bank(const FrequencyBank& bank, const Signal& u, const IntegratorConfig& cfg);
// Exact transform values in the same layout (the bank's target).
Signal exact_bank(const FrequencyBank& bank, const Signal& u);
Signal exact_bank(const Eigen::VectorXd& omegas, const Signal& u);

}  // namespace nosc
