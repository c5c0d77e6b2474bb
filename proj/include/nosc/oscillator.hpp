#pragma once

#include "nosc/activation.hpp"
#include "nosc/integrator.hpp"
#include "nosc/signals.hpp"

#include <Eigen/Dense>

#include <vector>

namespace nosc {

// y'' = sigma(W y + V u + b), z = A y + c, from rest.
struct GeneralOscillator {
  Eigen::MatrixXd W;
  Eigen::MatrixXd V;
  Eigen::VectorXd b;
  Eigen::MatrixXd A;
  Eigen::VectorXd c;
  Activation act;

  int m() const { return static_cast<int>(W.rows()); }
  int p() const { return static_cast<int>(V.cols()); }
  int q() const { return static_cast<int>(A.rows()); }
  void validate() const;
};

struct OscillatorLayer {
  Eigen::VectorXd w;
  Eigen::MatrixXd V;  // width x (width of previous layer, or p)
  Eigen::VectorXd b;
  bool force_outside = false;  // y'' = sigma(w.y + b) + V y_prev
  // Optional exact factorization V = V_left * V_right (low-rank couplings of
  // compiled networks); used for cheap forcing evaluation and compact JSON.
  Eigen::MatrixXd V_left;
  Eigen::MatrixXd V_right;

  int width() const { return static_cast<int>(w.size()); }
  bool factored() const { return V_left.size() > 0; }
};

// Stack of within-layer uncoupled oscillators, layer l driven by layer l-1
// (layer 0 is the input u). Readout acts on the last layer.
struct MultiLayerOscillator {
  int p = 1;
  std::vector<OscillatorLayer> layers;
  Eigen::MatrixXd A;
  Eigen::VectorXd c;
  Activation act;

  int q() const { return static_cast<int>(A.rows()); }
  int depth() const { return static_cast<int>(layers.size()); }
  int total_width() const;
  void validate() const;
};

// y'' = sigma(W y + Wd y' + V u + b) - gamma y - eps y'.
struct CoRNNSystem {
  Eigen::MatrixXd W;
  Eigen::MatrixXd Wd;
  Eigen::MatrixXd V;
  Eigen::VectorXd b;
  double gamma = 0.0;
  double eps_damp = 0.0;
  Activation act;

  int m() const { return static_cast<int>(W.rows()); }
  void validate() const;
};

struct GeneralResult {
  Trajectory hidden;
  Signal output;
};

struct MultiLayerResult {
  std::vector<Trajectory> layers;  // layers[0] is layer 1
  Signal output;
};

GeneralResult simulate_general(const GeneralOscillator& osc, const Signal& u, const IntegratorConfig& cfg);
// All layers integrated jointly as one stacked system.
MultiLayerResult simulate_multilayer(const MultiLayerOscillator& osc, const Signal& u, const IntegratorConfig& cfg);
// Stacked state [y^L; ...; y^1].
GeneralOscillator embed_multilayer_to_general(const MultiLayerOscillator& osc);
Trajectory simulate_cornn(const CoRNNSystem& sys, const Signal& u, const IntegratorConfig& cfg);

// Layer-wise Hamiltonian H = |y'|^2/2 - sum_i sigma_hat(w_i y_i + (V x)_i + b_i) / w_i
// (layer is 1-based, x is the previous layer's state or the input).
double hamiltonian(const MultiLayerOscillator& osc, int layer, const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                   const Eigen::VectorXd& x);
// Right-hand side of layer `layer` (the acceleration the Hamiltonian generates).
Eigen::VectorXd layer_acceleration(const MultiLayerOscillator& osc, int layer, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& x);

// Forward then backward velocity Verlet; residual of the recovered rest state.
double reverse_check(const MultiLayerOscillator& osc, const Signal& u, const IntegratorConfig& cfg, long steps = -1);

// Fastest linear frequency of the system: Gershgorin bound on the Jacobian,
// restricted to couplings inside each strongly connected block.
double stiffness_frequency(const GeneralOscillator& osc);
double stiffness_frequency(const MultiLayerOscillator& osc);

// Independent scalar channels y_i'' = sigma(w_i y_i + f_i(t)) (or, outside,
// sigma(w_i y_i + b_i) + f_i(t)), each with its own substep count so that
// h_sub * sqrt|w_i| <= cfg.max_h_omega. f is given on the grid; with df the
// forcing is cubic-Hermite interpolated, otherwise linearly.
struct ChannelForcing {
  Eigen::MatrixXd f;   // grid points x channels
  Eigen::MatrixXd df;  // same shape or empty
};
Trajectory integrate_channels(const TimeGrid& grid, const Eigen::VectorXd& w, const Eigen::VectorXd& b_outside,
                              const ChannelForcing& forcing, bool outside, const Activation& act,
                              const IntegratorConfig& cfg);

// Layer-by-layer evaluation of a multi-layer oscillator: each layer is a set of
// independent channels driven by the recorded previous layer. Layers after the
// first are driven through cubic Hermite interpolation of the previous layer's
// positions and velocities.
MultiLayerResult simulate_layerwise(const MultiLayerOscillator& osc, const Signal& u, const IntegratorConfig& cfg,
                                    bool keep_layers = true);

}  // namespace nosc
