#pragma once

#include "nosc/operators.hpp"
#include "nosc/oscillator.hpp"
#include "nosc/readout.hpp"
#include "nosc/reconstruction.hpp"
#include "nosc/sine_transform.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace nosc {

// Integrator settings used for every constructed network: RK4 with substeps
// raised until h * omega <= 0.25 for the fastest channel.
IntegratorConfig compiled_integrator();

// Single bank layer y'' = sigma(-omega^2 y + s u) in the plan's channel layout
// (channel c*N + j), optionally with the t^2/4 neuron appended.
OscillatorLayer bank_layer(const FrequencyBank& bank, bool time_channel);

// ---------------------------------------------------------------- delay

struct DelayOptions {
  PlanOptions plan;
  BankOptions bank;
  double plan_share = 0.5;  // part of tol given to the reconstruction
  int validation_samples = 16;
};

// One bank layer whose readout sums alpha_j (omega_j/s_j) sin(omega_j d - theta_j)
// per component, i.e. the reconstruction at lag d.
struct DelayNetwork {
  double delay = 0.0;
  double tol = 0.0;
  ReconstructionPlan plan;  // folded
  FrequencyBank bank;
  Eigen::MatrixXd A;  // p x p*N
  double achieved_err = 0.0;

  MultiLayerOscillator network() const;
  Signal run(const Signal& u, const IntegratorConfig& cfg) const;
};

DelayNetwork build_delay_network(const InputFamily& fam, double delay, double tol,
                                 const IntegratorConfig& cfg = compiled_integrator(), const DelayOptions& opts = {});
// sup |u(t - d) - output(t)| over the given inputs.
double delay_network_error(const DelayNetwork& net, const std::vector<Signal>& us, const IntegratorConfig& cfg);

// ---------------------------------------------------------------- NN emulation

struct EmulatorOptions {
  std::vector<double> fd_fractions{1.0 / 20, 1.0 / 40, 1.0 / 80, 1.0 / 160};  // of T
  double tail_cut = 60.0;                  // Xi of the delay-bank plan
  double eps_min = 0.002, eps_max = 0.02;  // mollifier width bounds, fractions of T
  double bank_tol = 1e-9;                  // best effort
  BankOptions bank{4, 8, 6, true};
  int probe_samples = 8;
  int validation_samples = 16;  // 0: report the probe error
  // errors are measured on [validate_from, t_end]; NaN means the grid start
  double validate_from = std::numeric_limits<double>::quiet_NaN();
  double alias_margin = 1.02;
};

// Two layers realizing x -> Sigma sigma(Lambda x + gamma): a nonlinear layer
// y1'' = sigma(Lambda x + gamma), y2'' = sigma(gamma), then a delay bank on
// zeta = Sigma (y1 - y2) whose readout takes the backward second difference
// (zeta(t) - 2 zeta(t - dt) + zeta(t - 2dt)) / dt^2; output A y + c with
// c = Sigma sigma(gamma).
struct NNEmulator {
  ReadoutNet net;
  ReconstructionPlan plan;  // folded, q components
  FrequencyBank bank;
  double fd_dt = 0.0;
  Eigen::MatrixXd A;  // q x q*N
  Eigen::VectorXd c;
  double tol = 0.0;
  double achieved_err = 0.0;
  std::vector<std::pair<double, double>> sweep;  // (fd_dt, probe error)

  bool met() const { return achieved_err <= tol; }
  // Nonlinear layer for inputs scaled componentwise by in_scale (empty: none).
  OscillatorLayer nonlinear_layer(const Eigen::VectorXd& in_scale = {}) const;
  OscillatorLayer delay_layer() const;
  MultiLayerOscillator network() const;
};

// Readout weights of the second difference at spacing dt for a folded plan
// and bank (q components).
Eigen::MatrixXd second_difference_readout(const ReconstructionPlan& plan, const FrequencyBank& bank, double dt, int q);

NNEmulator build_nn_emulator(const ReadoutNet& net, const InputFamily& fam, double tol,
                             const IntegratorConfig& cfg = compiled_integrator(), const EmulatorOptions& opts = {});

// ---------------------------------------------------------------- compiler

struct StageReport {
  std::string name;
  double budget = 0.0;    // available to this stage (own share plus what earlier stages left)
  double achieved = 0.0;  // measured on held-out inputs
  std::string detail;
  bool met() const { return achieved <= budget; }
};

struct CompileOptions {
  // shares of eps_total: reconstruction, bank, readout, emulator
  std::array<double, 4> split{0.25, 0.25, 0.25, 0.25};
  Activation act = Activation();
  IntegratorConfig cfg = compiled_integrator();
  PlanOptions plan;
  BankOptions bank;
  double bank_tol = 1e-6;
  double bank_tol_floor = 1e-9;
  ReadoutOptions readout{256, 2048, 1e-6, 96, 48, 0.2, 2.0, 0.0, 1};
  double readout_target_fraction = 0.5;  // fit target as a fraction of the readout budget
  EmulatorOptions emulator;
  int causality_probes = 8;
  int lipschitz_probes = 8;
  double lipschitz_floor = 1e-3;
  int validation_samples = 16;
  double validate_from = std::numeric_limits<double>::quiet_NaN();  // NaN: grid start
  bool enforce_budget = true;  // throw BudgetError when a stage misses its budget
};

struct CompiledOscillator {
  std::string operator_name;
  int p = 1, q = 1;
  TimeGrid grid;
  double eps_total = 0.0;
  double validate_from = 0.0;
  MultiLayerOscillator net;
  // provenance
  ReconstructionPlan plan;  // folded, layer 1
  FrequencyBank bank;
  ReadoutNet readout;
  double fd_dt = 0.0;
  ReconstructionPlan plan3;  // folded, layer 3
  FrequencyBank bank3;
  std::vector<StageReport> stages;  // reconstruction, bank, readout, emulator
  double operator_lipschitz = 0.0;
  double readout_lipschitz = 0.0;
  std::vector<std::pair<int, double>> readout_sweep;
  std::vector<std::pair<double, double>> fd_sweep;
  double e2e = -1.0;  // end-to-end held-out error

  double stage_sum() const;
  bool ledger_consistent() const { return e2e <= 1.1 * stage_sum(); }
  bool budget_met() const { return e2e >= 0.0 && e2e <= eps_total; }
  Signal run(const Signal& u, const IntegratorConfig& cfg = compiled_integrator()) const;
};

// The three layers of a compiled network: bank (plus t^2/4 neuron), nonlinear
// layer of the readout, delay bank on its output.
std::vector<OscillatorLayer> compiled_layers(const FrequencyBank& bank, const ReadoutNet& readout,
                                             const FrequencyBank& bank3);

CompiledOscillator compile_operator(const TargetOperator& phi, const InputFamily& fam, double eps_total,
                                    const CompileOptions& opts = {});

// The compiled network as an operator (for causality checks).
TargetOperator as_operator(const CompiledOscillator& co, const IntegratorConfig& cfg = compiled_integrator());

struct ValidationRow {
  int input_id = 0;
  double t = 0.0;
  int component = 0;
  double target = 0.0;
  double predicted = 0.0;
};

struct ValidationReport {
  std::vector<ValidationRow> rows;
  double max_err = 0.0;
};

// Compares the network with phi on [from, t_end]; every stride-th grid point.
ValidationReport validate_compiled(const CompiledOscillator& co, const TargetOperator& phi,
                                   const std::vector<Signal>& us, double from, int stride = 1,
                                   const IntegratorConfig& cfg = compiled_integrator());
// Columns input_id,t,target,predicted,abs_err; with several output components
// the id becomes <input>_<component>.
void write_validation_csv(std::ostream& os, const ValidationReport& rep);

// ---------------------------------------------------------------- functions

using PointFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// F on the box [lo, hi]^p, compiled through Phi(u)(t) = (t - 1) F(u(1)) on
// ramps u(t) = t xi over [0, 2]; evaluating reads z(2).
struct FunctionApproximator {
  CompiledOscillator compiled;
  RampFamily family;
  IntegratorConfig cfg = compiled_integrator();

  Eigen::VectorXd operator()(const Eigen::VectorXd& xi) const;
};

FunctionApproximator approximate_function(const PointFunction& F, int p, int q, double lo, double hi, double eps,
                                          CompileOptions opts = {}, std::uint64_t seed = 1);

}  // namespace nosc
