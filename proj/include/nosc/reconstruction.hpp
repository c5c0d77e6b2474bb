#pragma once

#include "nosc/operators.hpp"
#include "nosc/signals.hpp"

#include <Eigen/Dense>

#include <complex>
#include <iosfwd>
#include <memory>
#include <vector>

namespace nosc {

// Unit bump rho(x) = Z exp(-1/(x(1-x))) on (0,1), unit mass.
double bump_normalization();
double bump(double x);
// int_0^1 rho(x) e^{-i xi x} dx (composite Simpson, 2048 intervals).
std::complex<double> bump_hat(double xi);
// int_{|xi|>X} |rho_hat(xi)| dxi and int_{|xi|>X} |rho_hat(xi)| / |xi| dxi.
double bump_hat_tail(double X);
double bump_hat_tail_weighted(double X);

struct Mollifier {
  double eps = 0.01;

  Mollifier() = default;
  explicit Mollifier(double eps);

  double operator()(double tau) const;  // rho_eps, supported on [0, eps]
  std::complex<double> hat(double omega) const { return bump_hat(eps * omega); }
  double mass() const;
  // Backward moving average int rho_eps(r) u(t - r) dr, u zero before the start.
  Signal smooth(const Signal& u) const;
};

struct PlanAttempt {
  int N = 0;
  double eps_moll = 0.0;
  double L_cut = 0.0;
  double validated_err = 0.0;
};

// u(t - s) ~ sum_j alpha_j L_t u(omega_j) sin(omega_j s - theta_j) for lags s in
// [0, window]. The full plan has N (even) equidistant frequencies on
// [-L_cut, L_cut]; the folded plan keeps the positive half with alpha doubled.
struct ReconstructionPlan {
  int N = 0;
  Eigen::VectorXd omega, alpha, theta;
  bool folded = false;
  int p = 1;
  double T = 1.0;  // input window length
  double window = 1.0;
  double eps_moll = 0.0;
  double L_cut = 0.0;
  double target_err = 0.0;
  double achieved_err = -1.0;  // validated error, -1 if never validated
  double modulus = 0.0;        // empirical modulus of continuity at eps_moll
  std::vector<PlanAttempt> history;

  int terms() const { return static_cast<int>(omega.size()); }
  double d_omega() const { return 2.0 * L_cut / (N - 1); }
  ReconstructionPlan fold() const;
  void validate() const;
};

ReconstructionPlan make_plan(double eps_moll, double L_cut, int N, double window, double T, int p = 1);

// Smallest even N whose grid period 2 pi / d_omega covers the mollified odd
// extension seen from the window (times margin).
long alias_free_size(double L_cut, double T, double window, double eps_moll, double margin = 1.02);

struct PlanOptions {
  int max_N = 4096;
  int probe_samples = 64;
  int validation_samples = 32;
  int validation_times = 10;  // t in {T/n, 2T/n, ..., T} (nearest grid points)
  double alias_margin = 1.02;
  double eps_moll = 0.0;  // > 0 overrides the measured choice
  double tail_cut = 0.0;  // > 0 overrides Xi = eps_moll * L_cut
};

ReconstructionPlan build_plan(const InputFamily& fam, double window, double target_err, const PlanOptions& opts = {});

// R(beta; t)(tau) = sum_j alpha_j beta_j sin(omega_j (t - tau) - theta_j);
// beta is terms x p.
Eigen::VectorXd reconstruct(const ReconstructionPlan& plan, const Eigen::MatrixXd& beta, double t, double tau);

// Precomputed sin/cos(omega_j k h) for lags k = 0..K; evaluates many
// reconstructions at once.
class LagTable {
 public:
  LagTable(const ReconstructionPlan& plan, double h, int K);
  int max_lag() const { return static_cast<int>(S_.rows()) - 1; }
  // Columns of beta (terms x M) -> reconstructed values at lags 0..K (K+1 x M).
  Eigen::MatrixXd apply(const Eigen::MatrixXd& beta, int K) const;

 private:
  Eigen::MatrixXd S_, C_;
  Eigen::VectorXd a_, b_;  // alpha cos(theta), -alpha sin(theta)
};

// Max |u(t - s) - R| over lags s in [0, min(window, t - start)] for each of the
// validation times; one entry per time.
Eigen::VectorXd reconstruction_errors(const ReconstructionPlan& plan, const std::vector<Signal>& us, int times);

// Transform values of u at grid index k in the plan's layout (terms x p).
Eigen::MatrixXd plan_transform(const ReconstructionPlan& plan, const Signal& u, int k);

void write_plan_history_csv(std::ostream& os, const ReconstructionPlan& plan);

// Psi(beta, t) = Phi(R(beta; t))(t): the reconstructed past is materialized on
// the operator grid (zero after t) and fed to Phi.
struct PsiOracle {
  ReconstructionPlan plan;
  TargetOperator phi;
  TimeGrid grid;
  std::shared_ptr<const LagTable> table;

  PsiOracle(ReconstructionPlan plan, TargetOperator phi, TimeGrid grid);
};

// t must be a grid time.
Eigen::VectorXd psi_eval(const PsiOracle& po, const Eigen::MatrixXd& beta, double t);
// Batch over (beta, grid index) pairs; rows of the result are outputs in q.
Eigen::MatrixXd psi_eval_batch(const PsiOracle& po, const std::vector<Eigen::MatrixXd>& betas,
                               const std::vector<int>& t_index);

}  // namespace nosc
