#pragma once

#include "nosc/activation.hpp"
#include "nosc/reconstruction.hpp"
#include "nosc/signals.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace nosc {

// Shallow network x -> Sigma sigma(Lambda x + gamma).
struct ReadoutNet {
  Eigen::MatrixXd Sigma;   // q x H
  Eigen::MatrixXd Lambda;  // H x d
  Eigen::VectorXd gamma;   // H
  Activation act = Activation();

  int H() const { return static_cast<int>(Lambda.rows()); }
  int in_dim() const { return static_cast<int>(Lambda.cols()); }
  int q() const { return static_cast<int>(Sigma.rows()); }
  void validate() const;

  // Hidden activations for columns of X (d x M) -> H x M.
  Eigen::MatrixXd hidden(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd eval(const Eigen::MatrixXd& X) const;  // q x M
  // ||Sigma||_2 ||Lambda||_2 sup|sigma'|.
  double lipschitz() const;
};

double spectral_norm(const Eigen::MatrixXd& M, int iterations = 60);

struct ReadoutOptions {
  int H = 256;
  int max_H = 2048;
  double ridge = 1e-10;  // relative to the mean diagonal of the feature Gram matrix
  int samples = 64;      // training inputs (a fifth held out)
  int times = 48;        // grid times per input
  double holdout = 0.2;
  double preact_span = 2.0;
  double target = 0.0;  // > 0: double H (up to max_H) until the held-out error meets it
  std::uint64_t seed = 1;
};

// Training pairs as columns: X is d x M (features), Y is q x M (targets).
struct ReadoutData {
  Eigen::MatrixXd X_train, Y_train, X_hold, Y_hold;
};

// features(u) is the deployed layer-1 output (grid x d); targets are
// Psi(exact transforms of u at t, t).
using FeatureMap = std::function<Signal(const Signal&)>;
ReadoutData readout_training_data(const PsiOracle& po, const InputFamily& fam, const FeatureMap& features,
                                  const ReadoutOptions& opts);

struct ReadoutFit {
  ReadoutNet net;
  double fit_err = 0.0;    // max held-out residual
  double train_err = 0.0;  // max training residual
  std::vector<std::pair<int, double>> sweep;  // (H, held-out error) in order tried
};

// Random features with the ridge solve for Sigma at a single width.
ReadoutFit fit_random_features(const ReadoutData& data, int H, const ReadoutOptions& opts, const Activation& act);
// Width doubling driver (see ReadoutOptions::target); returns the best fit.
ReadoutFit fit_readout(const ReadoutData& data, const ReadoutOptions& opts, const Activation& act);
ReadoutFit fit_readout(const PsiOracle& po, const InputFamily& fam, const FeatureMap& features,
                       const ReadoutOptions& opts, const Activation& act);

}  // namespace nosc
