#include "nosc/readout.hpp"

#include "nosc/errors.hpp"
#include "nosc/random.hpp"
#include "nosc/sine_transform.hpp"

#include <algorithm>
#include <cmath>

namespace nosc {

void ReadoutNet::validate() const {
  if (Lambda.rows() < 1 || Lambda.cols() < 1) throw ConfigError("readout: empty hidden layer");
  if (gamma.size() != Lambda.rows() || Sigma.cols() != Lambda.rows())
    throw ConfigError("readout: inconsistent layer shapes");
  if (!Sigma.allFinite() || !Lambda.allFinite() || !gamma.allFinite())
    throw ConfigError("readout: non-finite weights");
}

Eigen::MatrixXd ReadoutNet::hidden(const Eigen::MatrixXd& X) const {
  if (X.rows() != Lambda.cols()) throw ConfigError("readout: input dimension mismatch");
  Eigen::MatrixXd Z = Lambda * X;
  Z.colwise() += gamma;
  return Z.unaryExpr([this](double z) { return act(z); });
}

Eigen::MatrixXd ReadoutNet::eval(const Eigen::MatrixXd& X) const { return Sigma * hidden(X); }

double ReadoutNet::lipschitz() const {
  return spectral_norm(Sigma) * spectral_norm(Lambda) * act.derivative_bound();
}

double spectral_norm(const Eigen::MatrixXd& M, int iterations) {
  if (M.size() == 0) return 0.0;
  // power iteration on M^T M (or M M^T, whichever is smaller)
  const bool wide = M.cols() > M.rows();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(wide ? M.rows() : M.cols());
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd w = wide ? Eigen::VectorXd(M * (M.transpose() * v)) : Eigen::VectorXd(M.transpose() * (M * v));
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    const double next = std::sqrt(nw / v.norm());
    v = w / nw;
    if (std::abs(next - sigma) <= 1e-12 * next) return next;
    sigma = next;
  }
  // the iteration approaches from below; a small safety factor keeps it an upper estimate
  return sigma * (1.0 + 1e-6);
}

ReadoutData readout_training_data(const PsiOracle& po, const InputFamily& fam, const FeatureMap& features,
                                  const ReadoutOptions& opts) {
  if (opts.samples < 2 || opts.times < 2) throw ConfigError("readout: need at least two samples and two times");
  if (!(opts.holdout > 0.0 && opts.holdout < 1.0)) throw ConfigError("readout: holdout fraction must lie in (0,1)");
  const auto us = fam.sample(opts.samples, stream::training);
  const int n_hold = std::max(1, static_cast<int>(std::lround(opts.holdout * opts.samples)));
  const int n_train = opts.samples - n_hold;
  if (n_train < 1) throw ConfigError("readout: no training inputs left after the hold-out split");
  const int n = po.grid.n_steps;

  // four interleaved time offsets so the training set covers the grid densely
  constexpr int kOffsets = 4;
  std::vector<std::vector<int>> ks(kOffsets);
  for (int c = 0; c < kOffsets; ++c)
    for (int m = 0; m < opts.times; ++m) {
      const double x = (m + static_cast<double>(c) / kOffsets) / (opts.times - 1);
      ks[c].push_back(std::min(n, static_cast<int>(std::lround(x * n))));
    }

  std::vector<Eigen::MatrixXd> betas;
  std::vector<int> tk;
  std::vector<Eigen::VectorXd> xs;
  for (int i = 0; i < opts.samples; ++i) {
    const Signal f = features(us[i]);
    if (f.size() != n + 1) throw ConfigError("readout: feature map changed the grid");
    const auto& rows = ks[i % kOffsets];
    const Eigen::MatrixXd b = sine_transform_rows(us[i], po.plan.omega, rows);
    for (std::size_t m = 0; m < rows.size(); ++m) {
      betas.push_back(Eigen::Map<const Eigen::MatrixXd>(b.row(m).eval().data(), po.plan.terms(), po.plan.p));
      tk.push_back(rows[m]);
      xs.push_back(f.at(rows[m]));
    }
  }
  const Eigen::MatrixXd Y = psi_eval_batch(po, betas, tk);  // pairs x q

  ReadoutData d;
  const int per = opts.times;
  const int d_in = static_cast<int>(xs.front().size());
  d.X_train.resize(d_in, n_train * per);
  d.Y_train.resize(Y.cols(), n_train * per);
  d.X_hold.resize(d_in, n_hold * per);
  d.Y_hold.resize(Y.cols(), n_hold * per);
  for (int i = 0; i < opts.samples; ++i)
    for (int m = 0; m < per; ++m) {
      const int src = i * per + m;
      if (i < n_train) {
        d.X_train.col(i * per + m) = xs[src];
        d.Y_train.col(i * per + m) = Y.row(src).transpose();
      } else {
        d.X_hold.col((i - n_train) * per + m) = xs[src];
        d.Y_hold.col((i - n_train) * per + m) = Y.row(src).transpose();
      }
    }
  return d;
}

ReadoutFit fit_random_features(const ReadoutData& data, int H, const ReadoutOptions& opts, const Activation& act) {
  if (H < 1) throw ConfigError("readout: width must be positive");
  if (opts.ridge < 0.0) throw ConfigError("readout: negative ridge parameter");
  const int d = static_cast<int>(data.X_train.rows());
  ReadoutNet net;
  net.act = act;
  Rng rng(derive_seed(opts.seed, stream::features, static_cast<std::uint64_t>(H)));
  net.Lambda.resize(H, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < H; ++i) net.Lambda(i, j) = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd g0(H);
  for (int i = 0; i < H; ++i) g0(i) = rng.uniform(-1.0, 1.0);

  // centre the features on the training mean and scale the directions so
  // pre-activations span about +-preact_span
  const Eigen::VectorXd mean = data.X_train.rowwise().mean();
  Eigen::MatrixXd P = net.Lambda * (data.X_train.colwise() - mean);
  const Eigen::VectorXd spread = P.cwiseAbs().rowwise().maxCoeff();
  for (int i = 0; i < H; ++i) {
    const double r = spread(i) > 0.0 ? opts.preact_span / spread(i) : 1.0;
    net.Lambda.row(i) *= r;
  }
  net.gamma = g0 - net.Lambda * mean;

  const Eigen::MatrixXd F = net.hidden(data.X_train);  // H x M
  Eigen::MatrixXd G = F * F.transpose();
  const double scale = G.diagonal().mean();
  G.diagonal().array() += opts.ridge * (scale > 0.0 ? scale : 1.0);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
  const Eigen::VectorXd D = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || D.minCoeff() <= 1e-14 * std::max(1.0, D.cwiseAbs().maxCoeff()))
    throw ConfigError("readout: singular normal equations; use a positive ridge parameter");
  net.Sigma = ldlt.solve(F * data.Y_train.transpose()).transpose();
  if (!net.Sigma.allFinite()) throw ConfigError("readout: ridge solve produced non-finite weights");

  ReadoutFit fit;
  fit.train_err = (net.Sigma * F - data.Y_train).cwiseAbs().maxCoeff();
  fit.fit_err = data.X_hold.cols() ? (net.eval(data.X_hold) - data.Y_hold).cwiseAbs().maxCoeff() : fit.train_err;
  fit.net = std::move(net);
  fit.sweep.emplace_back(H, fit.fit_err);
  return fit;
}

ReadoutFit fit_readout(const ReadoutData& data, const ReadoutOptions& opts, const Activation& act) {
  if (opts.max_H < opts.H) throw ConfigError("readout: max_H below the initial width");
  ReadoutFit best;
  std::vector<std::pair<int, double>> sweep;
  bool have = false;
  for (int H = opts.H;; H *= 2) {
    ReadoutFit f = fit_random_features(data, H, opts, act);
    sweep.push_back(f.sweep.front());
    if (!have || f.fit_err < best.fit_err) {
      best = std::move(f);
      have = true;
    }
    if (opts.target <= 0.0 || best.fit_err <= opts.target || 2 * H > opts.max_H) break;
  }
  best.sweep = std::move(sweep);
  return best;
}

ReadoutFit fit_readout(const PsiOracle& po, const InputFamily& fam, const FeatureMap& features,
                       const ReadoutOptions& opts, const Activation& act) {
  return fit_readout(readout_training_data(po, fam, features, opts), opts, act);
}

}  // namespace nosc
