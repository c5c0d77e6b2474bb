#include "nosc/sine_transform.hpp"

#include "nosc/errors.hpp"
#include "nosc/oscillator.hpp"
#include "nosc/random.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <set>

namespace nosc {

using cplx = std::complex<double>;

Eigen::VectorXd windowed_sine_transform(const Signal& u, double omega, double t) {
  const auto& g = u.grid();
  const double tol = 1e-9 * g.h();
  if (t < g.t_start - tol || t > g.t_end + tol) throw std::out_of_range("windowed_sine_transform: t outside window");
  const double len = std::clamp(t, g.t_start, g.t_end) - g.t_start;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(u.dim());
  if (len <= 0.0) return acc;
  const int M = 4 * static_cast<int>(std::ceil(len / g.h() - 1e-9));
  const double d = len / M;
  for (int i = 0; i <= M; ++i) {
    const double tau = i * d;
    const double w = (i == 0 || i == M) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += (w * std::sin(omega * tau)) * u.sample(std::max(g.t_start, t - tau));
  }
  return acc * (d / 3.0);
}

namespace {

// c0 = int_0^h e^{-i w x} dx, c1 = (1/h) int_0^h x e^{-i w x} dx
std::pair<cplx, cplx> interval_weights(double omega, double h) {
  const double th = omega * h;
  if (std::abs(th) < 0.5) {
    cplx c0 = 0.0, c1 = 0.0, term = 1.0;  // (-i th)^n / n!
    for (int n = 0; n < 18; ++n) {
      c0 += term / static_cast<double>(n + 1);
      c1 += term / static_cast<double>(n + 2);
      term *= cplx(0.0, -th) / static_cast<double>(n + 1);
    }
    return {h * c0, h * c1};
  }
  const cplx e = std::polar(1.0, -th);
  const cplx c0 = (1.0 - e) / cplx(0.0, omega);
  const cplx c1 = (e * cplx(1.0, th) - 1.0) / (omega * omega * h);
  return {c0, c1};
}

}  // namespace

namespace {

// Calls emit(k, c, j, value) for every grid index k >= 1.
template <class Emit>
void transform_sweep(const Signal& u, const Eigen::VectorXd& omegas, Emit emit) {
  const auto& g = u.grid();
  const double h = g.h();
  for (int j = 0; j < omegas.size(); ++j) {
    const double w = omegas(j);
    if (w == 0.0) throw ConfigError("sine transform: zero frequency");
    const auto [c0, c1] = interval_weights(w, h);
    // J_k = e^{i w t_k} * int_0^{t_k} u(s) e^{-i w s} ds, so L_{t_k} u(w) = Im J_k
    const cplx step = std::polar(1.0, w * h);
    for (int c = 0; c < u.dim(); ++c) {
      const auto col = u.values().col(c);
      cplx J = 0.0;
      for (int k = 0; k < g.n_steps; ++k) {
        J = step * (J + col(k) * c0 + (col(k + 1) - col(k)) * c1);
        emit(k + 1, c, j, J.imag());
      }
    }
  }
}

}  // namespace

Eigen::MatrixXd sine_transform_trajectory(const Signal& u, const Eigen::VectorXd& omegas) {
  const int nf = static_cast<int>(omegas.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(u.size(), u.dim() * nf);
  transform_sweep(u, omegas, [&](int k, int c, int j, double v) { out(k, c * nf + j) = v; });
  return out;
}

Eigen::MatrixXd sine_transform_rows(const Signal& u, const Eigen::VectorXd& omegas, const std::vector<int>& rows) {
  const int nf = static_cast<int>(omegas.size());
  std::vector<std::vector<int>> slot(u.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= u.size()) throw std::out_of_range("sine_transform_rows: row outside grid");
    slot[rows[r]].push_back(static_cast<int>(r));
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), u.dim() * nf);
  transform_sweep(u, omegas, [&](int k, int c, int j, double v) {
    for (int r : slot[k]) out(r, c * nf + j) = v;
  });
  return out;
}

Signal harmonic_response(const Signal& u, double omega, const IntegratorConfig& cfg) {
  if (omega == 0.0) throw ConfigError("harmonic_response: omega must be nonzero");
  const int p = u.dim();
  ChannelForcing cf{u.values(), {}};
  Eigen::VectorXd w = Eigen::VectorXd::Constant(p, -omega * omega);
  auto tr = integrate_channels(u.grid(), w, Eigen::VectorXd::Zero(p), cf, false, Activation(ActivationKind::identity),
                               cfg);
  return tr.position;
}

namespace {

// Readout-scaled response (omega/s) y of one scalar oscillator per (sample, component).
double scale_error(double omega, double s, const std::vector<Signal>& us, const std::vector<Eigen::MatrixXd>& exact,
                   const Activation& act, const IntegratorConfig& cfg) {
  double err = 0.0;
  for (std::size_t i = 0; i < us.size(); ++i) {
    const int p = us[i].dim();
    ChannelForcing cf{s * us[i].values(), {}};
    Eigen::VectorXd w = Eigen::VectorXd::Constant(p, -omega * omega);
    auto tr = integrate_channels(us[i].grid(), w, Eigen::VectorXd::Zero(p), cf, false, act, cfg);
    err = std::max(err, ((omega / s) * tr.position.values() - exact[i]).cwiseAbs().maxCoeff());
  }
  return err;
}

// Halves s from 1 until the error meets tol; without success, s is the
// best scale seen and achieved_err its error.
SineLayerParams scan_scale(double omega, const std::vector<Signal>& us, const std::vector<Eigen::MatrixXd>& exact,
                           const Activation& act, double tol, const IntegratorConfig& cfg, bool& met) {
  SineLayerParams par;
  par.omega = omega;
  par.achieved_err = std::numeric_limits<double>::infinity();
  met = false;
  for (double s = 1.0; s >= 1e-12; s *= 0.5) {
    const double e = scale_error(omega, s, us, exact, act, cfg);
    par.sweep.emplace_back(s, e);
    if (e < par.achieved_err) {
      par.s = s;
      par.achieved_err = e;
    }
    if (e <= tol) {
      met = true;
      return par;
    }
    if (act.kind() == ActivationKind::identity) break;  // s does not matter; integrator-limited
  }
  return par;
}

}  // namespace

SineLayerParams calibrate_scale(double omega, const InputFamily& fam, const Activation& act, double tol,
                                const IntegratorConfig& cfg, int samples) {
  if (omega == 0.0) throw ConfigError("calibrate_scale: omega must be nonzero");
  if (!(tol > 0.0)) throw ConfigError("calibrate_scale: tol must be positive");
  const auto us = fam.sample(samples, stream::calibration);
  std::vector<Eigen::MatrixXd> exact;
  for (const auto& u : us) exact.push_back(sine_transform_trajectory(u, Eigen::VectorXd::Constant(1, omega)));
  bool met = false;
  SineLayerParams par = scan_scale(omega, us, exact, act, tol, cfg, met);
  if (!met)
    throw BudgetError("calibrate_scale", "tolerance unachievable at this integrator resolution (omega=" +
                                             std::to_string(omega) + ")");
  return par;
}

Eigen::VectorXd FrequencyBank::omegas() const {
  Eigen::VectorXd w(size());
  for (int j = 0; j < size(); ++j) w(j) = channels[j].omega;
  return w;
}

void FrequencyBank::validate() const {
  if (channels.empty()) throw ConfigError("FrequencyBank: empty bank");
  std::set<double> seen;
  for (const auto& c : channels) {
    if (c.omega == 0.0 || !(c.s > 0.0)) throw ConfigError("FrequencyBank: invalid channel");
    if (!seen.insert(c.omega).second) throw ConfigError("FrequencyBank: duplicate frequency");
  }
}

Trajectory bank_states(const FrequencyBank& bank, const Signal& u, const IntegratorConfig& cfg) {
  bank.validate();
  if (u.dim() != bank.p) throw ConfigError("eval_bank: input dimension mismatch");
  const int N = bank.size();
  const int m = bank.p * N;
  Eigen::VectorXd w(m);
  ChannelForcing cf{Eigen::MatrixXd(u.size(), m), {}};
  for (int c = 0; c < bank.p; ++c)
    for (int j = 0; j < N; ++j) {
      const auto& ch = bank.channels[j];
      w(c * N + j) = -ch.omega * ch.omega;
      cf.f.col(c * N + j) = ch.s * u.values().col(c);
    }
  return integrate_channels(u.grid(), w, Eigen::VectorXd::Zero(m), cf, false, bank.act, cfg);
}

namespace {

void append_time_channel(Eigen::MatrixXd& out, const TimeGrid& g) {
  for (int k = 0; k < g.size(); ++k) {
    const double t = k * g.h();
    out(k, out.cols() - 1) = 0.25 * t * t;
  }
}

}  // namespace

Signal eval_bank(const FrequencyBank& bank, const Signal& u, const IntegratorConfig& cfg) {
  Trajectory tr = bank_states(bank, u, cfg);
  const int N = bank.size();
  Eigen::MatrixXd out(u.size(), bank.output_dim());
  for (int c = 0; c < bank.p; ++c)
    for (int j = 0; j < N; ++j) out.col(c * N + j) = bank.channels[j].readout() * tr.position.values().col(c * N + j);
  append_time_channel(out, u.grid());
  return Signal(u.grid(), std::move(out));
}

Signal exact_bank(const Eigen::VectorXd& omegas, const Signal& u) {
  Eigen::MatrixXd tr = sine_transform_trajectory(u, omegas);
  Eigen::MatrixXd out(u.size(), tr.cols() + 1);
  out.leftCols(tr.cols()) = tr;
  append_time_channel(out, u.grid());
  return Signal(u.grid(), std::move(out));
}

Signal exact_bank(const FrequencyBank& bank, const Signal& u) { return exact_bank(bank.omegas(), u); }

FrequencyBank calibrate_bank(const Eigen::VectorXd& omegas, const InputFamily& fam, const Activation& act, double tol,
                             const IntegratorConfig& cfg, const BankOptions& opts) {
  const int N = static_cast<int>(omegas.size());
  if (N == 0) throw ConfigError("calibrate_bank: no frequencies");
  // probe frequencies: all of them for small banks, else spread by rank
  std::vector<int> order(N);
  for (int j = 0; j < N; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(omegas(a)) < std::abs(omegas(b)); });
  std::set<int> probes;
  if (N <= opts.probes) {
    probes.insert(order.begin(), order.end());
  } else {
    for (int i = 0; i < opts.probes; ++i) probes.insert(order[(static_cast<long>(i) * (N - 1)) / (opts.probes - 1)]);
  }
  const auto us = fam.sample(opts.samples, stream::calibration);
  double s = 1.0;
  for (int j : probes) {
    std::vector<Eigen::MatrixXd> ex;
    for (const auto& u : us) ex.push_back(sine_transform_trajectory(u, Eigen::VectorXd::Constant(1, omegas(j))));
    bool met = false;
    const SineLayerParams par = scan_scale(omegas(j), us, ex, act, tol, cfg, met);
    if (!met && !opts.best_effort)
      throw BudgetError("calibrate_scale", "tolerance unachievable at this integrator resolution (omega=" +
                                               std::to_string(omegas(j)) + ")");
    s = std::min(s, par.s);
  }

  FrequencyBank bank;
  bank.act = act;
  bank.p = fam.dim();
  for (int j = 0; j < N; ++j) bank.channels.push_back({omegas(j), s, 0.0, {}});

  std::vector<Eigen::MatrixXd> exact;
  for (const auto& u : us) exact.push_back(sine_transform_trajectory(u, omegas));
  FrequencyBank best;
  for (int extra = 0; extra <= opts.max_extra_halvings; ++extra) {
    Eigen::VectorXd chan_err = Eigen::VectorXd::Zero(N);
    for (std::size_t i = 0; i < us.size(); ++i) {
      Trajectory tr = bank_states(bank, us[i], cfg);
      for (int c = 0; c < bank.p; ++c)
        for (int j = 0; j < N; ++j) {
          const double e =
              (bank.channels[j].readout() * tr.position.values().col(c * N + j) - exact[i].col(c * N + j))
                  .cwiseAbs()
                  .maxCoeff();
          chan_err(j) = std::max(chan_err(j), e);
        }
    }
    for (int j = 0; j < N; ++j) bank.channels[j].achieved_err = chan_err(j);
    bank.achieved_err = chan_err.maxCoeff();
    if (bank.achieved_err <= tol) return bank;
    if (best.channels.empty() || bank.achieved_err < best.achieved_err) best = bank;
    if (act.kind() == ActivationKind::identity) break;
    for (auto& ch : bank.channels) {
      ch.sweep.emplace_back(ch.s, ch.achieved_err);
      ch.s *= 0.5;
    }
  }
  if (opts.best_effort) return best;
  throw BudgetError("calibrate_bank", "bank error " + std::to_string(bank.achieved_err) + " exceeds tolerance " +
                                          std::to_string(tol));
}

}  // namespace nosc
