#include "nosc/reconstruction.hpp"

#include "nosc/errors.hpp"
#include "nosc/random.hpp"
#include "nosc/sine_transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace nosc {

using cplx = std::complex<double>;

namespace {

double raw_bump(double x) { return (x <= 0.0 || x >= 1.0) ? 0.0 : std::exp(-1.0 / (x * (1.0 - x))); }

// Composite Simpson on [0,1] with n (even) intervals.
template <class F>
double simpson01(F f, int n) {
  const double h = 1.0 / n;
  double acc = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return acc * h / 3.0;
}

constexpr int kHatIntervals = 2048;

// Simpson weights times rho at the nodes used by bump_hat.
const std::vector<double>& hat_nodes() {
  static const std::vector<double> w = [] {
    std::vector<double> v(kHatIntervals + 1);
    const double h = 1.0 / kHatIntervals;
    for (int i = 0; i <= kHatIntervals; ++i) {
      const double sw = (i == 0 || i == kHatIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      v[i] = sw * h / 3.0 * bump(i * h);
    }
    return v;
  }();
  return w;
}

constexpr double kTailStep = 0.125;
constexpr double kTailMax = 2000.0;

struct TailTables {
  std::vector<double> plain, weighted;  // integral from xi_i to kTailMax, one side
};

const TailTables& tail_tables() {
  static const TailTables t = [] {
    const int n = static_cast<int>(kTailMax / kTailStep);
    std::vector<double> a(n + 1);
    for (int i = 0; i <= n; ++i) a[i] = std::abs(bump_hat(i * kTailStep));
    TailTables tt;
    tt.plain.assign(n + 1, 0.0);
    tt.weighted.assign(n + 1, 0.0);
    for (int i = n - 1; i >= 0; --i) {
      tt.plain[i] = tt.plain[i + 1] + 0.5 * kTailStep * (a[i] + a[i + 1]);
      const double wl = i == 0 ? 0.0 : a[i] / (i * kTailStep);
      tt.weighted[i] = tt.weighted[i + 1] + 0.5 * kTailStep * (wl + a[i + 1] / ((i + 1) * kTailStep));
    }
    return tt;
  }();
  return t;
}

double interp_table(const std::vector<double>& tab, double X) {
  const double pos = X / kTailStep;
  const int i = static_cast<int>(pos);
  if (i >= static_cast<int>(tab.size()) - 1) return 0.0;
  const double f = pos - i;
  return (1.0 - f) * tab[i] + f * tab[i + 1];
}

}  // namespace

double bump_normalization() {
  static const double Z = 1.0 / simpson01(raw_bump, 20000);
  return Z;
}

double bump(double x) { return bump_normalization() * raw_bump(x); }

cplx bump_hat(double xi) {
  const auto& w = hat_nodes();
  const double h = 1.0 / kHatIntervals;
  const cplx rot = std::polar(1.0, -xi * h);
  cplx acc = 0.0, ph = 1.0;
  for (int i = 0; i <= kHatIntervals; ++i) {
    if (i % 256 == 0) ph = std::polar(1.0, -xi * i * h);  // resync the rotation
    acc += w[i] * ph;
    ph *= rot;
  }
  return acc;
}

double bump_hat_tail(double X) { return 2.0 * interp_table(tail_tables().plain, std::max(X, 0.0)); }

double bump_hat_tail_weighted(double X) {
  if (X < 1.0) return 2.0 * interp_table(tail_tables().weighted, 1.0) + 2.0 * std::log(1.0 / std::max(X, 1e-300));
  return 2.0 * interp_table(tail_tables().weighted, X);
}

Mollifier::Mollifier(double e) : eps(e) {
  if (!(eps > 0.0)) throw ConfigError("Mollifier: width must be positive");
}

double Mollifier::operator()(double tau) const { return bump(tau / eps) / eps; }

double Mollifier::mass() const {
  return eps * simpson01([this](double x) { return (*this)(x * eps); }, 2048);
}

Signal Mollifier::smooth(const Signal& u) const {
  const auto& g = u.grid();
  int m = std::max(64, 4 * static_cast<int>(std::ceil(eps / g.h())));
  m += m % 2;
  const double d = eps / m;
  std::vector<double> w(m + 1);
  for (int i = 0; i <= m; ++i) w[i] = ((i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * d / 3.0 * (*this)(i * d);
  Signal out(g, u.dim());
  const double h = g.h();
  for (int c = 0; c < u.dim(); ++c) {
    const double* x = u.values().col(c).data();
    double* y = out.values().col(c).data();
    for (int k = 0; k < g.size(); ++k) {
      double acc = 0.0;
      for (int i = 1; i < m; ++i) {
        const double pos = k - i * d / h;  // fractional grid index of t_k - r
        if (pos < 0.0) break;
        const int j = std::min(static_cast<int>(pos), g.n_steps - 1);
        const double f = pos - j;
        acc += w[i] * ((1.0 - f) * x[j] + f * x[j + 1]);
      }
      y[k] = acc;
    }
  }
  return out;
}

ReconstructionPlan ReconstructionPlan::fold() const {
  if (folded) return *this;
  ReconstructionPlan f = *this;
  f.folded = true;
  const int half = N / 2;
  f.omega = omega.tail(half);
  f.alpha = 2.0 * alpha.tail(half);
  f.theta = theta.tail(half);
  return f;
}

void ReconstructionPlan::validate() const {
  if (N < 2 || N % 2) throw ConfigError("ReconstructionPlan: N must be even and >= 2");
  const int n = folded ? N / 2 : N;
  if (omega.size() != n || alpha.size() != n || theta.size() != n)
    throw ConfigError("ReconstructionPlan: coefficient arrays do not match N");
  if ((omega.array() == 0.0).any()) throw ConfigError("ReconstructionPlan: zero frequency");
  if (!(window > 0.0) || !(eps_moll > 0.0) || !(L_cut > 0.0) || p < 1)
    throw ConfigError("ReconstructionPlan: invalid scalars");
}

ReconstructionPlan make_plan(double eps_moll, double L_cut, int N, double window, double T, int p) {
  if (N < 2 || N % 2) throw ConfigError("make_plan: N must be even and >= 2");
  if (!(eps_moll > 0.0) || !(L_cut > 0.0) || !(window > 0.0)) throw ConfigError("make_plan: invalid parameters");
  ReconstructionPlan plan;
  plan.N = N;
  plan.p = p;
  plan.T = T;
  plan.window = window;
  plan.eps_moll = eps_moll;
  plan.L_cut = L_cut;
  plan.omega.resize(N);
  plan.alpha.resize(N);
  plan.theta.resize(N);
  const double dw = plan.d_omega();
  const Mollifier moll(eps_moll);
  for (int j = 0; j < N; ++j) {
    // symmetric about 0 so that +-omega pairs are exact negatives
    const double w = (j < N / 2 ? -1.0 : 1.0) * (std::abs(j - (N - 1) / 2.0) * dw);
    const cplx r = moll.hat(w);
    plan.omega(j) = w;
    plan.alpha(j) = dw * std::abs(r) / std::numbers::pi;
    plan.theta(j) = std::arg(r);
  }
  return plan;
}

Eigen::VectorXd reconstruct(const ReconstructionPlan& plan, const Eigen::MatrixXd& beta, double t, double tau) {
  if (tau > t + 1e-12 * std::max(1.0, std::abs(t))) throw ConfigError("reconstruct: tau must not exceed t");
  if (beta.rows() != plan.terms()) throw ConfigError("reconstruct: beta does not match plan");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(beta.cols());
  for (int j = 0; j < plan.terms(); ++j)
    out += (plan.alpha(j) * std::sin(plan.omega(j) * (t - tau) - plan.theta(j))) * beta.row(j).transpose();
  return out;
}

LagTable::LagTable(const ReconstructionPlan& plan, double h, int K) {
  const int n = plan.terms();
  S_.resize(K + 1, n);
  C_.resize(K + 1, n);
  for (int j = 0; j < n; ++j) {
    const cplx rot = std::polar(1.0, plan.omega(j) * h);
    cplx z = 1.0;
    for (int k = 0; k <= K; ++k) {
      if (k % 128 == 0) z = std::polar(1.0, plan.omega(j) * h * k);
      S_(k, j) = z.imag();
      C_(k, j) = z.real();
      z *= rot;
    }
  }
  a_ = plan.alpha.array() * plan.theta.array().cos();
  b_ = -plan.alpha.array() * plan.theta.array().sin();
}

Eigen::MatrixXd LagTable::apply(const Eigen::MatrixXd& beta, int K) const {
  if (K > max_lag()) throw ConfigError("LagTable: lag beyond table");
  Eigen::MatrixXd out = S_.topRows(K + 1) * (a_.asDiagonal() * beta);
  out.noalias() += C_.topRows(K + 1) * (b_.asDiagonal() * beta);
  return out;
}

Eigen::MatrixXd plan_transform(const ReconstructionPlan& plan, const Signal& u, int k) {
  Eigen::MatrixXd row = sine_transform_rows(u, plan.omega, {k});
  return Eigen::Map<Eigen::MatrixXd>(row.data(), plan.terms(), u.dim());
}

namespace {

std::vector<int> validation_indices(const TimeGrid& g, int times) {
  std::vector<int> idx;
  for (int i = 1; i <= times; ++i) idx.push_back(static_cast<int>(std::lround(i * g.n_steps / double(times))));
  return idx;
}

}  // namespace

Eigen::VectorXd reconstruction_errors(const ReconstructionPlan& plan_in, const std::vector<Signal>& us, int times) {
  const ReconstructionPlan plan = plan_in.fold();
  Eigen::VectorXd err = Eigen::VectorXd::Zero(times);
  if (us.empty()) return err;
  const auto& g = us[0].grid();
  const int p = us[0].dim();
  const int nf = plan.terms();
  const auto idx = validation_indices(g, times);
  const int K = std::min(g.n_steps, static_cast<int>(std::floor(plan.window / g.h() + 1e-9)));
  const LagTable table(plan, g.h(), K);

  // beta columns grouped by validation time: column s * p + c
  std::vector<Eigen::MatrixXd> beta(times, Eigen::MatrixXd(nf, us.size() * p));
  for (std::size_t s = 0; s < us.size(); ++s) {
    const Eigen::MatrixXd rows = sine_transform_rows(us[s], plan.omega, idx);
    for (int i = 0; i < times; ++i)
      for (int c = 0; c < p; ++c) beta[i].col(s * p + c) = rows.row(i).segment(c * nf, nf).transpose();
  }
  for (int i = 0; i < times; ++i) {
    const int k = idx[i];
    const int Ki = std::min(K, k);
    const Eigen::MatrixXd R = table.apply(beta[i], Ki);
    for (std::size_t s = 0; s < us.size(); ++s)
      for (int c = 0; c < p; ++c) {
        const auto truth = us[s].values().col(c).segment(k - Ki, Ki + 1).reverse();
        err(i) = std::max(err(i), (R.col(s * p + c) - truth).cwiseAbs().maxCoeff());
      }
  }
  return err;
}

long alias_free_size(double L_cut, double T, double window, double eps_moll, double margin) {
  const double P = (T + window + eps_moll) * margin;
  long n = static_cast<long>(std::ceil(2.0 * L_cut * P / (2.0 * std::numbers::pi) + 1.0));
  n += n % 2;
  return n;
}

ReconstructionPlan build_plan(const InputFamily& fam, double window, double target_err, const PlanOptions& opts) {
  if (!(target_err > 0.0)) throw ConfigError("build_plan: target_err must be positive");
  const TimeGrid g = fam.grid();
  const double T = g.length();
  if (!(window > 0.0) || window > T * (1.0 + 1e-12)) throw ConfigError("build_plan: window must lie in (0, T]");
  const double third = target_err / 3.0;

  const auto probe = fam.sample(opts.probe_samples, stream::probe);
  const double sup = max_abs(probe);
  const double lip = max_slope(probe);

  // mollification width: largest width (quarter-octave steps) whose measured
  // smoothing error on the probe is within a third of the budget
  auto moll_err = [&](double e) {
    const Mollifier m(e);
    double worst = 0.0;
    for (const auto& u : probe) worst = std::max(worst, sup_distance(u, m.smooth(u)));
    return worst;
  };
  double eps = opts.eps_moll;
  if (eps <= 0.0) {
    if (sup == 0.0) {
      eps = 0.25 * T;
    } else {
      double hi = 0.5 * T;
      while (moll_err(hi) > third) {
        hi *= 0.5;
        if (hi < 1e-7 * T) throw BudgetError("build_plan", "no mollifier width meets the smoothing budget");
      }
      eps = hi;
      if (hi < 0.5 * T)
        for (double f : {std::pow(2.0, 0.75), std::pow(2.0, 0.5), std::pow(2.0, 0.25)})
          if (moll_err(hi * f) <= third) {
            eps = hi * f;
            break;
          }
    }
  }

  // spectral cutoff Xi = eps * L from the tail bound
  // |L_t u(w)| <= (sup|u| + T Lip(u)) / |w|
  double Xi = opts.tail_cut;
  if (Xi <= 0.0) {
    const double B = (sup + T * lip) / std::numbers::pi;
    Xi = 2.0;
    while (B * bump_hat_tail_weighted(Xi) > third) {
      Xi += 0.5;
      if (Xi > kTailMax) throw BudgetError("build_plan", "spectral tail budget unreachable");
    }
  }

  // alias-free equidistant grid: period 2 pi / d_omega must exceed the support
  // of the mollified odd extension seen from the window
  auto grid_size = [&](double e, double L) { return alias_free_size(L, T, window, e, opts.alias_margin); };

  const auto val = fam.sample(opts.validation_samples, stream::validation);
  double L = Xi / eps;
  bool shrunk = false;
  std::vector<PlanAttempt> history;
  while (true) {
    const long N = grid_size(eps, L);
    if (N > opts.max_N)
      throw BudgetError("build_plan", "N = " + std::to_string(N) + " exceeds the cap " + std::to_string(opts.max_N) +
                                          " before validation passed (target_err unachievable for this family/window)");
    ReconstructionPlan plan = make_plan(eps, L, static_cast<int>(N), window, T, fam.dim());
    const double err = reconstruction_errors(plan, val, opts.validation_times).maxCoeff();
    history.push_back({static_cast<int>(N), eps, L, err});
    if (err <= target_err) {
      plan.target_err = target_err;
      plan.achieved_err = err;
      plan.modulus = empirical_modulus(probe, eps);
      plan.history = std::move(history);
      return plan;
    }
    if (!shrunk) {
      eps *= 0.5;
      L = Xi / eps;
      shrunk = true;
    } else {
      L *= 2.0;
    }
  }
}

void write_plan_history_csv(std::ostream& os, const ReconstructionPlan& plan) {
  os << "N,eps_moll,L_cut,validated_err\n";
  for (const auto& a : plan.history)
    os << a.N << ',' << format_double(a.eps_moll) << ',' << format_double(a.L_cut) << ','
       << format_double(a.validated_err) << '\n';
}

PsiOracle::PsiOracle(ReconstructionPlan pl, TargetOperator op, TimeGrid g)
    : plan(pl.fold()), phi(std::move(op)), grid(g) {
  plan.validate();
  if (phi.p != plan.p) throw ConfigError("PsiOracle: plan and operator input dimensions differ");
  if (plan.window < grid.length() * (1.0 - 1e-9))
    throw ConfigError("PsiOracle: plan window must cover the whole input window");
  table = std::make_shared<const LagTable>(plan, grid.h(), grid.n_steps);
}

Eigen::VectorXd psi_eval(const PsiOracle& po, const Eigen::MatrixXd& beta, double t) {
  const double pos = (t - po.grid.t_start) / po.grid.h();
  const long k = std::lround(pos);
  if (std::abs(pos - k) > 1e-6 || k < 0 || k > po.grid.n_steps) throw ConfigError("psi_eval: t must be a grid time");
  return psi_eval_batch(po, {beta}, {static_cast<int>(k)}).row(0).transpose();
}

Eigen::MatrixXd psi_eval_batch(const PsiOracle& po, const std::vector<Eigen::MatrixXd>& betas,
                               const std::vector<int>& t_index) {
  if (betas.size() != t_index.size()) throw ConfigError("psi_eval_batch: size mismatch");
  const int p = po.plan.p;
  const int nf = po.plan.terms();
  const int M = static_cast<int>(betas.size());
  Eigen::MatrixXd out(M, po.phi.q);
  if (M == 0) return out;

  const LagTable& table = *po.table;

  std::vector<std::vector<int>> groups(po.grid.size());
  for (int m = 0; m < M; ++m) {
    if (t_index[m] < 0 || t_index[m] > po.grid.n_steps) throw ConfigError("psi_eval_batch: t index outside grid");
    if (betas[m].rows() != nf || betas[m].cols() != p) throw ConfigError("psi_eval_batch: beta shape mismatch");
    groups[t_index[m]].push_back(m);
  }
  for (int k = 0; k < po.grid.size(); ++k) {
    const auto& grp = groups[k];
    if (grp.empty()) continue;
    Eigen::MatrixXd B(nf, grp.size() * p);
    for (std::size_t i = 0; i < grp.size(); ++i) B.middleCols(i * p, p) = betas[grp[i]];
    const Eigen::MatrixXd R = table.apply(B, k);
    for (std::size_t i = 0; i < grp.size(); ++i) {
      Signal rec(po.grid, p);
      for (int c = 0; c < p; ++c) rec.values().col(c).head(k + 1) = R.col(i * p + c).reverse();
      out.row(grp[i]) = po.phi(rec).values().row(k);
    }
  }
  return out;
}

}  // namespace nosc
