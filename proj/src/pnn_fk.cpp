#include "nosc/pnn_fk.hpp"

#include "nosc/errors.hpp"
#include "nosc/random.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace nosc {

Eigen::MatrixXd FKSystem::stiffness() const {
  Eigen::MatrixXd KC = C;
  KC.diagonal() += k;
  return KC;
}

double FKSystem::max_row_sum() const { return n() ? C.rowwise().sum().cwiseAbs().maxCoeff() : 0.0; }

void FKSystem::validate() const {
  const int m = n();
  if (m < 1) throw ConfigError("FKSystem: no pendula");
  if (k.size() != m || C.rows() != m || C.cols() != m) throw ConfigError("FKSystem: inconsistent dimensions");
  if (!(mu.array() > 0.0).all() || !(k.array() > 0.0).all())
    throw ConfigError("FKSystem: masses and spring constants must be positive");
  if (!C.allFinite()) throw ConfigError("FKSystem: non-finite coupling");
  const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
  if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale) throw ConfigError("FKSystem: C must be symmetric");
  if (max_row_sum() > 1e-12 * scale) throw ConfigError("FKSystem: rows of C must sum to zero");
  if (F.dim() != m) throw ConfigError("FKSystem: forcing dimension mismatch");
}

Eigen::VectorXd pendulum_springs(const Eigen::VectorXd& mu, double g, double length) {
  if (!(g > 0.0) || !(length > 0.0)) throw ConfigError("pendulum_springs: g and length must be positive");
  return mu * (g / length);
}

void enforce_zero_row_sums(Eigen::MatrixXd& C) {
  for (int i = 0; i < C.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < C.cols(); ++j)
      if (j != i) s += C(i, j);
    C(i, i) = -s;
  }
}

namespace {

int fk_substeps(const TimeGrid& grid, const Eigen::MatrixXd& W, const IntegratorConfig& cfg) {
  return effective_substeps(grid, std::sqrt(W.cwiseAbs().rowwise().sum().maxCoeff()), cfg);
}

void check_state(const FKSystem& sys, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != sys.n() || b.size() != sys.n()) throw ConfigError("simulate_fk: initial state dimension mismatch");
}

}  // namespace

Trajectory simulate_fk(const FKSystem& sys, const Eigen::VectorXd& theta0, const Eigen::VectorXd& thetadot0,
                       const IntegratorConfig& cfg) {
  sys.validate();
  check_state(sys, theta0, thetadot0);
  const Eigen::MatrixXd KC = sys.stiffness();
  const Eigen::VectorXd inv_mu = sys.mu.cwiseInverse();
  const Eigen::MatrixXd W = inv_mu.asDiagonal() * KC;
  Eigen::VectorXd s(sys.n());
  auto accel = [&](double t, const Eigen::VectorXd& th, const Eigen::VectorXd&, Eigen::VectorXd& a) {
    s = th.array().sin().matrix();
    a.noalias() = -(KC * s);
    a += sys.F.sample(t);
    a.array() *= inv_mu.array();
  };
  const TimeGrid& g = sys.F.grid();
  return integrate_second_order(g, theta0, thetadot0, accel, cfg.method, fk_substeps(g, W, cfg));
}

double fk_energy(const FKSystem& sys, const Eigen::VectorXd& theta, const Eigen::VectorXd& thetadot) {
  const Eigen::VectorXd s = theta.array().sin().matrix();
  return 0.5 * thetadot.dot(sys.mu.cwiseProduct(thetadot)) + sys.k.dot((1.0 - theta.array().cos()).matrix()) +
         0.5 * s.dot(sys.C * s);
}

double fk_energy_deviation(const FKSystem& sys, const Eigen::VectorXd& theta0, const Eigen::VectorXd& thetadot0,
                           const IntegratorConfig& cfg, const IntegratorConfig& reference) {
  const Trajectory a = simulate_fk(sys, theta0, thetadot0, cfg);
  const Trajectory r = simulate_fk(sys, theta0, thetadot0, reference);
  double dev = 0.0;
  for (int k = 0; k < a.position.size(); ++k)
    dev = std::max(dev, std::abs(fk_energy(sys, a.position.at(k), a.velocity.at(k)) -
                                 fk_energy(sys, r.position.at(k), r.velocity.at(k))));
  return dev;
}

Trajectory FKTransformed::simulate(const Eigen::VectorXd& y0, const Eigen::VectorXd& ydot0,
                                   const IntegratorConfig& cfg) const {
  if (y0.size() != W.rows() || ydot0.size() != W.rows()) throw ConfigError("FKTransformed: state dimension mismatch");
  Eigen::VectorXd z(W.rows());
  auto accel = [&](double t, const Eigen::VectorXd& y, const Eigen::VectorXd&, Eigen::VectorXd& a) {
    z.noalias() = W * y;
    a = -z.array().sin().matrix();
    a += f.sample(t);
  };
  return integrate_second_order(f.grid(), y0, ydot0, accel, cfg.method, fk_substeps(f.grid(), W, cfg));
}

Eigen::VectorXd FKTransformed::to_y(const Eigen::VectorXd& theta) const { return W.partialPivLu().solve(theta); }

Signal FKTransformed::to_angles(const Signal& y) const {
  return Signal(y.grid(), Eigen::MatrixXd(y.values() * W.transpose()));
}

FKTransformed change_variables(const FKSystem& sys, double max_condition) {
  sys.validate();
  FKTransformed t;
  t.KC = sys.stiffness();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(t.KC);
  const auto sv = svd.singularValues();
  t.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(t.condition <= max_condition))
    throw ConfigError("change_variables: K + C is singular (condition number " + format_double(t.condition) + ")");
  t.W = sys.mu.cwiseInverse().asDiagonal() * t.KC;
  const Eigen::MatrixXd f = t.KC.partialPivLu().solve(sys.F.values().transpose()).transpose();
  t.f = Signal(sys.F.grid(), f);
  return t;
}

void OrderedCouplingSpec::validate() const {
  if (L < 1) throw ConfigError("OrderedCouplingSpec: need at least one layer");
  if (static_cast<int>(widths.size()) != L) throw ConfigError("OrderedCouplingSpec: widths must list L layers");
  for (int w : widths)
    if (w < 1) throw ConfigError("OrderedCouplingSpec: widths must be >= 1");
  if (!(eps_order > 0.0 && eps_order < 1.0)) throw ConfigError("OrderedCouplingSpec: eps_order must lie in (0,1)");
  if (!(mu_base > 0.0) || !(c_base >= 0.0) || !(g > 0.0) || !(length > 0.0))
    throw ConfigError("OrderedCouplingSpec: invalid base magnitudes");
}

int OrderedCouplingSpec::total_width() const {
  int n = 0;
  for (int w : widths) n += w;
  return n;
}

double OrderedCoupling::max_offdiag_ratio() const {
  double m = 0.0;
  for (double v : feedback) m = std::max(m, v);
  return m;
}

OrderedCoupling build_ordered_coupling(const OrderedCouplingSpec& spec) {
  spec.validate();
  const int L = spec.L;
  const int n = spec.total_width();
  OrderedCoupling oc;
  oc.offset.assign(L, 0);
  for (int l = L - 1, acc = 0; l >= 0; --l) {
    oc.offset[l] = acc;
    acc += spec.widths[l];
  }
  FKSystem& sys = oc.sys;
  sys.mu.resize(n);
  for (int l = 0; l < L; ++l)
    sys.mu.segment(oc.offset[l], spec.widths[l]).setConstant(spec.mu_base * std::pow(spec.eps_order, l + 1));
  sys.k = pendulum_springs(sys.mu, spec.g, spec.length);

  // the random pattern does not depend on eps_order, so sweeps only rescale it
  sys.C = Eigen::MatrixXd::Zero(n, n);
  Rng rng(derive_seed(spec.seed, stream::coupling));
  for (int l = 1; l < L; ++l) {
    const double scale = spec.c_base * std::pow(spec.eps_order, l + 1);
    for (int i = 0; i < spec.widths[l]; ++i)
      for (int j = 0; j < spec.widths[l - 1]; ++j) {
        const double v = scale * rng.uniform(-1.0, 1.0);
        sys.C(oc.offset[l] + i, oc.offset[l - 1] + j) = v;
        sys.C(oc.offset[l - 1] + j, oc.offset[l] + i) = v;
      }
  }
  enforce_zero_row_sums(sys.C);

  for (int l = 0; l < L; ++l) {
    const int o = oc.offset[l], w = spec.widths[l];
    const double mu = sys.mu(o);
    oc.rho.push_back(sys.C.diagonal().segment(o, w).cwiseAbs().maxCoeff() / mu);
    if (l == 0) {
      oc.forward.push_back(0.0);
      oc.feedback.push_back(0.0);
    } else {
      const double c = sys.C.block(o, oc.offset[l - 1], w, spec.widths[l - 1]).cwiseAbs().maxCoeff();
      oc.forward.push_back(c / mu);
      oc.feedback.push_back(c / sys.mu(oc.offset[l - 1]));
    }
  }
  const Eigen::MatrixXd KC = sys.stiffness();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(KC);
  oc.min_eigenvalue = es.eigenvalues().minCoeff();
  const double amax = es.eigenvalues().cwiseAbs().maxCoeff(), amin = es.eigenvalues().cwiseAbs().minCoeff();
  oc.condition = amin > 0.0 ? amax / amin : std::numeric_limits<double>::infinity();
  if (!(oc.condition <= spec.max_condition))
    throw ConfigError("build_ordered_coupling: K + C is ill-conditioned (condition number " +
                      format_double(oc.condition) + ")");
  return oc;
}

void with_bottom_forcing(OrderedCoupling& oc, const Signal& f1) {
  const int n = static_cast<int>(oc.sys.mu.size());
  const int o = oc.offset[0];
  if (f1.dim() != n - o) throw ConfigError("with_bottom_forcing: forcing must match the bottom layer width");
  Eigen::MatrixXd y(f1.size(), n);
  y.setZero();
  y.rightCols(n - o) = f1.values();
  oc.sys.F = Signal(f1.grid(), Eigen::MatrixXd(y * oc.sys.stiffness().transpose()));
}

MultiLayerOscillator truncated_network(const OrderedCoupling& oc) {
  const int L = static_cast<int>(oc.offset.size());
  const int n = oc.sys.n();
  const Eigen::MatrixXd W = oc.sys.mu.cwiseInverse().asDiagonal() * oc.sys.stiffness();
  auto width = [&](int l) { return (l == 0 ? n : oc.offset[l - 1]) - oc.offset[l]; };
  MultiLayerOscillator net;
  net.act = Activation(ActivationKind::sine);
  net.p = width(0);
  for (int l = 0; l < L; ++l) {
    const int o = oc.offset[l], w = width(l);
    OscillatorLayer lay;
    lay.w = -W.diagonal().segment(o, w);
    lay.b = Eigen::VectorXd::Zero(w);
    if (l == 0) {
      lay.V = Eigen::MatrixXd::Identity(w, w);
      lay.force_outside = true;
    } else {
      lay.V = -W.block(o, oc.offset[l - 1], w, width(l - 1));
    }
    net.layers.push_back(std::move(lay));
  }
  net.A = Eigen::MatrixXd::Identity(width(L - 1), width(L - 1));
  net.c = Eigen::VectorXd::Zero(width(L - 1));
  return net;
}

ReductionReport compare_reduction(const OrderedCouplingSpec& spec, const Signal& f1, const IntegratorConfig& cfg) {
  OrderedCoupling oc = build_ordered_coupling(spec);
  with_bottom_forcing(oc, f1);
  const FKTransformed tr = change_variables(oc.sys, spec.max_condition);
  const int n = oc.sys.n();
  ReductionReport rep;
  rep.eps_order = spec.eps_order;
  rep.max_offdiag_ratio = oc.max_offdiag_ratio();
  rep.full = tr.simulate(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), cfg);

  const MultiLayerResult mr = simulate_multilayer(truncated_network(oc), f1, cfg);
  Eigen::MatrixXd y(f1.size(), n);
  for (int l = 0; l < spec.L; ++l) y.middleCols(oc.offset[l], spec.widths[l]) = mr.layers[l].position.values();
  rep.truncated = Signal(f1.grid(), std::move(y));
  rep.D = sup_distance(rep.full.position, rep.truncated);
  rep.deviation_t0 = (rep.full.position.values().row(0) - rep.truncated.values().row(0)).cwiseAbs().maxCoeff();
  return rep;
}

std::vector<ReductionReport> fk_sweep(const OrderedCouplingSpec& spec, const std::vector<double>& eps_orders,
                                      const Signal& f1, const IntegratorConfig& cfg) {
  std::vector<ReductionReport> out;
  for (double e : eps_orders) {
    OrderedCouplingSpec s = spec;
    s.eps_order = e;
    out.push_back(compare_reduction(s, f1, cfg));
  }
  return out;
}

void write_fk_sweep_csv(std::ostream& os, const std::vector<ReductionReport>& rows) {
  os << "eps_order,D,max_offdiag_ratio\n";
  for (const auto& r : rows)
    os << format_double(r.eps_order) << ',' << format_double(r.D) << ',' << format_double(r.max_offdiag_ratio)
       << '\n';
}

Signal default_fk_forcing(const TimeGrid& grid, int width, double amplitude, double freq) {
  Signal f(grid, width);
  for (int k = 0; k < f.size(); ++k)
    for (int i = 0; i < width; ++i) f(k, i) = amplitude * std::sin(freq * grid.time(k) + 0.7 * i);
  return f;
}

}  // namespace nosc
