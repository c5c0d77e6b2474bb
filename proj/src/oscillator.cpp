#include "nosc/oscillator.hpp"

#include <Eigen/Sparse>

#include "nosc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace nosc {

std::string method_name(Method m) { return m == Method::rk4 ? "rk4" : "velocity_verlet"; }

Method method_from_name(const std::string& name) {
  if (name == "rk4") return Method::rk4;
  if (name == "velocity_verlet" || name == "verlet") return Method::velocity_verlet;
  throw ConfigError("unknown integrator '" + name + "'");
}

int effective_substeps(const TimeGrid& grid, double omega_max, const IntegratorConfig& cfg) {
  if (cfg.substeps < 1) throw ConfigError("IntegratorConfig: substeps must be >= 1");
  int s = cfg.substeps;
  if (cfg.max_h_omega > 0.0 && omega_max > 0.0) {
    const double need = std::ceil(grid.h() * omega_max / cfg.max_h_omega - 1e-12);
    s = std::max(s, static_cast<int>(std::min(need, 1e8)));
  }
  return s;
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

template <class M>
bool finite(const M& m) {
  return m.size() == 0 || m.allFinite();
}

}  // namespace

void GeneralOscillator::validate() const {
  const auto mm = W.rows();
  require(W.cols() == mm, "GeneralOscillator: W must be square");
  require(V.rows() == mm && b.size() == mm && A.cols() == mm, "GeneralOscillator: inconsistent dimensions");
  require(c.size() == A.rows(), "GeneralOscillator: c must match A rows");
  require(finite(W) && finite(V) && finite(b) && finite(A) && finite(c), "GeneralOscillator: non-finite entries");
}

int MultiLayerOscillator::total_width() const {
  int s = 0;
  for (const auto& l : layers) s += l.width();
  return s;
}

void MultiLayerOscillator::validate() const {
  require(!layers.empty(), "MultiLayerOscillator: need at least one layer");
  require(p >= 1, "MultiLayerOscillator: p must be >= 1");
  int prev = p;
  for (const auto& l : layers) {
    require(l.V.rows() == l.width() && l.V.cols() == prev && l.b.size() == l.width(),
            "MultiLayerOscillator: inconsistent layer dimensions");
    require(finite(l.w) && finite(l.V) && finite(l.b), "MultiLayerOscillator: non-finite entries");
    if (l.factored())
      require(l.V_left.rows() == l.width() && l.V_right.cols() == prev && l.V_left.cols() == l.V_right.rows(),
              "MultiLayerOscillator: inconsistent coupling factors");
    prev = l.width();
  }
  require(A.cols() == prev && c.size() == A.rows(), "MultiLayerOscillator: inconsistent readout");
  require(finite(A) && finite(c), "MultiLayerOscillator: non-finite readout");
}

void CoRNNSystem::validate() const {
  const auto mm = W.rows();
  require(W.cols() == mm && Wd.rows() == mm && Wd.cols() == mm && V.rows() == mm && b.size() == mm,
          "CoRNNSystem: inconsistent dimensions");
  require(gamma >= 0.0 && eps_damp >= 0.0, "CoRNNSystem: damping must be nonnegative");
}

namespace {

// Strongly connected component index of every node of the graph i -> j for W(i, j) != 0.
std::vector<int> strong_components(const Eigen::MatrixXd& W) {
  const int m = static_cast<int>(W.rows());
  std::vector<std::vector<int>> adj(m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      if (W(i, j) != 0.0) adj[i].push_back(j);
  // iterative Tarjan
  std::vector<int> index(m, -1), low(m, 0), comp(m, -1), stack, edge(m, 0);
  std::vector<char> on(m, 0);
  int next = 0, ncomp = 0;
  for (int root = 0; root < m; ++root) {
    if (index[root] >= 0) continue;
    std::vector<int> call{root};
    index[root] = low[root] = next++;
    stack.push_back(root);
    on[root] = 1;
    while (!call.empty()) {
      const int v = call.back();
      if (edge[v] < static_cast<int>(adj[v].size())) {
        const int w = adj[v][edge[v]++];
        if (index[w] < 0) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on[w] = 1;
          call.push_back(w);
        } else if (on[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      call.pop_back();
      if (!call.empty()) low[call.back()] = std::min(low[call.back()], low[v]);
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on[w] = 0;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
    }
  }
  return comp;
}

}  // namespace

double stiffness_frequency(const GeneralOscillator& osc) {
  const int m = osc.m();
  if (m == 0) return 0.0;
  // the spectrum of a reducible W is that of its irreducible diagonal blocks,
  // so Gershgorin only needs the couplings inside each strong component
  const std::vector<int> comp = strong_components(osc.W);
  double best = 0.0;
  for (int i = 0; i < m; ++i) {
    double r = 0.0;
    for (int j = 0; j < m; ++j)
      if (comp[j] == comp[i]) r += std::abs(osc.W(i, j));
    best = std::max(best, r);
  }
  return std::sqrt(best);
}

double stiffness_frequency(const MultiLayerOscillator& osc) {
  // layers couple feed-forward only: the Jacobian is block triangular with
  // diagonal blocks diag(w)
  double best = 0.0;
  for (const auto& L : osc.layers)
    if (L.width() > 0) best = std::max(best, L.w.cwiseAbs().maxCoeff());
  return std::sqrt(best);
}

GeneralResult simulate_general(const GeneralOscillator& osc, const Signal& u, const IntegratorConfig& cfg) {
  osc.validate();
  if (u.dim() != osc.p()) throw ConfigError("simulate_general: input dimension mismatch");
  const int m = osc.m();
  const int sub = effective_substeps(u.grid(), stiffness_frequency(osc), cfg);
  Eigen::VectorXd z(m);
  auto accel = [&](double t, const Eigen::VectorXd& y, const Eigen::VectorXd&, Eigen::VectorXd& a) {
    z.noalias() = osc.W * y;
    z.noalias() += osc.V * u.sample(t);
    z += osc.b;
    for (int i = 0; i < m; ++i) a(i) = osc.act(z(i));
  };
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
  GeneralResult r{integrate_second_order(u.grid(), zero, zero, accel, cfg.method, sub), Signal()};
  Eigen::MatrixXd out = r.hidden.position.values() * osc.A.transpose();
  out.rowwise() += osc.c.transpose();
  r.output = Signal(u.grid(), std::move(out));
  return r;
}

namespace {

// Stacked right-hand side of all layers (internal order layer 1..L).
struct StackedRhs {
  const MultiLayerOscillator& osc;
  const Signal& u;
  std::vector<int> offset;

  StackedRhs(const MultiLayerOscillator& o, const Signal& in) : osc(o), u(in) {
    int off = 0;
    for (const auto& l : osc.layers) {
      offset.push_back(off);
      off += l.width();
    }
  }

  void operator()(double t, const Eigen::VectorXd& y, const Eigen::VectorXd&, Eigen::VectorXd& a) const {
    const Eigen::VectorXd x0 = u.sample(t);
    for (std::size_t l = 0; l < osc.layers.size(); ++l) {
      const auto& L = osc.layers[l];
      const int m = L.width();
      const auto yl = y.segment(offset[l], m);
      Eigen::VectorXd drive = (l == 0) ? Eigen::VectorXd(L.V * x0)
                                       : Eigen::VectorXd(L.V * y.segment(offset[l - 1], osc.layers[l - 1].width()));
      auto al = a.segment(offset[l], m);
      if (L.force_outside) {
        for (int i = 0; i < m; ++i) al(i) = osc.act(L.w(i) * yl(i) + L.b(i)) + drive(i);
      } else {
        for (int i = 0; i < m; ++i) al(i) = osc.act(L.w(i) * yl(i) + drive(i) + L.b(i));
      }
    }
  }
};

}  // namespace

MultiLayerResult simulate_multilayer(const MultiLayerOscillator& osc, const Signal& u, const IntegratorConfig& cfg) {
  osc.validate();
  if (u.dim() != osc.p) throw ConfigError("simulate_multilayer: input dimension mismatch");
  StackedRhs rhs(osc, u);
  const int m = osc.total_width();
  const int sub = effective_substeps(u.grid(), stiffness_frequency(osc), cfg);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
  Trajectory all = integrate_second_order(u.grid(), zero, zero, rhs, cfg.method, sub);
  MultiLayerResult r;
  for (std::size_t l = 0; l < osc.layers.size(); ++l) {
    const int w = osc.layers[l].width();
    r.layers.push_back({Signal(u.grid(), all.position.values().middleCols(rhs.offset[l], w)),
                        Signal(u.grid(), all.velocity.values().middleCols(rhs.offset[l], w))});
  }
  Eigen::MatrixXd out = r.layers.back().position.values() * osc.A.transpose();
  out.rowwise() += osc.c.transpose();
  r.output = Signal(u.grid(), std::move(out));
  return r;
}

GeneralOscillator embed_multilayer_to_general(const MultiLayerOscillator& osc) {
  osc.validate();
  for (const auto& l : osc.layers)
    if (l.force_outside) throw ConfigError("embed_multilayer_to_general: forcing outside sigma has no single-system form");
  const int L = osc.depth();
  const int m = osc.total_width();
  // offset of layer l (0-based) in the stacked vector [y^L, ..., y^1]
  std::vector<int> off(L);
  int acc = 0;
  for (int l = L - 1; l >= 0; --l) {
    off[l] = acc;
    acc += osc.layers[l].width();
  }
  GeneralOscillator g;
  g.act = osc.act;
  g.W = Eigen::MatrixXd::Zero(m, m);
  g.V = Eigen::MatrixXd::Zero(m, osc.p);
  g.b = Eigen::VectorXd::Zero(m);
  for (int l = 0; l < L; ++l) {
    const auto& lay = osc.layers[l];
    const int w = lay.width();
    for (int i = 0; i < w; ++i) g.W(off[l] + i, off[l] + i) = lay.w(i);
    if (l == 0)
      g.V.middleRows(off[0], w) = lay.V;
    else
      g.W.block(off[l], off[l - 1], w, osc.layers[l - 1].width()) = lay.V;
    g.b.segment(off[l], w) = lay.b;
  }
  g.A = Eigen::MatrixXd::Zero(osc.q(), m);
  g.A.leftCols(osc.layers.back().width()) = osc.A;
  g.c = osc.c;
  return g;
}

Trajectory simulate_cornn(const CoRNNSystem& sys, const Signal& u, const IntegratorConfig& cfg) {
  sys.validate();
  if (u.dim() != sys.V.cols()) throw ConfigError("simulate_cornn: input dimension mismatch");
  const int m = sys.m();
  Eigen::VectorXd z(m);
  auto accel = [&](double t, const Eigen::VectorXd& y, const Eigen::VectorXd& v, Eigen::VectorXd& a) {
    z.noalias() = sys.W * y;
    z.noalias() += sys.Wd * v;
    z.noalias() += sys.V * u.sample(t);
    z += sys.b;
    for (int i = 0; i < m; ++i) a(i) = sys.act(z(i)) - sys.gamma * y(i) - sys.eps_damp * v(i);
  };
  double omega = m ? std::sqrt(sys.W.cwiseAbs().rowwise().sum().maxCoeff() + sys.gamma) : 0.0;
  const int sub = effective_substeps(u.grid(), omega, cfg);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m);
  return integrate_second_order(u.grid(), zero, zero, accel, cfg.method, sub);
}

Eigen::VectorXd layer_acceleration(const MultiLayerOscillator& osc, int layer, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& x) {
  const auto& L = osc.layers.at(layer - 1);
  const Eigen::VectorXd drive = L.V * x;
  Eigen::VectorXd a(L.width());
  for (int i = 0; i < L.width(); ++i)
    a(i) = L.force_outside ? osc.act(L.w(i) * y(i) + L.b(i)) + drive(i) : osc.act(L.w(i) * y(i) + drive(i) + L.b(i));
  return a;
}

double hamiltonian(const MultiLayerOscillator& osc, int layer, const Eigen::VectorXd& y, const Eigen::VectorXd& ydot,
                   const Eigen::VectorXd& x) {
  const auto& L = osc.layers.at(layer - 1);
  if (L.force_outside) throw ConfigError("hamiltonian: defined for forcing inside sigma");
  for (int i = 0; i < L.width(); ++i)
    if (L.w(i) == 0.0) throw ConfigError("hamiltonian: requires all w_i != 0");
  const Eigen::VectorXd drive = L.V * x;
  double H = 0.5 * ydot.squaredNorm();
  for (int i = 0; i < L.width(); ++i) H -= osc.act.antiderivative(L.w(i) * y(i) + drive(i) + L.b(i)) / L.w(i);
  return H;
}

double reverse_check(const MultiLayerOscillator& osc, const Signal& u, const IntegratorConfig& cfg, long steps) {
  osc.validate();
  if (cfg.method != Method::velocity_verlet) throw ConfigError("reverse_check: needs the symplectic Verlet scheme");
  if (u.dim() != osc.p) throw ConfigError("reverse_check: input dimension mismatch");
  StackedRhs rhs(osc, u);
  const int sub = effective_substeps(u.grid(), stiffness_frequency(osc), cfg);
  return verlet_roundtrip(u.grid(), osc.total_width(), rhs, sub, steps);
}

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct HermiteWeights {
  double h00, h10, h01, h11;
  explicit HermiteWeights(double s) {
    const double s2 = s * s, s3 = s2 * s;
    h00 = 2 * s3 - 3 * s2 + 1;
    h10 = s3 - 2 * s2 + s;
    h01 = -2 * s3 + 3 * s2;
    h11 = s3 - s2;
  }
};

// Forcing of a group of channels at fraction s of grid interval k.
void forcing_at(const RowMat& F, const RowMat& D, bool hermite, double h, int k, double s, double* out) {
  const int g = static_cast<int>(F.cols());
  const double* f0 = F.row(k).data();
  const double* f1 = F.row(k + 1).data();
  if (!hermite) {
    for (int j = 0; j < g; ++j) out[j] = (1.0 - s) * f0[j] + s * f1[j];
    return;
  }
  const HermiteWeights w(s);
  const double* d0 = D.row(k).data();
  const double* d1 = D.row(k + 1).data();
  const double a = w.h10 * h, c = w.h11 * h;
  for (int j = 0; j < g; ++j) out[j] = w.h00 * f0[j] + a * d0[j] + w.h01 * f1[j] + c * d1[j];
}

}  // namespace

Trajectory integrate_channels(const TimeGrid& grid, const Eigen::VectorXd& w, const Eigen::VectorXd& b_outside,
                              const ChannelForcing& forcing, bool outside, const Activation& act,
                              const IntegratorConfig& cfg) {
  const int m = static_cast<int>(w.size());
  const int n = grid.n_steps;
  const double h = grid.h();
  if (forcing.f.rows() != grid.size() || forcing.f.cols() != m)
    throw ConfigError("integrate_channels: forcing shape mismatch");
  const bool hermite = forcing.df.size() > 0;
  if (outside && b_outside.size() != m) throw ConfigError("integrate_channels: bias size mismatch");

  Trajectory tr{Signal(grid, m), Signal(grid, m)};
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < m; ++i) groups[effective_substeps(grid, std::sqrt(std::abs(w(i))), cfg)].push_back(i);

  for (const auto& [ms, idx] : groups) {
    const int g = static_cast<int>(idx.size());
    RowMat F(n + 1, g), D;
    if (hermite) D.resize(n + 1, g);
    for (int j = 0; j < g; ++j) {
      F.col(j) = forcing.f.col(idx[j]);
      if (hermite) D.col(j) = forcing.df.col(idx[j]);
    }
    std::vector<double> wg(g), bg(g, 0.0), y(g, 0.0), v(g, 0.0), a(g), f0(g), fm(g), f1(g);
    for (int j = 0; j < g; ++j) {
      wg[j] = w(idx[j]);
      if (outside) bg[j] = b_outside(idx[j]);
    }
    auto acc = [&](int j, double yy, double f) {
      return outside ? act(wg[j] * yy + bg[j]) + f : act(wg[j] * yy + f);
    };
    const double hs = h / ms;
    if (cfg.method == Method::velocity_verlet) {
      forcing_at(F, D, hermite, h, 0, 0.0, f0.data());
      for (int j = 0; j < g; ++j) a[j] = acc(j, 0.0, f0[j]);
    }
    for (int k = 0; k < n; ++k) {
      for (int s = 0; s < ms; ++s) {
        const double s0 = static_cast<double>(s) / ms, s1 = static_cast<double>(s + 1) / ms;
        forcing_at(F, D, hermite, h, k, s1, f1.data());
        if (cfg.method == Method::velocity_verlet) {
          for (int j = 0; j < g; ++j) {
            y[j] += hs * v[j] + 0.5 * hs * hs * a[j];
            const double an = acc(j, y[j], f1[j]);
            v[j] += 0.5 * hs * (a[j] + an);
            a[j] = an;
          }
        } else {
          forcing_at(F, D, hermite, h, k, s0, f0.data());
          forcing_at(F, D, hermite, h, k, 0.5 * (s0 + s1), fm.data());
          for (int j = 0; j < g; ++j) {
            const double y0 = y[j], v0 = v[j];
            const double k1v = acc(j, y0, f0[j]);
            const double k2y = v0 + 0.5 * hs * k1v;
            const double k2v = acc(j, y0 + 0.5 * hs * v0, fm[j]);
            const double k3y = v0 + 0.5 * hs * k2v;
            const double k3v = acc(j, y0 + 0.5 * hs * k2y, fm[j]);
            const double k4y = v0 + hs * k3v;
            const double k4v = acc(j, y0 + hs * k3y, f1[j]);
            y[j] = y0 + (hs / 6.0) * (v0 + 2.0 * k2y + 2.0 * k3y + k4y);
            v[j] = v0 + (hs / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
          }
        }
      }
      double check = 0.0;
      for (int j = 0; j < g; ++j) {
        tr.position(k + 1, idx[j]) = y[j];
        tr.velocity(k + 1, idx[j]) = v[j];
        check += y[j] + v[j];
      }
      if (!std::isfinite(check)) throw InstabilityError("non-finite oscillator state", k + 1);
    }
  }
  return tr;
}

namespace {

// Previous-layer drive V x on the grid, using the low-rank factors when present.
Eigen::MatrixXd drive_on_grid(const OscillatorLayer& L, const Eigen::MatrixXd& X) {
  // the left factors of compiled networks are selection/scaling matrices
  if (L.factored()) return (X * L.V_right.transpose()) * L.V_left.sparseView().transpose();
  return X * L.V.transpose();
}

}  // namespace

MultiLayerResult simulate_layerwise(const MultiLayerOscillator& osc, const Signal& u, const IntegratorConfig& cfg,
                                    bool keep_layers) {
  osc.validate();
  if (u.dim() != osc.p) throw ConfigError("simulate_layerwise: input dimension mismatch");
  const TimeGrid& grid = u.grid();
  MultiLayerResult r;
  Trajectory prev;
  for (int l = 0; l < osc.depth(); ++l) {
    const auto& L = osc.layers[l];
    ChannelForcing cf;
    if (l == 0) {
      cf.f = drive_on_grid(L, u.values());
    } else {
      cf.f = drive_on_grid(L, prev.position.values());
      cf.df = drive_on_grid(L, prev.velocity.values());
    }
    if (!L.force_outside) cf.f.rowwise() += L.b.transpose();
    Trajectory tr = integrate_channels(grid, L.w, L.b, cf, L.force_outside, osc.act, cfg);
    if (keep_layers) r.layers.push_back(tr);
    prev = std::move(tr);
  }
  Eigen::MatrixXd out = prev.position.values() * osc.A.transpose();
  out.rowwise() += osc.c.transpose();
  r.output = Signal(grid, std::move(out));
  if (!keep_layers) r.layers.push_back(std::move(prev));
  return r;
}

}  // namespace nosc
