#include "nosc/operators.hpp"

#include "nosc/errors.hpp"
#include "nosc/random.hpp"

#include <algorithm>
#include <cmath>

namespace nosc {

Signal TargetOperator::operator()(const Signal& u) const {
  if (u.dim() != p) throw ConfigError("operator " + name + ": input dimension mismatch");
  Signal out = fn(u);
  if (out.dim() != q || out.size() != u.size()) throw ConfigError("operator " + name + ": output shape mismatch");
  return out;
}

TargetOperator zero_operator(int p, int q) {
  return {"zero", p, q, [q](const Signal& u) { return Signal(u.grid(), q); }, true};
}

TargetOperator identity_operator(int p) {
  return {"identity", p, p, [](const Signal& u) { return u; }, true};
}

namespace {

// Shift by d, reading u through `read` (which handles times before the start).
template <class Read>
Signal shifted(const Signal& u, double d, Read read) {
  const auto& g = u.grid();
  Signal out(g, u.dim());
  const double steps = d / g.h();
  const long whole = std::lround(steps);
  const bool on_grid = std::abs(steps - whole) < 1e-9;
  for (int k = 0; k < g.size(); ++k) {
    if (on_grid && k - whole >= 0 && k - whole < g.size()) {
      out.values().row(k) = u.values().row(k - whole);
    } else {
      out.values().row(k) = read(g.time(k) - d).transpose();
    }
  }
  return out;
}

}  // namespace

TargetOperator delay_operator(double d, int p) {
  if (d < 0.0) throw ConfigError("delay_operator: negative delay");
  return {"delay", p, p,
          [d](const Signal& u) { return shifted(u, d, [&](double t) { return zero_extend(u, t); }); }, true};
}

TargetOperator hold_delay_operator(double d, double t_hold, int p) {
  if (d < 0.0) throw ConfigError("hold_delay_operator: negative delay");
  return {"hold_delay", p, p,
          [d, t_hold](const Signal& u) {
            const auto& g = u.grid();
            const Eigen::VectorXd held = zero_extend(u, t_hold);
            Signal out(g, u.dim());
            for (int k = 0; k < g.size(); ++k) {
              const double t = g.time(k);
              if (t < t_hold)
                out.values().row(k) = u.values().row(k);
              else if (t <= t_hold + d)
                out.values().row(k) = held.transpose();
              else
                out.values().row(k) = zero_extend(u, t - d).transpose();
            }
            return out;
          },
          true};
}

TargetOperator running_integral_operator(int p) {
  return {"integral", p, p,
          [](const Signal& u) {
            Signal out(u.grid(), u.dim());
            const double h = u.grid().h();
            for (int k = 1; k < u.size(); ++k)
              out.values().row(k) = out.values().row(k - 1) + 0.5 * h * (u.values().row(k - 1) + u.values().row(k));
            return out;
          },
          true};
}

TargetOperator damped_ode_operator(double rate, int p) {
  if (!(rate > 0.0)) throw ConfigError("damped_ode_operator: rate must be positive");
  return {"damped_ode", p, p,
          [rate](const Signal& u) {
            Signal out(u.grid(), u.dim());
            const double h = u.grid().h();
            const double e = std::exp(-rate * h);
            const double c0 = -std::expm1(-rate * h) / rate;
            const double c1 = 1.0 / rate - c0 / (rate * h);
            for (int k = 1; k < u.size(); ++k) {
              const auto uk = u.values().row(k - 1);
              out.values().row(k) = e * out.values().row(k - 1) + c0 * uk + c1 * (u.values().row(k) - uk);
            }
            return out;
          },
          true};
}

TargetOperator anticausal_operator(double d, int p) {
  if (d <= 0.0) throw ConfigError("anticausal_operator: shift must be positive");
  return {"anticausal", p, p,
          [d](const Signal& u) {
            const double end = u.grid().t_end;
            return shifted(u, -d, [&](double t) { return u.sample(std::min(t, end)); });
          },
          false};
}

TargetOperator function_readout_operator(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> F, int p, int q,
                                         double t_read) {
  return {"function_readout", p, q,
          [F, q, t_read](const Signal& u) {
            const auto& g = u.grid();
            Signal out(g, q);
            if (t_read > g.t_end) return out;
            const Eigen::VectorXd v = F(u.sample(t_read));
            if (v.size() != q) throw ConfigError("function_readout_operator: F output dimension mismatch");
            for (int k = 0; k < g.size(); ++k) {
              const double t = g.time(k);
              if (t >= t_read) out.values().row(k) = ((t - t_read) * v).transpose();
            }
            return out;
          },
          true};
}

TargetOperator operator_from_name(const std::string& name, double param, int p, double t_hold) {
  if (name == "zero") return zero_operator(p, p);
  if (name == "identity") return identity_operator(p);
  if (name == "delay") return delay_operator(param, p);
  if (name == "hold_delay") return hold_delay_operator(param, t_hold, p);
  if (name == "integral") return running_integral_operator(p);
  if (name == "damped_ode") return damped_ode_operator(param > 0.0 ? param : 1.0, p);
  if (name == "anticausal") return anticausal_operator(param, p);
  throw ConfigError("unknown operator: " + name);
}

CausalityReport check_causality(const TargetOperator& op, const InputFamily& fam, int probes, double tol) {
  if (probes < 1) throw ConfigError("check_causality: probes must be >= 1");
  const auto us = fam.sample(probes, stream::causality);
  const auto ws = fam.sample(probes, stream::perturbation);
  Rng rng(derive_seed(0xc0ffee, stream::causality));
  CausalityReport rep;
  rep.probes = probes;
  for (int i = 0; i < probes; ++i) {
    const auto& g = us[i].grid();
    const int cut = 1 + static_cast<int>(rng.uniform(0.1, 0.9) * (g.n_steps - 1));
    Signal v = us[i];
    for (int k = cut + 1; k < g.size(); ++k) v.values().row(k) += (1.0 + ws[i].values().row(k).array()).matrix();
    const Signal a = op(us[i]), b = op(v);
    for (int k = 0; k <= cut; ++k)
      rep.max_violation = std::max(rep.max_violation, (a.values().row(k) - b.values().row(k)).cwiseAbs().maxCoeff());
  }
  rep.passed = rep.max_violation <= tol;
  return rep;
}

double estimate_lipschitz(const TargetOperator& op, const InputFamily& fam, int probes, double rel_size) {
  const auto us = fam.sample(probes, stream::probe);
  const auto ds = fam.sample(probes, stream::perturbation);
  double kappa = 0.0;
  for (int i = 0; i < probes; ++i) {
    const double dn = sup_norm(ds[i]);
    if (dn == 0.0) continue;
    Signal v = us[i];
    const double scale = rel_size * std::max(fam.sup_bound(), 1e-12) / dn;
    v.values() += scale * ds[i].values();
    const double num = sup_distance(op(v), op(us[i]));
    kappa = std::max(kappa, num / (scale * dn));
  }
  return kappa;
}

}  // namespace nosc
