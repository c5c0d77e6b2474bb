#include "nosc/signals.hpp"

#include "nosc/errors.hpp"
#include "nosc/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nosc {

TimeGrid::TimeGrid(double t0, double t1, int n) : t_start(t0), t_end(t1), n_steps(n) {
  if (n < 2) throw ConfigError("TimeGrid: n_steps must be >= 2");
  if (!(t1 > t0)) throw ConfigError("TimeGrid: t_end must exceed t_start");
}

Signal::Signal(const TimeGrid& grid, int dim) : grid_(grid), values_(Eigen::MatrixXd::Zero(grid.size(), dim)) {}

Signal::Signal(const TimeGrid& grid, Eigen::MatrixXd values) : grid_(grid), values_(std::move(values)) {
  if (values_.rows() != grid_.size())
    throw std::invalid_argument("Signal: value count does not match grid");
}

namespace {

// Locate t on the grid: interval index k and fraction in [0,1].
std::pair<int, double> locate(const TimeGrid& g, double t) {
  const double h = g.h();
  const double tol = 1e-9 * h;
  if (t < g.t_start - tol || t > g.t_end + tol)
    throw std::out_of_range("time " + std::to_string(t) + " outside signal grid");
  double x = (t - g.t_start) / h;
  int k = static_cast<int>(std::floor(x));
  k = std::clamp(k, 0, g.n_steps - 1);
  double f = std::clamp(x - k, 0.0, 1.0);
  return {k, f};
}

}  // namespace

Eigen::VectorXd Signal::sample(double t) const {
  auto [k, f] = locate(grid_, t);
  if (f == 0.0) return values_.row(k).transpose();
  if (f == 1.0) return values_.row(k + 1).transpose();
  return ((1.0 - f) * values_.row(k) + f * values_.row(k + 1)).transpose();
}

double Signal::sample(double t, int i) const {
  auto [k, f] = locate(grid_, t);
  if (f == 0.0) return values_(k, i);
  if (f == 1.0) return values_(k + 1, i);
  return (1.0 - f) * values_(k, i) + f * values_(k + 1, i);
}

Eigen::VectorXd zero_extend(const Signal& u, double t_query) {
  const auto& g = u.grid();
  if (t_query > g.t_end + 1e-9 * g.h()) throw std::out_of_range("zero_extend: query beyond T");
  if (t_query < g.t_start) return Eigen::VectorXd::Zero(u.dim());
  return u.sample(t_query);
}

double zero_extend(const Signal& u, double t_query, int i) {
  const auto& g = u.grid();
  if (t_query > g.t_end + 1e-9 * g.h()) throw std::out_of_range("zero_extend: query beyond T");
  if (t_query < g.t_start) return 0.0;
  return u.sample(t_query, i);
}

Signal ramp_extend(const Signal& u, double t0) {
  if (!(t0 > 0.0)) throw ConfigError("ramp_extend: t0 must be positive");
  const auto& g = u.grid();
  const double steps = t0 / g.h();
  const long k0 = std::lround(steps);
  if (k0 < 1 || std::abs(steps - static_cast<double>(k0)) > 1e-6)
    throw ConfigError("ramp_extend: t0 must be a whole number of grid steps");
  TimeGrid eg(g.t_start - t0, g.t_end, g.n_steps + static_cast<int>(k0));
  Signal out(eg, u.dim());
  for (int k = 0; k < k0; ++k) {
    const double w = static_cast<double>(k) / static_cast<double>(k0);
    out.values().row(k) = w * u.values().row(0);
  }
  out.values().bottomRows(u.size()) = u.values();
  return out;
}

double sup_distance(const Signal& a, const Signal& b) {
  if (!(a.grid() == b.grid()) || a.dim() != b.dim())
    throw std::invalid_argument("sup_distance: grid or dimension mismatch");
  if (a.size() == 0) return 0.0;
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

double sup_norm(const Signal& a) { return a.size() == 0 ? 0.0 : a.values().cwiseAbs().maxCoeff(); }

double empirical_modulus(const std::vector<Signal>& us, double delta) {
  double best = 0.0;
  for (const auto& u : us) {
    const auto& g = u.grid();
    for (int k = 0; k < g.size(); ++k) {
      const double t = g.time(k);
      for (int i = 0; i < u.dim(); ++i)
        best = std::max(best, std::abs(u(k, i) - zero_extend(u, t - delta, i)));
    }
  }
  return best;
}

double max_slope(const std::vector<Signal>& us) {
  double best = 0.0;
  for (const auto& u : us) {
    if (u.size() < 2) continue;
    const double h = u.grid().h();
    auto d = (u.values().bottomRows(u.size() - 1) - u.values().topRows(u.size() - 1)).cwiseAbs();
    best = std::max(best, d.maxCoeff() / h);
    // slope into the first sample from the zero extension
    best = std::max(best, u.values().row(0).cwiseAbs().maxCoeff() / h);
  }
  return best;
}

double max_abs(const std::vector<Signal>& us) {
  double best = 0.0;
  for (const auto& u : us) best = std::max(best, sup_norm(u));
  return best;
}

InputEnsemble::InputEnsemble(int p_, double T_, int K_max_, double A_amp_, std::uint64_t seed_, int n_steps_)
    : p(p_), T(T_), K_max(K_max_), A_amp(A_amp_), seed(seed_), n_steps(n_steps_) {
  validate();
}

void InputEnsemble::validate() const {
  if (p < 1) throw ConfigError("InputEnsemble: p must be >= 1");
  if (!(T > 0.0)) throw ConfigError("InputEnsemble: T must be positive");
  if (K_max < 1) throw ConfigError("InputEnsemble: K_max must be >= 1");
  if (!(A_amp >= 0.0)) throw ConfigError("InputEnsemble: A_amp must be nonnegative");
  if (n_steps < 2) throw ConfigError("InputEnsemble: n_steps must be >= 2");
}

double InputEnsemble::sup_bound() const {
  double s = 0.0;
  for (int k = 1; k <= K_max; ++k) s += 1.0 / (static_cast<double>(k) * k);
  return A_amp * s;
}

Eigen::MatrixXd InputEnsemble::coefficients(std::uint64_t stream, int index) const {
  Rng rng(derive_seed(seed, stream, static_cast<std::uint64_t>(index)));
  Eigen::MatrixXd a(p, K_max);
  for (int c = 0; c < p; ++c)
    for (int k = 1; k <= K_max; ++k) {
      const double bound = A_amp / (static_cast<double>(k) * k);
      a(c, k - 1) = rng.uniform(-bound, bound);
    }
  return a;
}

Signal InputEnsemble::from_coefficients(const Eigen::MatrixXd& a) const {
  const TimeGrid g = grid();
  Signal u(g, p);
  for (int k = 1; k < g.size(); ++k) {
    const double x = std::numbers::pi * g.time(k) / T;
    for (int m = 1; m <= a.cols(); ++m) {
      const double s = std::sin(m * x);
      for (int c = 0; c < p; ++c) u(k, c) += a(c, m - 1) * s;
    }
  }
  return u;  // row 0 stays exactly zero
}

std::vector<Signal> InputEnsemble::sample(int count, std::uint64_t stream) const {
  if (count < 1) throw ConfigError("sample_ensemble: count must be >= 1");
  std::vector<Signal> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(from_coefficients(coefficients(stream, i)));
  return out;
}

std::vector<Signal> sample_ensemble(const InputEnsemble& ens, int count, std::uint64_t stream) {
  return ens.sample(count, stream);
}

double RampFamily::sup_bound() const { return T * std::max(std::abs(lo), std::abs(hi)); }

Eigen::VectorXd RampFamily::xi(std::uint64_t stream, int index) const {
  Rng rng(derive_seed(seed, stream, static_cast<std::uint64_t>(index)));
  Eigen::VectorXd x(p);
  for (int c = 0; c < p; ++c) x(c) = rng.uniform(lo, hi);
  return x;
}

Signal RampFamily::from_xi(const Eigen::VectorXd& x) const {
  const TimeGrid g = grid();
  Signal u(g, p);
  for (int k = 0; k < g.size(); ++k) u.values().row(k) = g.time(k) * x.transpose();
  return u;
}

std::vector<Signal> RampFamily::sample(int count, std::uint64_t stream) const {
  std::vector<Signal> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(from_xi(xi(stream, i)));
  return out;
}

TimeGrid OffsetFamily::grid() const {
  const TimeGrid g = base.grid();
  const int k0 = static_cast<int>(std::lround(t0 / g.h()));
  return TimeGrid(g.t_start - t0, g.t_end, g.n_steps + k0);
}

std::vector<Signal> OffsetFamily::sample(int count, std::uint64_t stream) const {
  std::vector<Signal> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Signal u = base.from_coefficients(base.coefficients(stream, i));
    Rng rng(derive_seed(base.seed ^ 0x5bd1e995ULL, stream, static_cast<std::uint64_t>(i)));
    for (int c = 0; c < u.dim(); ++c) u.values().col(c).array() += rng.uniform(-c_max, c_max);
    out.push_back(ramp_extend(u, t0));
  }
  return out;
}

std::vector<Signal> MappedFamily::sample(int count, std::uint64_t stream) const {
  if (!cache) {
    auto in = base->sample(count, stream);
    std::vector<Signal> out;
    out.reserve(in.size());
    for (const auto& u : in) out.push_back(map(u));
    return out;
  }
  auto& stored = cache->streams[stream];
  if (static_cast<int>(stored.size()) < count) {
    auto in = base->sample(count, stream);
    for (int i = static_cast<int>(stored.size()); i < count; ++i) stored.push_back(map(in[i]));
  }
  return std::vector<Signal>(stored.begin(), stored.begin() + count);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_signal_csv(std::ostream& os, const Signal& s, const std::vector<std::string>& names) {
  os << 't';
  for (int i = 0; i < s.dim(); ++i)
    os << ',' << (i < static_cast<int>(names.size()) ? names[i] : "x" + std::to_string(i));
  os << '\n';
  for (int k = 0; k < s.size(); ++k) {
    os << format_double(s.grid().time(k));
    for (int i = 0; i < s.dim(); ++i) os << ',' << format_double(s(k, i));
    os << '\n';
  }
}

void write_signal_csv(const std::string& path, const Signal& s, const std::vector<std::string>& names) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  write_signal_csv(f, s, names);
}

Signal read_signal_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  std::string line;
  if (!std::getline(f, line)) throw ConfigError(path + ": empty file");
  const int dim = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (dim < 1) throw ConfigError(path + ": header must be t,x0,...");
  std::vector<double> ts;
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": not a number: " + cell);
      }
    }
    if (static_cast<int>(row.size()) != dim + 1)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": wrong column count");
    ts.push_back(row[0]);
    rows.emplace_back(row.begin() + 1, row.end());
  }
  if (ts.size() < 3) throw ConfigError(path + ": need at least 3 rows");
  TimeGrid g(ts.front(), ts.back(), static_cast<int>(ts.size()) - 1);
  for (std::size_t k = 0; k < ts.size(); ++k)
    if (std::abs(ts[k] - g.time(static_cast<int>(k))) > 1e-9 * std::max(1.0, std::abs(g.t_end)))
      throw ConfigError(path + ": time column is not uniform");
  Signal s(g, dim);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (int i = 0; i < dim; ++i) s(static_cast<int>(k), i) = rows[k][i];
  return s;
}

}  // namespace nosc
