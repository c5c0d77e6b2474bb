#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace nosc {

struct TimeGrid {
  double t_start = 0.0;
  double t_end = 1.0;
  int n_steps = 1000;

  TimeGrid() = default;
  TimeGrid(double t0, double t1, int n);

  double h() const { return (t_end - t_start) / n_steps; }
  double time(int k) const { return t_start + k * h(); }
  double length() const { return t_end - t_start; }
  int size() const { return n_steps + 1; }
  bool operator==(const TimeGrid& o) const {
    return t_start == o.t_start && t_end == o.t_end && n_steps == o.n_steps;
  }
};

// Piecewise-linear vector signal on a uniform grid. values() is
// (grid points) x (dimension), so each channel is a contiguous column.
class Signal {
 public:
  Signal() = default;
  Signal(const TimeGrid& grid, int dim);
  Signal(const TimeGrid& grid, Eigen::MatrixXd values);

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return static_cast<int>(values_.cols()); }
  int size() const { return static_cast<int>(values_.rows()); }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  double operator()(int k, int i) const { return values_(k, i); }
  double& operator()(int k, int i) { return values_(k, i); }
  Eigen::VectorXd at(int k) const { return values_.row(k).transpose(); }

  // Linear interpolation; t must lie in the grid (tiny overshoot tolerated).
  Eigen::VectorXd sample(double t) const;
  double sample(double t, int i) const;

  bool all_finite() const { return values_.allFinite(); }

 private:
  TimeGrid grid_;
  Eigen::MatrixXd values_;
};

// Zero before the grid start, linear interpolation inside; beyond t_end throws.
Eigen::VectorXd zero_extend(const Signal& u, double t_query);
double zero_extend(const Signal& u, double t_query, int i);

// Warm-up extension onto [t_start - t0, t_end]: linear ramp from 0 to u(t_start).
// t0 must be a whole number of grid steps so the original samples are kept bitwise.
Signal ramp_extend(const Signal& u, double t0);

double sup_distance(const Signal& a, const Signal& b);
double sup_norm(const Signal& a);

// Largest |u(t) - u(t - delta)| over grid t (zero-extended).
double empirical_modulus(const std::vector<Signal>& us, double delta);
// Largest finite-difference slope over all grid intervals.
double max_slope(const std::vector<Signal>& us);
double max_abs(const std::vector<Signal>& us);

// Sampler for a compact input family K.
class InputFamily {
 public:
  virtual ~InputFamily() = default;
  // Deterministic in (seed of the family, stream, count); sample i of a stream
  // does not depend on count.
  virtual std::vector<Signal> sample(int count, std::uint64_t stream) const = 0;
  virtual double sup_bound() const = 0;
  virtual TimeGrid grid() const = 0;
  virtual int dim() const = 0;
};

// Random Fourier-sine series u(t) = sum_k a_k sin(k pi t / T), a_k ~ U[-A/k^2, A/k^2].
struct InputEnsemble : InputFamily {
  int p = 1;
  double T = 1.0;
  int K_max = 8;
  double A_amp = 1.0;
  std::uint64_t seed = 0;
  int n_steps = 1000;

  InputEnsemble() = default;
  InputEnsemble(int p, double T, int K_max, double A_amp, std::uint64_t seed, int n_steps = 1000);

  std::vector<Signal> sample(int count, std::uint64_t stream) const override;
  double sup_bound() const override;
  TimeGrid grid() const override { return TimeGrid(0.0, T, n_steps); }
  int dim() const override { return p; }

  // Coefficients a_k (row per component) of sample index i in a stream.
  Eigen::MatrixXd coefficients(std::uint64_t stream, int index) const;
  Signal from_coefficients(const Eigen::MatrixXd& a) const;
  void validate() const;
};

std::vector<Signal> sample_ensemble(const InputEnsemble& ens, int count, std::uint64_t stream = 0);

// u_xi(t) = t * xi with xi uniform in the box [lo, hi]^p.
struct RampFamily : InputFamily {
  int p = 1;
  double T = 2.0;
  double lo = -1.0;
  double hi = 1.0;
  std::uint64_t seed = 0;
  int n_steps = 1000;

  std::vector<Signal> sample(int count, std::uint64_t stream) const override;
  double sup_bound() const override;
  TimeGrid grid() const override { return TimeGrid(0.0, T, n_steps); }
  int dim() const override { return p; }

  Eigen::VectorXd xi(std::uint64_t stream, int index) const;
  Signal from_xi(const Eigen::VectorXd& xi) const;
};

// Fourier-sine series plus a constant offset c ~ U[-c_max, c_max] (so u(0) != 0),
// ramp-extended by t0 for the warm-up phase.
struct OffsetFamily : InputFamily {
  InputEnsemble base;
  double c_max = 0.25;
  double t0 = 0.1;

  std::vector<Signal> sample(int count, std::uint64_t stream) const override;
  double sup_bound() const override { return base.sup_bound() + c_max; }
  TimeGrid grid() const override;
  int dim() const override { return base.p; }
};

// Pushes another family through a fixed map (e.g. layer trajectories).
// With a cache, mapped samples are kept per stream (maps can be expensive
// network simulations that several stages reuse).
struct MappedFamily : InputFamily {
  struct Cache {
    std::map<std::uint64_t, std::vector<Signal>> streams;
  };
  std::shared_ptr<const InputFamily> base;
  std::function<Signal(const Signal&)> map;
  double bound = 0.0;
  int out_dim = 1;
  std::shared_ptr<Cache> cache;

  std::vector<Signal> sample(int count, std::uint64_t stream) const override;
  double sup_bound() const override { return bound; }
  TimeGrid grid() const override { return base->grid(); }
  int dim() const override { return out_dim; }
};

// CSV helpers: 17 significant digits, header t,x0,...
std::string format_double(double x);
void write_signal_csv(std::ostream& os, const Signal& s, const std::vector<std::string>& names = {});
void write_signal_csv(const std::string& path, const Signal& s, const std::vector<std::string>& names = {});
Signal read_signal_csv(const std::string& path);

}  // namespace nosc
