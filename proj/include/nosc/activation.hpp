#pragma once

#include <cmath>
#include <string>

namespace nosc {

enum class ActivationKind { tanh, sine, identity };

// sigma with sigma(0)=0, sigma'(0)=1. Calibrated oscillators run at tiny
// arguments, so small |x| goes through the Taylor polynomial (exact to roundoff
// below the threshold, and several times cheaper than libm).
class Activation {
 public:
  explicit Activation(ActivationKind kind = ActivationKind::tanh);

  ActivationKind kind() const { return kind_; }
  std::string name() const;
  static Activation from_name(const std::string& name);

  double operator()(double x) const {
    switch (kind_) {
      case ActivationKind::tanh:
        if (std::abs(x) < kSmall) {
          const double x2 = x * x;
          return x * (1.0 + x2 * (-1.0 / 3.0 + x2 * (2.0 / 15.0 + x2 * (-17.0 / 315.0))));
        }
        return std::tanh(x);
      case ActivationKind::sine:
        if (std::abs(x) < kSmall) {
          const double x2 = x * x;
          return x * (1.0 + x2 * (-1.0 / 6.0 + x2 * (1.0 / 120.0 + x2 * (-1.0 / 5040.0))));
        }
        return std::sin(x);
      case ActivationKind::identity:
        return x;
    }
    return x;
  }

  double derivative(double x) const;
  // Antiderivative with value 0 at 0: log cosh, 1 - cos, x^2/2.
  double antiderivative(double x) const;
  // Inverse on a neighbourhood of 0 (used for constant-acceleration neurons).
  double inverse(double y) const;
  // sup |sigma'| over the real line.
  double derivative_bound() const { return 1.0; }

 private:
  static constexpr double kSmall = 0x1.0p-7;
  ActivationKind kind_;
};

}  // namespace nosc
