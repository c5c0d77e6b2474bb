#include "nosc/activation.hpp"

#include "nosc/errors.hpp"

#include <cmath>
#include <numbers>

namespace nosc {

Activation::Activation(ActivationKind kind) : kind_(kind) {
  // sanity: sigma(0)=0 and sigma'(0)=1
  const double d = 1e-6;
  const double slope = ((*this)(d) - (*this)(-d)) / (2 * d);
  if ((*this)(0.0) != 0.0 || std::abs(derivative(0.0) - 1.0) > 1e-12 || std::abs(slope - 1.0) > 1e-9)
    throw ConfigError("activation violates sigma(0)=0, sigma'(0)=1");
}

std::string Activation::name() const {
  switch (kind_) {
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::sine: return "sine";
    case ActivationKind::identity: return "identity";
  }
  return "tanh";
}

Activation Activation::from_name(const std::string& name) {
  if (name == "tanh") return Activation(ActivationKind::tanh);
  if (name == "sine" || name == "sin") return Activation(ActivationKind::sine);
  if (name == "identity" || name == "linear") return Activation(ActivationKind::identity);
  throw ConfigError("unknown activation '" + name + "'");
}

double Activation::derivative(double x) const {
  switch (kind_) {
    case ActivationKind::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::sine: return std::cos(x);
    case ActivationKind::identity: return 1.0;
  }
  return 1.0;
}

double Activation::antiderivative(double x) const {
  switch (kind_) {
    case ActivationKind::tanh: {
      const double a = std::abs(x);
      return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
    }
    case ActivationKind::sine: return 1.0 - std::cos(x);
    case ActivationKind::identity: return 0.5 * x * x;
  }
  return 0.0;
}

double Activation::inverse(double y) const {
  switch (kind_) {
    case ActivationKind::tanh:
      if (!(std::abs(y) < 1.0)) throw ConfigError("tanh inverse out of range");
      return std::atanh(y);
    case ActivationKind::sine:
      if (!(std::abs(y) <= 1.0)) throw ConfigError("sine inverse out of range");
      return std::asin(y);
    case ActivationKind::identity: return y;
  }
  return y;
}

}  // namespace nosc
