#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace qnet {

/// Scalar kernel g(x) on x >= 0, with exact first and second derivatives.
/// All families are normalized so g(0) = 0 and are nonnegative and
/// nondecreasing on the domain.
///
///   power(a):   g(x) = x^{1+a}/(1+a),            g'(x) = x^a
///   log:        g(x) = (x+1)(log(x+1)-1) + 1,    g'(x) = log(1+x)
///   lpf(theta): g(x) = x + theta (e^{-x/theta}-1), g'(x) = 1 - e^{-x/theta}
///   identity:   g(x) = x
class ScalarKernel {
 public:
  enum class Family { Power, Log, Lpf, Identity };

  static ScalarKernel power(double alpha) {
    if (alpha <= 0.0)
      throw std::invalid_argument("power kernel: alpha must be > 0");
    return ScalarKernel(Family::Power, alpha);
  }
  static ScalarKernel log() { return ScalarKernel(Family::Log, 0.0); }
  static ScalarKernel lpf(double theta) {
    if (theta <= 0.0)
      throw std::invalid_argument("lpf kernel: theta must be > 0");
    return ScalarKernel(Family::Lpf, theta);
  }
  static ScalarKernel identity() {
    return ScalarKernel(Family::Identity, 0.0);
  }

  Family family() const { return family_; }
  double param() const { return param_; }

  double g(double x) const {
    switch (family_) {
      case Family::Power:
        if (param_ == 1.0) return 0.5 * x * x;  // hot path in simulations
        return std::pow(x, 1.0 + param_) / (1.0 + param_);
      case Family::Log:
        return (x + 1.0) * (std::log1p(x) - 1.0) + 1.0;
      case Family::Lpf:
        return x + param_ * (std::exp(-x / param_) - 1.0);
      case Family::Identity:
        return x;
    }
    return 0.0;
  }

  double gp(double x) const {
    switch (family_) {
      case Family::Power:
        if (param_ == 1.0) return x;
        if (param_ == 2.0) return x * x;
        return std::pow(x, param_);
      case Family::Log:
        return std::log1p(x);
      case Family::Lpf:
        return 1.0 - std::exp(-x / param_);
      case Family::Identity:
        return 1.0;
    }
    return 0.0;
  }

  double gpp(double x) const {
    switch (family_) {
      case Family::Power:
        return param_ * std::pow(x, param_ - 1.0);  // infinite at 0 for a<1
      case Family::Log:
        return 1.0 / (1.0 + x);
      case Family::Lpf:
        return std::exp(-x / param_) / param_;
      case Family::Identity:
        return 0.0;
    }
    return 0.0;
  }

  bool derivative_vanishes_at_zero() const {
    return family_ != Family::Identity;
  }

  /// Asymptotic polynomial degree, used to declare the smoothness order h0.
  double degree() const {
    switch (family_) {
      case Family::Power:
        return 1.0 + param_;
      case Family::Log:
      case Family::Lpf:
      case Family::Identity:
        return 1.0;
    }
    return 1.0;
  }

  /// Superlinear growth (g(x)/x -> infinity), needed for asympG when the
  /// kernel is used alone in a separable potential.
  bool superlinear() const { return family_ == Family::Power || family_ == Family::Log; }

  std::string name() const {
    switch (family_) {
      case Family::Power:
        return "pow(" + std::to_string(param_) + ")";
      case Family::Log:
        return "log";
      case Family::Lpf:
        return "lpf(" + std::to_string(param_) + ")";
      case Family::Identity:
        return "identity";
    }
    return "?";
  }

 private:
  ScalarKernel(Family f, double p) : family_(f), param_(p) {}
  Family family_;
  double param_;
};

}  // namespace qnet
