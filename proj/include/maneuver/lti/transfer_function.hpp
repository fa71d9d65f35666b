#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "maneuver/error.hpp"

namespace maneuver::lti {

class NotInvertible : public Error {
 public:
  using Error::Error;
};

class IllPosedLoop : public Error {
 public:
  using Error::Error;
};

class ImproperSystem : public Error {
 public:
  using Error::Error;
};

class UnstableLoop : public Error {
 public:
  using Error::Error;
};

// Real rational function in the complex frequency variable. Coefficients are
// ascending powers. Construction normalizes: trailing zero (highest-power)
// coefficients are stripped and everything is scaled so the denominator's
// leading coefficient is 1. Common factors are deliberately NOT cancelled;
// doing that on floating-point coefficients is numerically fragile.
struct TransferFunction {
  std::vector<double> numerator{0.0};
  std::vector<double> denominator{1.0};

  TransferFunction() = default;
  TransferFunction(std::vector<double> num, std::vector<double> den);

  static TransferFunction constant(double value);

  int numerator_degree() const { return static_cast<int>(numerator.size()) - 1; }
  int denominator_degree() const { return static_cast<int>(denominator.size()) - 1; }
  bool proper() const { return numerator_degree() <= denominator_degree(); }
  bool zero_numerator() const;

  std::complex<double> evaluate(std::complex<double> s) const;
  double evaluate_real(double s) const;

  std::string describe() const;  // e.g. "(1) / (1 + 1s)"
};

std::vector<double> poly_add(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> poly_scale(const std::vector<double>& a, double factor);
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b);

TransferFunction add(const TransferFunction& a, const TransferFunction& b);
TransferFunction multiply(const TransferFunction& a, const TransferFunction& b);
TransferFunction invert(const TransferFunction& tf);  // NotInvertible on zero numerator
TransferFunction negate(const TransferFunction& tf);

}  // namespace maneuver::lti
