// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace mixk {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Reentrant log-gamma for positive arguments (std::lgamma writes signgam).
double log_gamma(double x);

double log_factorial(int n);
double log_binomial(int n, int k);

double log_add_exp(double a, double b);
double log_sum_exp(std::span<const double> values);

// Streaming log-sum-exp. Terms are rescaled against the running maximum and
// accumulated with Neumaier compensation, so the result does not depend on
// overflow of the individual terms and is stable in summation order.
class LogSumAccumulator {
 public:
  void add(double log_value);
  double value() const;
  bool empty() const { return max_ == kNegInf; }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace mixk
