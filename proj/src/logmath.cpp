// Apache License, Version 2.0, refer to LICENSE.txt

#include "mixk/logmath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mixk {

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

double log_factorial(int n) {
  if (n < 0) throw std::domain_error("log_factorial: negative argument");
  return log_gamma(n + 1.0);
}

double log_binomial(int n, int k) {
  if (k < 0 || k > n) return kNegInf;
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double log_sum_exp(std::span<const double> values) {
  LogSumAccumulator acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

void LogSumAccumulator::add(double log_value) {
  if (log_value == kNegInf) return;
  if (std::isnan(log_value)) throw std::domain_error("LogSumAccumulator: NaN term");
  double term = 1.0;
  if (log_value > max_) {
    const double scale = (max_ == kNegInf) ? 0.0 : std::exp(max_ - log_value);
    sum_ *= scale;
    compensation_ *= scale;
    max_ = log_value;
  } else {
    term = std::exp(log_value - max_);
  }
  const double t = sum_ + term;
  if (std::fabs(sum_) >= std::fabs(term)) {
    compensation_ += (sum_ - t) + term;
  } else {
    compensation_ += (term - t) + sum_;
  }
  sum_ = t;
}

double LogSumAccumulator::value() const {
  if (max_ == kNegInf) return kNegInf;
  return max_ + std::log(sum_ + compensation_);
}

}  // namespace mixk
