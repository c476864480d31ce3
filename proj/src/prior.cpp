// Apache License, Version 2.0, refer to LICENSE.txt

#include "mixk/prior.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mixk/logmath.hpp"

namespace mixk {

namespace {

void normalize(std::vector<double>& log_w) {
  const double z = log_sum_exp(log_w);
  if (!std::isfinite(z)) throw std::invalid_argument("prior: weights do not normalize");
  for (double& v : log_w) v -= z;
}

void require_kmax(int kmax) {
  if (kmax < 1) throw std::invalid_argument("prior: kmax must be >= 1");
}

}  // namespace

std::string to_string(PriorFamily family) {
  switch (family) {
    case PriorFamily::uniform: return "uniform";
    case PriorFamily::poisson1: return "poisson1";
    case PriorFamily::custom: return "custom";
  }
  return "unknown";
}

PriorOnK prior_uniform(int kmax) {
  require_kmax(kmax);
  PriorOnK p{PriorFamily::uniform, std::vector<double>(kmax, -std::log(static_cast<double>(kmax)))};
  return p;
}

PriorOnK prior_poisson1(int kmax) {
  require_kmax(kmax);
  PriorOnK p{PriorFamily::poisson1, std::vector<double>(kmax)};
  for (int k = 1; k <= kmax; ++k) p.log_weights[k - 1] = -log_factorial(k);
  normalize(p.log_weights);
  return p;
}

PriorOnK prior_custom(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("prior: no weights given");
  PriorOnK p{PriorFamily::custom, std::vector<double>(weights.size())};
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
      throw std::invalid_argument("prior: weights must be finite and non-negative");
    p.log_weights[i] = weights[i] > 0.0 ? std::log(weights[i]) : kNegInf;
  }
  normalize(p.log_weights);
  return p;
}

PriorOnK parse_prior(const std::string& text, int kmax) {
  if (text == "uniform") return prior_uniform(kmax);
  if (text == "poisson1" || text == "poi1") return prior_poisson1(kmax);
  std::vector<double> w;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size())
      throw std::invalid_argument("prior: expected 'uniform', 'poisson1' or a weight list, got '" +
                                  text + "'");
    w.push_back(v);
  }
  if (static_cast<int>(w.size()) != kmax)
    throw std::invalid_argument("prior: weight list length must equal kmax");
  return prior_custom(w);
}

SupPropertyCheck check_sup_property(const PriorOnK& prior, double tolerance) {
  const int kmax = prior.kmax();
  if (kmax < 2) throw std::invalid_argument("check_sup_property: kmax must be >= 2");
  SupPropertyCheck out;
  for (int h = 1; h < kmax; ++h) {
    double sup = kNegInf;
    for (int k = h + 1; k <= kmax; ++k) sup = std::max(sup, prior.log_pi(k) + log_binomial(k, h));
    const double lp = prior.log_pi(h);
    double violation = 0.0;
    if (lp == kNegInf) {
      violation = (sup == kNegInf) ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      violation = std::fabs(std::expm1(sup - lp));
    }
    if (violation > out.max_relative_violation || out.worst_h == 0) {
      out.max_relative_violation = violation;
      out.worst_h = h;
    }
  }
  out.holds = out.max_relative_violation < tolerance;
  return out;
}

}  // namespace mixk
