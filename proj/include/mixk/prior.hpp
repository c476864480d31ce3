// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <span>
#include <string>
#include <vector>

namespace mixk {

enum class PriorFamily { uniform, poisson1, custom };

std::string to_string(PriorFamily family);

// Discrete prior on the number of components, supported on 1..kmax and
// normalized in log domain. log_weights[k - 1] is log pi(k).
struct PriorOnK {
  PriorFamily family = PriorFamily::uniform;
  std::vector<double> log_weights;

  int kmax() const { return static_cast<int>(log_weights.size()); }
  double log_pi(int k) const { return log_weights.at(k - 1); }
};

PriorOnK prior_uniform(int kmax);
// Poisson(1) restricted to 1..kmax: pi(k) proportional to 1/k!.
PriorOnK prior_poisson1(int kmax);
// Unnormalized non-negative weights for k = 1..weights.size().
PriorOnK prior_custom(std::span<const double> weights);

// Parses "uniform", "poisson1" or a comma separated weight list.
PriorOnK parse_prior(const std::string& text, int kmax);

struct SupPropertyCheck {
  bool holds = false;
  double max_relative_violation = 0.0;
  int worst_h = 0;
};

// Checks pi(h) = sup_{h < k <= kmax} pi(k) C(k, h) for every h < kmax and
// reports the largest |pi(h) - sup| / pi(h).
SupPropertyCheck check_sup_property(const PriorOnK& prior, double tolerance = 1e-12);

}  // namespace mixk
