// Apache License, Version 2.0, refer to LICENSE.txt
//
// Brute-force ground truth for tiny instances: exhaustive enumeration of the
// allocation space and 2-D quadrature of the Normal-Gamma component marginal.

#pragma once

#include <span>
#include <vector>

#include "mixk/model.hpp"
#include "mixk/prior.hpp"

namespace mixk {

inline constexpr double kMaxEnumerationTerms = 1e7;

// Vectors are indexed by k - 1, t - 1 and h - 1.
struct EnumerationResult {
  int n = 0;
  int kmax = 0;
  std::vector<double> log_f;        // f_k, k = 1..kmax
  std::vector<double> log_fstar;    // f*_t, t = 1..kmax
  std::vector<double> log_fdagger;  // f+_h, h = 1..min(kmax, n)
  std::vector<std::vector<double>> prob_star;   // Pr[G*_t | k, x], t = 1..k
  std::vector<std::vector<double>> prob_tilde;  // Pr[G~^k_h | k, x], h = 1..min(k, n)
};

// Sums over every allocation in G_kmax (kmax^n terms, odometer order with
// incremental statistics). Throws std::length_error above
// kMaxEnumerationTerms terms.
EnumerationResult enumerate_exact(std::span<const double> data, int kmax, const ModelSpec& spec);

// Posterior over all k^n allocations with k = spec.k, indexed by the base-k
// number whose most significant digit is the label of observation 0.
std::vector<double> exact_allocation_posterior(std::span<const double> data, const ModelSpec& spec);

std::vector<double> exact_posterior_k(std::span<const double> data, int kmax, const ModelSpec& spec,
                                      const PriorOnK& prior);

struct QuadratureResult {
  double log_value = 0.0;
  double relative_error = 0.0;  // estimate reported by the integrator
  bool converged = false;
};

// log of the integral over (m, r) of prod_i N(x_i | m, 1/r) N(m | mu, 1/(tau r))
// Ga(r | gamma, delta), by nested adaptive Gauss-Kronrod quadrature over
// v = log r and a rescaled m. Intended for at most a handful of observations.
QuadratureResult quad_component_marginal(std::span<const double> data, const ModelSpec& spec,
                                         double tolerance = 1e-12);

}  // namespace mixk
