// Apache License, Version 2.0, refer to LICENSE.txt
//
// Reference values and independent brute-force oracles shared by the unit
// and acceptance tests. Nothing here calls into the library's closed forms.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "mixk/model.hpp"

namespace mixk::testing {

// Ratios f_k / f_9 (k = 9..15), hypothetical data with n = 80 and nine groups.
inline constexpr std::array<double, 7> kTable1{1.0, 1.011, 0.618, 0.299, 0.127, 0.050, 0.018};
// Same without the binomial term, k = 10..12.
inline constexpr std::array<double, 3> kTable3{0.10112, 0.01124, 0.00136};
// Posterior ratios pi(k|x) / pi(9|x) under Poi(1), k = 10..12.
inline constexpr std::array<double, 3> kTable5{0.10112, 0.00562, 0.00023};

inline constexpr std::array<int, 4> kBoundSizes{20, 50, 100, 500};
// Bounds on pi(k|x), k = 1..10, uniform prior on 1..50, alpha = 1.
inline constexpr std::array<std::array<double, 10>, 4> kTable2{{
    {0.9000, 0.7286, 0.5299, 0.3456, 0.2880, 0.2419, 0.1954, 0.1756, 0.1505, 0.1335},
    {0.9600, 0.8847, 0.7826, 0.6645, 0.5414, 0.4233, 0.3175, 0.3119, 0.2835, 0.2402},
    {0.9800, 0.9412, 0.8858, 0.8170, 0.7385, 0.6541, 0.5677, 0.4828, 0.4023, 0.3322},
    {0.9960, 0.9880, 0.9762, 0.9607, 0.9417, 0.9193, 0.8938, 0.8656, 0.8350, 0.8022},
}};
// Same with pi(k) proportional to 1/k!.
inline constexpr std::array<std::array<double, 10>, 4> kTable4{{
    {0.9525, 0.9114, 0.8756, 0.8441, 0.8162, 0.7913, 0.7690, 0.7488, 0.7306, 0.7140},
    {0.9804, 0.9619, 0.9445, 0.9280, 0.9124, 0.8976, 0.8836, 0.8703, 0.8576, 0.8455},
    {0.9901, 0.9805, 0.9712, 0.9621, 0.9533, 0.9447, 0.9364, 0.9283, 0.9204, 0.9128},
    {0.9980, 0.9960, 0.9940, 0.9921, 0.9901, 0.9882, 0.9863, 0.9844, 0.9825, 0.9806},
}};

// Fixed toy data sets of sizes 5, 6 and 8.
inline std::vector<double> toy5() { return {-1.4, -0.9, -1.1, 1.2, 0.7}; }
inline std::vector<double> toy6() { return {0.2, 2.9, 3.4, -2.2, -1.7, 3.1}; }
inline std::vector<double> toy8() { return {10.1, 11.8, 9.4, 14.9, 15.6, 15.2, 20.3, 12.0}; }
inline ModelSpec toy_spec() { return ModelSpec{1, 1.0, 0.0, 0.5, 2.0, 0.5}; }
inline ModelSpec toy8_spec() { return ModelSpec{1, 1.0, 14.0, 0.1, 2.0, 1.5}; }

inline double lse(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline double lbinom(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double la_kt(int k, int t, double alpha, int n) {
  return std::lgamma(k * alpha) - std::lgamma(k * alpha + n) + std::lgamma(t * alpha + n) -
         std::lgamma(t * alpha);
}

// Normal-Gamma marginal in its textbook form, with the sample mean and the
// within-sample sum of squares computed directly.
inline double naive_log_marginal(const std::vector<double>& xs, const ModelSpec& s) {
  const double m = static_cast<double>(xs.size());
  if (xs.empty()) return 0.0;
  const double xbar = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  double within = 0.0;
  for (double x : xs) within += (x - xbar) * (x - xbar);
  const double d = s.delta + 0.5 * (within + s.tau * m * (xbar - s.mu) * (xbar - s.mu) / (s.tau + m));
  return -0.5 * m * std::log(2.0 * M_PI) + 0.5 * std::log(s.tau / (s.tau + m)) +
         std::lgamma(s.gamma + 0.5 * m) - std::lgamma(s.gamma) + s.gamma * std::log(s.delta) -
         (s.gamma + 0.5 * m) * std::log(d);
}

inline double naive_log_prior_g(const std::vector<int>& counts, double alpha) {
  const int k = static_cast<int>(counts.size());
  const int n = std::accumulate(counts.begin(), counts.end(), 0);
  double v = std::lgamma(k * alpha) - std::lgamma(k * alpha + n);
  for (int c : counts) v += std::lgamma(alpha + c) - std::lgamma(alpha);
  return v;
}

// Calls visit(labels) for every labeling in {0..k-1}^n, recursively.
inline void for_each_labeling(int n, int k, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> g(n, 0);
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      visit(g);
      return;
    }
    for (int j = 0; j < k; ++j) {
      g[i] = j;
      rec(i + 1);
    }
  };
  rec(0);
}

// log f(g | k) + log f(x | k, g), recomputed from scratch.
inline double naive_log_joint(const std::vector<double>& x, const std::vector<int>& g, int k,
                              const ModelSpec& s) {
  std::vector<std::vector<double>> groups(k);
  std::vector<int> counts(k, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    groups[g[i]].push_back(x[i]);
    ++counts[g[i]];
  }
  double v = naive_log_prior_g(counts, s.alpha);
  for (const auto& grp : groups) v += naive_log_marginal(grp, s);
  return v;
}

struct NaiveEnumeration {
  std::vector<double> log_f, log_fstar, log_fdagger;
  std::vector<std::vector<double>> prob_star, prob_tilde;
};

inline NaiveEnumeration naive_enumerate(const std::vector<double>& x, int kmax, const ModelSpec& s) {
  const int n = static_cast<int>(x.size());
  NaiveEnumeration r;
  std::vector<std::vector<double>> fstar_terms(kmax), fdagger_terms(std::min(n, kmax));
  for (int k = 1; k <= kmax; ++k) {
    std::vector<double> all;
    std::vector<std::vector<double>> by_t(k), by_h(std::min(k, n));
    for_each_labeling(n, k, [&](const std::vector<int>& g) {
      const double v = naive_log_joint(x, g, k, s);
      std::vector<int> c(k, 0);
      for (int j : g) ++c[j];
      int h = 0, t = 0;
      for (int j = 0; j < k; ++j)
        if (c[j] > 0) {
          ++h;
          t = j + 1;
        }
      all.push_back(v);
      by_t[t - 1].push_back(v);
      by_h[h - 1].push_back(v);
      if (t == k) fstar_terms[k - 1].push_back(v);
      if (t == k && h == k) fdagger_terms[k - 1].push_back(v);
    });
    const double lf = lse(all);
    r.log_f.push_back(lf);
    std::vector<double> ps, pt;
    for (auto& v : by_t) ps.push_back(v.empty() ? 0.0 : std::exp(lse(v) - lf));
    for (auto& v : by_h) pt.push_back(v.empty() ? 0.0 : std::exp(lse(v) - lf));
    r.prob_star.push_back(ps);
    r.prob_tilde.push_back(pt);
  }
  for (auto& v : fstar_terms) r.log_fstar.push_back(lse(v));
  for (auto& v : fdagger_terms) r.log_fdagger.push_back(lse(v));
  return r;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    s += std::fabs(x - y);
  }
  return 0.5 * s;
}

inline double rel_gap(double log_a, double log_b) { return std::fabs(std::expm1(log_a - log_b)); }

}  // namespace mixk::testing
