// Apache License, Version 2.0, refer to LICENSE.txt

#include "mixk/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mixk/logmath.hpp"

namespace mixk {

namespace {

void check_size(int n, int kmax) {
  if (n < 1) throw std::invalid_argument("enumeration: empty data");
  if (kmax < 1) throw std::invalid_argument("enumeration: kmax must be >= 1");
  if (std::pow(static_cast<double>(kmax), n) > kMaxEnumerationTerms)
    throw std::length_error("enumeration: instance too large (kmax^n = " +
                            std::to_string(std::pow(static_cast<double>(kmax), n)) + ")");
}

// Visits every labeling in {0..k-1}^n in odometer order, keeping counts and
// statistics up to date by moving single observations.
template <typename Visit>
void for_each_allocation(std::span<const double> y, int k, Visit&& visit) {
  const int n = static_cast<int>(y.size());
  std::vector<int> g(n, 0);
  std::vector<int> counts(k, 0);
  std::vector<SufficientStats> stats(k);
  counts[0] = n;
  for (double v : y) stats[0].add(v);
  while (true) {
    visit(std::span<const int>(counts), std::span<const SufficientStats>(stats));
    int pos = n - 1;
    while (pos >= 0 && g[pos] == k - 1) {
      stats[k - 1].remove(y[pos]);
      --counts[k - 1];
      stats[0].add(y[pos]);
      ++counts[0];
      g[pos] = 0;
      --pos;
    }
    if (pos < 0) return;
    stats[g[pos]].remove(y[pos]);
    --counts[g[pos]];
    ++g[pos];
    stats[g[pos]].add(y[pos]);
    ++counts[g[pos]];
  }
}

std::vector<double> centered(std::span<const double> data, double center) {
  std::vector<double> y(data.begin(), data.end());
  for (double& v : y) v -= center;
  return y;
}

double log_data_marginal(std::span<const SufficientStats> stats, double center,
                         const ModelSpec& spec) {
  double out = 0.0;
  for (const auto& s : stats) out += log_component_marginal(s, center, spec);
  return out;
}

}  // namespace

EnumerationResult enumerate_exact(std::span<const double> data, int kmax, const ModelSpec& spec) {
  spec.validate();
  const int n = static_cast<int>(data.size());
  check_size(n, kmax);
  const int hmax = std::min(kmax, n);
  const std::vector<double> y = centered(data, spec.mu);

  std::vector<LogSumAccumulator> f(kmax), fstar(kmax), fdagger(hmax);
  std::vector<std::vector<LogSumAccumulator>> star(kmax), tilde(kmax);
  for (int k = 1; k <= kmax; ++k) {
    star[k - 1].resize(k);
    tilde[k - 1].resize(std::min(k, n));
  }

  for_each_allocation(y, kmax, [&](std::span<const int> counts, std::span<const SufficientStats> stats) {
    const OccupancyPattern p = occupancy_pattern(counts);
    const double loglik = log_data_marginal(stats, spec.mu, spec);
    for (int k = p.t; k <= kmax; ++k) {
      const double term = log_f_g_given_k(counts.first(k), spec.alpha) + loglik;
      f[k - 1].add(term);
      star[k - 1][p.t - 1].add(term);
      tilde[k - 1][p.h - 1].add(term);
      if (k == p.t) {
        fstar[p.t - 1].add(term);
        if (p.no_empty()) fdagger[p.h - 1].add(term);
      }
    }
  });

  EnumerationResult r;
  r.n = n;
  r.kmax = kmax;
  for (int k = 1; k <= kmax; ++k) {
    r.log_f.push_back(f[k - 1].value());
    r.log_fstar.push_back(fstar[k - 1].value());
    std::vector<double> ps, pt;
    for (const auto& a : star[k - 1]) ps.push_back(std::exp(a.value() - r.log_f.back()));
    for (const auto& a : tilde[k - 1]) pt.push_back(std::exp(a.value() - r.log_f.back()));
    r.prob_star.push_back(std::move(ps));
    r.prob_tilde.push_back(std::move(pt));
  }
  for (int h = 1; h <= hmax; ++h) r.log_fdagger.push_back(fdagger[h - 1].value());
  return r;
}

std::vector<double> exact_allocation_posterior(std::span<const double> data, const ModelSpec& spec) {
  spec.validate();
  const int n = static_cast<int>(data.size());
  check_size(n, spec.k);
  const std::vector<double> y = centered(data, spec.mu);
  std::vector<double> logp;
  logp.reserve(static_cast<std::size_t>(std::pow(spec.k, n)));
  for_each_allocation(y, spec.k, [&](std::span<const int> counts, std::span<const SufficientStats> stats) {
    logp.push_back(log_f_g_given_k(counts, spec.alpha) + log_data_marginal(stats, spec.mu, spec));
  });
  const double z = log_sum_exp(logp);
  for (double& v : logp) v = std::exp(v - z);
  return logp;
}

std::vector<double> exact_posterior_k(std::span<const double> data, int kmax, const ModelSpec& spec,
                                      const PriorOnK& prior) {
  if (prior.kmax() != kmax) throw std::invalid_argument("exact_posterior_k: prior kmax mismatch");
  const EnumerationResult e = enumerate_exact(data, kmax, spec);
  std::vector<double> lp(kmax);
  for (int k = 1; k <= kmax; ++k) lp[k - 1] = e.log_f[k - 1] + prior.log_pi(k);
  const double z = log_sum_exp(lp);
  for (double& v : lp) v = std::exp(v - z);
  return lp;
}

QuadratureResult quad_component_marginal(std::span<const double> data, const ModelSpec& spec,
                                         double tolerance) {
  spec.validate();
  if (data.empty()) return {0.0, 0.0, true};
  using boost::math::quadrature::gauss_kronrod;
  const double m = static_cast<double>(data.size());
  const double inf = std::numeric_limits<double>::infinity();
  const double log_2pi = std::log(2.0 * std::numbers::pi);

  // Log joint density of (x, mean, precision).
  auto log_joint = [&](double mean, double r) {
    double ss = 0.0;
    for (double x : data) ss += (x - mean) * (x - mean);
    const double lik = 0.5 * m * (std::log(r) - log_2pi) - 0.5 * r * ss;
    const double tr = spec.tau * r;
    const double prior_mean = 0.5 * (std::log(tr) - log_2pi) - 0.5 * tr * (mean - spec.mu) * (mean - spec.mu);
    const double prior_r = spec.gamma * std::log(spec.delta) - log_gamma(spec.gamma) +
                           (spec.gamma - 1.0) * std::log(r) - spec.delta * r;
    return lik + prior_mean + prior_r;
  };

  // Centering: the conditional mode of the mean, and a rough mode of r.
  double sum = 0.0;
  for (double x : data) sum += x;
  const double mean_hat = (spec.tau * spec.mu + sum) / (spec.tau + m);
  double ss_hat = spec.tau * (mean_hat - spec.mu) * (mean_hat - spec.mu);
  for (double x : data) ss_hat += (x - mean_hat) * (x - mean_hat);
  const double v_hat = std::log((spec.gamma + 0.5 * m) / (spec.delta + 0.5 * ss_hat));
  const double reference = log_joint(mean_hat, std::exp(v_hat)) + v_hat;

  // Largest absolute error of an inner integral, compared with the total at the end.
  double inner_error_max = 0.0;
  auto outer = [&](double v) {
    const double r = std::exp(v);
    if (!(r > 0.0) || !std::isfinite(r)) return 0.0;
    const double scale = 1.0 / std::sqrt(r * (spec.tau + m));
    auto inner = [&](double z) {
      const double e = log_joint(mean_hat + scale * z, r) + v - reference;
      return std::isnan(e) ? 0.0 : std::exp(e);
    };
    double err = 0.0;
    const double value = gauss_kronrod<double, 61>::integrate(inner, -inf, inf, 15, tolerance, &err);
    inner_error_max = std::max(inner_error_max, scale * err);
    return scale * value;
  };
  double err = 0.0;
  const double total = gauss_kronrod<double, 61>::integrate(outer, -inf, inf, 15, tolerance, &err);
  QuadratureResult out;
  out.log_value = reference + std::log(total);
  out.relative_error = std::max(err, inner_error_max) / total;
  out.converged = std::isfinite(out.log_value) && out.relative_error < 1e-8;
  return out;
}

}  // namespace mixk
