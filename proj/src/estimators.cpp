// Apache License, Version 2.0, refer to LICENSE.txt

#include "mixk/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixk/logmath.hpp"
#include "mixk/model.hpp"

namespace mixk {

namespace {

// Per-chain partition frequencies with their variances, either from a whole
// chain or from one batch of it.
struct Frequencies {
  int k = 0;
  double draws = 0.0;
  std::vector<double> star;
  std::vector<double> tilde;
  std::vector<double> var_star;
  std::vector<double> var_tilde;
};

Frequencies from_summary(const ChainSummary& s) {
  Frequencies f{s.k, static_cast<double>(s.kept), s.visits_star, s.visits_tilde, {}, {}};
  for (double se : s.se_star) f.var_star.push_back(se * se);
  for (double se : s.se_tilde) f.var_tilde.push_back(se * se);
  return f;
}

Frequencies from_slice(const ChainSummary& s, std::size_t begin, std::size_t end) {
  Frequencies f;
  f.k = s.k;
  f.draws = static_cast<double>(end - begin);
  f.star.assign(s.k, 0.0);
  f.tilde.assign(std::min(s.k, s.n), 0.0);
  for (std::size_t i = begin; i < end; ++i) {
    f.star[s.pattern_trace[i].t - 1] += 1.0;
    f.tilde[s.pattern_trace[i].h - 1] += 1.0;
  }
  for (double& v : f.star) v /= f.draws;
  for (double& v : f.tilde) v /= f.draws;
  // Within a batch there is no autocorrelation estimate; use the binomial one.
  for (double p : f.star) f.var_star.push_back(p * (1.0 - p) / f.draws);
  for (double p : f.tilde) f.var_tilde.push_back(p * (1.0 - p) / f.draws);
  return f;
}

void check_series(std::span<const Frequencies> chains) {
  for (std::size_t i = 0; i < chains.size(); ++i) {
    if (chains[i].k != static_cast<int>(i) + 1)
      throw std::invalid_argument("marginal likelihood estimators need chains for k = 1..kmax in order");
  }
}

double pool_weight(Pooling pooling, const Frequencies& f, double var_num, double var_den) {
  if (pooling == Pooling::equal) return 1.0;
  return 1.0 / (var_num + var_den + 1.0 / (f.draws * f.draws));
}

void finish(MarlikResult& r, std::optional<double> log_f1) {
  if (log_f1) r.log_f_unnormalized = r.log_f;
  const double z = log_sum_exp(r.log_f);
  if (!std::isfinite(z)) throw std::domain_error("marginal likelihood estimates do not normalize");
  for (double& v : r.log_f) v -= z;
  r.anchored = log_f1.has_value();
  r.log_bf.assign(r.log_f.size(), 0.0);
  for (std::size_t k = 1; k < r.log_f.size(); ++k) {
    r.log_bf[k] = (r.log_f[k - 1] == kNegInf) ? std::numeric_limits<double>::quiet_NaN()
                                              : r.log_f[k] - r.log_f[k - 1];
  }
}

// Appends log(num / den) to the chained sequence. A zero denominator under a
// positive numerator rebases the sequence at index; a zero numerator is a
// structural zero and so is everything above it; both zero after a positive
// term truncates the sequence.
void chain_ratio(MarlikResult& r, std::vector<double>& seq, int index, double log_scale,
                 double num, double den, const char* what) {
  const double prev = seq[index - 1];
  if (prev == kNegInf) {
    // Nothing scales the terms above a structural zero.
    seq[index] = kNegInf;
    return;
  }
  if (den <= 0.0 && num > 0.0) {
    for (int j = 0; j < index; ++j) seq[j] = kNegInf;
    seq[index] = 0.0;
    r.rebased_at = index + 1;
    r.diagnostics.push_back(std::string(what) + ": patterns below index " +
                            std::to_string(index + 1) +
                            " never visited by the pooled chains; their terms are set to zero");
    return;
  }
  if (den <= 0.0) {
    if (!r.truncated_at) {
      r.truncated_at = index + 1;
      r.diagnostics.push_back(std::string(what) + ": pooled numerator and denominator are zero at index " +
                              std::to_string(index) +
                              "; sequence truncated (run longer chains or check mixing)");
    }
    seq[index] = kNegInf;
    return;
  }
  if (num <= 0.0) {
    r.diagnostics.push_back(std::string(what) + ": structural zero from index " +
                            std::to_string(index + 1) + " (pattern never visited)");
    seq[index] = kNegInf;
    return;
  }
  seq[index] = prev + log_scale + std::log(num) - std::log(den);
}

MarlikResult fstar_core(std::span<const Frequencies> chains, double alpha, int n,
                        std::optional<double> log_f1, Pooling pooling) {
  check_series(chains);
  const int kmax = static_cast<int>(chains.size());
  MarlikResult r;
  r.method = Estimator::fstar;
  r.log_partial.assign(kmax, kNegInf);
  r.log_partial[0] = log_f1.value_or(0.0);
  for (int t = 1; t < kmax; ++t) {
    // Ratio f*_{t+1} / f*_t pools chains k = t+1..kmax.
    double num = 0.0, den = 0.0;
    for (int k = t + 1; k <= kmax; ++k) {
      const Frequencies& f = chains[k - 1];
      const double w = pool_weight(pooling, f, f.var_star[t], f.var_star[t - 1]);
      num += w * f.star[t];
      den += w * f.star[t - 1];
    }
    if (r.truncated_at) {
      r.log_partial[t] = kNegInf;
      continue;
    }
    chain_ratio(r, r.log_partial, t, log_a_kt(t + 1, t, alpha, n), num, den, "fstar");
  }
  r.log_f.assign(kmax, kNegInf);
  for (int k = 1; k <= kmax; ++k) {
    LogSumAccumulator acc;
    for (int t = 1; t <= k; ++t) acc.add(log_a_kt(k, t, alpha, n) + r.log_partial[t - 1]);
    r.log_f[k - 1] = acc.value();
  }
  finish(r, r.rebased_at ? std::nullopt : log_f1);
  return r;
}

MarlikResult fdagger_core(std::span<const Frequencies> chains, double alpha, int n,
                          std::optional<double> log_f1, Pooling pooling) {
  check_series(chains);
  const int kmax = static_cast<int>(chains.size());
  const int hmax = std::min(kmax, n);
  MarlikResult r;
  r.method = Estimator::fdagger;
  r.log_partial.assign(hmax, kNegInf);
  r.log_partial[0] = log_f1.value_or(0.0);
  for (int h = 1; h < hmax; ++h) {
    double num = 0.0, den = 0.0;
    for (int k = h + 1; k <= kmax; ++k) {
      const Frequencies& f = chains[k - 1];
      const double w = pool_weight(pooling, f, f.var_tilde[h], (k - h) * (k - h) * f.var_tilde[h - 1]);
      num += w * f.tilde[h];
      den += w * (k - h) * f.tilde[h - 1];
    }
    if (r.truncated_at) {
      r.log_partial[h] = kNegInf;
      continue;
    }
    chain_ratio(r, r.log_partial, h,
                std::log(static_cast<double>(h + 1)) + log_a_kt(h + 1, h, alpha, n), num, den,
                "fdagger");
  }
  r.log_f.assign(kmax, kNegInf);
  for (int k = 1; k <= kmax; ++k) {
    LogSumAccumulator acc;
    for (int h = 1; h <= std::min(k, n); ++h)
      acc.add(log_binomial(k, h) + log_a_kt(k, h, alpha, n) + r.log_partial[h - 1]);
    r.log_f[k - 1] = acc.value();
  }
  finish(r, r.rebased_at ? std::nullopt : log_f1);
  return r;
}

MarlikResult bf_core(std::span<const Frequencies> chains, double alpha, int n,
                     std::optional<double> log_f1) {
  check_series(chains);
  const int kmax = static_cast<int>(chains.size());
  MarlikResult r;
  r.method = Estimator::bf_chain;
  r.log_f.assign(kmax, kNegInf);
  r.log_f[0] = log_f1.value_or(0.0);
  for (int k = 2; k <= kmax; ++k) {
    const Frequencies& f = chains[k - 1];
    double complement = 0.0;
    for (int t = 1; t < k; ++t) complement += f.star[t - 1];
    if (r.truncated_at) continue;
    if (complement <= 0.0) {
      r.truncated_at = k;
      r.diagnostics.push_back("bf: chain with k = " + std::to_string(k) +
                              " never visited allocations leaving component k empty; Bayes factor "
                              "undefined (run longer chains or use fstar/fdagger)");
      continue;
    }
    r.log_f[k - 1] = r.log_f[k - 2] + log_a_kt(k, k - 1, alpha, n) - std::log(complement);
  }
  finish(r, log_f1);
  return r;
}

MarlikResult dispatch(Estimator method, std::span<const Frequencies> chains, double alpha, int n,
                      std::optional<double> log_f1, Pooling pooling) {
  switch (method) {
    case Estimator::bf_chain: return bf_core(chains, alpha, n, log_f1);
    case Estimator::fstar: return fstar_core(chains, alpha, n, log_f1, pooling);
    case Estimator::fdagger: return fdagger_core(chains, alpha, n, log_f1, pooling);
  }
  throw std::invalid_argument("unknown estimator");
}

std::vector<Frequencies> all_frequencies(std::span<const ChainSummary> summaries) {
  if (summaries.empty()) throw std::invalid_argument("marginal likelihood estimators: no chains");
  std::vector<Frequencies> out;
  out.reserve(summaries.size());
  for (const auto& s : summaries) out.push_back(from_summary(s));
  return out;
}

}  // namespace

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::bf_chain: return "bf";
    case Estimator::fstar: return "fstar";
    case Estimator::fdagger: return "fdagger";
  }
  return "unknown";
}

Estimator parse_estimator(const std::string& text) {
  if (text == "bf") return Estimator::bf_chain;
  if (text == "fstar") return Estimator::fstar;
  if (text == "fdagger") return Estimator::fdagger;
  throw std::invalid_argument("unknown estimator '" + text + "' (expected bf, fstar or fdagger)");
}

BayesFactor bf_empty_component(const ChainSummary& summary, double alpha, int n) {
  const int k = summary.k;
  if (k < 2) throw std::invalid_argument("bf_empty_component: need k >= 2");
  double complement = 0.0;
  for (int t = 1; t < k; ++t) complement += summary.visits_star[t - 1];
  if (complement <= 0.0)
    throw std::domain_error("bf_empty_component: the chain with k = " + std::to_string(k) +
                            " never visited allocations leaving component k empty; the "
                            "estimate is undefined (run a longer chain or use fstar/fdagger)");
  BayesFactor bf;
  bf.log_bf = log_a_kt(k, k - 1, alpha, n) - std::log(complement);
  bf.se_log_bf = summary.se_star[k - 1] / complement;
  return bf;
}

MarlikResult bf_chain_sequence(std::span<const ChainSummary> summaries, double alpha, int n,
                               std::optional<double> log_f1) {
  auto f = all_frequencies(summaries);
  return bf_core(f, alpha, n, log_f1);
}

MarlikResult fstar_sequence(std::span<const ChainSummary> summaries, double alpha, int n,
                            std::optional<double> log_f1, Pooling pooling) {
  auto f = all_frequencies(summaries);
  return fstar_core(f, alpha, n, log_f1, pooling);
}

MarlikResult fdagger_sequence(std::span<const ChainSummary> summaries, double alpha, int n,
                              std::optional<double> log_f1, Pooling pooling) {
  auto f = all_frequencies(summaries);
  return fdagger_core(f, alpha, n, log_f1, pooling);
}

MarlikResult estimate_marlik(Estimator method, std::span<const ChainSummary> summaries,
                             double alpha, int n, std::optional<double> log_f1, Pooling pooling) {
  auto f = all_frequencies(summaries);
  return dispatch(method, f, alpha, n, log_f1, pooling);
}

std::vector<double> marlik_batch_se(Estimator method, std::span<const ChainSummary> summaries,
                                    double alpha, int n, int batches, Pooling pooling) {
  if (summaries.empty()) throw std::invalid_argument("marlik_batch_se: no chains");
  if (batches < 2) throw std::invalid_argument("marlik_batch_se: need at least 2 batches");
  const int kmax = static_cast<int>(summaries.size());
  std::vector<std::vector<double>> estimates;
  for (int b = 0; b < batches; ++b) {
    std::vector<Frequencies> chains;
    for (const auto& s : summaries) {
      const std::size_t size = s.pattern_trace.size() / batches;
      if (size < 1) throw std::invalid_argument("marlik_batch_se: trace too short");
      chains.push_back(from_slice(s, b * size, (b + 1) * size));
    }
    try {
      auto r = dispatch(method, chains, alpha, n, std::nullopt, pooling);
      std::vector<double> lin(kmax);
      for (int k = 0; k < kmax; ++k) lin[k] = std::exp(r.log_f[k]);
      estimates.push_back(std::move(lin));
    } catch (const std::domain_error&) {
      // A batch whose estimate does not normalize carries no information.
    }
  }
  if (estimates.size() < 2) throw std::domain_error("marlik_batch_se: too few usable batches");
  const double nb = static_cast<double>(estimates.size());
  std::vector<double> se(kmax, 0.0);
  for (int k = 0; k < kmax; ++k) {
    double mean = 0.0;
    for (const auto& e : estimates) mean += e[k];
    mean /= nb;
    double ss = 0.0;
    for (const auto& e : estimates) ss += (e[k] - mean) * (e[k] - mean);
    se[k] = std::sqrt(ss / (nb - 1.0) / nb);
  }
  return se;
}

std::vector<double> posterior_k(std::span<const double> log_f, const PriorOnK& prior) {
  if (static_cast<int>(log_f.size()) != prior.kmax())
    throw std::invalid_argument("posterior_k: prior and marginal likelihoods differ in kmax");
  std::vector<double> lp(log_f.size());
  for (std::size_t k = 0; k < log_f.size(); ++k) lp[k] = log_f[k] + prior.log_weights[k];
  const double z = log_sum_exp(lp);
  std::vector<double> out(lp.size());
  for (std::size_t k = 0; k < lp.size(); ++k) out[k] = std::exp(lp[k] - z);
  return out;
}

std::vector<double> posterior_k(const MarlikResult& marlik, const PriorOnK& prior) {
  return posterior_k(marlik.log_f, prior);
}

RatioMode parse_ratio_mode(const std::string& text) {
  if (text == "with-binomial") return RatioMode::with_binomial;
  if (text == "without-binomial") return RatioMode::without_binomial;
  if (text == "poi1-posterior") return RatioMode::poi1_posterior;
  throw std::invalid_argument("unknown mode '" + text +
                              "' (expected with-binomial, without-binomial or poi1-posterior)");
}

std::string to_string(RatioMode mode) {
  switch (mode) {
    case RatioMode::with_binomial: return "with-binomial";
    case RatioMode::without_binomial: return "without-binomial";
    case RatioMode::poi1_posterior: return "poi1-posterior";
  }
  return "unknown";
}

std::vector<RatioRow> hypothetical_ratio_table(int n, int h0, double alpha, int kmax,
                                               RatioMode mode) {
  if (h0 < 1 || h0 > kmax) throw std::invalid_argument("hypothetical_ratio_table: need 1 <= h0 <= kmax");
  if (n < h0) throw std::invalid_argument("hypothetical_ratio_table: need n >= h0");
  std::vector<RatioRow> rows;
  for (int k = h0; k <= kmax; ++k) {
    double lr = log_a_kt(k, h0, alpha, n);
    if (mode != RatioMode::without_binomial) lr += log_binomial(k, h0);
    if (mode == RatioMode::poi1_posterior) lr += log_factorial(h0) - log_factorial(k);
    rows.push_back({k, std::exp(lr)});
  }
  return rows;
}

std::vector<double> posterior_bounds(int n, double alpha, const PriorOnK& prior) {
  if (n < 1) throw std::invalid_argument("posterior_bounds: n must be >= 1");
  const int kmax = prior.kmax();
  // term(j, h) = pi(j) C(j, h) a_jh; denominators sum it over j = h..kmax.
  auto term = [&](int j, int h) {
    return prior.log_pi(j) + log_binomial(j, h) + log_a_kt(j, h, alpha, n);
  };
  const int hmax = std::min(kmax, n);
  std::vector<double> denom(hmax + 1, kNegInf);
  for (int h = 1; h <= hmax; ++h) {
    LogSumAccumulator acc;
    for (int j = h; j <= kmax; ++j) acc.add(term(j, h));
    denom[h] = acc.value();
  }
  std::vector<double> bound(kmax, 0.0);
  for (int k = 1; k <= kmax; ++k) {
    double best = kNegInf;
    for (int h = 1; h <= std::min(k, n); ++h) {
      if (denom[h] == kNegInf) continue;
      best = std::max(best, term(k, h) - denom[h]);
    }
    bound[k - 1] = std::exp(best);
  }
  return bound;
}

}  // namespace mixk
