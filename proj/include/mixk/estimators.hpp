// Apache License, Version 2.0, refer to LICENSE.txt
//
// Marginal likelihoods of k components from the frequency of empty
// components in fixed-k Gibbs output, posteriors of k, and the analytic
// tables that follow from the decomposition of f_k over allocations with
// empty components.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixk/prior.hpp"
#include "mixk/samplers.hpp"

namespace mixk {

enum class Estimator { bf_chain, fstar, fdagger };
enum class Pooling { equal, inverse_variance };

std::string to_string(Estimator e);
Estimator parse_estimator(const std::string& text);

// All vectors are indexed by k - 1 (or t - 1, h - 1). log_f is normalized so
// that sum_k f_k = 1; log_f_unnormalized is present only when anchored on
// an exact f_1. log_bf[k - 1] = log B_{k,k-1}, with log_bf[0] = 0.
struct MarlikResult {
  Estimator method = Estimator::fdagger;
  std::vector<double> log_f;
  std::vector<double> log_f_unnormalized;
  std::vector<double> log_partial;  // f*_t or f+_h; empty for bf_chain
  std::vector<double> log_bf;
  bool anchored = false;
  std::optional<int> truncated_at;  // first index whose ratio was undefined
  // Last index where the pooled denominator vanished under a positive
  // numerator: all lower partial marginals are negligible and set to zero,
  // and the sequence restarts there (the f_1 anchor is then dropped).
  std::optional<int> rebased_at;
  std::vector<std::string> diagnostics;

  int kmax() const { return static_cast<int>(log_f.size()); }
};

struct BayesFactor {
  double log_bf = 0.0;
  double se_log_bf = 0.0;  // delta method on the frequency of G*_k
};

// log B_{k,k-1} = log a_{k,k-1} - log(1 - Pr[G*_k | k, x]) from the chain
// with k >= 2 components. Throws std::domain_error when the estimated
// probability of the complement of G*_k is zero.
BayesFactor bf_empty_component(const ChainSummary& summary, double alpha, int n);

// Chains the single-chain Bayes factors: f_k = f_{k-1} B_{k,k-1}.
MarlikResult bf_chain_sequence(std::span<const ChainSummary> summaries, double alpha, int n,
                               std::optional<double> log_f1 = std::nullopt);

// f*_{t+1} / f*_t from frequencies of G*_t pooled over chains k = t+1..kmax,
// then f_k = sum_t a_kt f*_t. summaries[k - 1] is the chain with k components.
MarlikResult fstar_sequence(std::span<const ChainSummary> summaries, double alpha, int n,
                            std::optional<double> log_f1 = std::nullopt,
                            Pooling pooling = Pooling::equal);

// f+_{h+1} / f+_h from frequencies of G~^k_h pooled over chains, then
// f_k = sum_h C(k, h) a_kh f+_h. Requires a label-symmetric prior.
MarlikResult fdagger_sequence(std::span<const ChainSummary> summaries, double alpha, int n,
                              std::optional<double> log_f1 = std::nullopt,
                              Pooling pooling = Pooling::equal);

MarlikResult estimate_marlik(Estimator method, std::span<const ChainSummary> summaries,
                             double alpha, int n, std::optional<double> log_f1 = std::nullopt,
                             Pooling pooling = Pooling::equal);

// Batch-means standard errors of the normalized f_k: the estimator is
// recomputed on each of `batches` consecutive slices of every chain's
// pattern trace.
std::vector<double> marlik_batch_se(Estimator method, std::span<const ChainSummary> summaries,
                                    double alpha, int n, int batches = kDefaultBatches,
                                    Pooling pooling = Pooling::equal);

// pi(k | x) proportional to pi(k) f_k, normalized (linear scale).
std::vector<double> posterior_k(const MarlikResult& marlik, const PriorOnK& prior);
std::vector<double> posterior_k(std::span<const double> log_f, const PriorOnK& prior);

enum class RatioMode { with_binomial, without_binomial, poi1_posterior };
RatioMode parse_ratio_mode(const std::string& text);
std::string to_string(RatioMode mode);

struct RatioRow {
  int k = 0;
  double ratio = 0.0;
};

// Ratios f_k / f_{h0} (or pi(k|x) / pi(h0|x) under a Poisson(1) prior) for
// k = h0..kmax when the data support only allocations with exactly h0
// non-empty components.
std::vector<RatioRow> hypothetical_ratio_table(int n, int h0, double alpha, int kmax,
                                               RatioMode mode);

// Upper bound on pi(k | x) over all data sets of size n, for k = 1..kmax of
// the prior: the largest share of the posterior that any single f+_h can
// give to k.
std::vector<double> posterior_bounds(int n, double alpha, const PriorOnK& prior);

}  // namespace mixk
