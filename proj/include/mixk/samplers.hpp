// Apache License, Version 2.0, refer to LICENSE.txt
//
// MCMC over allocation vectors with weights and component parameters
// integrated out: a fixed-k collapsed Gibbs sampler, a variable-k sampler
// that adds and removes empty components, and random-walk Metropolis
// updates for the (tau, delta) hyperparameters.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixk/diagnostics.hpp"
#include "mixk/model.hpp"
#include "mixk/prior.hpp"
#include "mixk/rng.hpp"

namespace mixk {

struct ChainConfig {
  long sweeps = 20000;  // post burn-in
  long burnin = 1000;
  int thin = 1;
  std::uint64_t seed = 1;
  int batches = kDefaultBatches;
  bool random_scan = false;

  void validate() const;
  long kept() const { return sweeps / thin; }
};

struct AcceptStats {
  long proposed = 0;
  long accepted = 0;
  double rate() const { return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0; }
};

// Per-k output of a fixed-k chain. visits_star[t - 1] estimates
// Pr[G*_t | k, x]; visits_tilde[h - 1] estimates Pr[G~^k_h | k, x] for
// h = 1..min(k, n). Standard errors are batch means.
struct ChainSummary {
  int k = 0;
  int n = 0;
  long kept = 0;
  std::vector<double> visits_star;
  std::vector<double> visits_tilde;
  std::vector<double> se_star;
  std::vector<double> se_tilde;
  std::vector<OccupancyPattern> pattern_trace;
  std::map<std::string, AcceptStats> accept_stats;
};

ChainSummary summarize_patterns(int k, int n, std::vector<OccupancyPattern> trace,
                                int batches = kDefaultBatches);

// Working state of the collapsed sampler: the allocation state plus the
// cached log marginal of every component under the current (tau, delta).
class CollapsedGibbs {
 public:
  CollapsedGibbs(AllocationState& state, const ModelSpec& spec);

  AllocationState& state() { return *state_; }
  const AllocationState& state() const { return *state_; }
  const ModelSpec& spec() const { return marginal_.spec(); }
  const ComponentMarginal& marginal() const { return marginal_; }

  // One systematic (or random) scan over all observations.
  void sweep(Rng& rng, bool random_scan = false);
  // Draws g_i from its full conditional given all other labels.
  void update(int i, Rng& rng);

  // Log full-conditional weights of g_i over the k components, unnormalized.
  std::vector<double> conditional_log_weights(int i) const;

  void insert_empty(int pos);
  void erase_empty(int pos);
  void set_scale(double tau, double delta);

  double log_likelihood() const;
  const std::vector<double>& cached_marginals() const { return cache_; }

 private:
  AllocationState* state_;
  ComponentMarginal marginal_;
  std::vector<double> cache_;
  std::vector<double> log_alpha_plus_;  // log(alpha + m), m = 0..n
  std::vector<double> scratch_log_w_;
  std::vector<int> scratch_index_;
};

void gibbs_sweep_fixed_k(AllocationState& state, const ModelSpec& spec, Rng& rng);

struct FixedKRun {
  ChainSummary summary;
  std::vector<int> final_labels;
};

// Runs a Gibbs chain with spec.k components. The RNG stream is keyed by
// (config.seed, k). init holds 0-based labels; empty means all in component 0.
FixedKRun run_fixed_k_chain(std::span<const double> data, const ModelSpec& spec,
                            const ChainConfig& config, std::span<const int> init = {});

enum class InitMode { warm_start, all_in_one };

// Fixed-k chains for k = 1..kmax. With warm_start, the final allocation of
// the chain with k components starts the chain with k + 1, so chains run in
// order; with all_in_one they are independent and run on up to `jobs`
// threads. The result is identical for any job count.
std::vector<ChainSummary> run_fixed_k_series(
    std::span<const double> data, const ModelSpec& spec, int kmax, const ChainConfig& config,
    InitMode init = InitMode::warm_start, int jobs = 1,
    const std::function<void(int)>& on_done = {});

// ---------------------------------------------------------------------------
// Variable k.

// log acceptance ratio for inserting an empty component into a state with k
// components, `empty` of them empty. The reverse (removal) ratio from k + 1
// with empty + 1 empty components is the negative.
double log_birth_ratio(int k, int empty, double alpha, int n, const PriorOnK& prior);

struct DimensionStats {
  AcceptStats birth;
  AcceptStats death;
};

// Proposes k -> k + 1 (insert an empty component at a uniform position) or
// k -> k - 1 (remove a uniformly chosen empty component) with probability
// 1/2 each; proposals outside 1..kmax or removals with no empty component are
// rejected. f(x | k, g) is unchanged by either move.
void dimension_move(CollapsedGibbs& gibbs, const PriorOnK& prior, int kmax, Rng& rng,
                    DimensionStats* stats = nullptr);

// One Gibbs scan at the current k followed by `dim_moves` dimension moves.
void vark_sweep(CollapsedGibbs& gibbs, const PriorOnK& prior, int kmax, Rng& rng,
                DimensionStats* stats = nullptr, int dim_moves = 1);

// ---------------------------------------------------------------------------
// Hyperparameters.

// (1 + tau)^-1 ~ Un(0, 1) and delta ~ Un(0, delta_upper), updated by random
// walks on log tau and logit(delta / delta_upper).
struct HyperState {
  double tau = 0.04;
  double delta = 2.0;
  double delta_upper = 1.0;
  double step_log_tau = 0.5;
  double step_logit_delta = 0.5;
  AcceptStats tau_moves;
  AcceptStats delta_moves;
};

// log f(x | k, g, tau, delta) + log prior density of (tau, delta).
double log_hyper_target(const AllocationState& state, const ModelSpec& spec, double tau,
                        double delta, double delta_upper);

// One random-walk update of tau, then one of delta, given the allocation.
// Leaves gibbs' cache consistent with the new values.
void mh_update_hyper(CollapsedGibbs& gibbs, HyperState& hyper, Rng& rng);

struct HyperDraw {
  int k = 0;
  double tau = 0.0;
  double delta = 0.0;
};

struct VarKConfig {
  ChainConfig chain{1000000, 10000, 10, 1, kDefaultBatches, false};
  int kmax = 50;
  int k_init = 1;
  int dim_moves = 1;
  bool update_hyper = false;
  HyperState hyper;
  double target_accept = 0.3;
  int adapt_window = 50;
};

struct VarKResult {
  int kmax = 0;
  long kept = 0;
  std::vector<double> freq_k;  // index k - 1
  std::vector<double> se_k;
  std::vector<int> k_trace;
  DimensionStats moves;
  std::vector<HyperDraw> hyper_draws;
  HyperState final_hyper;
};

VarKResult run_vark_chain(std::span<const double> data, const ModelSpec& spec,
                          const PriorOnK& prior, const VarKConfig& config,
                          const std::function<void(long)>& on_progress = {});

// ---------------------------------------------------------------------------
// Per-k summaries of hyperparameter draws.

struct HyperRow {
  int k = 0;
  long count = 0;
  std::vector<double> tau_q;
  std::vector<double> delta_q;
  double tau_median = 0.0;
  double delta_median = 0.0;
};

struct HyperTable {
  std::vector<double> probs;
  std::vector<HyperRow> rows;
  std::vector<std::pair<int, long>> excluded;  // (k, draws) below the minimum
};

inline const std::vector<double> kDefaultHyperQuantiles{0.005, 0.25, 0.5, 0.75, 0.995};

double quantile(std::vector<double> values, double p);

HyperTable hyper_median_table(std::span<const HyperDraw> draws,
                              const std::vector<double>& probs = kDefaultHyperQuantiles,
                              long min_draws = 100);

struct HyperSuggestion {
  double tau = 0.0;
  double delta = 0.0;
  int k_cutoff_tau = 0;
  int k_cutoff_delta = 0;
  bool tau_leveled = false;
  bool delta_leveled = false;
};

// Position of the first median that changes by less than rel_tol (relative)
// to its successor, or -1 when there is none.
int level_off_index(std::span<const double> medians, double rel_tol);
// The cutoff k* is the level-off point over the leading run of consecutive
// k in the table (the last such k when nothing levels off); each estimate is
// the median of all draws with k >= k*.
HyperSuggestion suggest_hyper(std::span<const HyperDraw> draws, const HyperTable& table,
                              double rel_tol = 0.25);

}  // namespace mixk
