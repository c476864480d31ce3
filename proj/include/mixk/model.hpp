// Apache License, Version 2.0, refer to LICENSE.txt
//
// Closed-form pieces of the finite mixture of univariate normals with a
// symmetric Dirichlet prior on the weights and independent Normal-Gamma
// priors on the component (mean, precision) pairs. Weights and component
// parameters are integrated out; the only latent quantity is the allocation
// vector. All probabilities are carried in log domain.
//
// Component labels are 0-based in code. Mathematical quantities indexed by a
// component number (the highest non-empty component t, the number of
// non-empty components h, the number of components k) keep their 1-based
// values.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mixk {

struct ModelSpec {
  int k = 1;
  double alpha = 1.0;  // symmetric Dirichlet hyperparameter
  double mu = 0.0;     // prior mean of the component means
  double tau = 1.0;    // prior precision ratio: m | r ~ N(mu, 1/(tau r))
  double gamma = 2.0;  // r ~ Ga(gamma, delta), shape
  double delta = 1.0;  // rate

  // Throws std::invalid_argument unless k >= 1 and alpha, tau, gamma, delta > 0.
  void validate() const;
};

// (count, sum, sum of squares) of the values y = x - center allocated to a
// component. The center is a property of the AllocationState.
struct SufficientStats {
  int count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double y) {
    ++count;
    sum += y;
    sum_sq += y * y;
  }
  void remove(double y) {
    --count;
    if (count == 0) {
      sum = 0.0;
      sum_sq = 0.0;
    } else {
      sum -= y;
      sum_sq -= y * y;
    }
  }
};

struct OccupancyPattern {
  int h = 0;  // number of non-empty components
  int t = 0;  // highest non-empty component (1-based)

  // g in G*_t: component t non-empty, all higher ones empty.
  bool in_star(int t_) const { return t == t_; }
  // g in G~^k_h: exactly h non-empty components.
  bool in_tilde(int h_) const { return h == h_; }
  // g in G^h_h: no empty components among 1..h.
  bool no_empty() const { return h == t; }

  friend bool operator==(const OccupancyPattern&, const OccupancyPattern&) = default;
};

// Allocation vector together with occupancy counts and per-component
// sufficient statistics. Counts and statistics are kept consistent with the
// labels under every mutation.
class AllocationState {
 public:
  // All observations in component 0. The center defaults to the sample mean.
  AllocationState(std::vector<double> data, int k);
  AllocationState(std::vector<double> data, int k, double center);
  // Explicit 0-based labels, each in [0, k).
  AllocationState(std::vector<double> data, std::vector<int> labels, int k, double center);

  int n() const { return static_cast<int>(data_.size()); }
  int k() const { return static_cast<int>(stats_.size()); }
  double center() const { return center_; }
  double x(int i) const { return data_[i]; }
  double y(int i) const { return centered_[i]; }
  const std::vector<double>& data() const { return data_; }
  int label(int i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  int count(int j) const { return stats_[j].count; }
  std::vector<int> counts() const;
  const SufficientStats& stats(int j) const { return stats_[j]; }
  const std::vector<SufficientStats>& all_stats() const { return stats_; }

  int num_empty() const;
  OccupancyPattern pattern() const;

  // Reassigns observation i to component j.
  void move(int i, int j);
  // Inserts an empty component at position pos in [0, k]; labels >= pos shift up.
  void insert_empty(int pos);
  // Removes component pos, which must be empty; labels > pos shift down.
  void erase_empty(int pos);

  // Largest absolute difference between the incrementally maintained
  // statistics and a compensated recomputation from the labels. Throws
  // std::logic_error if counts disagree with labels.
  double max_drift() const;
  void recompute();

 private:
  std::vector<double> data_;
  std::vector<double> centered_;
  std::vector<int> labels_;
  std::vector<SufficientStats> stats_;
  double center_ = 0.0;
};

double sample_mean(std::span<const double> x);
double sample_variance(std::span<const double> x);

// log f(g | k) for a symmetric Dirichlet(alpha) prior on the weights; k is
// counts.size().
double log_f_g_given_k(std::span<const int> counts, double alpha);

// log a_kt = log[Gamma(k alpha) Gamma(t alpha + n) / (Gamma(k alpha + n) Gamma(t alpha))].
double log_a_kt(int k, int t, double alpha, int n);

// Normal-Gamma marginal density of the observations summarized by stats
// (values taken relative to center). Zero for an empty component.
double log_component_marginal(const SufficientStats& stats, double center, const ModelSpec& spec);

// log f(x | k, g): sum of component marginals. Independent of k given the
// allocation content.
double log_f_x_given_kg(const AllocationState& state, const ModelSpec& spec);

// Posterior predictive density of x given the observations in stats.
double log_predictive(double x, const SufficientStats& stats, double center, const ModelSpec& spec);

OccupancyPattern occupancy_pattern(const AllocationState& state);
OccupancyPattern occupancy_pattern(std::span<const int> counts);

// Table-driven evaluator of the component marginal for the sampler hot path.
// Agrees with log_component_marginal to rounding.
class ComponentMarginal {
 public:
  ComponentMarginal(const ModelSpec& spec, double center, int max_count);

  double operator()(const SufficientStats& s) const { return eval(s.count, s.sum, s.sum_sq); }
  double eval(int m, double sum, double sum_sq) const;
  // Log marginal of the component after adding the centered value y.
  double with_added(const SufficientStats& s, double y) const {
    return eval(s.count + 1, s.sum + y, s.sum_sq + y * y);
  }

  // Same marginal under different (tau, delta), without touching the tables.
  double eval_with(int m, double sum, double sum_sq, double tau, double delta) const;

  void set_scale(double tau, double delta);
  const ModelSpec& spec() const { return spec_; }
  int max_count() const { return static_cast<int>(shape_.size()) - 1; }

 private:
  ModelSpec spec_;
  double offset_ = 0.0;           // center - mu
  std::vector<double> shape_;     // gamma + m/2
  std::vector<double> base_;      // terms free of tau and delta
  std::vector<double> constant_;  // everything except the -(gamma + m/2) log D term
};

}  // namespace mixk
