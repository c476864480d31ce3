// Apache License, Version 2.0, refer to LICENSE.txt

#include "mixk/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mixk/logmath.hpp"

namespace mixk {

namespace {

const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

struct NeumaierSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    c += (std::fabs(sum) >= std::fabs(v)) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

// Sum of squared deviations from mu, minus the part explained by the
// posterior mean shrinkage: sum (x - mu)^2 - (sum (x - mu))^2 / (tau + m).
double residual_quadratic(int m, double sum, double sum_sq, double offset, double tau) {
  const double u = sum + m * offset;
  const double q = sum_sq + 2.0 * offset * sum + m * offset * offset;
  return std::max(0.0, q - u * u / (tau + m));
}

}  // namespace

void ModelSpec::validate() const {
  if (k < 1) throw std::invalid_argument("ModelSpec: k must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("ModelSpec: alpha must be positive");
  if (!(tau > 0.0)) throw std::invalid_argument("ModelSpec: tau must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("ModelSpec: gamma must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("ModelSpec: delta must be positive");
  if (!std::isfinite(mu)) throw std::invalid_argument("ModelSpec: mu must be finite");
}

double sample_mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("sample_mean: empty data");
  NeumaierSum s;
  for (double v : x) s.add(v);
  return s.value() / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("sample_variance: need at least two values");
  const double m = sample_mean(x);
  NeumaierSum s;
  for (double v : x) s.add((v - m) * (v - m));
  return s.value() / static_cast<double>(x.size() - 1);
}

AllocationState::AllocationState(std::vector<double> data, int k)
    : AllocationState(data, k, data.empty() ? 0.0 : sample_mean(data)) {}

AllocationState::AllocationState(std::vector<double> data, int k, double center)
    : AllocationState(std::move(data), std::vector<int>{}, k, center) {}

AllocationState::AllocationState(std::vector<double> data, std::vector<int> labels, int k,
                                 double center)
    : data_(std::move(data)), labels_(std::move(labels)), center_(center) {
  if (data_.empty()) throw std::invalid_argument("AllocationState: empty data");
  if (k < 1) throw std::invalid_argument("AllocationState: k must be >= 1");
  if (labels_.empty()) labels_.assign(data_.size(), 0);
  if (labels_.size() != data_.size())
    throw std::invalid_argument("AllocationState: labels and data differ in length");
  for (int g : labels_) {
    if (g < 0 || g >= k) throw std::invalid_argument("AllocationState: label out of range");
  }
  centered_.resize(data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) centered_[i] = data_[i] - center_;
  stats_.assign(k, SufficientStats{});
  recompute();
}

std::vector<int> AllocationState::counts() const {
  std::vector<int> c(stats_.size());
  for (std::size_t j = 0; j < stats_.size(); ++j) c[j] = stats_[j].count;
  return c;
}

int AllocationState::num_empty() const {
  return static_cast<int>(
      std::count_if(stats_.begin(), stats_.end(), [](const auto& s) { return s.count == 0; }));
}

OccupancyPattern AllocationState::pattern() const { return occupancy_pattern(*this); }

void AllocationState::move(int i, int j) {
  const int from = labels_[i];
  if (from == j) return;
  stats_[from].remove(centered_[i]);
  stats_[j].add(centered_[i]);
  labels_[i] = j;
}

void AllocationState::insert_empty(int pos) {
  if (pos < 0 || pos > k()) throw std::out_of_range("insert_empty: position out of range");
  stats_.insert(stats_.begin() + pos, SufficientStats{});
  for (int& g : labels_) {
    if (g >= pos) ++g;
  }
}

void AllocationState::erase_empty(int pos) {
  if (pos < 0 || pos >= k()) throw std::out_of_range("erase_empty: position out of range");
  if (stats_[pos].count != 0) throw std::logic_error("erase_empty: component is not empty");
  if (k() == 1) throw std::logic_error("erase_empty: cannot remove the only component");
  stats_.erase(stats_.begin() + pos);
  for (int& g : labels_) {
    if (g > pos) --g;
  }
}

double AllocationState::max_drift() const {
  std::vector<int> cnt(stats_.size(), 0);
  std::vector<NeumaierSum> s1(stats_.size()), s2(stats_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const int g = labels_[i];
    ++cnt[g];
    s1[g].add(centered_[i]);
    s2[g].add(centered_[i] * centered_[i]);
  }
  double drift = 0.0;
  for (std::size_t j = 0; j < stats_.size(); ++j) {
    if (cnt[j] != stats_[j].count)
      throw std::logic_error("AllocationState: counts inconsistent with labels");
    drift = std::max(drift, std::fabs(s1[j].value() - stats_[j].sum));
    drift = std::max(drift, std::fabs(s2[j].value() - stats_[j].sum_sq));
  }
  return drift;
}

void AllocationState::recompute() {
  std::vector<NeumaierSum> s1(stats_.size()), s2(stats_.size());
  for (auto& s : stats_) s = SufficientStats{};
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const int g = labels_[i];
    ++stats_[g].count;
    s1[g].add(centered_[i]);
    s2[g].add(centered_[i] * centered_[i]);
  }
  for (std::size_t j = 0; j < stats_.size(); ++j) {
    stats_[j].sum = s1[j].value();
    stats_[j].sum_sq = s2[j].value();
  }
}

double log_f_g_given_k(std::span<const int> counts, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("log_f_g_given_k: alpha must be positive");
  if (counts.empty()) throw std::invalid_argument("log_f_g_given_k: k must be >= 1");
  int n = 0;
  for (int c : counts) {
    if (c < 0) throw std::invalid_argument("log_f_g_given_k: negative count");
    n += c;
  }
  if (n < 1) throw std::invalid_argument("log_f_g_given_k: empty data");
  const double alpha0 = alpha * static_cast<double>(counts.size());
  double out = log_gamma(alpha0) - log_gamma(alpha0 + n);
  const double lg_alpha = log_gamma(alpha);
  for (int c : counts) {
    if (c > 0) out += log_gamma(alpha + c) - lg_alpha;
  }
  return out;
}

double log_a_kt(int k, int t, double alpha, int n) {
  if (t < 1 || t > k) throw std::invalid_argument("log_a_kt: need 1 <= t <= k");
  if (n < 1) throw std::invalid_argument("log_a_kt: n must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("log_a_kt: alpha must be positive");
  if (t == k) return 0.0;
  const double ak = alpha * k;
  const double at = alpha * t;
  return log_gamma(ak) - log_gamma(ak + n) + log_gamma(at + n) - log_gamma(at);
}

double log_component_marginal(const SufficientStats& stats, double center, const ModelSpec& spec) {
  const int m = stats.count;
  if (m == 0) return 0.0;
  const double quad = residual_quadratic(m, stats.sum, stats.sum_sq, center - spec.mu, spec.tau);
  const double d = spec.delta + 0.5 * quad;
  const double shape = spec.gamma + 0.5 * m;
  return -0.5 * m * kLogTwoPi + 0.5 * (std::log(spec.tau) - std::log(spec.tau + m)) +
         log_gamma(shape) - log_gamma(spec.gamma) + spec.gamma * std::log(spec.delta) -
         shape * std::log(d);
}

double log_f_x_given_kg(const AllocationState& state, const ModelSpec& spec) {
  double out = 0.0;
  for (const auto& s : state.all_stats()) out += log_component_marginal(s, state.center(), spec);
  return out;
}

double log_predictive(double x, const SufficientStats& stats, double center, const ModelSpec& spec) {
  SufficientStats with = stats;
  with.add(x - center);
  return log_component_marginal(with, center, spec) - log_component_marginal(stats, center, spec);
}

OccupancyPattern occupancy_pattern(std::span<const int> counts) {
  OccupancyPattern p;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] > 0) {
      ++p.h;
      p.t = static_cast<int>(j) + 1;
    }
  }
  return p;
}

OccupancyPattern occupancy_pattern(const AllocationState& state) {
  OccupancyPattern p;
  for (int j = 0; j < state.k(); ++j) {
    if (state.count(j) > 0) {
      ++p.h;
      p.t = j + 1;
    }
  }
  return p;
}

ComponentMarginal::ComponentMarginal(const ModelSpec& spec, double center, int max_count)
    : spec_(spec), offset_(center - spec.mu) {
  spec_.validate();
  if (max_count < 0) throw std::invalid_argument("ComponentMarginal: negative max_count");
  shape_.resize(max_count + 1);
  base_.resize(max_count + 1);
  const double lg_gamma = log_gamma(spec_.gamma);
  for (int m = 0; m <= max_count; ++m) {
    shape_[m] = spec_.gamma + 0.5 * m;
    base_[m] = -0.5 * m * kLogTwoPi + log_gamma(shape_[m]) - lg_gamma;
  }
  set_scale(spec_.tau, spec_.delta);
}

void ComponentMarginal::set_scale(double tau, double delta) {
  if (!(tau > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("ComponentMarginal: tau and delta must be positive");
  spec_.tau = tau;
  spec_.delta = delta;
  constant_.resize(shape_.size());
  const double log_tau = std::log(tau);
  const double prior_term = spec_.gamma * std::log(delta);
  constant_[0] = 0.0;
  for (std::size_t m = 1; m < shape_.size(); ++m) {
    constant_[m] = base_[m] + 0.5 * (log_tau - std::log(tau + static_cast<double>(m))) + prior_term;
  }
}

double ComponentMarginal::eval(int m, double sum, double sum_sq) const {
  if (m == 0) return 0.0;
  const double quad = residual_quadratic(m, sum, sum_sq, offset_, spec_.tau);
  return constant_[m] - shape_[m] * std::log(spec_.delta + 0.5 * quad);
}

double ComponentMarginal::eval_with(int m, double sum, double sum_sq, double tau,
                                    double delta) const {
  if (m == 0) return 0.0;
  const double quad = residual_quadratic(m, sum, sum_sq, offset_, tau);
  return base_[m] + 0.5 * (std::log(tau) - std::log(tau + m)) + spec_.gamma * std::log(delta) -
         shape_[m] * std::log(delta + 0.5 * quad);
}

}  // namespace mixk
