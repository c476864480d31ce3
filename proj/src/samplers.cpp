// Apache License, Version 2.0, refer to LICENSE.txt

#include "mixk/samplers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "mixk/logmath.hpp"

namespace mixk {

namespace {

// Index drawn from unnormalized log weights.
int draw_categorical(std::span<const double> log_w, Rng& rng) {
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  thread_local std::vector<double> w;
  w.resize(log_w.size());
  for (std::size_t j = 0; j < log_w.size(); ++j) {
    w[j] = std::exp(log_w[j] - top);
    total += w[j];
  }
  double u = rng.uniform() * total;
  for (std::size_t j = 0; j < w.size(); ++j) {
    u -= w[j];
    if (u < 0.0) return static_cast<int>(j);
  }
  for (std::size_t j = w.size(); j-- > 0;) {
    if (w[j] > 0.0) return static_cast<int>(j);
  }
  return 0;
}

double log_sigmoid(double w) { return -std::log1p(std::exp(-w)); }

double log_tau_prior(double tau) { return -2.0 * std::log1p(tau); }

}  // namespace

void ChainConfig::validate() const {
  if (sweeps < 1) throw std::invalid_argument("ChainConfig: sweeps must be >= 1");
  if (thin < 1) throw std::invalid_argument("ChainConfig: thin must be >= 1");
  if (burnin < 0) throw std::invalid_argument("ChainConfig: burnin must be >= 0");
  if (batches < 2) throw std::invalid_argument("ChainConfig: batches must be >= 2");
  if (kept() < 2L * batches)
    throw std::invalid_argument("ChainConfig: sweeps / thin must be at least 2 * batches (" +
                                std::to_string(2 * batches) + ") to form batch means");
}

ChainSummary summarize_patterns(int k, int n, std::vector<OccupancyPattern> trace, int batches) {
  ChainSummary s;
  s.k = k;
  s.n = n;
  s.kept = static_cast<long>(trace.size());
  const int hmax = std::min(k, n);
  s.visits_star.assign(k, 0.0);
  s.visits_tilde.assign(hmax, 0.0);
  s.se_star.assign(k, 0.0);
  s.se_tilde.assign(hmax, 0.0);
  if (trace.empty()) throw std::invalid_argument("summarize_patterns: empty trace");

  std::vector<long> star(k, 0), tilde(hmax, 0);
  for (const auto& p : trace) {
    ++star.at(p.t - 1);
    ++tilde.at(p.h - 1);
  }
  const double total = static_cast<double>(trace.size());
  std::vector<double> indicator(trace.size());
  for (int t = 1; t <= k; ++t) {
    s.visits_star[t - 1] = star[t - 1] / total;
    if (star[t - 1] == 0 || star[t - 1] == s.kept) continue;
    for (std::size_t i = 0; i < trace.size(); ++i) indicator[i] = trace[i].t == t ? 1.0 : 0.0;
    s.se_star[t - 1] = mc_standard_error(indicator, batches);
  }
  for (int h = 1; h <= hmax; ++h) {
    s.visits_tilde[h - 1] = tilde[h - 1] / total;
    if (tilde[h - 1] == 0 || tilde[h - 1] == s.kept) continue;
    for (std::size_t i = 0; i < trace.size(); ++i) indicator[i] = trace[i].h == h ? 1.0 : 0.0;
    s.se_tilde[h - 1] = mc_standard_error(indicator, batches);
  }
  s.pattern_trace = std::move(trace);
  return s;
}

CollapsedGibbs::CollapsedGibbs(AllocationState& state, const ModelSpec& spec)
    : state_(&state), marginal_(spec, state.center(), state.n()) {
  log_alpha_plus_.resize(state.n() + 1);
  for (int m = 0; m <= state.n(); ++m) log_alpha_plus_[m] = std::log(spec.alpha + m);
  cache_.resize(state.k());
  for (int j = 0; j < state.k(); ++j) cache_[j] = marginal_(state.stats(j));
}

std::vector<double> CollapsedGibbs::conditional_log_weights(int i) const {
  const AllocationState& s = *state_;
  const int from = s.label(i);
  const double y = s.y(i);
  SufficientStats without = s.stats(from);
  without.remove(y);
  const double from_without = marginal_(without);
  std::vector<double> out(s.k());
  for (int j = 0; j < s.k(); ++j) {
    if (j == from) {
      out[j] = log_alpha_plus_[without.count] + cache_[j] - from_without;
    } else {
      out[j] = log_alpha_plus_[s.count(j)] + marginal_.with_added(s.stats(j), y) - cache_[j];
    }
  }
  return out;
}

void CollapsedGibbs::update(int i, Rng& rng) {
  AllocationState& s = *state_;
  const int k = s.k();
  if (k == 1) return;
  const int from = s.label(i);
  const double y = s.y(i);
  SufficientStats without = s.stats(from);
  without.remove(y);
  const double from_without = marginal_(without);

  // Occupied components (after removing i) get one entry each. All empty
  // components share the prior predictive and are pooled into one entry.
  scratch_log_w_.clear();
  scratch_index_.clear();
  int empties = 0;
  double singleton = 0.0;
  for (int j = 0; j < k; ++j) {
    const int m = (j == from) ? without.count : s.count(j);
    if (m == 0) {
      ++empties;
      continue;
    }
    double lw = 0.0;
    if (j == from) {
      lw = log_alpha_plus_[m] + cache_[j] - from_without;
    } else {
      lw = log_alpha_plus_[m] + marginal_.with_added(s.stats(j), y) - cache_[j];
    }
    scratch_log_w_.push_back(lw);
    scratch_index_.push_back(j);
  }
  if (empties > 0) {
    singleton = marginal_.eval(1, y, y * y);
    scratch_log_w_.push_back(log_alpha_plus_[0] + singleton + std::log(static_cast<double>(empties)));
    scratch_index_.push_back(-1);
  }

  const int pick = draw_categorical(scratch_log_w_, rng);
  int to = scratch_index_[pick];
  if (to < 0) {
    int r = rng.uniform_int(empties);
    for (int j = 0; j < k; ++j) {
      const int m = (j == from) ? without.count : s.count(j);
      if (m == 0 && r-- == 0) {
        to = j;
        break;
      }
    }
  }
  if (to == from) return;
  const double to_value =
      (s.count(to) == 0) ? singleton : marginal_.with_added(s.stats(to), y);
  s.move(i, to);
  cache_[from] = (without.count == 0) ? 0.0 : from_without;
  cache_[to] = to_value;
}

void CollapsedGibbs::sweep(Rng& rng, bool random_scan) {
  const int n = state_->n();
  if (random_scan) {
    for (int step = 0; step < n; ++step) update(rng.uniform_int(n), rng);
  } else {
    for (int i = 0; i < n; ++i) update(i, rng);
  }
}

void CollapsedGibbs::insert_empty(int pos) {
  state_->insert_empty(pos);
  cache_.insert(cache_.begin() + pos, 0.0);
}

void CollapsedGibbs::erase_empty(int pos) {
  state_->erase_empty(pos);
  cache_.erase(cache_.begin() + pos);
}

void CollapsedGibbs::set_scale(double tau, double delta) {
  marginal_.set_scale(tau, delta);
  for (int j = 0; j < state_->k(); ++j) cache_[j] = marginal_(state_->stats(j));
}

double CollapsedGibbs::log_likelihood() const {
  double s = 0.0;
  for (double v : cache_) s += v;
  return s;
}

void gibbs_sweep_fixed_k(AllocationState& state, const ModelSpec& spec, Rng& rng) {
  CollapsedGibbs gibbs(state, spec);
  gibbs.sweep(rng);
}

FixedKRun run_fixed_k_chain(std::span<const double> data, const ModelSpec& spec,
                            const ChainConfig& config, std::span<const int> init) {
  spec.validate();
  config.validate();
  std::vector<int> labels(init.begin(), init.end());
  AllocationState state(std::vector<double>(data.begin(), data.end()), std::move(labels), spec.k,
                        spec.mu);
  CollapsedGibbs gibbs(state, spec);
  Rng rng(config.seed, static_cast<std::uint64_t>(spec.k));

  for (long s = 0; s < config.burnin; ++s) gibbs.sweep(rng, config.random_scan);
  std::vector<OccupancyPattern> trace;
  trace.reserve(config.kept());
  for (long s = 1; s <= config.sweeps; ++s) {
    gibbs.sweep(rng, config.random_scan);
    if (s % config.thin == 0) trace.push_back(state.pattern());
  }
  FixedKRun out;
  out.summary = summarize_patterns(spec.k, state.n(), std::move(trace), config.batches);
  out.final_labels = state.labels();
  return out;
}

std::vector<ChainSummary> run_fixed_k_series(std::span<const double> data, const ModelSpec& spec,
                                             int kmax, const ChainConfig& config, InitMode init,
                                             int jobs, const std::function<void(int)>& on_done) {
  if (kmax < 1) throw std::invalid_argument("run_fixed_k_series: kmax must be >= 1");
  std::vector<ChainSummary> out(kmax);
  if (init == InitMode::warm_start || jobs <= 1) {
    std::vector<int> labels;
    for (int k = 1; k <= kmax; ++k) {
      ModelSpec sk = spec;
      sk.k = k;
      auto run = run_fixed_k_chain(data, sk, config,
                                   init == InitMode::warm_start ? std::span<const int>(labels)
                                                                : std::span<const int>());
      out[k - 1] = std::move(run.summary);
      labels = std::move(run.final_labels);
      if (on_done) on_done(k);
    }
    return out;
  }

  std::atomic<int> next{1};
  std::vector<std::exception_ptr> errors(kmax);
  auto worker = [&] {
    for (int k = next++; k <= kmax; k = next++) {
      try {
        ModelSpec sk = spec;
        sk.k = k;
        out[k - 1] = run_fixed_k_chain(data, sk, config).summary;
      } catch (...) {
        errors[k - 1] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < std::min(jobs, kmax); ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  if (on_done) {
    for (int k = 1; k <= kmax; ++k) on_done(k);
  }
  return out;
}

double log_birth_ratio(int k, int empty, double alpha, int n, const PriorOnK& prior) {
  return prior.log_pi(k + 1) - prior.log_pi(k) + log_a_kt(k + 1, k, alpha, n) +
         std::log(static_cast<double>(k + 1)) - std::log(static_cast<double>(empty + 1));
}

void dimension_move(CollapsedGibbs& gibbs, const PriorOnK& prior, int kmax, Rng& rng,
                    DimensionStats* stats) {
  AllocationState& s = gibbs.state();
  const int k = s.k();
  const bool birth = rng.uniform() < 0.5;
  const double alpha = gibbs.spec().alpha;
  if (birth) {
    if (stats) ++stats->birth.proposed;
    if (k >= kmax || k >= prior.kmax()) return;
    const double log_r = log_birth_ratio(k, s.num_empty(), alpha, s.n(), prior);
    if (std::log(rng.uniform()) < log_r) {
      gibbs.insert_empty(rng.uniform_int(k + 1));
      if (stats) ++stats->birth.accepted;
    }
    return;
  }
  if (stats) ++stats->death.proposed;
  const int empty = s.num_empty();
  if (empty == 0 || k == 1) return;
  const double log_r = -log_birth_ratio(k - 1, empty - 1, alpha, s.n(), prior);
  if (std::log(rng.uniform()) < log_r) {
    int r = rng.uniform_int(empty);
    for (int j = 0; j < k; ++j) {
      if (s.count(j) == 0 && r-- == 0) {
        gibbs.erase_empty(j);
        break;
      }
    }
    if (stats) ++stats->death.accepted;
  }
}

void vark_sweep(CollapsedGibbs& gibbs, const PriorOnK& prior, int kmax, Rng& rng,
                DimensionStats* stats, int dim_moves) {
  gibbs.sweep(rng);
  for (int m = 0; m < dim_moves; ++m) dimension_move(gibbs, prior, kmax, rng, stats);
}

double log_hyper_target(const AllocationState& state, const ModelSpec& spec, double tau,
                        double delta, double delta_upper) {
  if (!(tau > 0.0) || !(delta > 0.0) || !(delta < delta_upper)) return kNegInf;
  ModelSpec s = spec;
  s.tau = tau;
  s.delta = delta;
  return log_f_x_given_kg(state, s) + log_tau_prior(tau) - std::log(delta_upper);
}

void mh_update_hyper(CollapsedGibbs& gibbs, HyperState& hyper, Rng& rng) {
  const AllocationState& s = gibbs.state();
  const ComponentMarginal& marg = gibbs.marginal();
  auto loglik = [&](double tau, double delta) {
    double out = 0.0;
    for (const auto& st : s.all_stats()) out += marg.eval_with(st.count, st.sum, st.sum_sq, tau, delta);
    return out;
  };
  const double current = gibbs.log_likelihood();

  // tau on the log scale; Jacobian contributes log tau.
  {
    const double u = std::log(hyper.tau);
    const double u_new = u + hyper.step_log_tau * rng.normal();
    const double tau_new = std::exp(u_new);
    const double proposed = loglik(tau_new, hyper.delta);
    const double log_r = proposed - current + log_tau_prior(tau_new) - log_tau_prior(hyper.tau) +
                         (u_new - u);
    ++hyper.tau_moves.proposed;
    if (std::log(rng.uniform()) < log_r && tau_new > 0.0 && std::isfinite(tau_new)) {
      hyper.tau = tau_new;
      ++hyper.tau_moves.accepted;
      gibbs.set_scale(hyper.tau, hyper.delta);
    }
  }
  // delta on the logit scale of delta / delta_upper; Jacobian is
  // delta (1 - delta / delta_upper).
  {
    const double current_ll = gibbs.log_likelihood();
    const double w = std::log(hyper.delta) - std::log(hyper.delta_upper - hyper.delta);
    const double w_new = w + hyper.step_logit_delta * rng.normal();
    const double delta_new = hyper.delta_upper * std::exp(log_sigmoid(w_new));
    const double proposed = loglik(hyper.tau, delta_new);
    const double log_jac_new = log_sigmoid(w_new) + log_sigmoid(-w_new);
    const double log_jac_old = log_sigmoid(w) + log_sigmoid(-w);
    const double log_r = proposed - current_ll + log_jac_new - log_jac_old;
    ++hyper.delta_moves.proposed;
    if (std::log(rng.uniform()) < log_r && delta_new > 0.0 && delta_new < hyper.delta_upper) {
      hyper.delta = delta_new;
      ++hyper.delta_moves.accepted;
      gibbs.set_scale(hyper.tau, hyper.delta);
    }
  }
}

VarKResult run_vark_chain(std::span<const double> data, const ModelSpec& spec,
                          const PriorOnK& prior, const VarKConfig& config,
                          const std::function<void(long)>& on_progress) {
  spec.validate();
  config.chain.validate();
  if (config.kmax < 1 || config.kmax > prior.kmax())
    throw std::invalid_argument("run_vark_chain: kmax must be in 1..prior kmax");
  if (config.k_init < 1 || config.k_init > config.kmax)
    throw std::invalid_argument("run_vark_chain: k_init out of range");
  if (config.dim_moves < 1) throw std::invalid_argument("run_vark_chain: dim_moves must be >= 1");

  ModelSpec working = spec;
  HyperState hyper = config.hyper;
  if (config.update_hyper) {
    if (!(hyper.delta_upper > 0.0) || !(hyper.delta > 0.0) || !(hyper.delta < hyper.delta_upper) ||
        !(hyper.tau > 0.0))
      throw std::invalid_argument("run_vark_chain: invalid initial hyperparameters");
    working.tau = hyper.tau;
    working.delta = hyper.delta;
  }
  working.k = config.k_init;

  AllocationState state(std::vector<double>(data.begin(), data.end()), config.k_init, spec.mu);
  CollapsedGibbs gibbs(state, working);
  Rng rng(config.chain.seed, 0x7661726bULL);

  VarKResult out;
  out.kmax = config.kmax;
  const long total = config.chain.burnin + config.chain.sweeps;
  const int window = std::max(1, config.adapt_window);
  long tau_acc0 = 0, delta_acc0 = 0, adapt_round = 0;
  for (long s = 1; s <= total; ++s) {
    vark_sweep(gibbs, prior, config.kmax, rng, &out.moves, config.dim_moves);
    if (config.update_hyper) {
      mh_update_hyper(gibbs, hyper, rng);
      // Step sizes adapt only during burn-in and are frozen afterwards.
      if (s <= config.chain.burnin && s % window == 0) {
        ++adapt_round;
        const double gain = 1.0 / std::sqrt(static_cast<double>(adapt_round));
        const double tau_rate = static_cast<double>(hyper.tau_moves.accepted - tau_acc0) / window;
        const double delta_rate =
            static_cast<double>(hyper.delta_moves.accepted - delta_acc0) / window;
        hyper.step_log_tau *= std::exp(gain * (tau_rate - config.target_accept));
        hyper.step_logit_delta *= std::exp(gain * (delta_rate - config.target_accept));
        tau_acc0 = hyper.tau_moves.accepted;
        delta_acc0 = hyper.delta_moves.accepted;
      }
      if (s == config.chain.burnin) hyper.tau_moves = hyper.delta_moves = AcceptStats{};
    }
    if (s == config.chain.burnin) out.moves = DimensionStats{};
    if (s > config.chain.burnin && (s - config.chain.burnin) % config.chain.thin == 0) {
      out.k_trace.push_back(state.k());
      if (config.update_hyper) out.hyper_draws.push_back({state.k(), hyper.tau, hyper.delta});
    }
    if (on_progress && s % 10000 == 0) on_progress(s);
  }

  out.kept = static_cast<long>(out.k_trace.size());
  out.freq_k.assign(config.kmax, 0.0);
  out.se_k.assign(config.kmax, 0.0);
  for (int k : out.k_trace) out.freq_k[k - 1] += 1.0;
  std::vector<double> indicator(out.k_trace.size());
  for (int k = 1; k <= config.kmax; ++k) {
    const double c = out.freq_k[k - 1];
    out.freq_k[k - 1] = c / static_cast<double>(out.kept);
    if (c == 0.0 || c == static_cast<double>(out.kept)) continue;
    for (std::size_t i = 0; i < out.k_trace.size(); ++i) indicator[i] = out.k_trace[i] == k;
    out.se_k[k - 1] = mc_standard_error(indicator, config.chain.batches);
  }
  out.final_hyper = hyper;
  return out;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: no values");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

HyperTable hyper_median_table(std::span<const HyperDraw> draws, const std::vector<double>& probs,
                              long min_draws) {
  if (draws.empty()) throw std::invalid_argument("hyper_median_table: no draws");
  HyperTable table;
  table.probs = probs;
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_k;
  for (const auto& d : draws) {
    by_k[d.k].first.push_back(d.tau);
    by_k[d.k].second.push_back(d.delta);
  }
  for (auto& [k, vals] : by_k) {
    const long count = static_cast<long>(vals.first.size());
    if (count < min_draws) {
      table.excluded.emplace_back(k, count);
      continue;
    }
    HyperRow row;
    row.k = k;
    row.count = count;
    for (double p : probs) {
      row.tau_q.push_back(quantile(vals.first, p));
      row.delta_q.push_back(quantile(vals.second, p));
    }
    row.tau_median = quantile(vals.first, 0.5);
    row.delta_median = quantile(vals.second, 0.5);
    table.rows.push_back(std::move(row));
  }
  return table;
}

int level_off_index(std::span<const double> medians, double rel_tol) {
  for (std::size_t i = 0; i + 1 < medians.size(); ++i) {
    const double scale = std::fabs(medians[i]);
    const double change = std::fabs(medians[i + 1] - medians[i]);
    if (change < rel_tol * scale || (change == 0.0 && scale == 0.0)) return static_cast<int>(i);
  }
  return -1;
}

HyperSuggestion suggest_hyper(std::span<const HyperDraw> draws, const HyperTable& table,
                              double rel_tol) {
  if (table.rows.empty()) throw std::invalid_argument("suggest_hyper: table has no rows");
  // Level-off is searched only over runs of consecutive k.
  std::vector<double> tau_med, delta_med;
  std::vector<int> ks;
  for (const auto& r : table.rows) {
    if (!ks.empty() && r.k != ks.back() + 1) break;
    ks.push_back(r.k);
    tau_med.push_back(r.tau_median);
    delta_med.push_back(r.delta_median);
  }
  HyperSuggestion out;
  const int it = level_off_index(tau_med, rel_tol);
  const int id = level_off_index(delta_med, rel_tol);
  out.tau_leveled = it >= 0;
  out.delta_leveled = id >= 0;
  out.k_cutoff_tau = ks[it >= 0 ? it : ks.size() - 1];
  out.k_cutoff_delta = ks[id >= 0 ? id : ks.size() - 1];

  std::vector<double> taus, deltas;
  for (const auto& d : draws) {
    if (d.k >= out.k_cutoff_tau) taus.push_back(d.tau);
    if (d.k >= out.k_cutoff_delta) deltas.push_back(d.delta);
  }
  out.tau = quantile(std::move(taus), 0.5);
  out.delta = quantile(std::move(deltas), 0.5);
  return out;
}

}  // namespace mixk
