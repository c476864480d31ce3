// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "mixk/logmath.hpp"
#include "mixk/oracle.hpp"
#include "mixk/samplers.hpp"
#include "test_support.hpp"

using namespace mixk;
using namespace mixk::testing;

namespace {

int allocation_index(const std::vector<int>& labels, int k) {
  int idx = 0;
  for (int g : labels) idx = idx * k + g;
  return idx;
}

std::vector<double> gibbs_allocation_frequencies(const std::vector<double>& x, const ModelSpec& spec,
                                                 long sweeps, std::uint64_t seed) {
  AllocationState st(x, spec.k, spec.mu);
  CollapsedGibbs gibbs(st, spec);
  Rng rng(seed, 99);
  std::vector<double> freq(static_cast<std::size_t>(std::pow(spec.k, x.size())), 0.0);
  for (int s = 0; s < 1000; ++s) gibbs.sweep(rng);
  for (long s = 0; s < sweeps; ++s) {
    gibbs.sweep(rng);
    freq[allocation_index(st.labels(), spec.k)] += 1.0;
  }
  for (double& f : freq) f /= static_cast<double>(sweeps);
  return freq;
}

}  // namespace

TEST_CASE("chain configuration") {
  CHECK_NOTHROW(ChainConfig{}.validate());
  CHECK_THROWS_AS((ChainConfig{39, 0, 1, 1, 20, false}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ChainConfig{100, 0, 3, 1, 20, false}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ChainConfig{100, -1, 1, 1, 20, false}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((ChainConfig{100, 0, 0, 1, 20, false}.validate()), std::invalid_argument);
}

TEST_CASE("full conditional is proportional to the joint") {
  const std::vector<double> x{0.3, -1.0, 2.2, 2.5, 0.1};
  const ModelSpec spec{3, 0.7, 0.5, 0.8, 2.0, 1.1};
  const std::vector<int> labels{0, 2, 2, 0, 0};
  AllocationState st(x, labels, 3, spec.mu);
  CollapsedGibbs gibbs(st, spec);
  for (int i = 0; i < 5; ++i) {
    const auto w = gibbs.conditional_log_weights(i);
    REQUIRE(w.size() == 3);
    for (int j = 0; j < 3; ++j) {
      std::vector<int> g = labels;
      g[i] = j;
      std::vector<int> g0 = labels;
      g0[i] = 0;
      CHECK(w[j] - w[0] == doctest::Approx(naive_log_joint(x, g, 3, spec) - naive_log_joint(x, g0, 3, spec)).epsilon(1e-10));
    }
  }
}

TEST_CASE("single component sweep leaves the allocation unchanged") {
  const std::vector<double> x{1.0, 2.0, 3.0};
  AllocationState st(x, 1);
  Rng rng(1);
  gibbs_sweep_fixed_k(st, ModelSpec{1, 1.0, 2.0, 1.0, 2.0, 1.0}, rng);
  CHECK(st.labels() == std::vector<int>{0, 0, 0});
  const FixedKRun r = run_fixed_k_chain(x, ModelSpec{1, 1.0, 2.0, 1.0, 2.0, 1.0}, ChainConfig{100, 5, 1, 1, 20, false});
  CHECK(r.summary.visits_star == std::vector<double>{1.0});
  CHECK(r.summary.visits_tilde == std::vector<double>{1.0});
  CHECK(r.summary.se_star == std::vector<double>{0.0});
}

TEST_CASE("Gibbs kernel leaves the allocation posterior invariant") {
  SUBCASE("n = 4, k = 2") {
    const std::vector<double> x{-1.0, -0.6, 1.1, 0.4};
    const ModelSpec spec{2, 1.0, 0.0, 0.5, 2.0, 0.5};
    const auto exact = exact_allocation_posterior(x, spec);
    const auto freq = gibbs_allocation_frequencies(x, spec, 100000, 5);
    CHECK(total_variation(exact, freq) < 0.01);
  }
  SUBCASE("n = 5, k = 3") {
    const auto x = toy5();
    ModelSpec spec = toy_spec();
    spec.k = 3;
    const auto exact = exact_allocation_posterior(x, spec);
    const auto freq = gibbs_allocation_frequencies(x, spec, 2000000, 6);
    CHECK(total_variation(exact, freq) < 0.01);
  }
}

TEST_CASE("fixed-k chain summaries") {
  const auto x = toy5();
  ModelSpec spec = toy_spec();
  spec.k = 3;
  const ChainConfig cfg{20000, 100, 2, 9, 20, false};
  const FixedKRun a = run_fixed_k_chain(x, spec, cfg);
  const FixedKRun b = run_fixed_k_chain(x, spec, cfg);
  CHECK(a.summary.kept == 10000);
  double s1 = 0.0, s2 = 0.0;
  for (double v : a.summary.visits_star) s1 += v;
  for (double v : a.summary.visits_tilde) s2 += v;
  CHECK(s1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.summary.visits_star == b.summary.visits_star);
  CHECK(a.summary.pattern_trace == b.summary.pattern_trace);
  CHECK(a.final_labels == b.final_labels);

  SUBCASE("series are identical for any job count") {
    const ChainConfig c{2000, 50, 1, 3, 20, false};
    const auto s1j = run_fixed_k_series(x, toy_spec(), 4, c, InitMode::all_in_one, 1);
    const auto s3j = run_fixed_k_series(x, toy_spec(), 4, c, InitMode::all_in_one, 3);
    REQUIRE(s1j.size() == 4);
    for (int k = 0; k < 4; ++k) CHECK(s1j[k].pattern_trace == s3j[k].pattern_trace);
    const auto warm = run_fixed_k_series(x, toy_spec(), 4, c, InitMode::warm_start, 1);
    for (int k = 0; k < 4; ++k) CHECK(warm[k].k == k + 1);
  }
}

TEST_CASE("dimension moves") {
  const std::vector<double> x{0.1, 0.5, 2.0};
  const ModelSpec spec{2, 1.0, 0.0, 1.0, 2.0, 1.0};
  const PriorOnK prior = prior_poisson1(5);

  SUBCASE("birth ratio") {
    for (int k = 1; k < 5; ++k)
      for (int e = 0; e < k; ++e)
        CHECK(log_birth_ratio(k, e, 1.0, 3, prior) ==
              doctest::Approx(prior.log_pi(k + 1) - prior.log_pi(k) + la_kt(k + 1, k, 1.0, 3) +
                              std::log(k + 1.0) - std::log(e + 1.0)));
  }
  SUBCASE("no empty component and k at kmax: nothing can change") {
    AllocationState st(x, {0, 1, 1}, 2, 0.0);
    CollapsedGibbs gibbs(st, spec);
    Rng rng(4);
    DimensionStats stats;
    const PriorOnK p2 = prior_uniform(2);
    for (int i = 0; i < 200; ++i) dimension_move(gibbs, p2, 2, rng, &stats);
    CHECK(st.k() == 2);
    CHECK(stats.birth.accepted == 0);
    CHECK(stats.death.accepted == 0);
  }
  SUBCASE("likelihood is unchanged by dimension moves") {
    AllocationState st(x, {0, 1, 1}, 2, 0.0);
    CollapsedGibbs gibbs(st, spec);
    Rng rng(8);
    const double ll = gibbs.log_likelihood();
    for (int i = 0; i < 100; ++i) {
      dimension_move(gibbs, prior, 5, rng);
      CHECK(gibbs.log_likelihood() == doctest::Approx(ll).epsilon(1e-12));
    }
  }
}

TEST_CASE("variable-k sampler matches the exact posterior of k") {
  const auto x = toy5();
  for (const PriorOnK& prior : {prior_poisson1(3), prior_uniform(3)}) {
    VarKConfig vc;
    vc.chain = ChainConfig{1000000, 10000, 1, 21, 20, false};
    vc.kmax = 3;
    const VarKResult r = run_vark_chain(x, toy_spec(), prior, vc);
    const auto exact = exact_posterior_k(x, 3, toy_spec(), prior);
    CHECK(total_variation(exact, r.freq_k) < 0.01);
    double s = 0.0;
    for (double f : r.freq_k) s += f;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("hyperparameter updates") {
  SUBCASE("target with one observation per component matches quadrature") {
    const std::vector<double> x{0.4, 2.5, -1.0};
    AllocationState st(x, {0, 1, 2}, 3, 0.0);
    const ModelSpec spec{3, 1.0, 0.5, 1.0, 2.0, 1.0};
    const double du = 5.0;
    for (double tau : {0.04, 0.5, 3.0}) {
      for (double delta : {0.3, 2.0}) {
        ModelSpec s = spec;
        s.tau = tau;
        s.delta = delta;
        double quad = 0.0;
        for (double v : x) quad += quad_component_marginal(std::vector<double>{v}, s).log_value;
        const double prior = -2.0 * std::log1p(tau) - std::log(du);
        CHECK(log_hyper_target(st, spec, tau, delta, du) == doctest::Approx(quad + prior).epsilon(1e-9));
      }
    }
    CHECK(log_hyper_target(st, spec, 1.0, 5.5, du) == kNegInf);
  }
  SUBCASE("step sizes adapt during burn-in toward the acceptance target") {
    std::mt19937_64 eng(2);
    std::normal_distribution<double> a(10.0, 1.0), b(20.0, 1.5);
    std::vector<double> x;
    for (int i = 0; i < 30; ++i) x.push_back(i % 2 ? a(eng) : b(eng));
    VarKConfig vc;
    vc.chain = ChainConfig{20000, 5000, 1, 3, 20, false};
    vc.kmax = 10;
    vc.update_hyper = true;
    vc.hyper.tau = 1.0;
    vc.hyper.delta = 1.0;
    vc.hyper.delta_upper = 30.0;
    const VarKResult r = run_vark_chain(x, ModelSpec{1, 1.0, 15.0, 1.0, 2.0, 1.0}, prior_poisson1(10), vc);
    CHECK(r.final_hyper.tau_moves.rate() > 0.2);
    CHECK(r.final_hyper.tau_moves.rate() < 0.4);
    CHECK(r.final_hyper.delta_moves.rate() > 0.2);
    CHECK(r.final_hyper.delta_moves.rate() < 0.4);
    CHECK(r.hyper_draws.size() == 20000);
    for (const auto& d : r.hyper_draws) {
      CHECK(d.delta > 0.0);
      CHECK(d.delta < 30.0);
    }
  }
}

TEST_CASE("hyperparameter tables") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0}, 0.25) == doctest::Approx(1.25));
  CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);

  SUBCASE("constant draws") {
    std::vector<HyperDraw> d;
    for (int k = 2; k <= 6; ++k)
      for (int i = 0; i < 150; ++i) d.push_back({k, 0.04, 2.0});
    for (int i = 0; i < 20; ++i) d.push_back({7, 0.04, 2.0});
    const HyperTable t = hyper_median_table(d);
    REQUIRE(t.rows.size() == 5);
    CHECK(t.excluded.size() == 1);
    CHECK(t.excluded[0].first == 7);
    for (const auto& row : t.rows) {
      CHECK(row.tau_median == 0.04);
      CHECK(row.delta_median == 2.0);
      CHECK(row.tau_q.size() == 5);
    }
    const HyperSuggestion s = suggest_hyper(d, t);
    CHECK(s.k_cutoff_tau == 2);
    CHECK(s.k_cutoff_delta == 2);
    CHECK(s.tau == 0.04);
    CHECK(s.delta == 2.0);
  }
  SUBCASE("geometric decay then flat") {
    const std::vector<double> m{16.0, 8.0, 4.0, 2.0, 1.0, 1.0, 1.0};
    CHECK(level_off_index(m, 0.25) == 4);
    const std::vector<double> none{8.0, 4.0, 2.0};
    CHECK(level_off_index(none, 0.25) == -1);
  }
}
