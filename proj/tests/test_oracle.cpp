// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mixk/commands.hpp"
#include "mixk/logmath.hpp"
#include "mixk/oracle.hpp"
#include "test_support.hpp"

using namespace mixk;
using namespace mixk::testing;

TEST_CASE("enumeration agrees with a from-scratch recursion") {
  for (const auto& [x, spec] : {std::pair{toy5(), toy_spec()}, std::pair{toy6(), toy_spec()},
                                std::pair{toy8(), toy8_spec()}}) {
    const EnumerationResult e = enumerate_exact(x, 3, spec);
    const NaiveEnumeration r = naive_enumerate(x, 3, spec);
    for (int k = 1; k <= 3; ++k) {
      CHECK(rel_gap(e.log_f[k - 1], r.log_f[k - 1]) < 1e-11);
      CHECK(rel_gap(e.log_fstar[k - 1], r.log_fstar[k - 1]) < 1e-11);
      CHECK(rel_gap(e.log_fdagger[k - 1], r.log_fdagger[k - 1]) < 1e-11);
      for (int t = 1; t <= k; ++t) CHECK(e.prob_star[k - 1][t - 1] == doctest::Approx(r.prob_star[k - 1][t - 1]).epsilon(1e-10));
      for (int h = 1; h <= k; ++h) CHECK(e.prob_tilde[k - 1][h - 1] == doctest::Approx(r.prob_tilde[k - 1][h - 1]).epsilon(1e-10));
    }
  }
}

TEST_CASE("enumeration special cases") {
  const ModelSpec spec{1, 1.0, 0.5, 0.8, 2.0, 1.2};
  SUBCASE("one observation: every f_k is the prior predictive") {
    const std::vector<double> x{1.7};
    const EnumerationResult e = enumerate_exact(x, 4, spec);
    const double pred = log_predictive(1.7, SufficientStats{}, 0.0, spec);
    for (double lf : e.log_f) CHECK(lf == doctest::Approx(pred).epsilon(1e-12));
  }
  SUBCASE("three observations, two components") {
    const std::vector<double> x{0.1, 1.9, 2.4};
    const EnumerationResult e = enumerate_exact(x, 2, spec);
    std::vector<double> terms;
    for_each_labeling(3, 2, [&](const std::vector<int>& g) { terms.push_back(naive_log_joint(x, g, 2, spec)); });
    REQUIRE(terms.size() == 8);
    CHECK(rel_gap(e.log_f[1], lse(terms)) < 1e-12);
    CHECK(rel_gap(e.log_f[1], log_add_exp(la_kt(2, 1, 1.0, 3) + e.log_f[0], e.log_fstar[1])) < 1e-12);
  }
  SUBCASE("f*_1 = f+_1 = f_1") {
    const EnumerationResult e = enumerate_exact(toy6(), 3, spec);
    CHECK(e.log_fstar[0] == doctest::Approx(e.log_f[0]).epsilon(1e-13));
    CHECK(e.log_fdagger[0] == doctest::Approx(e.log_f[0]).epsilon(1e-13));
  }
  SUBCASE("deterministic") {
    const EnumerationResult a = enumerate_exact(toy8(), 3, toy8_spec());
    const EnumerationResult b = enumerate_exact(toy8(), 3, toy8_spec());
    CHECK(a.log_f == b.log_f);
    CHECK(a.prob_tilde == b.prob_tilde);
  }
  SUBCASE("instance too large") {
    const std::vector<double> x(12, 0.5);
    CHECK_THROWS_AS(enumerate_exact(x, 4, spec), std::length_error);
  }
}

TEST_CASE("identities between f_k, f*_t and f+_h") {
  for (const auto& [x, spec] : {std::pair{toy5(), toy_spec()}, std::pair{toy6(), toy_spec()},
                                std::pair{toy8(), toy8_spec()}}) {
    const auto rows = identity_checks(enumerate_exact(x, 3, spec), spec.alpha);
    CHECK(rows.size() > 20);
    for (const auto& r : rows) {
      INFO(r.quantity << " " << r.index << " rel " << r.score);
      CHECK(r.pass);
    }
  }
}

TEST_CASE("exact posterior of k") {
  const auto x = toy5();
  const ModelSpec spec = toy_spec();
  CHECK(exact_posterior_k(x, 1, spec, prior_uniform(1)) == std::vector<double>{1.0});
  const auto u = exact_posterior_k(x, 3, spec, prior_uniform(3));
  const auto p = exact_posterior_k(x, 3, spec, prior_poisson1(3));
  CHECK(u[0] + u[1] + u[2] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((p[2] / p[1]) / (u[2] / u[1]) == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
  CHECK((p[1] / p[0]) / (u[1] / u[0]) == doctest::Approx(1.0 / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(exact_posterior_k(x, 3, spec, prior_uniform(4)), std::invalid_argument);
}

TEST_CASE("allocation posterior") {
  const std::vector<double> x{0.3, -0.2, 1.5};
  ModelSpec spec = toy_spec();
  spec.k = 2;
  const auto p = exact_allocation_posterior(x, spec);
  REQUIRE(p.size() == 8);
  std::vector<double> terms;
  for_each_labeling(3, 2, [&](const std::vector<int>& g) { terms.push_back(naive_log_joint(x, g, 2, spec)); });
  const double z = lse(terms);
  for (int i = 0; i < 8; ++i) CHECK(p[i] == doctest::Approx(std::exp(terms[i] - z)).epsilon(1e-12));
}

TEST_CASE("quadrature of the component marginal") {
  SUBCASE("symmetric single observation") {
    const ModelSpec spec{1, 1.0, 1.0, 1.0, 2.0, 2.0};
    const QuadratureResult q = quad_component_marginal(std::vector<double>{1.0}, spec);
    CHECK(q.converged);
    CHECK(rel_gap(q.log_value, naive_log_marginal({1.0}, spec)) < 1e-8);
  }
  SUBCASE("two observations at mu +- c") {
    const ModelSpec spec{1, 1.0, 1.0, 0.3, 2.0, 0.7};
    const QuadratureResult q = quad_component_marginal(std::vector<double>{-0.5, 2.5}, spec);
    CHECK(q.converged);
    CHECK(rel_gap(q.log_value, naive_log_marginal({-0.5, 2.5}, spec)) < 1e-6);
  }
  SUBCASE("scaling shifts by -m log s") {
    const ModelSpec spec{1, 1.0, 0.5, 0.7, 2.5, 1.0};
    ModelSpec scaled = spec;
    const double s = 4.0;
    scaled.mu *= s;
    scaled.delta *= s * s;
    const auto a = quad_component_marginal(std::vector<double>{0.2, 1.1}, spec);
    const auto b = quad_component_marginal(std::vector<double>{0.8, 4.4}, scaled);
    CHECK(b.log_value - a.log_value == doctest::Approx(-2.0 * std::log(s)).epsilon(1e-8));
  }
  SUBCASE("fixed grid used by the oracle command") {
    const auto checks = quadrature_checks();
    CHECK(checks.size() >= 20);
    for (const auto& c : checks) {
      CHECK(c.quadrature.converged);
      CHECK(c.relative_error < 1e-6);
    }
  }
}
