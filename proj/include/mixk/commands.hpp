// Apache License, Version 2.0, refer to LICENSE.txt
//
// The four front-end commands as library calls. Each takes a plain options
// struct, writes its CSV files into options.out_dir (created on demand,
// together with a config.echo of the options) and returns a process exit
// code. Progress and reports go to the supplied streams.

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mixk/estimators.hpp"
#include "mixk/model.hpp"
#include "mixk/oracle.hpp"
#include "mixk/samplers.hpp"

namespace mixk {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerate = 3;

// Output root for runs that do not name a directory: $MIXK_OUTPUT_ROOT, or
// "runs" under the working directory.
std::filesystem::path default_output_root();

struct TablesOptions {
  bool bounds = false;
  bool hypothetical = false;
  std::vector<int> n{20, 50, 100, 500};
  int h0 = 9;
  double alpha = 1.0;
  int kmax = 50;  // support of the prior for bounds
  int rows = 0;   // 0: k = 1..10 for bounds, k = h0..h0+6 for ratios
  std::string prior = "uniform";
  RatioMode mode = RatioMode::with_binomial;
  std::filesystem::path out_dir;
};

int cmd_tables(const TablesOptions& options, std::ostream& out, std::ostream& log);

struct HyperOptionsBase {
  std::filesystem::path data;
  std::optional<double> mu;  // default: sample mean rounded to one significant digit
  double alpha = 1.0;
  double gamma = 2.0;
  int kmax = 50;
  std::string prior_k = "uniform";
  long sweeps = 20000;
  long burnin = 1000;
  int thin = 1;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;
};

struct FitOptions : HyperOptionsBase {
  double tau = 0.04;
  double delta = 2.0;
  std::string estimator = "fdagger";  // bf, fstar, fdagger or vark
  std::string pooling = "equal";
  std::string init = "warm";  // warm or all-in-one
  int jobs = 1;
  int dim_moves = 1;
};

int cmd_fit(const FitOptions& options, std::ostream& out, std::ostream& log);

struct HyperOptions : HyperOptionsBase {
  HyperOptions() {
    prior_k = "poisson1";
    sweeps = 1000000;
    burnin = 10000;
    thin = 10;
  }
  double tau_init = 1.0;
  std::optional<double> delta_init;  // default: half of delta_upper
  std::vector<double> quantiles = kDefaultHyperQuantiles;
  double rel_tol = 0.25;
  long min_draws = 100;
  int dim_moves = 1;
};

int cmd_hyper(const HyperOptions& options, std::ostream& out, std::ostream& log);

// ---------------------------------------------------------------------------
// Oracle comparisons.

// A two-cluster set of five observations used by default for oracle runs.
std::vector<double> builtin_toy_data();
ModelSpec builtin_toy_spec();

struct CheckRow {
  std::string quantity;
  int index = 0;
  double exact = 0.0;
  double estimate = 0.0;
  double se = 0.0;      // zero for deterministic checks
  double score = 0.0;   // |estimate - exact| / se, or relative error when se = 0
  bool pass = false;
};

// Identities relating f_k, f*_t and f+_h on an enumerated instance, each checked
// to rel_tol relative.
std::vector<CheckRow> identity_checks(const EnumerationResult& e, double alpha,
                                      double rel_tol = 1e-10);

// Fixed-k chains for k = 1..kmax against enumeration: normalized f_k from
// fstar and fdagger and the single-chain Bayes factors, each within
// z_limit batch-means standard errors.
std::vector<CheckRow> estimator_checks(std::span<const double> data, const ModelSpec& spec, int kmax,
                                       const ChainConfig& config, double z_limit = 3.0);

struct QuadratureCheck {
  std::vector<double> data;
  ModelSpec spec;
  double closed_form = 0.0;
  QuadratureResult quadrature;
  double relative_error = 0.0;
};

// Closed-form component marginal against quadrature on a fixed grid of
// (data, hyperparameter) settings with at most four observations.
std::vector<QuadratureCheck> quadrature_checks();

struct OracleOptions {
  std::filesystem::path data;  // empty: built-in toy set
  std::optional<double> mu, tau, gamma, delta, alpha;
  int kmax = 3;
  long sweeps = 100000;
  long burnin = 1000;
  std::uint64_t seed = 1;
  double z_limit = 3.0;
  bool quadrature = false;
  std::filesystem::path out_dir;
};

int cmd_oracle(const OracleOptions& options, std::ostream& out, std::ostream& log);

}  // namespace mixk
