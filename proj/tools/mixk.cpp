// Apache License, Version 2.0, refer to LICENSE.txt
//
// mixk: posterior of the number of components in a finite mixture of
// univariate normals.

#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "mixk/commands.hpp"

namespace {

void add_model_options(CLI::App* cmd, mixk::HyperOptionsBase& o) {
  cmd->add_option("--data", o.data, "dataset, one value per line")->required()->check(CLI::ExistingFile);
  cmd->add_option("--mu", o.mu, "prior mean of the component means (default: rounded sample mean)");
  cmd->add_option("--alpha", o.alpha, "symmetric Dirichlet hyperparameter")->capture_default_str();
  cmd->add_option("--gamma", o.gamma, "Gamma shape of the component precisions")->capture_default_str();
  cmd->add_option("--kmax", o.kmax, "largest number of components")->capture_default_str();
  cmd->add_option("--prior-k", o.prior_k, "prior on k: uniform, poisson1 or a weight list")
      ->capture_default_str();
  cmd->add_option("--sweeps", o.sweeps, "sweeps after burn-in")->capture_default_str();
  cmd->add_option("--burnin", o.burnin, "burn-in sweeps")->capture_default_str();
  cmd->add_option("--thin", o.thin, "keep every thin-th sweep")->capture_default_str();
  cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
  cmd->add_option("--out", o.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior of the number of components in a normal mixture"};
  app.set_config("--config", "", "flat key = value configuration file; flags take precedence");
  app.require_subcommand(1);

  mixk::TablesOptions tables;
  std::string tables_mode = "with-binomial";
  auto* t = app.add_subcommand("tables", "bounds on pi(k|x) and hypothetical ratio tables");
  t->add_flag("--bounds", tables.bounds, "upper bounds on the posterior of k");
  t->add_flag("--hypothetical", tables.hypothetical, "ratios for data supporting exactly h0 groups");
  t->add_option("--n", tables.n, "sample sizes")->delimiter(',')->capture_default_str();
  t->add_option("--h0", tables.h0, "number of groups in the hypothetical data")->capture_default_str();
  t->add_option("--alpha", tables.alpha, "symmetric Dirichlet hyperparameter")->capture_default_str();
  t->add_option("--kmax", tables.kmax, "support of the prior on k")->capture_default_str();
  t->add_option("--rows", tables.rows, "rows to print (0: default)")->capture_default_str();
  t->add_option("--prior", tables.prior, "uniform, poisson1 or a weight list")->capture_default_str();
  t->add_option("--mode", tables_mode, "with-binomial, without-binomial or poi1-posterior")
      ->capture_default_str();
  t->add_option("--out", tables.out_dir, "output directory");

  mixk::FitOptions fit;
  auto* f = app.add_subcommand("fit", "marginal likelihoods and posterior of k");
  add_model_options(f, fit);
  f->add_option("--tau", fit.tau, "prior precision ratio")->capture_default_str();
  f->add_option("--delta", fit.delta, "Gamma rate of the component precisions")->capture_default_str();
  f->add_option("--estimator", fit.estimator, "bf, fstar, fdagger or vark")
      ->check(CLI::IsMember({"bf", "fstar", "fdagger", "vark"}))
      ->capture_default_str();
  f->add_option("--pooling", fit.pooling, "equal or inverse-variance")
      ->check(CLI::IsMember({"equal", "inverse-variance"}))
      ->capture_default_str();
  f->add_option("--init", fit.init, "warm (k-1 chain's final allocation) or all-in-one")
      ->check(CLI::IsMember({"warm", "all-in-one"}))
      ->capture_default_str();
  f->add_option("--jobs", fit.jobs, "parallel chains (all-in-one init only)")->capture_default_str();
  f->add_option("--dim-moves", fit.dim_moves, "dimension moves per sweep (vark)")->capture_default_str();

  mixk::HyperOptions hyper;
  auto* h = app.add_subcommand("hyper", "per-k medians of (tau, delta) and suggested values");
  add_model_options(h, hyper);
  h->add_option("--tau-init", hyper.tau_init, "starting tau")->capture_default_str();
  h->add_option("--delta-init", hyper.delta_init, "starting delta (default: half the upper limit)");
  h->add_option("--quantiles", hyper.quantiles, "quantiles reported per k")
      ->delimiter(',')
      ->capture_default_str();
  h->add_option("--rel-tol", hyper.rel_tol, "relative change defining the level-off")
      ->capture_default_str();
  h->add_option("--min-draws", hyper.min_draws, "minimum draws for a k to be tabulated")
      ->capture_default_str();
  h->add_option("--dim-moves", hyper.dim_moves, "dimension moves per sweep")->capture_default_str();

  mixk::OracleOptions oracle;
  auto* o = app.add_subcommand("oracle", "exact enumeration and quadrature checks on toy data");
  o->add_option("--data", oracle.data, "dataset (default: built-in five-point set)")
      ->check(CLI::ExistingFile);
  o->add_option("--mu", oracle.mu, "prior mean");
  o->add_option("--tau", oracle.tau, "prior precision ratio");
  o->add_option("--gamma", oracle.gamma, "Gamma shape");
  o->add_option("--delta", oracle.delta, "Gamma rate");
  o->add_option("--alpha", oracle.alpha, "Dirichlet hyperparameter");
  o->add_option("--kmax", oracle.kmax, "largest number of components")->capture_default_str();
  o->add_option("--sweeps", oracle.sweeps, "sweeps per fixed-k chain")->capture_default_str();
  o->add_option("--burnin", oracle.burnin, "burn-in sweeps")->capture_default_str();
  o->add_option("--seed", oracle.seed, "random seed")->capture_default_str();
  o->add_option("--z-limit", oracle.z_limit, "allowed standard errors")->capture_default_str();
  o->add_flag("--quadrature", oracle.quadrature, "closed-form marginal against quadrature");
  o->add_option("--out", oracle.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? mixk::kExitOk : mixk::kExitUsage;
  }

  try {
    if (*t) {
      tables.mode = mixk::parse_ratio_mode(tables_mode);
      return mixk::cmd_tables(tables, std::cout, std::cerr);
    }
    if (*f) return mixk::cmd_fit(fit, std::cout, std::cerr);
    if (*h) return mixk::cmd_hyper(hyper, std::cout, std::cerr);
    if (*o) return mixk::cmd_oracle(oracle, std::cout, std::cerr);
  } catch (const std::invalid_argument& e) {
    std::cerr << "mixk: " << e.what() << '\n';
    return mixk::kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "mixk: " << e.what() << '\n';
    return mixk::kExitDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "mixk: " << e.what() << '\n';
    return mixk::kExitCheckFailed;
  }
  return mixk::kExitUsage;
}
