// Command-line front end for the chaos-index pipeline.
//
// Exit codes: 0 success, 1 usage/configuration, 2 data error, 3 numeric
// failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fcix/fcix.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct FlagBinding {
  CLI::App* app;
  fcix::pipeline::RunConfig* cfg;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;

  FlagBinding(CLI::App* a, fcix::pipeline::RunConfig* c) : app(a), cfg(c) {}

  void bind(const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
           flag,
           [this, key](const std::string& value) { overrides.emplace_back(key, value); },
           help)
        ->type_name("VALUE");
  }

  /// flag > file > default.
  void resolve() {
    if (!config_path.empty()) fcix::pipeline::load_config_file(*cfg, config_path);
    for (const auto& [key, value] : overrides)
      fcix::pipeline::apply_config_entry(*cfg, key, value);
    cfg->validate();
  }
};

void add_common_options(FlagBinding& binding) {
  binding.app->add_option("--config", binding.config_path,
                          "flat key = value configuration file");
  binding.bind("--output", "output", "output directory");
  binding.bind("--delimiter", "delimiter", "field delimiter (default ,)");
  binding.bind("--seed", "decomposition.seed", "decomposition seed");
  binding.bind("--shuffle-seed", "entropy.seed", "surrogate-test seed");
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Financial chaos index pipeline"};
  app.require_subcommand(1);

  fcix::pipeline::RunConfig cfg;

  // fcix: panel -> tensor -> consensus decomposition -> index series
  auto* cmd_fcix = app.add_subcommand("fcix", "compute the chaos index from a price panel");
  FlagBinding fcix_binding(cmd_fcix, &cfg);
  add_common_options(fcix_binding);
  fcix_binding.bind("--input", "input", "long-format price file (date,ticker,price)");
  fcix_binding.bind("--input-format", "input_format", "long (default) or wide");
  fcix_binding.bind("--lag", "lag", "return lag l (default 1)");
  fcix_binding.bind("--aggregation", "aggregation", "daily, monthly or quarterly");
  fcix_binding.bind("--drop-incomplete", "drop_incomplete",
                    "drop tickers with missing dates (true/false)");
  fcix_binding.bind("--tol", "decomposition.tol", "decomposition stop tolerance");
  fcix_binding.bind("--max-iters", "decomposition.max_iters", "decomposition sweep cap");

  // analyze: segmentation + information + memory diagnostics over series
  auto* cmd_analyze = app.add_subcommand("analyze", "characterize one or two index series");
  FlagBinding analyze_binding(cmd_analyze, &cfg);
  add_common_options(analyze_binding);
  std::vector<std::string> series_paths;
  cmd_analyze->add_option("--series", series_paths, "series file (repeat for two)")
      ->expected(1, 2);
  std::vector<std::string> analyses;
  cmd_analyze
      ->add_option("--analysis", analyses,
                   "run only the named analyses (segmentation, entropy, whittle, "
                   "acf, xcf, var, equilibrium, dynamics)")
      ->expected(1, 8);
  analyze_binding.bind("--k-star", "segmentation.k_star", "number of change points");
  analyze_binding.bind("--gamma", "segmentation.gamma", "kernel bandwidth (0 = median rule)");
  analyze_binding.bind("--k-max", "segmentation.k_max", "emit elbow report up to this K");
  analyze_binding.bind("--bins", "entropy.bins", "quantile bins");
  analyze_binding.bind("--order", "entropy.order", "Markov order k");
  analyze_binding.bind("--n-shuffles", "entropy.n_shuffles", "surrogates for p-values");
  analyze_binding.bind("--whittle-exponent", "whittle.exponent", "bandwidth exponent");
  analyze_binding.bind("--var-p", "var.p", "autoregression order");
  analyze_binding.bind("--horizon", "var.horizon", "impulse-response horizon");
  analyze_binding.bind("--beta2", "equilibrium.beta2", "equilibrium coefficient on series 2");
  analyze_binding.bind("--rho", "equilibrium.rho", "equilibrium intercept");

  // verify: closed-form identity self-check
  auto* cmd_verify = app.add_subcommand("verify", "run the identity self-check suite");
  bool inject_perturbation = false;
  cmd_verify->add_flag("--inject-perturbation", inject_perturbation,
                       "negative control: feed perturbed matrices to the power-identity check");
  int verify_cases = 50;
  cmd_verify->add_option("--cases", verify_cases, "matrices per check (default 50)");
  std::string verify_output;
  cmd_verify->add_option("--output", verify_output,
                         "also write verify_report.json to this directory");

  // lag-report: pipeline sweep over lags
  auto* cmd_lag = app.add_subcommand("lag-report", "decomposition error and mean index vs lag");
  FlagBinding lag_binding(cmd_lag, &cfg);
  add_common_options(lag_binding);
  lag_binding.bind("--input", "input", "long-format price file");
  lag_binding.bind("--lags", "report.lags", "space-separated lags, e.g. \"1 2 3\"");

  // dynamics: critical points of the information-flow system
  auto* cmd_dynamics = app.add_subcommand("dynamics", "critical points and trajectories");
  FlagBinding dyn_binding(cmd_dynamics, &cfg);
  add_common_options(dyn_binding);
  std::vector<std::string> dyn_series;
  cmd_dynamics->add_option("--series", dyn_series, "two aligned series for computed parameters")
      ->expected(0, 2);
  dyn_binding.bind("--source", "dynamics.source", "computed or explicit");
  dyn_binding.bind("--alpha", "dynamics.alpha", "transfer entropy a->b");
  dyn_binding.bind("--beta", "dynamics.beta", "transfer entropy b->a");
  dyn_binding.bind("--gamma", "dynamics.gamma", "self-entropy of a");
  dyn_binding.bind("--delta", "dynamics.delta", "self-entropy of b");
  dyn_binding.bind("--theta", "dynamics.theta", "impulse-path regularity term");
  dyn_binding.bind("--dt", "dynamics.dt", "integration step");
  dyn_binding.bind("--steps", "dynamics.steps", "trajectory steps (0 = none)");
  dyn_binding.bind("--f0", "dynamics.f0", "trajectory start F");
  dyn_binding.bind("--v0", "dynamics.v0", "trajectory start V");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message or requested help
    return code == 0 ? 0 : kExitUsage;
  }

  if (cmd_fcix->parsed()) {
    fcix_binding.resolve();
    const auto result = fcix::pipeline::run_fcix(cfg);
    std::cout << "wrote " << result.artifact_names.size() << " artifacts to "
              << cfg.output << " (T=" << result.daily.size()
              << ", rel_error=" << result.factors.rel_error
              << ", clamped=" << result.daily.negatives_clamped << ")\n";
    return 0;
  }
  if (cmd_analyze->parsed()) {
    analyze_binding.resolve();
    fcix::pipeline::AnalyzeRequest request{series_paths, analyses};
    fcix::pipeline::run_analyze(cfg, request);
    std::cout << "analysis reports written to " << cfg.output << "\n";
    return 0;
  }
  if (cmd_verify->parsed()) {
    const auto report = fcix::pipeline::run_verify(inject_perturbation, verify_cases);
    for (const auto& row : report.rows)
      std::printf("%-4s  %-45s %s\n", row.pass ? "PASS" : "FAIL", row.name.c_str(),
                  row.detail.c_str());
    if (!verify_output.empty())
      fcix::pipeline::write_verify_report(report, verify_output);
    return report.all_pass() ? 0 : kExitNumeric;
  }
  if (cmd_lag->parsed()) {
    lag_binding.resolve();
    fcix::pipeline::run_lag_report(cfg);
    std::cout << "lag report written to " << cfg.output << "\n";
    return 0;
  }
  if (cmd_dynamics->parsed()) {
    dyn_binding.resolve();
    fcix::pipeline::run_dynamics(cfg, dyn_series);
    std::cout << "dynamics report written to " << cfg.output << "\n";
    return 0;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const fcix::InvalidParameter& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fcix::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fcix::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
