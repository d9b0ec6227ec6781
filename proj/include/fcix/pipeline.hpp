#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fcix/dynamics.hpp"
#include "fcix/entropy.hpp"
#include "fcix/errors.hpp"
#include "fcix/fracts.hpp"
#include "fcix/io.hpp"
#include "fcix/panel.hpp"
#include "fcix/rpcm.hpp"
#include "fcix/rpct.hpp"
#include "fcix/segment.hpp"
#include "fcix/version.hpp"

namespace fcix::pipeline {

using nlohmann::json;

/// Flat configuration shared by all subcommands. Precedence is
/// command-line flag > config file > default.
struct RunConfig {
  std::string input;
  std::string output = "out";
  char delimiter = ',';
  bool drop_incomplete = false;
  bool wide_input = false;  // date,TICKER1,TICKER2,... layout
  int lag = 1;

  double decomposition_tol = 1e-10;
  int decomposition_max_iters = 500;
  std::uint64_t decomposition_seed = 0;

  rpct::Aggregation aggregation = rpct::Aggregation::monthly;

  int segmentation_k_star = 2;
  double segmentation_gamma = 0.0;  // 0: median heuristic
  int segmentation_min_len = 2;
  int segmentation_k_max = 0;  // 0: no elbow report

  int entropy_m = 2;
  double entropy_r_frac = 0.2;
  int entropy_bins = 3;
  int entropy_order = 1;
  int entropy_n_shuffles = 199;
  std::uint64_t entropy_seed = 20190101;

  double whittle_exponent = 0.65;

  int var_p = 1;
  int var_horizon = 20;

  double equilibrium_beta1 = 1.0;
  double equilibrium_beta2 = -1.199;
  double equilibrium_rho = 0.598;

  bool dynamics_computed = true;  // params source: computed | explicit
  dynamics::SystemParams dynamics_params{0.005, 0.022, 0.678, 1.671, 0.160};
  double dynamics_dt = 0.001;
  int dynamics_steps = 0;  // 0: no trajectory emitted
  double dynamics_f0 = 0.0;
  double dynamics_v0 = 0.0;

  std::vector<int> report_lags = {1, 2, 3, 4, 5};

  void validate() const {
    if (lag < 1) throw InvalidParameter("lag must be >= 1");
    if (!(decomposition_tol > 0)) throw InvalidParameter("decomposition.tol must be > 0");
    if (decomposition_max_iters < 1)
      throw InvalidParameter("decomposition.max_iters must be >= 1");
    if (segmentation_k_star < 1) throw InvalidParameter("segmentation.k_star must be >= 1");
    if (segmentation_gamma < 0) throw InvalidParameter("segmentation.gamma must be >= 0");
    if (segmentation_min_len < 1)
      throw InvalidParameter("segmentation.min_len must be >= 1");
    if (entropy_m < 1) throw InvalidParameter("entropy.m must be >= 1");
    if (!(entropy_r_frac > 0)) throw InvalidParameter("entropy.r_frac must be > 0");
    if (entropy_bins < 2) throw InvalidParameter("entropy.bins must be >= 2");
    if (entropy_order < 1) throw InvalidParameter("entropy.order must be >= 1");
    if (entropy_n_shuffles < 99)
      throw InvalidParameter("entropy.n_shuffles must be >= 99");
    if (!(whittle_exponent > 0 && whittle_exponent < 1))
      throw InvalidParameter("whittle.exponent must be in (0, 1)");
    if (var_p < 1) throw InvalidParameter("var.p must be >= 1");
    if (var_horizon < 0) throw InvalidParameter("var.horizon must be >= 0");
    if (!(dynamics_dt > 0)) throw InvalidParameter("dynamics.dt must be > 0");
    if (dynamics_steps < 0) throw InvalidParameter("dynamics.steps must be >= 0");
    if (report_lags.empty()) throw InvalidParameter("report.lags must not be empty");
    for (int l : report_lags)
      if (l < 1) throw InvalidParameter("report.lags entries must be >= 1");
  }
};

inline rpct::Aggregation parse_aggregation(const std::string& s) {
  if (s == "daily") return rpct::Aggregation::daily;
  if (s == "monthly") return rpct::Aggregation::monthly;
  if (s == "quarterly") return rpct::Aggregation::quarterly;
  throw InvalidParameter("aggregation must be daily, monthly or quarterly");
}

/// Applies `key = value` lines (# comments allowed) onto a config.
inline void apply_config_entry(RunConfig& cfg, const std::string& key,
                               const std::string& value) {
  auto as_int = [&] { return static_cast<int>(io::parse_double(value, key)); };
  auto as_u64 = [&] {
    return static_cast<std::uint64_t>(io::parse_double(value, key));
  };
  auto as_double = [&] { return io::parse_double(value, key); };
  auto as_bool = [&] {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw InvalidParameter(key + " must be true or false");
  };
  if (key == "input") cfg.input = value;
  else if (key == "output") cfg.output = value;
  else if (key == "delimiter") {
    if (value.size() != 1) throw InvalidParameter("delimiter must be one character");
    cfg.delimiter = value[0];
  } else if (key == "drop_incomplete") cfg.drop_incomplete = as_bool();
  else if (key == "input_format") {
    if (value == "long") cfg.wide_input = false;
    else if (value == "wide") cfg.wide_input = true;
    else throw InvalidParameter("input_format must be long or wide");
  } else if (key == "lag") cfg.lag = as_int();
  else if (key == "decomposition.tol") cfg.decomposition_tol = as_double();
  else if (key == "decomposition.max_iters") cfg.decomposition_max_iters = as_int();
  else if (key == "decomposition.seed") cfg.decomposition_seed = as_u64();
  else if (key == "aggregation") cfg.aggregation = parse_aggregation(value);
  else if (key == "segmentation.k_star") cfg.segmentation_k_star = as_int();
  else if (key == "segmentation.gamma") cfg.segmentation_gamma = as_double();
  else if (key == "segmentation.min_len") cfg.segmentation_min_len = as_int();
  else if (key == "segmentation.k_max") cfg.segmentation_k_max = as_int();
  else if (key == "entropy.m") cfg.entropy_m = as_int();
  else if (key == "entropy.r_frac") cfg.entropy_r_frac = as_double();
  else if (key == "entropy.bins") cfg.entropy_bins = as_int();
  else if (key == "entropy.order") cfg.entropy_order = as_int();
  else if (key == "entropy.n_shuffles") cfg.entropy_n_shuffles = as_int();
  else if (key == "entropy.seed") cfg.entropy_seed = as_u64();
  else if (key == "whittle.exponent") cfg.whittle_exponent = as_double();
  else if (key == "var.p") cfg.var_p = as_int();
  else if (key == "var.horizon") cfg.var_horizon = as_int();
  else if (key == "equilibrium.beta1") cfg.equilibrium_beta1 = as_double();
  else if (key == "equilibrium.beta2") cfg.equilibrium_beta2 = as_double();
  else if (key == "equilibrium.rho") cfg.equilibrium_rho = as_double();
  else if (key == "dynamics.source") {
    if (value == "computed") cfg.dynamics_computed = true;
    else if (value == "explicit") cfg.dynamics_computed = false;
    else throw InvalidParameter("dynamics.source must be computed or explicit");
  } else if (key == "dynamics.alpha") cfg.dynamics_params.alpha = as_double();
  else if (key == "dynamics.beta") cfg.dynamics_params.beta = as_double();
  else if (key == "dynamics.gamma") cfg.dynamics_params.gamma = as_double();
  else if (key == "dynamics.delta") cfg.dynamics_params.delta = as_double();
  else if (key == "dynamics.theta") cfg.dynamics_params.theta = as_double();
  else if (key == "dynamics.dt") cfg.dynamics_dt = as_double();
  else if (key == "dynamics.steps") cfg.dynamics_steps = as_int();
  else if (key == "dynamics.f0") cfg.dynamics_f0 = as_double();
  else if (key == "dynamics.v0") cfg.dynamics_v0 = as_double();
  else if (key == "report.lags") {
    cfg.report_lags.clear();
    for (const auto& tok : io::split(value, ' '))
      if (!tok.empty()) cfg.report_lags.push_back(static_cast<int>(io::parse_double(tok, key)));
  } else {
    throw InvalidParameter("unknown config key: " + key);
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = io::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(line_no) +
                       " is not key = value");
    apply_config_entry(cfg, io::trim(t.substr(0, eq)), io::trim(t.substr(eq + 1)));
  }
}

inline json config_to_json(const RunConfig& cfg) {
  json j;
  j["input"] = cfg.input;
  j["output"] = cfg.output;
  j["delimiter"] = std::string(1, cfg.delimiter);
  j["drop_incomplete"] = cfg.drop_incomplete;
  j["input_format"] = cfg.wide_input ? "wide" : "long";
  j["lag"] = cfg.lag;
  j["decomposition"] = {{"tol", cfg.decomposition_tol},
                        {"max_iters", cfg.decomposition_max_iters},
                        {"seed", cfg.decomposition_seed}};
  j["aggregation"] = rpct::to_string(cfg.aggregation);
  j["segmentation"] = {{"k_star", cfg.segmentation_k_star},
                       {"gamma", cfg.segmentation_gamma},
                       {"min_len", cfg.segmentation_min_len},
                       {"k_max", cfg.segmentation_k_max}};
  j["entropy"] = {{"m", cfg.entropy_m},
                  {"r_frac", cfg.entropy_r_frac},
                  {"bins", cfg.entropy_bins},
                  {"order", cfg.entropy_order},
                  {"n_shuffles", cfg.entropy_n_shuffles},
                  {"seed", cfg.entropy_seed}};
  j["whittle"] = {{"exponent", cfg.whittle_exponent}};
  j["var"] = {{"p", cfg.var_p}, {"horizon", cfg.var_horizon}};
  j["equilibrium"] = {{"beta1", cfg.equilibrium_beta1},
                      {"beta2", cfg.equilibrium_beta2},
                      {"rho", cfg.equilibrium_rho}};
  j["dynamics"] = {{"source", cfg.dynamics_computed ? "computed" : "explicit"},
                   {"alpha", cfg.dynamics_params.alpha},
                   {"beta", cfg.dynamics_params.beta},
                   {"gamma", cfg.dynamics_params.gamma},
                   {"delta", cfg.dynamics_params.delta},
                   {"theta", cfg.dynamics_params.theta},
                   {"dt", cfg.dynamics_dt},
                   {"steps", cfg.dynamics_steps},
                   {"f0", cfg.dynamics_f0},
                   {"v0", cfg.dynamics_v0}};
  j["report"] = {{"lags", cfg.report_lags}};
  return j;
}

/// Collects artifact bytes, writes them under the output directory, and
/// assembles the manifest (config echo, versions, per-stage timings,
/// artifact list with checksums).
class ArtifactWriter {
 public:
  ArtifactWriter(std::string command, const RunConfig& cfg)
      : command_(std::move(command)), output_dir_(cfg.output), config_echo_(config_to_json(cfg)) {}

  void add(const std::string& name, const std::string& content) {
    const auto path = (std::filesystem::path(output_dir_) / name).string();
    io::write_file(path, content);
    artifacts_.push_back({{"path", name}, {"checksum", io::fnv1a_hex(content)},
                          {"bytes", content.size()}});
  }

  void add_timing(const std::string& stage, double ms) {
    timings_.push_back({{"stage", stage}, {"ms", ms}});
  }

  void add_summary(const std::string& key, json value) { summary_[key] = std::move(value); }

  /// Writes <command>_manifest.json; the manifest lists every other
  /// artifact exactly once (it does not list itself).
  std::string finalize() {
    json manifest;
    manifest["command"] = command_;
    manifest["versions"] = {{"fcix", kVersion},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                          std::to_string(EIGEN_MINOR_VERSION)}};
    manifest["config"] = config_echo_;
    manifest["timings"] = timings_;
    manifest["artifacts"] = artifacts_;
    for (auto& [k, v] : summary_.items()) manifest[k] = v;
    const std::string name = command_ + "_manifest.json";
    const std::string content = manifest.dump(2) + "\n";
    io::write_file((std::filesystem::path(output_dir_) / name).string(), content);
    return name;
  }

  const json& artifacts() const { return artifacts_; }

 private:
  std::string command_;
  std::string output_dir_;
  json config_echo_;
  json artifacts_ = json::array();
  json timings_ = json::array();
  json summary_ = json::object();
};

class StageTimer {
 public:
  explicit StageTimer(ArtifactWriter& writer) : writer_(writer) {}

  template <typename Fn>
  auto run(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      writer_.add_timing(stage, elapsed_ms(start));
    } else {
      auto result = fn();
      writer_.add_timing(stage, elapsed_ms(start));
      return result;
    }
  }

 private:
  static double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start)
        .count();
  }
  ArtifactWriter& writer_;
};

inline panel::PricePanel load_panel(const RunConfig& cfg) {
  const panel::LoadOptions opts{cfg.delimiter, cfg.drop_incomplete};
  if (!cfg.wide_input) return panel::load_prices_file(cfg.input, opts);
  std::ifstream in(cfg.input);
  if (!in) throw DataError("cannot open price file: " + cfg.input);
  return panel::load_prices_wide(in, opts);
}

inline std::string series_csv(const rpct::FcixSeries& series) {
  std::ostringstream out;
  out << (series.aggregation == rpct::Aggregation::daily ? "date" : "period")
      << ",psi,psi_clamped\n";
  for (int t = 0; t < series.size(); ++t)
    out << series.dates[t] << ',' << io::format_double(series.psi(t)) << ','
        << io::format_double(std::max(0.0, series.psi(t))) << '\n';
  return out.str();
}

struct FcixRunResult {
  rpct::FcixSeries daily;
  rpct::FcixSeries aggregated;
  rpct::Rank1Factors factors;
  int n = 0;
  std::vector<std::string> artifact_names;
};

/// fcix subcommand: panel -> returns -> tensor -> rank-1 consensus ->
/// index series -> aggregation, with a run manifest.
inline FcixRunResult run_fcix(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.input.empty()) throw InvalidParameter("no input file given");
  ArtifactWriter writer("fcix", cfg);
  StageTimer timer(writer);

  const auto prices = timer.run("load_prices", [&] { return load_panel(cfg); });
  const auto returns =
      timer.run("lag_returns", [&] { return panel::lag_returns(prices, cfg.lag); });
  const auto tensor = timer.run("build_rpct", [&] { return rpct::build_rpct(returns); });
  const auto factors = timer.run("consensus_decompose", [&] {
    return rpct::consensus_decompose(
        tensor, {cfg.decomposition_tol, cfg.decomposition_max_iters, cfg.decomposition_seed});
  });
  const auto daily = timer.run("fcix_series", [&] {
    return rpct::fcix_series(factors, tensor.n, tensor.dates, /*cross_check=*/true);
  });

  FcixRunResult result;
  result.daily = daily;
  result.factors = factors;
  result.n = tensor.n;
  writer.add("fcix_daily.csv", series_csv(daily));
  result.artifact_names.push_back("fcix_daily.csv");
  if (cfg.aggregation != rpct::Aggregation::daily) {
    result.aggregated = timer.run("aggregate", [&] {
      return rpct::aggregate(daily, cfg.aggregation);
    });
    const std::string name = "fcix_" + rpct::to_string(cfg.aggregation) + ".csv";
    writer.add(name, series_csv(result.aggregated));
    result.artifact_names.push_back(name);
  } else {
    result.aggregated = daily;
  }

  writer.add_summary("run", json{{"lag", cfg.lag},
                                 {"n_assets", tensor.n},
                                 {"t_steps", tensor.horizon},
                                 {"rel_error", factors.rel_error},
                                 {"iterations", factors.iterations},
                                 {"converged", factors.converged},
                                 {"negatives_clamped", daily.negatives_clamped}});
  result.artifact_names.push_back(writer.finalize());
  return result;
}

// ---------------------------------------------------------------------------
// analyze subcommand
// ---------------------------------------------------------------------------

struct AnalyzeRequest {
  std::vector<std::string> series_paths;  // one or two aligned series files
  /// Explicitly requested analyses; empty means every applicable one. An
  /// explicit request that cannot run is an error instead of a skip.
  std::vector<std::string> analyses;
};

inline const std::vector<std::string>& analyze_names() {
  static const std::vector<std::string> names = {
      "segmentation", "entropy", "whittle", "acf",
      "xcf",          "var",     "equilibrium", "dynamics"};
  return names;
}

namespace detail {

inline std::string two_column_csv(const std::string& ha, const std::string& hb,
                                  std::span<const std::string> a,
                                  std::span<const double> b) {
  std::ostringstream out;
  out << ha << ',' << hb << '\n';
  for (std::size_t i = 0; i < b.size(); ++i)
    out << a[i] << ',' << io::format_double(b[i]) << '\n';
  return out.str();
}

inline std::string numeric_csv(const std::string& ha, const std::string& hb,
                               std::span<const double> a, std::span<const double> b) {
  std::ostringstream out;
  out << ha << ',' << hb << '\n';
  for (std::size_t i = 0; i < b.size(); ++i)
    out << io::format_double(a[i]) << ',' << io::format_double(b[i]) << '\n';
  return out.str();
}

}  // namespace detail

/// analyze subcommand over one series (segmentation, entropy, memory order,
/// spectrum) or two aligned series (adds cross-correlation, VAR impulse
/// responses, equilibrium, information flow and system dynamics).
/// Failures of individually applicable analyses are isolated and recorded.
inline std::vector<std::string> run_analyze(const RunConfig& cfg,
                                            const AnalyzeRequest& request) {
  cfg.validate();
  if (request.series_paths.empty() || request.series_paths.size() > 2)
    throw DataError("analyze needs one or two series files");
  for (const auto& name : request.analyses) {
    if (std::find(analyze_names().begin(), analyze_names().end(), name) ==
        analyze_names().end())
      throw InvalidParameter("unknown analysis: " + name);
  }

  std::vector<io::LabeledSeries> inputs;
  std::vector<std::string> names;
  for (const auto& path : request.series_paths) {
    inputs.push_back(io::read_series_file(path, cfg.delimiter));
    names.push_back(std::filesystem::path(path).stem().string());
  }
  if (inputs.size() == 2) {
    if (inputs[0].labels != inputs[1].labels)
      throw MisalignedSeries("the two series must share identical date labels");
    if (names[0] == names[1]) names[1] += "_b";
  }
  const bool paired = inputs.size() == 2;

  const bool explicit_request = !request.analyses.empty();
  auto requested = [&](const std::string& name) {
    if (!explicit_request) return true;
    return std::find(request.analyses.begin(), request.analyses.end(), name) !=
           request.analyses.end();
  };

  ArtifactWriter writer("analyze", cfg);
  StageTimer timer(writer);
  json status = json::object();
  std::vector<std::string> written;

  auto run_one = [&](const std::string& name, bool applicable,
                     const std::string& requirement, auto&& body) {
    if (!requested(name)) {
      status[name] = {{"state", "not requested"}};
      return;
    }
    if (!applicable) {
      if (explicit_request)
        throw MisalignedSeries(name + " requires " + requirement);
      status[name] = {{"state", "skipped"}, {"requires", requirement}};
      return;
    }
    try {
      timer.run(name, body);
      status[name] = {{"state", "ok"}};
    } catch (const Error& e) {
      if (explicit_request) throw;
      status[name] = {{"state", "failed"}, {"error", e.what()}};
    }
  };

  const std::vector<double>& a = inputs[0].values;

  run_one("segmentation", true, "one series", [&] {
    double gamma = cfg.segmentation_gamma;
    bool degenerate_bw = false;
    if (gamma <= 0.0) {
      const auto bw = segment::median_bandwidth(a);
      gamma = bw.gamma;
      degenerate_bw = bw.degenerate;
    }
    const auto seg = segment::detect_changepoints(a, cfg.segmentation_k_star, gamma,
                                                  {cfg.segmentation_min_len});
    json out{{"changepoints", seg.changepoints},
             {"segment_costs", seg.segment_costs},
             {"total_cost", seg.total_cost},
             {"gamma", seg.bandwidth},
             {"gamma_degenerate_fallback", degenerate_bw}};
    if (cfg.segmentation_k_max > 0) {
      json elbow = json::array();
      for (const auto& r : segment::elbow_report(a, cfg.segmentation_k_max, gamma,
                                                 {cfg.segmentation_min_len}))
        elbow.push_back({{"k", r.changepoints.size()}, {"total_cost", r.total_cost}});
      out["elbow"] = elbow;
    }
    writer.add("segmentation.json", out.dump(2) + "\n");
    // Segment overlay for plotting: label, value, segment index.
    std::ostringstream overlay;
    overlay << "label,value,segment\n";
    std::size_t seg_idx = 0;
    for (std::size_t t = 0; t < a.size(); ++t) {
      while (seg_idx < seg.changepoints.size() &&
             static_cast<int>(t) >= seg.changepoints[seg_idx])
        ++seg_idx;
      overlay << inputs[0].labels[t] << ',' << io::format_double(a[t]) << ','
              << seg_idx << '\n';
    }
    writer.add("segments.csv", overlay.str());
  });

  entropy::InformationOptions info_opts{cfg.entropy_order, cfg.entropy_bins,
                                        cfg.entropy_m, cfg.entropy_r_frac,
                                        cfg.entropy_n_shuffles, cfg.entropy_seed};
  std::optional<entropy::InformationReport> info;
  run_one("entropy", true, "one series", [&] {
    json out;
    if (paired) {
      info = entropy::information_report(a, inputs[1].values, names[0], names[1],
                                         info_opts);
      out = {{"series", {names[0], names[1]}},
             {"shannon", {{names[0], info->shannon_a}, {names[1], info->shannon_b}}},
             {"conditional_" + names[0] + "_given_" + names[1], info->conditional_a_given_b},
             {"self_entropy", {{names[0], info->self_entropy_a}, {names[1], info->self_entropy_b}}},
             {"transfer",
              {{names[0] + "->" + names[1], info->transfer_a_to_b},
               {names[1] + "->" + names[0], info->transfer_b_to_a}}},
             {"p_values",
              {{names[0] + "->" + names[1], info->p_a_to_b},
               {names[1] + "->" + names[0], info->p_b_to_a}}},
             {"apen", {{names[0], info->apen_a}, {names[1], info->apen_b}}},
             {"warnings", info->warnings}};
      // Information-flow diagram as a labeled edge list.
      json edges = json::array();
      edges.push_back({{"from", names[0]}, {"to", names[1]}, {"value", info->transfer_a_to_b}});
      edges.push_back({{"from", names[1]}, {"to", names[0]}, {"value", info->transfer_b_to_a}});
      edges.push_back({{"from", names[0]}, {"to", names[0]}, {"value", info->self_entropy_a}});
      edges.push_back({{"from", names[1]}, {"to", names[1]}, {"value", info->self_entropy_b}});
      writer.add("info_flow.json",
                 json{{"nodes", {names[0], names[1]}}, {"edges", edges}}.dump(2) + "\n");
    } else {
      const auto d = entropy::discretize(a, cfg.entropy_bins);
      const double sd = sample_sd(a);
      out = {{"series", {names[0]}},
             {"shannon", {{names[0], entropy::shannon(d)}}},
             {"self_entropy",
              {{names[0], entropy::self_entropy(a, cfg.entropy_order, cfg.entropy_bins)}}},
             {"apen",
              {{names[0],
                sd > 0.0 ? entropy::apen(a, cfg.entropy_m, cfg.entropy_r_frac * sd) : 0.0}}},
             {"recurrence_rate",
              {{names[0],
                sd > 0.0
                    ? entropy::recurrence_rate(a, cfg.entropy_m, cfg.entropy_r_frac * sd)
                    : 1.0}}}};
    }
    writer.add("entropy_report.json", out.dump(2) + "\n");
  });

  run_one("whittle", true, "one series", [&] {
    json out = json::object();
    for (std::size_t s = 0; s < inputs.size(); ++s) {
      const auto est = fracts::local_whittle(
          inputs[s].values, {0, cfg.whittle_exponent, -0.5, 0.75, 1e-6, 0.65});
      out[names[s]] = {{"d_hat", est.d_hat},
                       {"bandwidth_m", est.bandwidth_m},
                       {"objective", est.objective},
                       {"differenced", est.differenced}};
    }
    writer.add("whittle.json", out.dump(2) + "\n");
  });

  run_one("acf", true, "one series", [&] {
    for (std::size_t s = 0; s < inputs.size(); ++s) {
      const int max_lag = std::min<int>(100, static_cast<int>(inputs[s].values.size()) - 1);
      const auto rho = fracts::acf(inputs[s].values, max_lag);
      std::vector<double> lags(rho.size());
      for (std::size_t i = 0; i < rho.size(); ++i) lags[i] = static_cast<double>(i);
      writer.add("acf_" + names[s] + ".csv",
                 detail::numeric_csv("lag", "acf", lags, rho));
      const auto spec = fracts::periodogram(inputs[s].values);
      writer.add("spectrum_" + names[s] + ".csv",
                 detail::numeric_csv("frequency", "ordinate", spec.frequencies,
                                     spec.ordinates));
    }
  });

  run_one("xcf", paired, "two aligned series", [&] {
    const int max_lag = std::min<int>(80, static_cast<int>(a.size()) - 1);
    const auto cc = fracts::xcf(a, inputs[1].values, max_lag);
    std::vector<double> lags(cc.size());
    for (std::size_t i = 0; i < cc.size(); ++i)
      lags[i] = static_cast<double>(static_cast<int>(i) - max_lag);
    writer.add("xcf.csv", detail::numeric_csv("lag", "xcf", lags, cc));
  });

  std::optional<fracts::IrfTable> irf;
  run_one("var", paired, "two aligned series", [&] {
    Eigen::MatrixXd x(a.size(), 2);
    for (std::size_t t = 0; t < a.size(); ++t) {
      x(static_cast<Eigen::Index>(t), 0) = a[t];
      x(static_cast<Eigen::Index>(t), 1) = inputs[1].values[t];
    }
    const auto model = fracts::var_fit(x, cfg.var_p);
    irf = fracts::orth_irf(model, cfg.var_horizon);
    json coeffs = json::array();
    for (const auto& c : model.coeffs)
      coeffs.push_back({{c(0, 0), c(0, 1)}, {c(1, 0), c(1, 1)}});
    writer.add("var_model.json",
               json{{"order", model.order},
                    {"variables", {names[0], names[1]}},
                    {"intercept", {model.intercept(0), model.intercept(1)}},
                    {"coefficients", coeffs},
                    {"sigma",
                     {{model.sigma(0, 0), model.sigma(0, 1)},
                      {model.sigma(1, 0), model.sigma(1, 1)}}},
                    {"cholesky",
                     {{model.chol(0, 0), model.chol(0, 1)},
                      {model.chol(1, 0), model.chol(1, 1)}}},
                    {"stable", model.stable},
                    {"companion_radius", model.companion_radius},
                    {"apen_per_path",
                     {{irf->apen_per_path(0, 0), irf->apen_per_path(0, 1)},
                      {irf->apen_per_path(1, 0), irf->apen_per_path(1, 1)}}}}
                   .dump(2) +
                   "\n");
    std::ostringstream paths;
    paths << "horizon";
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        paths << ",resp_" << names[i] << "_to_shock_" << names[j];
    paths << '\n';
    for (int h = 0; h <= cfg.var_horizon; ++h) {
      paths << h;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          paths << ',' << io::format_double(irf->responses[static_cast<std::size_t>(h)](i, j));
      paths << '\n';
    }
    writer.add("irf.csv", paths.str());
  });

  run_one("equilibrium", paired, "two aligned series", [&] {
    Eigen::MatrixXd x(a.size(), 2);
    for (std::size_t t = 0; t < a.size(); ++t) {
      x(static_cast<Eigen::Index>(t), 0) = a[t];
      x(static_cast<Eigen::Index>(t), 1) = inputs[1].values[t];
    }
    const auto eq = fracts::long_run_equilibrium(
        x, {cfg.equilibrium_beta1, cfg.equilibrium_beta2}, cfg.equilibrium_rho);
    writer.add("equilibrium.csv",
               detail::two_column_csv("label", "equilibrium", inputs[0].labels, eq));
  });

  run_one("dynamics", paired || !cfg.dynamics_computed,
          "two aligned series (or explicit parameters)", [&] {
            dynamics::SystemParams params = cfg.dynamics_params;
            if (cfg.dynamics_computed) {
              if (!info)
                info = entropy::information_report(a, inputs[1].values, names[0],
                                                   names[1], info_opts);
              params.alpha = info->transfer_a_to_b;
              params.beta = info->transfer_b_to_a;
              params.gamma = info->self_entropy_a;
              params.delta = info->self_entropy_b;
              if (!irf) {
                Eigen::MatrixXd x(a.size(), 2);
                for (std::size_t t = 0; t < a.size(); ++t) {
                  x(static_cast<Eigen::Index>(t), 0) = a[t];
                  x(static_cast<Eigen::Index>(t), 1) = inputs[1].values[t];
                }
                irf = fracts::orth_irf(fracts::var_fit(x, cfg.var_p), cfg.var_horizon);
              }
              // Regularity of the response of the first variable to a shock
              // in the second (the contemporaneous direction).
              params.theta = irf->apen_per_path(0, 1);
            }
            const auto points = dynamics::critical_points(params);
            json out;
            out["params"] = {{"alpha", params.alpha}, {"beta", params.beta},
                             {"gamma", params.gamma}, {"delta", params.delta},
                             {"theta", params.theta},
                             {"source", cfg.dynamics_computed ? "computed" : "explicit"}};
            json pts = json::array();
            for (const auto& cp : points) {
              pts.push_back({{"F", cp.F},
                             {"V", cp.V},
                             {"eigenvalues",
                              {{cp.eigenvalues[0].real(), cp.eigenvalues[0].imag()},
                               {cp.eigenvalues[1].real(), cp.eigenvalues[1].imag()}}},
                             {"dim_stable", cp.dim_stable},
                             {"dim_unstable", cp.dim_unstable},
                             {"dim_center", cp.dim_center},
                             {"classification", dynamics::to_string(cp.classification)},
                             {"practical", cp.practical}});
            }
            out["critical_points"] = pts;
            writer.add("dynamics_report.json", out.dump(2) + "\n");
          });

  writer.add_summary("series", json{{"names", names}, {"length", a.size()}});
  writer.add_summary("analyses", status);
  written.push_back(writer.finalize());
  return written;
}

// ---------------------------------------------------------------------------
// verify subcommand: closed-form identity suite
// ---------------------------------------------------------------------------

struct VerifyRow {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyRow> rows;
  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

namespace detail {

inline rpcm::ComparisonMatrix random_consistent(SplitMix64& rng, int n) {
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i)
    w(i) = std::exp((rng.uniform() * 2.0 - 1.0) * std::log(4.0));
  return rpcm::ComparisonMatrix::from_weights(w);
}

/// Multiplies one off-diagonal pair (a_ij, a_ji) by (c, 1/c).
inline rpcm::ComparisonMatrix perturb_pair(const rpcm::ComparisonMatrix& a,
                                           SplitMix64& rng, double c) {
  const int n = a.order();
  Eigen::MatrixXd m = a.entries();
  const int i = static_cast<int>(rng.below(n));
  int j = static_cast<int>(rng.below(n - 1));
  if (j >= i) ++j;
  m(i, j) *= c;
  m(j, i) /= c;
  return rpcm::ComparisonMatrix(std::move(m));
}

}  // namespace detail

/// Self-check of the closed-form identities satisfied by consistent
/// reciprocal matrices, plus the reference sensitivity table. The
/// perturb_inputs flag feeds perturbed matrices to the power-identity check
/// as a designed-to-fail negative control.
inline VerifyReport run_verify(bool perturb_inputs = false, int cases = 50,
                               std::uint64_t seed = 1234) {
  VerifyReport report;
  SplitMix64 rng(seed);
  double worst_sv = 0.0, worst_lambda = 0.0, worst_power = 0.0, worst_sinh = 0.0,
         worst_trace = 0.0, worst_charpoly = 0.0, worst_perm = 0.0, worst_cdeg = 0.0;
  for (int c = 0; c < cases; ++c) {
    const int n = 2 + static_cast<int>(rng.below(7));  // orders 2..8
    auto a = detail::random_consistent(rng, n);

    const Eigen::VectorXd sv =
        Eigen::JacobiSVD<Eigen::MatrixXd>(a.entries()).singularValues();
    if (n > 1) worst_sv = std::max(worst_sv, sv(1) / sv(0));

    const auto eig = rpcm::perron_eigenvalue(a);
    worst_lambda = std::max(worst_lambda, std::abs(eig.lambda_max - n));

    auto power_input = perturb_inputs ? detail::perturb_pair(a, rng, 2.0) : a;
    const Eigen::MatrixXd& m = power_input.entries();
    worst_power = std::max(
        worst_power, ((m * m) - double(n) * m).norm() / (double(n) * m).norm());

    const auto identities = rpcm::identity_residuals(a, 2);
    worst_sinh = std::max(worst_sinh, identities.sinh_residual);
    worst_trace =
        std::max(worst_trace, identities.trace_residual / std::sinh(double(n)));
    for (double r : identities.charpoly_residuals)
      worst_charpoly = std::max(worst_charpoly, r);

    double factorial = 1.0;
    for (int i = 2; i <= n; ++i) factorial *= i;
    worst_perm = std::max(worst_perm,
                          std::abs(rpcm::permanent(a) - factorial) / factorial);
    worst_cdeg = std::max(worst_cdeg, std::abs(rpcm::consistency_degree(a) - 1.0));
  }
  auto push = [&](const std::string& name, bool pass, double value) {
    report.rows.push_back({name, pass, "worst deviation " + io::format_double(value)});
  };
  push("rank1-factorization (sigma2/sigma1)", worst_sv <= 1e-10, worst_sv);
  push("perron-eigenvalue (lambda = N)", worst_lambda <= 1e-8, worst_lambda);
  push("power-identity (A^2 = N A)", worst_power <= 1e-8, worst_power);
  push("sinh-scaling (sinh A = sinh(N)/N A)", worst_sinh <= 1e-6, worst_sinh);
  push("sinh-trace (Tr sinh A = sinh N)", worst_trace <= 1e-6, worst_trace);
  push("charpoly-tail (low coefficients vanish)", worst_charpoly <= 1e-8,
       worst_charpoly);
  push("permanent (perm A = N!)", worst_perm <= 1e-8, worst_perm);
  push("consistency-degree (cDeg = 1)", worst_cdeg == 0.0, worst_cdeg);

  {
    struct Row {
      double alpha, beta, gamma, expected;
    };
    const Row table[] = {{1.002, 0.980, 1.015, 1.000},
                         {0.950, 0.775, 1.015, 1.015},
                         {1.875, 0.205, 0.580, 2.030},
                         {5.225, 3.170, 0.001, 417.709}};
    double worst_rel = 0.0;
    for (const auto& row : table) {
      Eigen::MatrixXd m(3, 3);
      m << 1.0, row.alpha, row.beta, 1.0 / row.alpha, 1.0, row.gamma,
          1.0 / row.beta, 1.0 / row.gamma, 1.0;
      const double cond = rpcm::condition_number(rpcm::ComparisonMatrix(m), 3.0);
      worst_rel = std::max(worst_rel, std::abs(cond - row.expected) / row.expected);
    }
    push("condition-number-table (reference triplets)", worst_rel <= 0.005, worst_rel);
  }

  {
    bool all_above = true;
    double worst_gap = std::numeric_limits<double>::infinity();
    for (int c = 0; c < cases; ++c) {
      const int n = 3 + static_cast<int>(rng.below(6));
      auto a = detail::random_consistent(rng, n);
      const double scale = 1.5 + rng.uniform() * 1.5;
      auto perturbed = detail::perturb_pair(a, rng, scale);
      const double lambda = rpcm::perron_eigenvalue(perturbed).lambda_max;
      worst_gap = std::min(worst_gap, lambda - n);
      if (!(lambda > n)) all_above = false;
    }
    report.rows.push_back({"perturbation-monotonicity (lambda > N)", all_above,
                           "smallest excess " + io::format_double(worst_gap)});
  }
  return report;
}

inline json identity_report_to_json(const rpcm::IdentityReport& r) {
  return json{{"order", r.order},
              {"power_k", r.power_k},
              {"power_residual", r.power_residual},
              {"sinh_residual", r.sinh_residual},
              {"trace_residual", r.trace_residual},
              {"charpoly_residuals", r.charpoly_residuals}};
}

/// Writes verify_report.json: the pass/fail table plus per-order identity
/// residual reports for deterministic consistent matrices.
inline void write_verify_report(const VerifyReport& report, const std::string& dir) {
  json checks = json::array();
  for (const auto& row : report.rows)
    checks.push_back({{"name", row.name}, {"pass", row.pass}, {"detail", row.detail}});
  json samples = json::array();
  SplitMix64 rng(20240101);
  for (int n = 2; n <= 8; ++n) {
    const auto a = detail::random_consistent(rng, n);
    samples.push_back(identity_report_to_json(rpcm::identity_residuals(a)));
  }
  const json out{{"checks", checks},
                 {"all_pass", report.all_pass()},
                 {"identity_residual_samples", samples}};
  io::write_file((std::filesystem::path(dir) / "verify_report.json").string(),
                 out.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// lag-report subcommand
// ---------------------------------------------------------------------------

inline std::vector<std::string> run_lag_report(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.input.empty()) throw InvalidParameter("no input file given");
  ArtifactWriter writer("lag_report", cfg);
  StageTimer timer(writer);
  const auto prices = timer.run("load_prices", [&] { return load_panel(cfg); });
  const auto report = timer.run("lag_scaling", [&] {
    return rpct::lag_scaling_report(
        prices, cfg.report_lags,
        {cfg.decomposition_tol, cfg.decomposition_max_iters, cfg.decomposition_seed},
        cfg.entropy_m, cfg.entropy_r_frac);
  });
  std::ostringstream csv;
  csv << "lag,epsilon,psi_bar,regularity\n";
  json rows = json::array();
  for (const auto& row : report.rows) {
    csv << row.lag << ',' << io::format_double(row.epsilon) << ','
        << io::format_double(row.psi_bar) << ',' << io::format_double(row.regularity)
        << '\n';
    rows.push_back({{"lag", row.lag},
                    {"epsilon", row.epsilon},
                    {"psi_bar", row.psi_bar},
                    {"regularity", row.regularity},
                    {"iterations", row.iterations}});
  }
  writer.add("lag_report.csv", csv.str());
  json out{{"rows", rows}, {"has_fits", report.has_fits}};
  if (report.has_fits) {
    out["epsilon_fit"] = {{"degenerate", report.epsilon_degenerate},
                          {"log_slope", report.epsilon_log_slope},
                          {"log_intercept", report.epsilon_log_intercept},
                          {"rss", report.epsilon_fit_rss}};
    out["psi_fit"] = {{"slope", report.psi_slope},
                      {"intercept", report.psi_intercept},
                      {"rss", report.psi_fit_rss}};
  }
  writer.add("lag_report.json", out.dump(2) + "\n");
  return {std::string("lag_report.csv"), std::string("lag_report.json"),
          writer.finalize()};
}

// ---------------------------------------------------------------------------
// dynamics subcommand
// ---------------------------------------------------------------------------

inline std::vector<std::string> run_dynamics(const RunConfig& cfg,
                                             const std::vector<std::string>& series_paths) {
  cfg.validate();
  dynamics::SystemParams params = cfg.dynamics_params;
  ArtifactWriter writer("dynamics", cfg);
  StageTimer timer(writer);
  if (cfg.dynamics_computed) {
    if (series_paths.size() != 2)
      throw MisalignedSeries("computed dynamics parameters require two aligned series");
    const auto sa = io::read_series_file(series_paths[0], cfg.delimiter);
    const auto sb = io::read_series_file(series_paths[1], cfg.delimiter);
    if (sa.labels != sb.labels)
      throw MisalignedSeries("the two series must share identical date labels");
    entropy::InformationOptions info_opts{cfg.entropy_order, cfg.entropy_bins,
                                          cfg.entropy_m, cfg.entropy_r_frac,
                                          cfg.entropy_n_shuffles, cfg.entropy_seed};
    const auto info = timer.run("information", [&] {
      return entropy::information_report(sa.values, sb.values, "a", "b", info_opts);
    });
    params.alpha = info.transfer_a_to_b;
    params.beta = info.transfer_b_to_a;
    params.gamma = info.self_entropy_a;
    params.delta = info.self_entropy_b;
    Eigen::MatrixXd x(sa.values.size(), 2);
    for (std::size_t t = 0; t < sa.values.size(); ++t) {
      x(static_cast<Eigen::Index>(t), 0) = sa.values[t];
      x(static_cast<Eigen::Index>(t), 1) = sb.values[t];
    }
    const auto model = fracts::var_fit(x, cfg.var_p);
    const auto irf = fracts::orth_irf(model, cfg.var_horizon);
    params.theta = irf.apen_per_path(0, 1);
  }
  const auto points = timer.run("critical_points", [&] {
    return dynamics::critical_points(params);
  });
  json pts = json::array();
  for (const auto& cp : points) {
    pts.push_back({{"F", cp.F},
                   {"V", cp.V},
                   {"eigenvalues",
                    {{cp.eigenvalues[0].real(), cp.eigenvalues[0].imag()},
                     {cp.eigenvalues[1].real(), cp.eigenvalues[1].imag()}}},
                   {"dim_stable", cp.dim_stable},
                   {"dim_unstable", cp.dim_unstable},
                   {"dim_center", cp.dim_center},
                   {"classification", dynamics::to_string(cp.classification)},
                   {"practical", cp.practical}});
  }
  json out{{"params",
            {{"alpha", params.alpha},
             {"beta", params.beta},
             {"gamma", params.gamma},
             {"delta", params.delta},
             {"theta", params.theta},
             {"source", cfg.dynamics_computed ? "computed" : "explicit"}}},
           {"critical_points", pts}};
  writer.add("critical_points.json", out.dump(2) + "\n");
  if (cfg.dynamics_steps > 0) {
    const auto path = timer.run("trajectory", [&] {
      return dynamics::trajectory(params, cfg.dynamics_f0, cfg.dynamics_v0,
                                  cfg.dynamics_dt, cfg.dynamics_steps);
    });
    std::ostringstream csv;
    csv << "t,F,V\n";
    for (std::size_t i = 0; i < path.t.size(); ++i)
      csv << io::format_double(path.t[i]) << ',' << io::format_double(path.F[i]) << ','
          << io::format_double(path.V[i]) << '\n';
    writer.add("trajectory.csv", csv.str());
  }
  return {std::string("critical_points.json"), writer.finalize()};
}

}  // namespace fcix::pipeline
