#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "fcix/pipeline.hpp"
#include "helpers.hpp"

using Catch::Approx;
using namespace fcix;
namespace fs = std::filesystem;

namespace {

const char* fixture_path() { return FCIX_FIXTURE_PANEL; }

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fcix_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config precedence: flag over file over default", "[pipeline]") {
  const auto dir = temp_dir("config");
  const auto cfg_path = (dir / "run.cfg").string();
  io::write_file(cfg_path,
                 "# comment\nlag = 3\nentropy.bins = 5\naggregation = quarterly\n");

  pipeline::RunConfig cfg;
  REQUIRE(cfg.lag == 1);  // default
  pipeline::load_config_file(cfg, cfg_path);
  REQUIRE(cfg.lag == 3);  // file
  REQUIRE(cfg.entropy_bins == 5);
  REQUIRE(cfg.aggregation == rpct::Aggregation::quarterly);
  pipeline::apply_config_entry(cfg, "lag", "2");  // flag wins
  REQUIRE(cfg.lag == 2);

  REQUIRE_THROWS_AS(pipeline::apply_config_entry(cfg, "no.such.key", "1"),
                    InvalidParameter);
  pipeline::apply_config_entry(cfg, "entropy.n_shuffles", "5");
  REQUIRE_THROWS_AS(cfg.validate(), InvalidParameter);
}

TEST_CASE("fcix run on the bundled fixture", "[pipeline]") {
  const auto dir = temp_dir("fcix_run");
  pipeline::RunConfig cfg;
  cfg.input = fixture_path();
  cfg.output = dir.string();
  const auto result = pipeline::run_fcix(cfg);

  REQUIRE(result.daily.size() == 119);  // 120 days, lag 1
  REQUIRE(result.n == 10);
  REQUIRE(fs::exists(dir / "fcix_daily.csv"));
  REQUIRE(fs::exists(dir / "fcix_monthly.csv"));
  REQUIRE(fs::exists(dir / "fcix_manifest.json"));

  // Series file round-trips through the reader.
  const auto series = io::read_series_file((dir / "fcix_daily.csv").string());
  REQUIRE(series.values.size() == 119);
  REQUIRE(series.labels.front() == "2019-01-02");

  // The manifest lists every artifact with its checksum.
  std::ifstream manifest_in(dir / "fcix_manifest.json");
  const auto manifest = nlohmann::json::parse(manifest_in);
  REQUIRE(manifest["artifacts"].size() == 2);
  for (const auto& artifact : manifest["artifacts"]) {
    const auto content =
        io::read_file((dir / artifact["path"].get<std::string>()).string());
    REQUIRE(io::fnv1a_hex(content) == artifact["checksum"].get<std::string>());
  }
  REQUIRE(manifest["run"]["n_assets"] == 10);
  REQUIRE(manifest["run"]["t_steps"] == 119);
}

TEST_CASE("fcix run is deterministic", "[pipeline]") {
  const auto dir1 = temp_dir("det1");
  const auto dir2 = temp_dir("det2");
  pipeline::RunConfig cfg;
  cfg.input = fixture_path();
  cfg.output = dir1.string();
  pipeline::run_fcix(cfg);
  cfg.output = dir2.string();
  pipeline::run_fcix(cfg);
  for (const char* name : {"fcix_daily.csv", "fcix_monthly.csv"})
    REQUIRE(io::read_file((dir1 / name).string()) ==
            io::read_file((dir2 / name).string()));
}

TEST_CASE("fcix run input errors", "[pipeline]") {
  pipeline::RunConfig cfg;
  cfg.input = "/nonexistent/panel.csv";
  cfg.output = temp_dir("missing").string();
  REQUIRE_THROWS_AS(pipeline::run_fcix(cfg), DataError);
  try {
    pipeline::run_fcix(cfg);
    FAIL("expected a data error");
  } catch (const DataError& e) {
    REQUIRE(std::string(e.what()).find("/nonexistent/panel.csv") != std::string::npos);
  }
}

TEST_CASE("analyze on one series", "[pipeline]") {
  const auto run_dir = temp_dir("analyze_src");
  pipeline::RunConfig cfg;
  cfg.input = fixture_path();
  cfg.output = run_dir.string();
  pipeline::run_fcix(cfg);

  const auto out_dir = temp_dir("analyze_out");
  cfg.output = out_dir.string();
  cfg.segmentation_k_star = 2;
  cfg.segmentation_k_max = 3;
  pipeline::AnalyzeRequest request;
  request.series_paths = {(run_dir / "fcix_daily.csv").string()};
  pipeline::run_analyze(cfg, request);

  REQUIRE(fs::exists(out_dir / "segmentation.json"));
  REQUIRE(fs::exists(out_dir / "segments.csv"));
  REQUIRE(fs::exists(out_dir / "entropy_report.json"));
  REQUIRE(fs::exists(out_dir / "acf_fcix_daily.csv"));
  REQUIRE(fs::exists(out_dir / "spectrum_fcix_daily.csv"));
  REQUIRE(fs::exists(out_dir / "analyze_manifest.json"));

  std::ifstream manifest_in(out_dir / "analyze_manifest.json");
  const auto manifest = nlohmann::json::parse(manifest_in);
  // 119 points < 128: the whittle stage fails and is isolated.
  REQUIRE(manifest["analyses"]["whittle"]["state"] == "failed");
  REQUIRE(manifest["analyses"]["segmentation"]["state"] == "ok");
  // Two-series analyses are skipped, not errors, in the default sweep.
  REQUIRE(manifest["analyses"]["xcf"]["state"] == "skipped");

  std::ifstream seg_in(out_dir / "segmentation.json");
  const auto seg = nlohmann::json::parse(seg_in);
  REQUIRE(seg["changepoints"].size() == 2);
  REQUIRE(seg["elbow"].size() == 3);
}

TEST_CASE("analyze on two series", "[pipeline]") {
  // Build two coupled series files with shared labels.
  const auto dir = temp_dir("analyze_two");
  auto gen = testutil::rng(107);
  const int n = 400;
  const auto v = testutil::gaussian_series(gen, n);
  std::vector<double> z(n, 0.0);
  const auto noise = testutil::gaussian_series(gen, n);
  for (int t = 1; t < n; ++t) z[t] = 0.7 * v[t - 1] + 0.5 * noise[t];
  std::ostringstream fa, fb;
  fa << "date,value\n";
  fb << "date,value\n";
  for (int t = 0; t < n; ++t) {
    fa << "d" << t << ',' << io::format_double(z[t]) << '\n';
    fb << "d" << t << ',' << io::format_double(v[t]) << '\n';
  }
  const auto path_a = (dir / "alpha.csv").string();
  const auto path_b = (dir / "beta.csv").string();
  io::write_file(path_a, fa.str());
  io::write_file(path_b, fb.str());

  pipeline::RunConfig cfg;
  cfg.output = (dir / "out").string();
  cfg.entropy_n_shuffles = 99;
  cfg.var_horizon = 10;
  pipeline::AnalyzeRequest request;
  request.series_paths = {path_a, path_b};
  pipeline::run_analyze(cfg, request);

  const auto out = dir / "out";
  REQUIRE(fs::exists(out / "xcf.csv"));
  REQUIRE(fs::exists(out / "var_model.json"));
  REQUIRE(fs::exists(out / "irf.csv"));
  REQUIRE(fs::exists(out / "equilibrium.csv"));
  REQUIRE(fs::exists(out / "info_flow.json"));
  REQUIRE(fs::exists(out / "dynamics_report.json"));

  std::ifstream flow_in(out / "info_flow.json");
  const auto flow = nlohmann::json::parse(flow_in);
  REQUIRE(flow["edges"].size() == 4);

  std::ifstream dyn_in(out / "dynamics_report.json");
  const auto dyn = nlohmann::json::parse(dyn_in);
  REQUIRE(dyn["params"]["source"] == "computed");
  REQUIRE(dyn["critical_points"].size() == 4);
  // beta parameter: transfer entropy from the second series into the first,
  // the stronger direction by construction.
  REQUIRE(dyn["params"]["beta"].get<double>() > dyn["params"]["alpha"].get<double>());
}

TEST_CASE("explicitly requested var with one series is an error", "[pipeline]") {
  const auto dir = temp_dir("explicit_var");
  std::ostringstream f;
  f << "date,value\n";
  for (int t = 0; t < 50; ++t) f << "d" << t << ',' << (t % 7) * 0.1 << '\n';
  const auto path = (dir / "one.csv").string();
  io::write_file(path, f.str());

  pipeline::RunConfig cfg;
  cfg.output = (dir / "out").string();
  pipeline::AnalyzeRequest request;
  request.series_paths = {path};
  request.analyses = {"var"};
  REQUIRE_THROWS_AS(pipeline::run_analyze(cfg, request), MisalignedSeries);

  request.analyses = {"unknown-analysis"};
  REQUIRE_THROWS_AS(pipeline::run_analyze(cfg, request), InvalidParameter);
}

TEST_CASE("misaligned series are rejected", "[pipeline]") {
  const auto dir = temp_dir("misaligned");
  io::write_file((dir / "a.csv").string(), "date,value\nd0,1.0\nd1,2.0\n");
  io::write_file((dir / "b.csv").string(), "date,value\nd0,1.0\nd2,2.0\n");
  pipeline::RunConfig cfg;
  cfg.output = (dir / "out").string();
  pipeline::AnalyzeRequest request;
  request.series_paths = {(dir / "a.csv").string(), (dir / "b.csv").string()};
  REQUIRE_THROWS_AS(pipeline::run_analyze(cfg, request), MisalignedSeries);
}

TEST_CASE("verify suite passes and the negative control fails", "[pipeline]") {
  const auto report = pipeline::run_verify(false, 30);
  REQUIRE(report.all_pass());
  bool saw_condition_row = false;
  for (const auto& row : report.rows)
    if (row.name.find("condition-number") != std::string::npos)
      saw_condition_row = true;
  REQUIRE(saw_condition_row);

  const auto dir = temp_dir("verify_report");
  pipeline::write_verify_report(report, dir.string());
  std::ifstream in(dir / "verify_report.json");
  const auto j = nlohmann::json::parse(in);
  REQUIRE(j["all_pass"].get<bool>());
  REQUIRE(j["identity_residual_samples"].size() == 7);  // orders 2..8
  for (const auto& sample : j["identity_residual_samples"]) {
    REQUIRE(sample["power_residual"].get<double>() <= 1e-10);
    REQUIRE(sample["trace_residual"].get<double>() <= 1e-6);
  }

  const auto sabotaged = pipeline::run_verify(true, 30);
  REQUIRE_FALSE(sabotaged.all_pass());
  for (const auto& row : sabotaged.rows)
    if (row.name.find("power-identity") != std::string::npos) REQUIRE_FALSE(row.pass);
}

TEST_CASE("wide-format input", "[pipeline]") {
  const auto dir = temp_dir("wide");
  std::ostringstream wide;
  wide << "date,AAA,BBB\n";
  for (int t = 0; t < 10; ++t)
    wide << "2020-01-" << (t + 10) << ',' << (100.0 + t) << ',' << (50.0 + 2 * t)
         << '\n';
  const auto path = (dir / "wide.csv").string();
  io::write_file(path, wide.str());
  pipeline::RunConfig cfg;
  cfg.input = path;
  cfg.output = (dir / "out").string();
  cfg.wide_input = true;
  const auto result = pipeline::run_fcix(cfg);
  REQUIRE(result.n == 2);
  REQUIRE(result.daily.size() == 9);
}

TEST_CASE("lag report command writes fit summaries", "[pipeline]") {
  const auto dir = temp_dir("lag_report");
  pipeline::RunConfig cfg;
  cfg.input = fixture_path();
  cfg.output = dir.string();
  cfg.report_lags = {1, 2, 3};
  pipeline::run_lag_report(cfg);
  REQUIRE(fs::exists(dir / "lag_report.csv"));
  std::ifstream in(dir / "lag_report.json");
  const auto report = nlohmann::json::parse(in);
  REQUIRE(report["rows"].size() == 3);
  REQUIRE(report["has_fits"].get<bool>());
}

TEST_CASE("dynamics command with explicit parameters", "[pipeline]") {
  const auto dir = temp_dir("dynamics_cmd");
  pipeline::RunConfig cfg;
  cfg.output = dir.string();
  cfg.dynamics_computed = false;
  cfg.dynamics_steps = 100;
  cfg.dynamics_f0 = 0.001;
  cfg.dynamics_v0 = 10.0;
  pipeline::run_dynamics(cfg, {});
  REQUIRE(fs::exists(dir / "critical_points.json"));
  REQUIRE(fs::exists(dir / "trajectory.csv"));
  std::ifstream in(dir / "critical_points.json");
  const auto report = nlohmann::json::parse(in);
  REQUIRE(report["critical_points"][0]["classification"] == "source");
  REQUIRE(report["critical_points"][0]["F"].get<double>() == Approx(0.006).margin(1e-3));
  REQUIRE(report["critical_points"][0]["V"].get<double>() == Approx(75.954).margin(1e-3));
}
