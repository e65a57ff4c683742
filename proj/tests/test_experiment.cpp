#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "aoisched/experiment.hpp"

using namespace aoisched;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir(const char* tag) {
    path = fs::temp_directory_path() / (std::string("aoisched_test_") + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("numbers are emitted with six significant digits") {
  CHECK(format_num(1.4396270065) == "1.43963");
  CHECK(format_num(1.5) == "1.5");
  CHECK(format_num(0.0) == "0");
  CHECK(format_num(1e-7) == "1e-07");
  CHECK(format_num(123456.789) == "123457");
}

TEST_CASE("config text parsing: defaults, comments, overrides") {
  ConfigMap kv = parse_config_text(
      "# reference setup\n"
      "snr_db = 21   # mid sweep\n"
      "\n"
      "d1 = 3\n"
      "d2 = 6\n"
      "sim_seed = 99\n");
  ExperimentSpec spec = spec_from_config(kv);
  CHECK(spec.snr_db == 21.0);
  CHECK(spec.base.rho == doctest::Approx(linear_from_db(21.0)));
  CHECK(spec.base.d1 == 3.0);
  CHECK(spec.base.d2 == 6.0);
  CHECK(spec.base.tau == 2.0);        // documented default
  CHECK(spec.base.rate == 1.0);       // documented default
  CHECK(spec.base.n_levels == 10);    // documented default
  CHECK(spec.base.m_trunc == 100);    // documented default
  CHECK(spec.sim_seed == 99);
  CHECK(spec.snr_grid_db.front() == 8.0);
  CHECK(spec.snr_grid_db.back() == 30.0);
  CHECK(spec.kinds.size() == 4);
}

TEST_CASE("config rejection paths") {
  CHECK_THROWS_AS(parse_config_text("snr_db 18\n"), ConfigError);          // no '='
  CHECK_THROWS_AS(spec_from_config(parse_config_text("snr = 18\n")), ConfigError);  // typo key
  CHECK_THROWS_AS(spec_from_config(parse_config_text("w1 = 0.7\n")), ConfigError);  // w1+w2 != 1
  CHECK_THROWS_AS(spec_from_config(parse_config_text("d1 = 5\nd2 = 2\n")), ConfigError);
  CHECK_THROWS_AS(spec_from_config(parse_config_text("snr_db = abc\n")), ConfigError);
  CHECK_THROWS_AS(spec_from_config(parse_config_text("snr_grid_db = 10,9\n")), ConfigError);
  CHECK_THROWS_AS(spec_from_config(parse_config_text("policies = whittle\n")), ConfigError);
  CHECK_THROWS_AS(spec_from_config(parse_config_text("sim_horizon = 0\n")), ConfigError);
}

TEST_CASE("config echo reproduces the spec through the parser") {
  ConfigMap kv = parse_config_text("snr_db = 14\nd1 = 2.5\nd2 = 5\nm_trunc = 42\n"
                                   "snr_grid_db = 10,12.5,15\npolicies = suboptimal\n");
  ExperimentSpec spec = spec_from_config(kv);
  ExperimentSpec again = spec_from_config(parse_config_text(echo_config(spec)));
  CHECK(echo_config(again) == echo_config(spec));
}

TEST_CASE("policy map run writes deterministic per-kind files") {
  TempDir dir_a("map_a");
  TempDir dir_b("map_b");
  ConfigMap kv = parse_config_text("m_trunc = 30\npolicies = oma-only-optimal,suboptimal\n");
  ExperimentSpec spec = spec_from_config(kv);

  spec.out_dir = dir_a.path.string();
  MapRunResult first = run_policy_map(spec);
  CHECK(first.all_converged);
  REQUIRE(first.files.size() == 4);  // csv + meta per kind

  std::map<std::string, std::string> snapshot;
  for (const std::string& f : first.files) snapshot[f] = read_text_file(f);
  run_policy_map(spec);  // identical spec: every output byte matches
  for (const std::string& f : first.files) CHECK(read_text_file(f) == snapshot[f]);

  // A different out_dir changes only the echoed spec, never the policies.
  spec.out_dir = dir_b.path.string();
  run_policy_map(spec);
  for (const char* name : {"map_oma-only-optimal.csv", "map_suboptimal.csv"}) {
    std::string a = read_text_file((dir_a.path / name).string());
    std::string b = read_text_file((dir_b.path / name).string());
    CHECK(a == b);
  }

  // The restricted map only ever uses the two dedicated slots.
  std::istringstream csv(read_text_file((dir_a.path / "map_oma-only-optimal.csv").string()));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "delta1,delta2,action");
  std::set<int> seen;
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    seen.insert(std::stoi(line.substr(line.rfind(',') + 1)));
  }
  CHECK(rows == 30 * 30);
  CHECK(seen == std::set<int>{0, 10});

  std::string meta = read_text_file((dir_a.path / "map_oma-only-optimal.meta").string());
  CHECK(meta.find("j_star = ") != std::string::npos);
  CHECK(meta.find("converged = true") != std::string::npos);
  CHECK(meta.find("m_trunc = 30") != std::string::npos);
}

TEST_CASE("optimal map at the reference configuration has the five regions") {
  TempDir dir("map_fig");
  ConfigMap kv = parse_config_text("policies = optimal-adaptive\n");  // m = 100, 18 dB
  ExperimentSpec spec = spec_from_config(kv);
  spec.out_dir = dir.path.string();
  run_policy_map(spec);

  std::istringstream csv(read_text_file((dir.path / "map_optimal-adaptive.csv").string()));
  std::string line;
  std::getline(csv, line);
  std::set<int> seen;
  while (std::getline(csv, line)) seen.insert(std::stoi(line.substr(line.rfind(',') + 1)));
  CHECK(seen == std::set<int>{0, 7, 8, 9, 10});  // split 6 is never optimal here
}

TEST_CASE("sweep emits ordered rows with the documented schema") {
  TempDir dir("sweep");
  ConfigMap kv = parse_config_text(
      "m_trunc = 25\nsnr_grid_db = 8,18,28\nsim_horizon = 50000\n"
      "policies = optimal-adaptive,oma-only-optimal,noma-only-optimal,suboptimal\n");
  ExperimentSpec spec = spec_from_config(kv);
  spec.out_dir = dir.path.string();
  SweepRunResult res = run_sweep(spec);
  CHECK(res.failed_rows == 0);
  CHECK(res.monotonicity_violations == 0);

  std::istringstream csv(read_text_file(res.csv_path));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "snr_db,policy,j_star_or_na,analytic_aoi,simulated_aoi,escape_freq");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(csv, line)) rows.push_back(split(line, ','));
  REQUIRE(rows.size() == 12);

  // ordered by (snr_db, policy name)
  const std::vector<std::string> kind_order = {"noma-only-optimal", "oma-only-optimal",
                                               "optimal-adaptive", "suboptimal"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 6);
    CHECK(rows[i][0] == format_num(spec.snr_grid_db[i / 4]));
    CHECK(rows[i][1] == kind_order[i % 4]);
    if (rows[i][1] == "suboptimal")
      CHECK(rows[i][2] == "na");
    else
      CHECK(rows[i][2] != "na");
  }

  std::string meta = read_text_file((dir.path / "sweep.meta").string());
  CHECK(meta.find("monotonicity_violations = 0") != std::string::npos);

  // determinism of the whole artifact
  TempDir dir2("sweep2");
  spec.out_dir = dir2.path.string();
  SweepRunResult res2 = run_sweep(spec);
  CHECK(read_text_file(res.csv_path) == read_text_file(res2.csv_path));
}

TEST_CASE("adaptive and dedicated-only schemes coincide at very low SNR") {
  SystemConfig cfg;
  cfg.rho = linear_from_db(8.0);
  cfg.m_trunc = 80;
  PolicySolution ada = make_policy(cfg, PolicyKind::OptimalAdaptive, false);
  PolicySolution oma = make_policy(cfg, PolicyKind::OmaOnlyOptimal, false);
  CHECK(std::abs(ada.solver.j_star - oma.solver.j_star) / oma.solver.j_star < 0.01);
}

TEST_CASE("failed sweep points are marked in-row and do not stop the sweep") {
  ExperimentSpec spec;
  spec.base.rho = linear_from_db(18.0);
  spec.base.m_trunc = 8;
  spec.snr_grid_db = {18.0};
  spec.kinds = {PolicyKind::Custom, PolicyKind::OptimalAdaptive};  // Custom cannot be built
  std::vector<SweepRow> rows = run_sweep_rows(spec);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].error_class == "config-invalid");
  CHECK(rows[1].error_class.empty());
  std::string csv = sweep_csv(rows);
  CHECK(csv.find("failed:config-invalid") != std::string::npos);
}
