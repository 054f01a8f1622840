#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <string>

#include "dgnn/experiment.hpp"

using namespace dgnn;

namespace {

std::string csv_of(const ExperimentConfig& cfg, int workers) {
  std::ostringstream out;
  write_csv(out, run_sweep(cfg, workers));
  return out.str();
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.node_counts = {30};
  cfg.feature_dims = {8};
  cfg.hidden_dim = 6;
  cfg.graphs = 4;
  cfg.powers_w = {0.1, 1.0};
  cfg.rates = {1.0, 3.0};
  return cfg;
}

std::string error_of(ExperimentConfig& cfg, const std::string& assignment) {
  try {
    apply_assignment(cfg, assignment);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults follow the simulation table") {
  const ExperimentConfig c;
  CHECK(c.side_m == 2000.0);
  CHECK(c.radius_m == 500.0);
  CHECK(c.channel.bandwidth_hz == 10e6);
  CHECK(c.channel.noise_dbm_per_hz == -174.0);
  CHECK(c.channel.pathloss_intercept_db == 128.1);
  CHECK(c.channel.pathloss_slope_db == 37.6);
  CHECK(c.channel.shadowing_std_db == 8.0);
  CHECK(c.targets == std::vector<double>{0.8});
  CHECK(c.rates == std::vector<double>{1.0});
  CHECK(c.powers_w == std::vector<double>{0.1});
  CHECK(c.feature_dims == std::vector<int>{32});
  CHECK(c.hidden_dim == 32);
  CHECK(c.filter == FilterKind::unnormalized);
  CHECK(c.graphs == 50);
  CHECK(c.node_counts == std::vector<std::size_t>{50, 100});

  const ExperimentConfig full = full_profile();
  CHECK(full.graphs == 200);
  CHECK(full.node_counts.back() == 200);
  CHECK(full.powers_w.back() == 2.0);
}

TEST_CASE("config files and overrides") {
  ExperimentConfig c;
  std::istringstream in(
      "# desk run\n"
      "mode = coded\n"
      "number_of_nodes = 20, 40\n"
      "transmit_data_rate=0.5,1,2  # three points\n"
      "\n"
      "graph_filter = normalized\n"
      "shadowing_std_db = 6\n");
  load_config(c, in);
  CHECK(c.mode == Mode::coded);
  CHECK(c.node_counts == std::vector<std::size_t>{20, 40});
  CHECK(c.rates == std::vector<double>{0.5, 1.0, 2.0});
  CHECK(c.filter == FilterKind::normalized);
  CHECK(c.channel.shadowing_std_db == 6.0);
  apply_assignment(c, "graphs=3");
  apply_assignment(c, "master_seed=17");
  CHECK(c.graphs == 3);
  CHECK(c.master_seed == 17);
  for (const auto& key : config_keys()) CHECK_FALSE(key.empty());
}

TEST_CASE("bad settings name the offending key") {
  ExperimentConfig c;
  CHECK(error_of(c, "nodez=5").find("nodez") != std::string::npos);
  CHECK(error_of(c, "graphs=abc").find("graphs") != std::string::npos);
  CHECK(error_of(c, "graphs=0").find("graphs") != std::string::npos);
  CHECK(error_of(c, "transmit_power_w=0.1,,2").find("transmit_power_w") != std::string::npos);
  CHECK(error_of(c, "graph_filter=laplacian").find("graph_filter") != std::string::npos);
  CHECK(error_of(c, "mode=fast").find("mode") != std::string::npos);
  CHECK(error_of(c, "hidden_state_dimension").find("key=value") != std::string::npos);
  CHECK(error_of(c, "master_seed=").find("master_seed") != std::string::npos);

  ExperimentConfig v;
  v.targets = {1.5};
  CHECK_THROWS_AS(validate(v), ConfigError);
  v = ExperimentConfig{};
  v.rates = {};
  CHECK_THROWS_AS(validate(v), ConfigError);
  CHECK_THROWS_AS(load_config_file(v, "/nonexistent/config.txt"), ConfigError);
}

TEST_CASE("single isolated node") {
  ExperimentConfig cfg;
  cfg.node_counts = {1};
  cfg.graphs = 1;
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.nodes == 1);
    CHECK(r.miss_no_retx == 0.0);
    CHECK(r.miss_retx == 0.0);
    CHECK(r.pct_robust == 1.0);
    CHECK(r.mean_rounds == 1.0);
    CHECK(r.mean_rounds_trad == 1.0);
    CHECK(r.round_ratio == 1.0);
  }
  CHECK(rows[0].mode == Mode::uncoded);
  CHECK(rows[1].mode == Mode::coded);
  CHECK(rows[1].eff_rate.value() == doctest::Approx(1.0));
}

TEST_CASE("row layout and metric ranges") {
  const ExperimentConfig cfg = small_config();
  const auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 2 * 1 + 2 * 2);
  for (const auto& r : rows) {
    CHECK(r.nodes == 4 * 30);
    CHECK(r.graphs == 4);
    for (double rate : {r.miss_no_retx, r.miss_retx, r.pct_robust}) {
      CHECK(rate >= 0.0);
      CHECK(rate <= 1.0);
    }
    CHECK(r.mean_rounds >= 1.0);
    CHECK(r.mean_rounds_link >= 1.0);
    CHECK(r.mean_rounds_link <= r.mean_rounds);
    if (r.mode == Mode::coded) {
      REQUIRE(r.eff_rate.has_value());
      CHECK(*r.eff_rate <= *r.rate);
      CHECK_FALSE(r.target_p.has_value());
      CHECK(r.miss_retx == 0.0);
    } else {
      CHECK(r.target_p.has_value());
      CHECK_FALSE(r.rate.has_value());
      CHECK_FALSE(r.eff_rate.has_value());
    }
  }
}

TEST_CASE("csv header keeps the documented column order") {
  const std::string head =
      "mode,n,p,D,power_w,rate,target_p,seed_count,miss_no_retx,miss_retx,pct_robust,"
      "mean_rounds,mean_rounds_trad,round_ratio,eff_rate,truncated,degenerate";
  CHECK(csv_header().rfind(head, 0) == 0);
  const std::string csv = csv_of(small_config(), 1);
  CHECK(csv.rfind(csv_header() + "\n", 0) == 0);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  const auto columns = std::count(line.begin(), line.end(), ',');
  while (std::getline(lines, line)) CHECK(std::count(line.begin(), line.end(), ',') == columns);
}

TEST_CASE("sweeps are reproducible and independent of the worker count") {
  const ExperimentConfig cfg = small_config();
  const std::string a = csv_of(cfg, 1);
  CHECK(a == csv_of(cfg, 1));
  CHECK(a == csv_of(cfg, 3));
  ExperimentConfig other = cfg;
  other.master_seed += 1;
  CHECK(a != csv_of(other, 1));
}

TEST_CASE("sweep points share instances") {
  // The no-retransmission metrics at one power do not depend on which other
  // points are in the sweep.
  ExperimentConfig a = small_config();
  a.mode = Mode::uncoded;
  a.powers_w = {0.1};
  ExperimentConfig b = a;
  b.powers_w = {2.0, 0.1};
  const auto ra = run_sweep(a);
  const auto rb = run_sweep(b);
  CHECK(ra[0].miss_no_retx == rb[1].miss_no_retx);
  CHECK(ra[0].mean_rounds == rb[1].mean_rounds);
}

TEST_CASE("worker count from the environment") {
  CHECK(workers_from_env() >= 1);
}
