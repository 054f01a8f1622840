#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dgnn/certify.hpp"
#include "dgnn/channel.hpp"
#include "dgnn/graph.hpp"
#include "dgnn/retransmission.hpp"

namespace dgnn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { uncoded, coded, both };

std::string_view to_string(Mode mode);

// Sweep description. List-valued keys span a Cartesian product; the
// instances (graph, model, features, channel draws) depend only on the
// master seed, node count, feature/hidden dimension and graph index, so
// every power / target / rate point reuses the same instances.
struct ExperimentConfig {
  Mode mode = Mode::both;
  std::vector<std::size_t> node_counts{50, 100};
  std::vector<int> feature_dims{32};
  int hidden_dim = 32;
  double side_m = 2000.0;
  double radius_m = 500.0;
  ChannelParams channel;  // tx_power_w is overridden per sweep point
  std::vector<double> powers_w{0.1};
  std::vector<double> targets{0.8};
  std::vector<double> rates{1.0};
  int graphs = 50;
  std::uint64_t master_seed = 20220601;
  int max_rounds = kDefaultMaxRounds;
  FilterKind filter = FilterKind::unnormalized;
  std::uint64_t oracle_cap = kDefaultOracleCap;
  double traditional_ber_threshold = kTraditionalBerThreshold;
};

// 200 graphs, N up to 200, P up to 2 W.
ExperimentConfig full_profile();

// Recognized keys, in documentation order.
const std::vector<std::string>& config_keys();

// Applies one key=value setting; unknown keys and bad values throw
// ConfigError naming the key.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);
void apply_assignment(ExperimentConfig& config, std::string_view assignment);

// Flat key=value file; '#' starts a comment.
void load_config(ExperimentConfig& config, std::istream& in);
void load_config_file(ExperimentConfig& config, const std::string& path);

void validate(const ExperimentConfig& config);

struct MetricsRow {
  Mode mode = Mode::uncoded;
  std::size_t n = 0;
  int p = 0;
  int hidden = 0;
  double power_w = 0.0;
  std::optional<double> rate;      // coded only
  std::optional<double> target_p;  // uncoded only
  int graphs = 0;
  std::size_t nodes = 0;
  double miss_no_retx = 0.0;
  double miss_retx = 0.0;
  double pct_robust = 0.0;
  double mean_rounds = 0.0;  // symbol blocks elapsed per node (max over its links)
  double mean_rounds_trad = 0.0;
  double round_ratio = 0.0;
  std::optional<double> eff_rate;  // coded: rate / mean_rounds
  std::size_t truncated = 0;
  std::size_t degenerate = 0;
  double mean_rounds_link = 0.0;  // per node: mean over its links
  double mean_rounds_trad_link = 0.0;
  std::size_t truncated_trad = 0;
};

// Worker count from DGNN_WORKERS (default 1).
int workers_from_env();

std::vector<MetricsRow> run_sweep(const ExperimentConfig& config, int workers = 1);

std::string csv_header();
void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

}  // namespace dgnn
