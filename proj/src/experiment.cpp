#include "dgnn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "dgnn/gnn.hpp"

namespace dgnn {

namespace {

constexpr std::uint64_t kGraphTag = 0x47524150ULL;
constexpr std::uint64_t kModelTag = 0x4d4f4445ULL;
constexpr std::uint64_t kFeatureTag = 0x46454154ULL;
constexpr std::uint64_t kLinkTag = 0x4c494e4bULL;

constexpr double kDegenerateMargin = 1e-12;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view key, std::string_view value) {
  std::vector<std::string> items;
  std::string cur;
  for (char c : value) {
    if (c == ',') {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  items.push_back(trim(cur));
  for (const auto& item : items) {
    if (item.empty()) throw ConfigError("config key '" + std::string(key) + "': empty list entry");
  }
  return items;
}

double parse_real(std::string_view key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("config key '" + std::string(key) + "': '" + text + "' is not a number");
}

long long parse_integer(std::string_view key, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("config key '" + std::string(key) + "': '" + text + "' is not an integer");
  }
  return v;
}

template <class T, class Parse>
std::vector<T> parse_list(std::string_view key, std::string_view value, Parse parse) {
  std::vector<T> out;
  for (const auto& item : split_list(key, value)) out.push_back(static_cast<T>(parse(key, item)));
  return out;
}

// Per (sweep point, graph) tallies; summed in graph order afterwards.
struct Tally {
  std::size_t nodes = 0;
  std::size_t miss_initial = 0;
  std::size_t robust_initial = 0;
  std::size_t completed = 0;
  std::size_t miss_final = 0;
  double link_rounds = 0.0;
  double node_rounds = 0.0;
  std::size_t completed_trad = 0;
  double link_rounds_trad = 0.0;
  double node_rounds_trad = 0.0;
  std::size_t truncated = 0;
  std::size_t truncated_trad = 0;
  std::size_t degenerate = 0;

  Tally& operator+=(const Tally& o) {
    nodes += o.nodes;
    miss_initial += o.miss_initial;
    robust_initial += o.robust_initial;
    completed += o.completed;
    miss_final += o.miss_final;
    link_rounds += o.link_rounds;
    node_rounds += o.node_rounds;
    completed_trad += o.completed_trad;
    link_rounds_trad += o.link_rounds_trad;
    node_rounds_trad += o.node_rounds_trad;
    truncated += o.truncated;
    truncated_trad += o.truncated_trad;
    degenerate += o.degenerate;
    return *this;
  }
};

struct SweepPoint {
  Mode mode;
  double power_w;
  double knob;  // target probability (uncoded) or rate (coded)
};

std::vector<Tally> run_graph(const ExperimentConfig& cfg, std::size_t n, int p, int graph_index,
                             const std::vector<SweepPoint>& points) {
  const auto g = static_cast<std::uint64_t>(graph_index);
  Rng graph_rng = substream(cfg.master_seed, kGraphTag, n, g);
  const Graph graph = generate_rgg(n, cfg.side_m, cfg.radius_m, graph_rng);
  Rng model_rng = substream(cfg.master_seed, kModelTag, n, p, cfg.hidden_dim, g);
  const GnnModel model = init_model(static_cast<std::size_t>(p),
                                    static_cast<std::size_t>(cfg.hidden_dim), model_rng);
  Rng feature_rng = substream(cfg.master_seed, kFeatureTag, n, p, g);
  const BitMatrix features = init_features(n, static_cast<std::size_t>(p), feature_rng);
  const GraphFilter filter = build_filter(graph, cfg.filter);
  const CentralizedForward truth = forward_centralized(filter, features, model);
  const Scenario scenario{graph, filter, model, features};
  const std::uint64_t link_seed = stream_seed(cfg.master_seed, kLinkTag, n, g);

  std::vector<Tally> tallies(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const SweepPoint& pt = points[k];
    ChannelParams channel = cfg.channel;
    channel.tx_power_w = pt.power_w;
    const FadingLinkSampler links(graph, channel, link_seed);
    Tally& t = tallies[k];
    for (std::size_t v = 0; v < n; ++v) {
      NodeRun run;
      NodeRun trad;
      if (pt.mode == Mode::uncoded) {
        run = run_uncoded_node(v, scenario, links, pt.knob, cfg.max_rounds);
        trad = run_traditional_uncoded(v, scenario, links, cfg.traditional_ber_threshold,
                                       cfg.max_rounds);
      } else {
        run = run_coded_node(v, scenario, links, pt.knob, cfg.max_rounds);
        trad = run_traditional_coded(v, scenario, links, pt.knob, cfg.max_rounds);
      }
      const Label expected = truth.labels[v];
      const bool degenerate = std::abs(truth.margins[v]) < kDegenerateMargin || run.no_radius;
      if (pt.mode == Mode::coded && !run.truncated && !degenerate && run.label_final != expected) {
        throw std::logic_error("certified coded label differs from ground truth at node " +
                               std::to_string(v) + " of graph " + std::to_string(graph_index));
      }
      ++t.nodes;
      t.degenerate += degenerate ? 1 : 0;
      t.miss_initial += run.label_initial != expected ? 1 : 0;
      t.robust_initial += run.robust_initial ? 1 : 0;
      if (run.truncated) {
        ++t.truncated;
      } else {
        ++t.completed;
        t.miss_final += run.label_final != expected ? 1 : 0;
        t.link_rounds += run.mean_link_rounds;
        t.node_rounds += run.total_rounds;
      }
      if (trad.truncated) {
        ++t.truncated_trad;
      } else {
        ++t.completed_trad;
        t.link_rounds_trad += trad.mean_link_rounds;
        t.node_rounds_trad += trad.total_rounds;
      }
    }
  }
  return tallies;
}

double ratio(double num, std::size_t den) {
  return den == 0 ? 0.0 : num / static_cast<double>(den);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::uncoded: return "uncoded";
    case Mode::coded: return "coded";
    case Mode::both: return "both";
  }
  return "unknown";
}

ExperimentConfig full_profile() {
  ExperimentConfig c;
  c.graphs = 200;
  c.node_counts = {50, 100, 150, 200};
  c.powers_w = {0.1, 0.5, 1.0, 1.5, 2.0};
  return c;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "mode",
      "number_of_nodes",
      "square_area_m",
      "communication_radius_m",
      "bandwidth_hz",
      "noise_spectral_density_dbm_hz",
      "path_loss_intercept_db",
      "path_loss_slope_db",
      "shadowing_std_db",
      "target_robustness_probability",
      "transmit_data_rate",
      "transmit_power_w",
      "node_feature_dimension",
      "hidden_state_dimension",
      "graph_filter",
      "graphs",
      "master_seed",
      "max_rounds",
      "oracle_cap",
      "traditional_ber_threshold",
  };
  return keys;
}

void apply_setting(ExperimentConfig& c, std::string_view key_in, std::string_view value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (value.empty()) throw ConfigError("config key '" + key + "': missing value");
  auto positive_int = [&](long long v) {
    if (v <= 0) throw ConfigError("config key '" + key + "': must be positive");
    return v;
  };

  if (key == "mode") {
    if (value == "uncoded") c.mode = Mode::uncoded;
    else if (value == "coded") c.mode = Mode::coded;
    else if (value == "both") c.mode = Mode::both;
    else throw ConfigError("config key 'mode': expected uncoded, coded or both");
  } else if (key == "number_of_nodes") {
    c.node_counts = parse_list<std::size_t>(key, value, [&](auto k, const auto& s) {
      return positive_int(parse_integer(k, s));
    });
  } else if (key == "square_area_m") {
    c.side_m = parse_real(key, value);
  } else if (key == "communication_radius_m") {
    c.radius_m = parse_real(key, value);
  } else if (key == "bandwidth_hz") {
    c.channel.bandwidth_hz = parse_real(key, value);
  } else if (key == "noise_spectral_density_dbm_hz") {
    c.channel.noise_dbm_per_hz = parse_real(key, value);
  } else if (key == "path_loss_intercept_db") {
    c.channel.pathloss_intercept_db = parse_real(key, value);
  } else if (key == "path_loss_slope_db") {
    c.channel.pathloss_slope_db = parse_real(key, value);
  } else if (key == "shadowing_std_db") {
    c.channel.shadowing_std_db = parse_real(key, value);
  } else if (key == "target_robustness_probability") {
    c.targets = parse_list<double>(key, value, parse_real);
  } else if (key == "transmit_data_rate") {
    c.rates = parse_list<double>(key, value, parse_real);
  } else if (key == "transmit_power_w") {
    c.powers_w = parse_list<double>(key, value, parse_real);
  } else if (key == "node_feature_dimension") {
    c.feature_dims = parse_list<int>(key, value, [&](auto k, const auto& s) {
      return positive_int(parse_integer(k, s));
    });
  } else if (key == "hidden_state_dimension") {
    c.hidden_dim = static_cast<int>(positive_int(parse_integer(key, value)));
  } else if (key == "graph_filter") {
    try {
      c.filter = parse_filter_kind(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config key 'graph_filter': " + std::string(e.what()));
    }
  } else if (key == "graphs") {
    c.graphs = static_cast<int>(positive_int(parse_integer(key, value)));
  } else if (key == "master_seed") {
    const long long s = parse_integer(key, value);
    if (s < 0) throw ConfigError("config key 'master_seed': must be non-negative");
    c.master_seed = static_cast<std::uint64_t>(s);
  } else if (key == "max_rounds") {
    c.max_rounds = static_cast<int>(positive_int(parse_integer(key, value)));
  } else if (key == "oracle_cap") {
    c.oracle_cap = static_cast<std::uint64_t>(positive_int(parse_integer(key, value)));
  } else if (key == "traditional_ber_threshold") {
    c.traditional_ber_threshold = parse_real(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void apply_assignment(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("setting '" + std::string(assignment) + "' is not of the form key=value");
  }
  apply_setting(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void load_config(ExperimentConfig& config, std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    apply_assignment(config, line);
  }
}

void load_config_file(ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  load_config(config, in);
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (c.node_counts.empty()) fail("number_of_nodes", "list is empty");
  if (c.feature_dims.empty()) fail("node_feature_dimension", "list is empty");
  if (c.powers_w.empty()) fail("transmit_power_w", "list is empty");
  if (c.targets.empty()) fail("target_robustness_probability", "list is empty");
  if (c.rates.empty()) fail("transmit_data_rate", "list is empty");
  if (!(c.side_m > 0.0)) fail("square_area_m", "must be positive");
  if (c.radius_m < 0.0) fail("communication_radius_m", "must be non-negative");
  if (!(c.channel.bandwidth_hz > 0.0)) fail("bandwidth_hz", "must be positive");
  if (c.channel.shadowing_std_db < 0.0) fail("shadowing_std_db", "must be non-negative");
  for (double pw : c.powers_w) {
    if (pw < 0.0) fail("transmit_power_w", "must be non-negative");
  }
  for (double t : c.targets) {
    if (t < 0.0 || t > 1.0) fail("target_robustness_probability", "must lie in [0, 1]");
  }
  for (double r : c.rates) {
    if (!(r > 0.0)) fail("transmit_data_rate", "must be positive");
  }
  if (c.traditional_ber_threshold < 0.0 || c.traditional_ber_threshold > 0.5) {
    fail("traditional_ber_threshold", "must lie in [0, 0.5]");
  }
}

int workers_from_env() {
  if (const char* env = std::getenv("DGNN_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

std::vector<MetricsRow> run_sweep(const ExperimentConfig& cfg, int workers) {
  validate(cfg);
  std::vector<Mode> modes;
  if (cfg.mode != Mode::coded) modes.push_back(Mode::uncoded);
  if (cfg.mode != Mode::uncoded) modes.push_back(Mode::coded);

  std::vector<SweepPoint> points;
  for (Mode m : modes) {
    for (double pw : cfg.powers_w) {
      for (double knob : (m == Mode::uncoded ? cfg.targets : cfg.rates)) {
        points.push_back({m, pw, knob});
      }
    }
  }

  std::vector<MetricsRow> rows;
  for (std::size_t n : cfg.node_counts) {
    for (int p : cfg.feature_dims) {
      std::vector<std::vector<Tally>> per_graph(static_cast<std::size_t>(cfg.graphs));
      std::atomic<int> next{0};
      std::exception_ptr failure;
      std::mutex failure_mutex;
      auto work = [&] {
        for (int g = next++; g < cfg.graphs; g = next++) {
          try {
            per_graph[static_cast<std::size_t>(g)] = run_graph(cfg, n, p, g, points);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      };
      const int threads = std::clamp(workers, 1, cfg.graphs);
      if (threads == 1) {
        work();
      } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(work);
      }
      if (failure) std::rethrow_exception(failure);

      for (std::size_t k = 0; k < points.size(); ++k) {
        Tally total;
        for (const auto& g : per_graph) total += g[k];
        const SweepPoint& pt = points[k];
        MetricsRow row;
        row.mode = pt.mode;
        row.n = n;
        row.p = p;
        row.hidden = cfg.hidden_dim;
        row.power_w = pt.power_w;
        if (pt.mode == Mode::uncoded) row.target_p = pt.knob;
        else row.rate = pt.knob;
        row.graphs = cfg.graphs;
        row.nodes = total.nodes;
        row.miss_no_retx = ratio(static_cast<double>(total.miss_initial), total.nodes);
        row.miss_retx = ratio(static_cast<double>(total.miss_final), total.completed);
        row.pct_robust = ratio(static_cast<double>(total.robust_initial), total.nodes);
        row.mean_rounds = ratio(total.node_rounds, total.completed);
        row.mean_rounds_trad = ratio(total.node_rounds_trad, total.completed_trad);
        row.round_ratio = row.mean_rounds > 0.0 ? row.mean_rounds_trad / row.mean_rounds : 0.0;
        if (pt.mode == Mode::coded && row.mean_rounds > 0.0) row.eff_rate = pt.knob / row.mean_rounds;
        row.truncated = total.truncated;
        row.degenerate = total.degenerate;
        row.mean_rounds_link = ratio(total.link_rounds, total.completed);
        row.mean_rounds_trad_link = ratio(total.link_rounds_trad, total.completed_trad);
        row.truncated_trad = total.truncated_trad;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::string csv_header() {
  return "mode,n,p,D,power_w,rate,target_p,seed_count,miss_no_retx,miss_retx,pct_robust,"
         "mean_rounds,mean_rounds_trad,round_ratio,eff_rate,truncated,degenerate,"
         "mean_rounds_link,mean_rounds_trad_link,truncated_trad,nodes";
}

void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << csv_header() << '\n';
  for (const auto& r : rows) {
    out << to_string(r.mode) << ',' << r.n << ',' << r.p << ',' << r.hidden << ',' << fmt(r.power_w)
        << ',' << fmt(r.rate) << ',' << fmt(r.target_p) << ',' << r.graphs << ','
        << fmt(r.miss_no_retx) << ',' << fmt(r.miss_retx) << ',' << fmt(r.pct_robust) << ','
        << fmt(r.mean_rounds) << ',' << fmt(r.mean_rounds_trad) << ',' << fmt(r.round_ratio) << ','
        << fmt(r.eff_rate) << ',' << r.truncated << ',' << r.degenerate << ','
        << fmt(r.mean_rounds_link) << ',' << fmt(r.mean_rounds_trad_link) << ','
        << r.truncated_trad << ',' << r.nodes << '\n';
  }
}

}  // namespace dgnn
