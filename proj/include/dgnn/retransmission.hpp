#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dgnn/channel.hpp"
#include "dgnn/gnn.hpp"
#include "dgnn/graph.hpp"
#include "dgnn/types.hpp"

namespace dgnn {

// Source of per-transmission randomness for the directed link u -> v.
// Round numbers start at 1. Implementations must be pure functions of
// (v, u, round) so that competing mechanisms see the same channel.
class LinkSampler {
 public:
  virtual ~LinkSampler() = default;
  virtual double sinr(std::size_t v, std::size_t u, int round) const = 0;
  virtual Rng bit_stream(std::size_t v, std::size_t u, int round) const = 0;
};

// Path loss + per-link lognormal shadowing + block Rayleigh fading.
// Shadowing is keyed by the unordered pair; fading and bit flips by the
// directed link and round.
class FadingLinkSampler final : public LinkSampler {
 public:
  FadingLinkSampler(const Graph& graph, ChannelParams params, std::uint64_t seed);

  double sinr(std::size_t v, std::size_t u, int round) const override;
  Rng bit_stream(std::size_t v, std::size_t u, int round) const override;

  double shadowing_db(std::size_t v, std::size_t u) const;
  LinkBudget budget(std::size_t v, std::size_t u) const;

 private:
  const Graph& graph_;
  ChannelParams params_;
  std::uint64_t seed_;
};

// Graph, model and ground-truth features shared by every node run.
struct Scenario {
  const Graph& graph;
  const GraphFilter& filter;
  const GnnModel& model;
  const BitMatrix& features;
};

inline constexpr int kDefaultMaxRounds = 64;
inline constexpr double kTraditionalBerThreshold = 3e-4;

struct NodeRun {
  std::size_t node = 0;
  Label label_initial = Label::positive;
  Label label_final = Label::positive;
  std::vector<int> rounds_per_neighbor;
  int total_rounds = 1;           // symbol blocks elapsed: max over neighbors
  double mean_link_rounds = 1.0;  // mean over neighbors
  bool robust_initial = true;
  double metric = 1.0;  // robustness probability (uncoded) or certificate value (coded)
  bool truncated = false;
  bool no_radius = false;  // certificate failed even at q = 0 (zero margin)
  int iterations = 0;
};

// Robustness-probability driven retransmission over uncoded BPSK links.
NodeRun run_uncoded_node(std::size_t v, const Scenario& scenario, const LinkSampler& links,
                         double p_target, int max_rounds = kDefaultMaxRounds);

// Certificate driven retransmission over coded links with outage.
NodeRun run_coded_node(std::size_t v, const Scenario& scenario, const LinkSampler& links,
                       double rate, int max_rounds = kDefaultMaxRounds);

// Baseline: retransmit every neighbor whose BER exceeds a fixed threshold.
NodeRun run_traditional_uncoded(std::size_t v, const Scenario& scenario, const LinkSampler& links,
                                double ber_threshold = kTraditionalBerThreshold,
                                int max_rounds = kDefaultMaxRounds);

// Baseline: retransmit until no neighbor is in outage.
NodeRun run_traditional_coded(std::size_t v, const Scenario& scenario, const LinkSampler& links,
                              double rate, int max_rounds = kDefaultMaxRounds);

}  // namespace dgnn
